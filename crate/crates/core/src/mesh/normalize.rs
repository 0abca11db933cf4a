use serde::{Deserialize, Serialize};

use super::{TriMesh, Vec3};
use crate::{Error, Result};

/// `p ↦ (p + translation) · scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub translation: [f64; 3],
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self {
            translation: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p + Vec3::from(self.translation)) * self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p / self.scale - Vec3::from(self.translation)
    }

    pub fn apply_mesh(&self, mesh: &TriMesh) -> TriMesh {
        mesh.with_positions(mesh.positions().iter().map(|p| self.apply(p)).collect())
    }

    pub fn invert_mesh(&self, mesh: &TriMesh) -> TriMesh {
        mesh.with_positions(mesh.positions().iter().map(|p| self.invert(p)).collect())
    }
}

/// Centers the bounding box at the origin and scales its diagonal to 1.
pub fn normalize(mesh: &TriMesh) -> Result<(TriMesh, NormalizationTransform)> {
    let (lo, hi) = mesh
        .bounding_box()
        .ok_or_else(|| Error::Degenerate("cannot normalize an empty mesh".into()))?;
    let diagonal = (hi - lo).norm();
    if !(diagonal > 0.0) {
        return Err(Error::Degenerate("all vertices coincide".into()));
    }
    let center = (lo + hi) * 0.5;
    let t = NormalizationTransform {
        translation: (-center).into(),
        scale: 1.0 / diagonal,
    };
    Ok((t.apply_mesh(mesh), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;
    use proptest::prelude::*;

    #[test]
    fn unit_cube_scales_by_inverse_sqrt3() {
        let (m, t) = normalize(&primitives::cube()).unwrap();
        assert!((t.scale - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((m.bbox_diagonal() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_mesh_is_a_fixed_point() {
        let (m, _) = normalize(&primitives::icosphere(2)).unwrap();
        let (_, t) = normalize(&m).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-9);
        assert!(Vec3::from(t.translation).norm() < 1e-9);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let p = vec![Vec3::new(1.0, 1.0, 1.0); 3];
        let m = TriMesh::new(p, vec![[0, 1, 2]]).unwrap();
        assert!(matches!(normalize(&m), Err(Error::Degenerate(_))));
    }

    proptest! {
        #[test]
        fn round_trip_restores_coordinates(
            pts in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 3..40),
        ) {
            let positions: Vec<Vec3> = pts.iter().map(|p| Vec3::from(*p)).collect();
            let faces = (0..positions.len() - 2).map(|i| [i, i + 1, i + 2]).collect();
            let mesh = TriMesh::new(positions, faces).unwrap();
            prop_assume!(mesh.bbox_diagonal() > 1e-6);
            let (n, t) = normalize(&mesh).unwrap();
            prop_assert!((n.bbox_diagonal() - 1.0).abs() < 1e-9);
            let back = t.invert_mesh(&n);
            let scale = mesh.bbox_diagonal().max(1.0);
            for (a, b) in back.positions().iter().zip(mesh.positions()) {
                prop_assert!((a - b).norm() <= 1e-9 * scale);
            }
        }
    }
}
