use serde::{Deserialize, Serialize};

use crate::mesh::{TriMesh, Vec3};

/// One real value per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, v: usize) -> f64 {
        self.0[v]
    }
}

/// Discrete mean curvature from the cotangent Laplacian with mixed Voronoi
/// areas: `H = ±‖Δx‖ / 2`.
///
/// The sign follows the colormap convention, low = convex: `H < 0` where the
/// Laplacian vector points against the outward vertex normal (a sphere has
/// `H = −1/r`), `H > 0` in concave regions. Boundary vertices take the mean
/// of their interior neighbors; isolated vertices get 0.
pub fn mean_curvature(mesh: &TriMesh) -> ScalarField {
    let n = mesh.num_vertices();
    let mut laplace = vec![Vec3::zeros(); n];
    let mut area = vec![0.0f64; n];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let p = mesh.corners(fi);
        let twice_area = mesh.face_cross(fi).norm();
        if twice_area == 0.0 {
            continue;
        }
        // cot of the angle at corner k
        let mut cot = [0.0; 3];
        for k in 0..3 {
            let u = p[(k + 1) % 3] - p[k];
            let w = p[(k + 2) % 3] - p[k];
            cot[k] = u.dot(&w) / twice_area;
        }
        for k in 0..3 {
            let (i, j, l) = (k, (k + 1) % 3, (k + 2) % 3);
            // edge (i, j) is opposite corner l
            let w = cot[l];
            let d = p[j] - p[i];
            laplace[f[i]] += w * d;
            laplace[f[j]] -= w * d;
        }
        let obtuse = (0..3).find(|&k| cot[k] < 0.0);
        let tri_area = 0.5 * twice_area;
        for k in 0..3 {
            let a = match obtuse {
                None => {
                    let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                    ((p[j] - p[k]).norm_squared() * cot[l] + (p[l] - p[k]).norm_squared() * cot[j]) / 8.0
                }
                Some(o) if o == k => tri_area / 2.0,
                Some(_) => tri_area / 4.0,
            };
            area[f[k]] += a;
        }
    }
    let normals = mesh.vertex_normals();
    let topo = mesh.topology();
    let on_boundary: Vec<bool> = (0..n)
        .map(|v| topo.neighbors(v).iter().any(|&w| topo.is_boundary_edge(v, w)))
        .collect();
    let mut h = vec![0.0; n];
    let mut isolated = 0;
    for v in 0..n {
        if mesh.vertex_faces(v).is_empty() {
            isolated += 1;
            continue;
        }
        if on_boundary[v] || area[v] <= 0.0 {
            continue;
        }
        // ½ Σ (cot α + cot β)(x_j − x_i) accumulated above; divide by 2A.
        let k = laplace[v] / (2.0 * area[v]);
        let magnitude = 0.5 * k.norm();
        h[v] = if k.dot(&normals[v]) < 0.0 {
            -magnitude
        } else {
            magnitude
        };
    }
    if isolated > 0 {
        log::warn!("mean curvature: {isolated} isolated vertices set to 0");
    }
    for v in 0..n {
        if on_boundary[v] {
            let interior: Vec<f64> = topo
                .neighbors(v)
                .iter()
                .filter(|&&w| !on_boundary[w])
                .map(|&w| h[w])
                .collect();
            h[v] = if interior.is_empty() {
                0.0
            } else {
                interior.iter().sum::<f64>() / interior.len() as f64
            };
        }
    }
    ScalarField(h)
}

/// Winsorizing affine map from raw curvature to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRange {
    pub lo: f64,
    pub hi: f64,
}

impl CurvatureRange {
    /// Clamp bounds at the `p` and `1 − p` quantiles (nearest rank).
    pub fn fit(values: &[f64], clamp_percentile: f64) -> Self {
        assert!(!values.is_empty(), "cannot fit a range to an empty field");
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let p = clamp_percentile.clamp(0.0, 0.5);
        let last = (sorted.len() - 1) as f64;
        let lo = sorted[(p * last).round() as usize];
        let hi = sorted[((1.0 - p) * last).round() as usize];
        Self { lo, hi }
    }

    pub fn apply(&self, value: f64) -> f64 {
        if !(self.hi > self.lo) {
            return 0.5;
        }
        (value.clamp(self.lo, self.hi) - self.lo) / (self.hi - self.lo)
    }

    pub fn apply_field(&self, field: &ScalarField) -> ScalarField {
        ScalarField(field.0.iter().map(|&v| self.apply(v)).collect())
    }
}

/// Maps a field to `[0, 1]` after clamping its tails. A constant field maps
/// to 0.5.
pub fn normalize_curvature(field: &ScalarField, clamp_percentile: f64) -> ScalarField {
    CurvatureRange::fit(&field.0, clamp_percentile).apply_field(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn flat_grid_interior_is_zero() {
        let g = primitives::grid(8, 8, 0.1);
        let h = mean_curvature(&g);
        for v in 0..g.num_vertices() {
            assert!(h.get(v).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_sphere_is_convex_with_unit_magnitude() {
        let m = primitives::icosphere(4);
        let h = mean_curvature(&m);
        for &v in h.values() {
            assert!(v < 0.0);
            assert!((v.abs() - 1.0).abs() < 0.05, "H = {v}");
        }
    }

    #[test]
    fn scaling_divides_curvature() {
        let m = primitives::bumpy_sphere(3, 0.15, 2.5, 0.4);
        let s = 3.7;
        let big = m.with_positions(m.positions().iter().map(|p| p * s).collect());
        let (a, b) = (mean_curvature(&m), mean_curvature(&big));
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x / s - y).abs() <= 1e-6 * x.abs().max(1e-12), "{x} {y}");
        }
    }

    #[test]
    fn boundary_vertices_copy_interior_mean() {
        let m = primitives::icosphere(3);
        let keep: Vec<bool> = (0..m.num_faces())
            .map(|f| m.corners(f).iter().all(|p| p.z < 0.5))
            .collect();
        let (cut, _) = m.retain_faces(&keep);
        let h = mean_curvature(&cut);
        let topo = cut.topology();
        for v in 0..cut.num_vertices() {
            let boundary = |x: usize| topo.neighbors(x).iter().any(|&w| topo.is_boundary_edge(x, w));
            if boundary(v) {
                let inner: Vec<f64> = topo
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| !boundary(w))
                    .map(|&w| h.get(w))
                    .collect();
                let mean = inner.iter().sum::<f64>() / inner.len() as f64;
                assert!((h.get(v) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_cases() {
        let c = normalize_curvature(&ScalarField(vec![2.0; 7]), 0.02);
        assert!(c.values().iter().all(|&v| v == 0.5));
        let l = normalize_curvature(&ScalarField(vec![-1.0, 0.0, 1.0]), 0.0);
        assert_eq!(l.values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalization_preserves_order_inside_clamps() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let raw: Vec<f64> = (0..500).map(|_| normal.sample(&mut rng)).collect();
        let out = normalize_curvature(&ScalarField(raw.clone()), 0.02);
        let min = out.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = out.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((min, max), (0.0, 1.0));
        // Sort-based oracle: ranks agree wherever neither value is clamped.
        let mut idx: Vec<usize> = (0..raw.len()).collect();
        idx.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
        for w in idx.windows(2) {
            let (a, b) = (out.get(w[0]), out.get(w[1]));
            assert!(a <= b);
            if a > 0.0 && b < 1.0 {
                assert!(a < b);
            }
        }
    }
}
