use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::Patch;
use crate::linalg::TripletBuilder;
use crate::mesh::boundary_loops;
use crate::{Error, Result};

/// Which edge weights the interior solve ended up using.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingWeights {
    Cotangent,
    Uniform,
}

/// A disk patch with its planar embedding.
#[derive(Debug, Clone)]
pub struct PatchChart {
    pub patch: Patch,
    /// Per local vertex, inside `[0.05, 0.95]²`.
    pub uv: Vec<[f64; 2]>,
    /// Side length in pixels of images drawn from this chart.
    pub resolution: u32,
    pub weights: EmbeddingWeights,
}

const MARGIN: f64 = 0.05;

impl PatchChart {
    pub fn signed_uv_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.patch.mesh.faces()[f].map(|v| self.uv[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn flipped_triangles(&self) -> usize {
        (0..self.patch.mesh.num_faces())
            .filter(|&f| self.signed_uv_area(f) < 0.0)
            .count()
    }
}

/// Harmonic disk embedding. The boundary goes to a circle by cumulative edge
/// length; interior vertices solve the weighted Laplace equation. Cotangent
/// weights are tried first; if any is non-positive or the result folds, the
/// uniform graph Laplacian is used, which cannot fold on a convex boundary.
pub fn parametrize(patch: Patch, resolution: u32) -> Result<PatchChart> {
    if !patch.is_disk() {
        return Err(Error::Topology("parametrization needs a disk patch".into()));
    }
    let mesh = &patch.mesh;
    let boundary = boundary_loops(mesh).remove(0);
    let n = mesh.num_vertices();
    let mut uv = vec![[0.0, 0.0]; n];
    let lengths: Vec<f64> = boundary
        .edges()
        .map(|(a, b)| (mesh.position(a) - mesh.position(b)).norm())
        .collect();
    let perimeter: f64 = lengths.iter().sum();
    if !(perimeter > 0.0) {
        return Err(Error::Degenerate("patch boundary has zero length".into()));
    }
    let mut is_boundary = vec![false; n];
    let mut arc = 0.0;
    for (i, &v) in boundary.vertices.iter().enumerate() {
        let theta = TAU * arc / perimeter;
        uv[v] = [theta.cos(), theta.sin()];
        is_boundary[v] = true;
        arc += lengths[i];
    }

    let attempt = |weights: EmbeddingWeights| -> Result<Vec<[f64; 2]>> {
        let w = edge_weights(&patch, weights)?;
        solve_interior(&patch, &uv, &is_boundary, &w)
    };
    let mut chosen = EmbeddingWeights::Cotangent;
    let mut disk = match attempt(EmbeddingWeights::Cotangent) {
        Ok(d) if count_flips(&patch, &d) == 0 => d,
        _ => {
            chosen = EmbeddingWeights::Uniform;
            attempt(EmbeddingWeights::Uniform)?
        }
    };
    if count_flips(&patch, &disk) > 0 {
        return Err(Error::Solver("embedding folds even with uniform weights".into()));
    }
    for p in &mut disk {
        *p = [0.5 + (0.5 - MARGIN) * p[0], 0.5 + (0.5 - MARGIN) * p[1]];
    }
    Ok(PatchChart {
        patch,
        uv: disk,
        resolution,
        weights: chosen,
    })
}

fn count_flips(patch: &Patch, uv: &[[f64; 2]]) -> usize {
    patch
        .mesh
        .faces()
        .iter()
        .filter(|f| {
            let [a, b, c] = f.map(|v| uv[v]);
            (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) < 0.0
        })
        .count()
}

/// Symmetric weight per edge, in the order of `topology().edges()`.
fn edge_weights(patch: &Patch, kind: EmbeddingWeights) -> Result<Vec<f64>> {
    let mesh = &patch.mesh;
    let topo = mesh.topology();
    match kind {
        EmbeddingWeights::Uniform => Ok(vec![1.0; topo.num_edges()]),
        EmbeddingWeights::Cotangent => {
            let mut out = Vec::with_capacity(topo.num_edges());
            for e in topo.edges() {
                let [a, b] = e.vertices;
                let mut w = 0.0;
                for &f in &e.faces {
                    let c = mesh.faces()[f].into_iter().find(|&x| x != a && x != b).unwrap();
                    let (pa, pb, pc) = (mesh.position(a), mesh.position(b), mesh.position(c));
                    let (u, v) = (pa - pc, pb - pc);
                    let cross = u.cross(&v).norm();
                    if cross == 0.0 {
                        return Err(Error::Degenerate("zero-area triangle in patch".into()));
                    }
                    w += 0.5 * u.dot(&v) / cross;
                }
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::Solver("non-positive cotangent weight".into()));
                }
                out.push(w);
            }
            Ok(out)
        }
    }
}

fn solve_interior(
    patch: &super::Patch,
    boundary_uv: &[[f64; 2]],
    is_boundary: &[bool],
    weights: &[f64],
) -> Result<Vec<[f64; 2]>> {
    let mesh = &patch.mesh;
    let n = mesh.num_vertices();
    let mut index = vec![usize::MAX; n];
    let mut interior = 0;
    for v in 0..n {
        if !is_boundary[v] {
            index[v] = interior;
            interior += 1;
        }
    }
    let mut uv = boundary_uv.to_vec();
    if interior == 0 {
        return Ok(uv);
    }
    let mut a = TripletBuilder::new(interior);
    let mut rhs = vec![[0.0; 2]; interior];
    for (e, &w) in mesh.topology().edges().iter().zip(weights) {
        let [p, q] = e.vertices;
        for (i, j) in [(p, q), (q, p)] {
            if is_boundary[i] {
                continue;
            }
            a.add(index[i], index[i], w);
            if is_boundary[j] {
                rhs[index[i]][0] += w * boundary_uv[j][0];
                rhs[index[i]][1] += w * boundary_uv[j][1];
            } else {
                a.add(index[i], index[j], -w);
            }
        }
    }
    let solution = a.build().solve_columns(&rhs, &vec![[0.0; 2]; interior])?;
    for v in 0..n {
        if !is_boundary[v] {
            uv[v] = solution[index[v]];
        }
    }
    Ok(uv)
}
