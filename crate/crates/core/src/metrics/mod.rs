//! Surface distances between meshes and image similarity scores.

mod bvh;
mod image;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::seeded_rng;
use crate::mesh::{TriMesh, Vec3};
use crate::{Error, Result};

pub use self::image::{image_metrics, ssim, ImageMetricResult};
pub use bvh::{closest_point_on_triangle, ClosestPoint, TriangleBvh};

/// Default surface samples per squared bounding-box diagonal of the truth.
pub const DEFAULT_SAMPLE_DENSITY: f64 = 20_000.0;

/// Sampled symmetric distance. `max` and `mean` are fractions of the truth
/// bounding-box diagonal; the `_abs` fields are in mesh units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDistanceResult {
    pub max: f64,
    pub mean: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub diagonal: f64,
    pub samples: usize,
    /// Per candidate vertex, signed by the side of the nearest truth face,
    /// as a fraction of the diagonal.
    pub signed: Vec<f64>,
}

/// Row of an evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub method: String,
    pub max: f64,
    pub mean: f64,
}

/// Area-weighted uniform surface samples plus every vertex.
fn surface_samples(mesh: &TriMesh, count: usize, seed: u64, stream: u64) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = mesh.positions().to_vec();
    let areas: Vec<f64> = (0..mesh.num_faces()).map(|f| mesh.face_area(f)).collect();
    let total: f64 = areas.iter().sum();
    if total <= 0.0 || count == 0 {
        return out;
    }
    let mut cdf = Vec::with_capacity(areas.len());
    let mut acc = 0.0;
    for a in &areas {
        acc += a / total;
        cdf.push(acc);
    }
    let mut rng = seeded_rng(seed, stream);
    out.reserve(count);
    for _ in 0..count {
        let x: f64 = rng.random::<f64>();
        let f = cdf.partition_point(|&c| c < x).min(areas.len() - 1);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let [a, b, c] = mesh.corners(f);
        out.push(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));
    }
    out
}

/// Metro-style symmetric distance between `candidate` and `truth`.
///
/// Each mesh contributes its vertices plus `density × area / diagonal²`
/// random surface samples; every sample is projected onto the other mesh
/// through a BVH. `max` and `mean` run over both directions together. The
/// meshes must already be aligned.
pub fn mesh_distance(candidate: &TriMesh, truth: &TriMesh, density: f64, seed: u64) -> Result<MeshDistanceResult> {
    if candidate.num_faces() == 0 || truth.num_faces() == 0 {
        return Err(Error::InvalidArgument("distance needs two meshes with faces".into()));
    }
    let diagonal = truth.bbox_diagonal();
    if !(diagonal > 0.0) {
        return Err(Error::Degenerate("truth mesh has a zero bounding box".into()));
    }
    if candidate == truth {
        return Ok(MeshDistanceResult {
            max: 0.0,
            mean: 0.0,
            max_abs: 0.0,
            mean_abs: 0.0,
            diagonal,
            samples: 0,
            signed: vec![0.0; candidate.num_vertices()],
        });
    }
    let count = |m: &TriMesh| (density * m.total_area() / (diagonal * diagonal)).ceil() as usize;
    let from_candidate = surface_samples(candidate, count(candidate), seed, 11);
    let from_truth = surface_samples(truth, count(truth), seed, 12);
    let truth_bvh = TriangleBvh::new(truth);
    let candidate_bvh = TriangleBvh::new(candidate);
    let forward: Vec<f64> = from_candidate
        .par_iter()
        .map(|p| truth_bvh.closest(p).expect("truth has faces").distance)
        .collect();
    let backward: Vec<f64> = from_truth
        .par_iter()
        .map(|p| candidate_bvh.closest(p).expect("candidate has faces").distance)
        .collect();
    let all = forward.iter().chain(&backward);
    let samples = forward.len() + backward.len();
    let max_abs = all.clone().cloned().fold(0.0, f64::max);
    let mean_abs = all.sum::<f64>() / samples as f64;
    let signed = candidate
        .positions()
        .par_iter()
        .map(|p| {
            let hit = truth_bvh.closest(p).expect("truth has faces");
            let side = (p - hit.point).dot(&truth.face_normal(hit.face));
            hit.distance.copysign(if side < 0.0 { -1.0 } else { 1.0 }) / diagonal
        })
        .collect();
    Ok(MeshDistanceResult {
        max: max_abs / diagonal,
        mean: mean_abs / diagonal,
        max_abs,
        mean_abs,
        diagonal,
        samples,
        signed,
    })
}

/// Diverging blue–white–red colors for signed distances, symmetric about
/// zero with the range set by the largest magnitude.
pub fn color_by_distance(signed: &[f64]) -> Vec<[u8; 3]> {
    let range = signed.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    signed
        .iter()
        .map(|&d| {
            let t = if range > 0.0 { (d / range).clamp(-1.0, 1.0) } else { 0.0 };
            let fade = ((1.0 - t.abs()) * 255.0).round() as u8;
            if t >= 0.0 {
                [255, fade, fade]
            } else {
                [fade, fade, 255]
            }
        })
        .collect()
}
