use crate::mesh::{TriMesh, Vec3};
use crate::{Error, Result};

/// Greedy maximin sampling of `k` mesh vertices under squared Euclidean
/// distance. The first vertex is drawn uniformly from `rng_seed`.
pub fn farthest_point_sample(mesh: &TriMesh, k: usize, rng_seed: u64) -> Result<Vec<usize>> {
    if mesh.num_vertices() == 0 {
        return Err(Error::InvalidArgument("cannot sample an empty mesh".into()));
    }
    let start = super::random_index(rng_seed, mesh.num_vertices());
    farthest_point_sample_from(mesh.positions(), start, k)
}

/// Greedy maximin from a fixed start. Each pick maximizes the squared
/// distance to the nearest already-picked point; ties go to the lower index.
pub fn farthest_point_sample_from(points: &[Vec3], start: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {k} of {} points",
            points.len()
        )));
    }
    if start >= points.len() {
        return Err(Error::InvalidArgument(format!("start index {start} out of range")));
    }
    let mut nearest = vec![f64::INFINITY; points.len()];
    let mut picked = Vec::with_capacity(k);
    let mut current = start;
    loop {
        picked.push(current);
        if picked.len() == k {
            return Ok(picked);
        }
        let p = points[current];
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, q) in points.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < nearest[i] {
                nearest[i] = d;
            }
            if nearest[i] > best.0 {
                best = (nearest[i], i);
            }
        }
        current = best.1;
    }
}
