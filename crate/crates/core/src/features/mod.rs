//! Per-vertex geometric features: sampling, synthetic damage, segmentation,
//! mean curvature and its color encoding.

mod colormap;
mod curvature;
mod fps;
mod holes;
mod segment;

pub use colormap::{color_to_curvature, color_to_curvature_rgb, colormap_rgb, curvature_to_color};
pub use curvature::{mean_curvature, normalize_curvature, CurvatureRange, ScalarField};
pub use fps::{farthest_point_sample, farthest_point_sample_from};
pub use holes::{synthesize_holes, HoleSpec};
pub use segment::{segment_by_seeds, segment_from_seeds, SegmentLabeling};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn random_index(seed: u64, n: usize) -> usize {
    seeded_rng(seed, 0).random_range(0..n)
}
