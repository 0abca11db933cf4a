//! Surface patches, their planar embeddings, and the curvature and hole
//! images drawn from them.

mod images;
mod param;
pub(crate) mod patch;
mod raster;

pub use images::{MaskImage, Orientation, RasterImage};
pub use param::{parametrize, EmbeddingWeights, PatchChart};
pub use patch::{extract_patch, extract_patch_from, Patch};
pub use raster::{
    coverage, rasterize, rasterize_colors, rasterize_mask, sample_image_at_uv, sample_image_at_vertex, BACKGROUND,
};
