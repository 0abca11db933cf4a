//! Coarse-to-fine hole filling guided by inpainted curvature images.

mod deform;
mod fill;
mod pipeline;

pub use deform::{
    deform_step, detect_control_points, propagate_displacements, smooth_boundary, DeformConfig, DeformContext,
    DeformationState,
};
pub use fill::{coarse_fill, CoarseFill};
pub use pipeline::{repair_hole, repair_mesh, HoleReport, HoleStatus, RepairConfig, RepairReport};
