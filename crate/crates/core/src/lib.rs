//! Curvature-image guided hole filling for triangle meshes.
//!
//! A hole is closed coarsely, the surrounding surface is charted into a
//! mean-curvature color image, the image hole is inpainted by a pluggable
//! backend, and the coarse fill is then deformed along vertex normals until
//! its own curvature image agrees with the inpainted one.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`mesh`]: the indexed triangle mesh, OBJ/PLY IO, topology queries and normalization.
//! * [`features`]: farthest point sampling, synthetic holes, segmentation, curvature and colormap.
//! * [`chart`]: patch extraction, harmonic parametrization and rasterization.
//! * [`inpaint`]: the backend trait, the name registry and the built-in/external backends.
//! * [`repair`]: coarse filling, control points, deformation and boundary smoothing.
//! * [`dataset`]: training-image corpus generation.
//! * [`metrics`]: sampled surface distances and image metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod dataset;
mod error;
pub mod features;
pub mod inpaint;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod repair;

pub use error::{Error, Result};
pub use mesh::{BoundaryLoop, TriMesh, Vec3};
