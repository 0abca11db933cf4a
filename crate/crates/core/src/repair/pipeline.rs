use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{coarse_fill, deform_step, smooth_boundary, DeformConfig, DeformContext, DeformationState};
use crate::chart::{extract_patch_from, parametrize, rasterize, rasterize_mask, MaskImage, PatchChart};
use crate::features::{mean_curvature, CurvatureRange, ScalarField};
use crate::inpaint::{run_inpaint, InpaintBackend, InpaintRequest, DEFAULT_TIMEOUT};
use crate::mesh::{boundary_loops, normalize, validate, BoundaryLoop, TriMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairConfig {
    pub deform: DeformConfig,
    /// Side length of the square curvature image.
    pub resolution: u32,
    /// Rings of faces around the filled region included in the chart.
    pub rings: usize,
    /// Budget for one mesh; each backend call gets what remains of it.
    pub timeout: Duration,
    /// Tail fraction clamped when normalizing curvature.
    pub curvature_clamp: f64,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            deform: DeformConfig::default(),
            resolution: 512,
            rings: 8,
            timeout: DEFAULT_TIMEOUT,
            curvature_clamp: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleStatus {
    /// Filled and deformed toward the inpainted image.
    Repaired,
    /// Inpainting failed; the coarse fill was kept.
    BackendFailed,
    /// Charting failed; the coarse fill was kept.
    CoarseOnly,
    /// Not even a coarse fill could be made; the hole stays open.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub loop_length: usize,
    pub new_vertices: usize,
    pub new_faces: usize,
    pub iterations: usize,
    pub residual_initial: f64,
    pub residual_final: f64,
    /// Residual before the first step and after every step.
    pub residuals: Vec<f64>,
    pub control_points_initial: usize,
    pub seconds: f64,
    pub backend: String,
    pub status: HoleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl HoleReport {
    fn new(hole: &BoundaryLoop, backend: String) -> Self {
        Self {
            loop_length: hole.len(),
            new_vertices: 0,
            new_faces: 0,
            iterations: 0,
            residual_initial: 0.0,
            residual_final: 0.0,
            residuals: Vec::new(),
            control_points_initial: 0,
            seconds: 0.0,
            backend,
            status: HoleStatus::Repaired,
            message: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub holes: Vec<HoleReport>,
    pub seconds: f64,
}

impl RepairReport {
    pub fn backend_failed(&self) -> bool {
        self.holes.iter().any(|h| h.status == HoleStatus::BackendFailed)
    }

    pub fn all_repaired(&self) -> bool {
        self.holes.iter().all(|h| h.status == HoleStatus::Repaired)
    }
}

/// Fills one boundary loop and deforms the fill toward the inpainted
/// curvature image. The mesh should already be normalized. Failures after
/// the coarse fill keep the coarse fill and are recorded in the report.
pub fn repair_hole(
    mesh: &TriMesh,
    hole: &BoundaryLoop,
    backend: &dyn InpaintBackend,
    cfg: &RepairConfig,
    deadline: Option<Instant>,
) -> Result<(TriMesh, HoleReport)> {
    let start = Instant::now();
    let mut report = HoleReport::new(hole, backend.id());
    let (filled, fill) = coarse_fill(mesh, hole)?;
    report.new_vertices = fill.new_vertices.len();
    report.new_faces = fill.new_faces.len();
    if let Some(w) = &fill.warning {
        report.message = Some(w.clone());
    }
    let roi = fill.new_vertices.clone();
    if roi.is_empty() {
        report.seconds = start.elapsed().as_secs_f64();
        return Ok((filled, report));
    }

    let setup = match build_context(&filled, &fill.hole_loop, &roi, &fill.new_faces, cfg) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("charting failed, keeping the coarse fill: {e}");
            report.status = HoleStatus::CoarseOnly;
            report.message = Some(e.to_string());
            let out = smooth_boundary(&filled, &roi, cfg.deform.smoothing_rounds);
            report.seconds = start.elapsed().as_secs_f64();
            return Ok((out, report));
        }
    };
    let timeout = match deadline {
        Some(d) => d.saturating_duration_since(Instant::now()).min(cfg.timeout),
        None => cfg.timeout,
    };
    let inpainted = if timeout.is_zero() {
        Err(Error::Timeout {
            backend: backend.id(),
            seconds: cfg.timeout.as_secs_f64(),
        })
    } else {
        run_inpaint(
            backend,
            &InpaintRequest {
                image: rasterize(&setup.chart, &ScalarField(setup.frozen_field.clone())),
                mask: setup.mask,
                timeout,
            },
        )
    };
    let target = match inpainted {
        Ok(r) => r.image,
        Err(e) => {
            log::warn!("inpainting failed, keeping the coarse fill: {e}");
            report.status = HoleStatus::BackendFailed;
            report.message = Some(e.to_string());
            report.seconds = start.elapsed().as_secs_f64();
            return Ok((filled, report));
        }
    };
    let ctx = DeformContext {
        chart: setup.chart,
        range: setup.range,
        target,
        roi_local: setup.roi_local,
        frozen_field: setup.frozen_field,
        mean_edge: setup.mean_edge,
    };

    let mut state = DeformationState {
        roi: roi.clone(),
        control_points: Vec::new(),
        residual: 0.0,
        iteration: 0,
        sign: None,
        stalled: false,
    };
    let mut current = filled;
    report.residual_initial = ctx.residual(&ctx.raster(&current));
    report.residuals.push(report.residual_initial);
    for _ in 0..cfg.deform.max_iters {
        let before = ctx.residual(&ctx.raster(&current));
        current = deform_step(&current, &ctx, &mut state, &cfg.deform)?;
        if state.iteration == 1 {
            report.control_points_initial = state.control_points.len();
        }
        if state.control_points.is_empty() || state.stalled {
            break;
        }
        report.residuals.push(state.residual);
        report.iterations = state.iteration;
        if before <= 0.0 || (before - state.residual) / before < cfg.deform.converge_ratio {
            break;
        }
    }
    report.residual_final = *report.residuals.last().expect("initial residual recorded");
    let out = smooth_boundary(&current, &roi, cfg.deform.smoothing_rounds);
    report.seconds = start.elapsed().as_secs_f64();
    Ok((out, report))
}

/// Chart, frozen colors and mask for a freshly filled hole. The image handed
/// to the inpainter colors context vertices by the curvature of the surface
/// without the fill, so the crease along the rim stays out of the target.
fn build_context(
    filled: &TriMesh,
    hole: &BoundaryLoop,
    roi: &[usize],
    new_faces: &[usize],
    cfg: &RepairConfig,
) -> Result<Setup> {
    let mut seeds: Vec<usize> = hole.vertices.clone();
    seeds.extend_from_slice(roi);
    let patch = extract_patch_from(filled, &seeds, cfg.rings, None)?;
    let mut is_new_face = vec![false; filled.num_faces()];
    for &f in new_faces {
        is_new_face[f] = true;
    }
    let local_new_faces: Vec<usize> = patch
        .parent_faces
        .iter()
        .enumerate()
        .filter(|&(_, &f)| is_new_face[f])
        .map(|(i, _)| i)
        .collect();
    if local_new_faces.len() != new_faces.len() {
        return Err(Error::Topology("chart does not cover the whole fill".into()));
    }
    let roi_local: Vec<usize> = {
        let local = patch.local_index();
        roi.iter()
            .map(|&v| local(v).ok_or_else(|| Error::Topology("chart does not cover the whole fill".into())))
            .collect::<Result<_>>()?
    };

    let with_fill = mean_curvature(&patch.mesh);
    let keep: Vec<bool> = (0..patch.mesh.num_faces())
        .map(|f| !is_new_face[patch.parent_faces[f]])
        .collect();
    let (without_fill, map) = patch.mesh.retain_faces(&keep);
    let context_h = mean_curvature(&without_fill);
    let mut raw = with_fill.0.clone();
    for (v, m) in map.iter().enumerate() {
        if let Some(m) = m {
            raw[v] = context_h.get(*m);
        }
    }
    let range = CurvatureRange::fit(&raw, cfg.curvature_clamp);
    let frozen_field: Vec<f64> = raw.iter().map(|&h| range.apply(h)).collect();
    let mean_edge = patch.mesh.mean_edge_length();
    let chart = parametrize(patch, cfg.resolution)?;
    let mask = rasterize_mask(&chart, &local_new_faces);
    Ok(Setup {
        chart,
        range,
        roi_local,
        frozen_field,
        mean_edge,
        mask,
    })
}

struct Setup {
    chart: PatchChart,
    range: CurvatureRange,
    roi_local: Vec<usize>,
    frozen_field: Vec<f64>,
    mean_edge: f64,
    mask: MaskImage,
}

/// Repairs every boundary loop of a manifold mesh, longest first.
///
/// The mesh is normalized to a unit bounding-box diagonal for processing.
/// Pre-existing vertices are copied back unchanged from the input, so only
/// new vertices carry the round trip through normalization.
pub fn repair_mesh(
    mesh: &TriMesh,
    backend: &dyn InpaintBackend,
    cfg: &RepairConfig,
) -> Result<(TriMesh, RepairReport)> {
    let start = Instant::now();
    cfg.deform.validate()?;
    let validity = validate(mesh);
    if !validity.manifold {
        return Err(Error::InvalidMesh("repair needs a manifold mesh".into()));
    }
    let loops = boundary_loops(mesh);
    if loops.is_empty() {
        return Ok((mesh.clone(), RepairReport::default()));
    }
    let deadline = start + cfg.timeout;
    let (mut work, transform) = normalize(mesh)?;
    let mut report = RepairReport::default();
    for hole in &loops {
        match repair_hole(&work, hole, backend, cfg, Some(deadline)) {
            Ok((next, entry)) => {
                work = next;
                report.holes.push(entry);
            }
            Err(e) => {
                log::warn!("hole of length {} left open: {e}", hole.len());
                let mut entry = HoleReport::new(hole, backend.id());
                entry.status = HoleStatus::Failed;
                entry.message = Some(e.to_string());
                report.holes.push(entry);
            }
        }
    }
    let restored = transform.invert_mesh(&work);
    let (mut positions, faces) = restored.into_parts();
    positions[..mesh.num_vertices()].copy_from_slice(mesh.positions());
    let out = TriMesh::new(positions, faces)?;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((out, report))
}
