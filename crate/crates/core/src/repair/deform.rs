use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chart::{rasterize, sample_image_at_vertex, PatchChart, RasterImage};
use crate::features::{color_to_curvature_rgb, mean_curvature, CurvatureRange, ScalarField};
use crate::linalg::TripletBuilder;
use crate::mesh::{TriMesh, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformConfig {
    /// A vertex is a control point when some channel differs by more than
    /// this many units.
    pub color_threshold: f64,
    /// Displacement scale as a fraction of the mean patch edge length.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once the residual drops by less than this fraction in a step.
    pub converge_ratio: f64,
    pub smoothing_rounds: usize,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            color_threshold: 30.0,
            step_size: 0.25,
            max_iters: 50,
            converge_ratio: 0.02,
            smoothing_rounds: 10,
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.color_threshold > 0.0 && self.color_threshold < 255.0) {
            return Err(Error::InvalidArgument("color threshold must lie in (0, 255)".into()));
        }
        if !(self.step_size > 0.0 && self.converge_ratio > 0.0 && self.converge_ratio < 1.0) {
            return Err(Error::InvalidArgument(
                "step size must be positive and the convergence ratio in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Chart vertices (local ids) in `roi` whose colors differ by more than
/// `threshold` in at least one channel.
pub fn detect_control_points(
    chart: &PatchChart,
    current: &RasterImage,
    target: &RasterImage,
    roi: &[usize],
    threshold: f64,
) -> Result<Vec<usize>> {
    current.check_same_size(target.width, target.height)?;
    Ok(roi
        .iter()
        .copied()
        .filter(|&v| {
            let a = sample_image_at_vertex(chart, current, v);
            let b = sample_image_at_vertex(chart, target, v);
            exceeds(a, b, threshold)
        })
        .collect())
}

fn exceeds(a: [f64; 3], b: [f64; 3], threshold: f64) -> bool {
    (0..3).any(|c| (a[c] - b[c]).abs() > threshold)
}

fn color_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Progress of the iterative deformation. Vertex ids are parent mesh ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationState {
    pub roi: Vec<usize>,
    pub control_points: Vec<usize>,
    /// Mean RGB distance between the current and target colors over the ROI.
    pub residual: f64,
    pub iteration: usize,
    /// Displacement direction chosen by the first step, `±1`.
    pub sign: Option<f64>,
    /// Set when no trial step lowered the residual.
    pub stalled: bool,
}

/// Everything held fixed while a patch deforms: the chart (UV), the
/// curvature range, the target image, and the colors of vertices that are
/// not allowed to move.
#[derive(Debug, Clone)]
pub struct DeformContext {
    pub chart: PatchChart,
    pub range: CurvatureRange,
    pub target: RasterImage,
    /// Local chart ids of the movable vertices.
    pub roi_local: Vec<usize>,
    /// Normalized curvature of every chart vertex; entries of ROI vertices
    /// are overwritten from the live surface on each raster.
    pub frozen_field: Vec<f64>,
    pub mean_edge: f64,
}

impl DeformContext {
    fn chart_positions(&self, mesh: &TriMesh) -> Vec<Vec3> {
        self.chart
            .patch
            .parent_vertices
            .iter()
            .map(|&p| mesh.position(p))
            .collect()
    }

    /// Normalized chart field for the current surface.
    pub fn field(&self, mesh: &TriMesh) -> ScalarField {
        let local = self.chart.patch.mesh.with_positions(self.chart_positions(mesh));
        let h = mean_curvature(&local);
        let mut field = self.frozen_field.clone();
        for &v in &self.roi_local {
            field[v] = self.range.apply(h.get(v));
        }
        ScalarField(field)
    }

    pub fn raster(&self, mesh: &TriMesh) -> RasterImage {
        rasterize(&self.chart, &self.field(mesh))
    }

    pub fn residual(&self, current: &RasterImage) -> f64 {
        if self.roi_local.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .roi_local
            .iter()
            .map(|&v| {
                color_distance(
                    sample_image_at_vertex(&self.chart, current, v),
                    sample_image_at_vertex(&self.chart, &self.target, v),
                )
            })
            .sum();
        sum / self.roi_local.len() as f64
    }
}

const BACKTRACK_HALVINGS: usize = 4;

/// One deformation iteration. Returns the moved mesh; `state` carries the
/// refreshed control points and residual.
///
/// Control points move along their vertex normal by
/// `step_size × mean_edge × (t_target − t_current)`, with `t` the decoded
/// normalized curvature. The first call tries both signs and keeps the one
/// with the lower residual. Other ROI vertices follow through
/// [`propagate_displacements`]. A step that raises the residual is halved
/// up to four times before the state is marked stalled.
pub fn deform_step(
    mesh: &TriMesh,
    ctx: &DeformContext,
    state: &mut DeformationState,
    cfg: &DeformConfig,
) -> Result<TriMesh> {
    let current = ctx.raster(mesh);
    state.residual = ctx.residual(&current);
    let controls = detect_control_points(&ctx.chart, &current, &ctx.target, &ctx.roi_local, cfg.color_threshold)?;
    let parent = &ctx.chart.patch.parent_vertices;
    state.control_points = controls.iter().map(|&v| parent[v]).collect();
    state.iteration += 1;
    if controls.is_empty() {
        return Ok(mesh.clone());
    }

    let normals = mesh.vertex_normals();
    let mut control_moves = Vec::with_capacity(controls.len());
    for &v in &controls {
        let n = normals[parent[v]];
        if n.norm() == 0.0 {
            continue;
        }
        let s = color_to_curvature_rgb(sample_image_at_vertex(&ctx.chart, &ctx.target, v))
            - color_to_curvature_rgb(sample_image_at_vertex(&ctx.chart, &current, v));
        control_moves.push((parent[v], n * (cfg.step_size * ctx.mean_edge * s)));
    }
    let field = propagate_displacements(mesh, &state.roi, &control_moves)?;
    let moved = |scale: f64| {
        let mut positions = mesh.positions().to_vec();
        for &(v, d) in &field {
            positions[v] += d * scale;
        }
        mesh.with_positions(positions)
    };
    let try_scale = |scale: f64| {
        let candidate = moved(scale);
        let r = ctx.residual(&ctx.raster(&candidate));
        (candidate, r)
    };

    let signs: Vec<f64> = match state.sign {
        Some(s) => vec![s],
        None => vec![1.0, -1.0],
    };
    let mut scale = 1.0;
    for _ in 0..=BACKTRACK_HALVINGS {
        let mut best: Option<(f64, TriMesh, f64)> = None;
        for &s in &signs {
            let (candidate, r) = try_scale(s * scale);
            if best.as_ref().is_none_or(|b| r < b.2) {
                best = Some((s, candidate, r));
            }
        }
        let (s, candidate, r) = best.expect("at least one sign is tried");
        if r < state.residual {
            state.sign.get_or_insert(s);
            state.residual = r;
            return Ok(candidate);
        }
        scale *= 0.5;
    }
    state.stalled = true;
    Ok(mesh.clone())
}

/// Extends control displacements to the rest of the ROI.
///
/// Free ROI vertices minimize
/// `Σ w_i ‖δ_i − δ̂_i‖² + Σ_edges ‖δ_i − δ_j‖²`, where `δ̂_i` is the
/// inverse-graph-distance average of the control displacements and `w_i` the
/// largest inverse distance to a control. Vertices outside the ROI have
/// `δ = 0`. Returns `(vertex, δ)` for every ROI vertex.
pub fn propagate_displacements(
    mesh: &TriMesh,
    roi: &[usize],
    controls: &[(usize, Vec3)],
) -> Result<Vec<(usize, Vec3)>> {
    let n = mesh.num_vertices();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in roi.iter().enumerate() {
        slot[v] = i;
    }
    let mut fixed: Vec<Option<Vec3>> = vec![None; roi.len()];
    for &(v, d) in controls {
        if slot[v] == usize::MAX {
            return Err(Error::InvalidArgument(format!(
                "control vertex {v} lies outside the ROI"
            )));
        }
        fixed[slot[v]] = Some(d);
    }
    if controls.is_empty() {
        return Ok(roi.iter().map(|&v| (v, Vec3::zeros())).collect());
    }

    // Graph distances from each control within the ROI.
    let mut weight_sum = vec![0.0; roi.len()];
    let mut weighted = vec![Vec3::zeros(); roi.len()];
    let mut closeness = vec![0.0f64; roi.len()];
    let mut dist = vec![usize::MAX; roi.len()];
    let mut queue = VecDeque::new();
    for &(c, d) in controls {
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        dist[slot[c]] = 0;
        queue.push_back(c);
        while let Some(u) = queue.pop_front() {
            let du = dist[slot[u]];
            for &w in mesh.neighbors(u) {
                if slot[w] != usize::MAX && dist[slot[w]] == usize::MAX {
                    dist[slot[w]] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        for i in 0..roi.len() {
            if dist[i] != usize::MAX && dist[i] > 0 {
                let w = 1.0 / dist[i] as f64;
                weight_sum[i] += w;
                weighted[i] += d * w;
                closeness[i] = closeness[i].max(w);
            }
        }
    }

    let free: Vec<usize> = (0..roi.len()).filter(|&i| fixed[i].is_none()).collect();
    let mut unknown = vec![usize::MAX; roi.len()];
    for (k, &i) in free.iter().enumerate() {
        unknown[i] = k;
    }
    let mut out: Vec<(usize, Vec3)> = roi.iter().map(|&v| (v, Vec3::zeros())).collect();
    if !free.is_empty() {
        let mut builder = TripletBuilder::new(free.len());
        let mut rhs = vec![[0.0; 3]; free.len()];
        for (k, &i) in free.iter().enumerate() {
            let v = roi[i];
            let mut diag = closeness[i];
            if weight_sum[i] > 0.0 {
                let target = weighted[i] / weight_sum[i] * closeness[i];
                for d in 0..3 {
                    rhs[k][d] += target[d];
                }
            }
            for &w in mesh.neighbors(v) {
                diag += 1.0;
                let j = slot[w];
                if j == usize::MAX {
                    continue;
                }
                match fixed[j] {
                    Some(dj) => {
                        for d in 0..3 {
                            rhs[k][d] += dj[d];
                        }
                    }
                    None => builder.add(k, unknown[j], -1.0),
                }
            }
            builder.add(k, k, diag);
        }
        let guess = vec![[0.0; 3]; free.len()];
        let solved = builder.build().solve_columns(&rhs, &guess)?;
        for (k, &i) in free.iter().enumerate() {
            out[i].1 = Vec3::new(solved[k][0], solved[k][1], solved[k][2]);
        }
    }
    for (i, f) in fixed.iter().enumerate() {
        if let Some(d) = f {
            out[i].1 = *d;
        }
    }
    Ok(out)
}

/// Umbrella smoothing of the ROI vertices within two rings of the ROI rim
/// (the non-ROI vertices adjacent to it). Each round moves every band vertex
/// halfway to the mean of its neighbors, all at once. Nothing else moves.
pub fn smooth_boundary(mesh: &TriMesh, roi: &[usize], rounds: usize) -> TriMesh {
    if rounds == 0 || roi.is_empty() {
        return mesh.clone();
    }
    let n = mesh.num_vertices();
    let mut in_roi = vec![false; n];
    for &v in roi {
        in_roi[v] = true;
    }
    let mut ring = vec![usize::MAX; n];
    let mut frontier: Vec<usize> = Vec::new();
    for &v in roi {
        if mesh.neighbors(v).iter().any(|&w| !in_roi[w]) {
            ring[v] = 1;
            frontier.push(v);
        }
    }
    for &v in &frontier {
        for &w in mesh.neighbors(v) {
            if in_roi[w] && ring[w] == usize::MAX {
                ring[w] = 2;
            }
        }
    }
    let mut band: Vec<usize> = roi.iter().copied().filter(|&v| ring[v] <= 2).collect();
    band.sort_unstable();
    band.dedup();

    let mut positions = mesh.positions().to_vec();
    for _ in 0..rounds {
        let updates: Vec<Vec3> = band
            .iter()
            .map(|&v| {
                let nb = mesh.neighbors(v);
                if nb.is_empty() {
                    return positions[v];
                }
                let mean = nb.iter().fold(Vec3::zeros(), |acc, &w| acc + positions[w]) / nb.len() as f64;
                positions[v] + (mean - positions[v]) * 0.5
            })
            .collect();
        for (&v, p) in band.iter().zip(updates) {
            positions[v] = p;
        }
    }
    mesh.with_positions(positions)
}
