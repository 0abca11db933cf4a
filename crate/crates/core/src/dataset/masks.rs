use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::chart::{rasterize_mask, MaskImage, Orientation, PatchChart, RasterImage, BACKGROUND};
use crate::features::seeded_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSynthesisConfig {
    /// The hole grows until it holds more than this fraction of the patch
    /// vertices.
    pub min_hole_fraction: f64,
    /// Standard deviation of the hole-center radius, as a fraction of the
    /// image radius.
    pub center_sigma: f64,
    pub rng_seed: u64,
}

impl Default for MaskSynthesisConfig {
    fn default() -> Self {
        Self {
            min_hole_fraction: 0.10,
            center_sigma: 0.25,
            rng_seed: 0,
        }
    }
}

/// Patches with fewer vertices are not given holes.
pub const MIN_PATCH_VERTICES: usize = 10;

/// Picks a hole center near the image center and grows it breadth-first.
///
/// The center is the chart vertex nearest (in UV) to the point at a uniform
/// angle and a radius of `|N(0, center_sigma)|` image radii from the image
/// center. Returns the hole's local vertex ids, sorted, and the mask of every
/// face touching them.
pub fn synthesize_patch_hole(chart: &PatchChart, cfg: &MaskSynthesisConfig) -> Result<(Vec<usize>, MaskImage)> {
    let mesh = &chart.patch.mesh;
    let n = mesh.num_vertices();
    if n < MIN_PATCH_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "patch has {n} vertices; at least {MIN_PATCH_VERTICES} are needed for a hole"
        )));
    }
    if !(cfg.min_hole_fraction > 0.0 && cfg.min_hole_fraction < 1.0 && cfg.center_sigma >= 0.0) {
        return Err(Error::InvalidArgument(
            "hole fraction must lie in (0, 1) and sigma be non-negative".into(),
        ));
    }
    let mut rng = seeded_rng(cfg.rng_seed, 21);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let radius = if cfg.center_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.center_sigma).expect("positive sigma");
        normal.sample(&mut rng).abs() * 0.5
    } else {
        0.0
    };
    let target = [0.5 + radius * theta.cos(), 0.5 + radius * theta.sin()];
    let dist = |v: usize| {
        let [u, w] = chart.uv[v];
        (u - target[0]).powi(2) + (w - target[1]).powi(2)
    };
    let center = (0..n)
        .min_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)))
        .expect("patch has vertices");

    let needed = (cfg.min_hole_fraction * n as f64).floor() as usize + 1;
    let mut in_hole = vec![false; n];
    let mut hole = Vec::with_capacity(needed);
    let mut queue = VecDeque::from([center]);
    in_hole[center] = true;
    while let Some(v) = queue.pop_front() {
        hole.push(v);
        if hole.len() >= needed {
            break;
        }
        for &w in mesh.neighbors(v) {
            if !in_hole[w] {
                in_hole[w] = true;
                queue.push_back(w);
            }
        }
    }
    hole.sort_unstable();
    let mut member = vec![false; n];
    for &v in &hole {
        member[v] = true;
    }
    let faces: Vec<usize> = (0..mesh.num_faces())
        .filter(|&f| mesh.faces()[f].iter().any(|&v| member[v]))
        .collect();
    Ok((hole, rasterize_mask(chart, &faces)))
}

/// One emitted training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPair {
    pub orientation: Orientation,
    /// 1.. for rigidly moved copies; 0 marks the unmoved base mask, emitted
    /// only when every move of this orientation was rejected.
    pub mask_index: usize,
    pub image: RasterImage,
    pub mask: MaskImage,
}

pub const MASKS_PER_VARIANT: usize = 5;
pub const MASK_ATTEMPTS: usize = 10;
/// Allowed relative change of the white-pixel count under a rigid move.
pub const COUNT_TOLERANCE: f64 = 0.02;

/// Six grid symmetries of the pair, each with up to five rigidly moved
/// copies of the mask. A moved mask must stay on the chart footprint (the
/// non-background pixels) and keep its white-pixel count within 2%; each is
/// retried up to ten times and then dropped. An orientation left without any
/// moved mask keeps its base mask instead.
pub fn augment_pair(image: &RasterImage, mask: &MaskImage, rng_seed: u64) -> Result<Vec<AugmentedPair>> {
    image.check_same_size(mask.width, mask.height)?;
    let mut rng = seeded_rng(rng_seed, 22);
    let mut out = Vec::new();
    for orientation in Orientation::ALL {
        let img = image.transformed(orientation);
        let base = mask.transformed(orientation);
        let footprint: Vec<bool> = img.pixels.iter().map(|p| *p != BACKGROUND).collect();
        let on_footprint: Vec<usize> = (0..footprint.len()).filter(|&i| footprint[i]).collect();
        let mut index = 1;
        for _ in 0..MASKS_PER_VARIANT {
            for _ in 0..MASK_ATTEMPTS {
                if on_footprint.is_empty() {
                    break;
                }
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let anchor = on_footprint[rng.random_range(0..on_footprint.len())];
                if let Some(moved) = rigid_move(&base, &footprint, angle, anchor) {
                    out.push(AugmentedPair {
                        orientation,
                        mask_index: index,
                        image: img.clone(),
                        mask: moved,
                    });
                    index += 1;
                    break;
                }
            }
        }
        if index == 1 {
            out.push(AugmentedPair {
                orientation,
                mask_index: 0,
                image: img,
                mask: base,
            });
        }
    }
    Ok(out)
}

/// Rotates the white region by `angle` about its centroid and recenters it
/// on pixel `anchor`. `None` if the result leaves the footprint or its
/// white-pixel count drifts beyond the tolerance.
fn rigid_move(mask: &MaskImage, footprint: &[bool], angle: f64, anchor: usize) -> Option<MaskImage> {
    let (w, h) = (mask.width as usize, mask.height as usize);
    if !footprint[anchor] {
        return None;
    }
    let white: Vec<(f64, f64)> = (0..w * h)
        .filter(|&i| mask.bits[i])
        .map(|i| ((i % w) as f64, (i / w) as f64))
        .collect();
    if white.is_empty() {
        return None;
    }
    let cx = white.iter().map(|p| p.0).sum::<f64>() / white.len() as f64;
    let cy = white.iter().map(|p| p.1).sum::<f64>() / white.len() as f64;
    let reach = white
        .iter()
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .fold(0.0, f64::max)
        + 2.0;
    let (dx, dy) = ((anchor % w) as f64, (anchor / w) as f64);
    let (s, c) = angle.sin_cos();
    let mut out = MaskImage::empty(mask.width, mask.height);
    let mut count = 0usize;
    let y0 = (dy - reach).floor().max(0.0) as usize;
    let y1 = ((dy + reach).ceil() as usize).min(h - 1);
    let x0 = (dx - reach).floor().max(0.0) as usize;
    let x1 = ((dx + reach).ceil() as usize).min(w - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (qx, qy) = (x as f64 - dx, y as f64 - dy);
            // Inverse rotation back into the source mask.
            let sx = (c * qx + s * qy + cx).round();
            let sy = (-s * qx + c * qy + cy).round();
            if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                continue;
            }
            if mask.bits[sy as usize * w + sx as usize] {
                if !footprint[y * w + x] {
                    return None;
                }
                out.bits[y * w + x] = true;
                count += 1;
            }
        }
    }
    // White pixels whose preimage would fall off the grid are lost.
    let source = white.len() as f64;
    ((count as f64 - source).abs() <= COUNT_TOLERANCE * source).then_some(out)
}
