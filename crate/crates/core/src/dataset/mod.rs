//! Training corpus of curvature images and hole masks.
//!
//! Every model is segmented by farthest-point seeds at several seed counts;
//! each segment is charted, colored by normalized mean curvature, given a
//! synthetic hole, and augmented. Models, not images, are split between
//! train and test.

mod masks;

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{extract_patch_from, parametrize, rasterize};
use crate::features::{mean_curvature, normalize_curvature, seeded_rng, segment_by_seeds, ScalarField};
use crate::mesh::{load_mesh, validate, TriMesh};
use crate::{Error, Result};

pub use masks::{
    augment_pair, synthesize_patch_hole, AugmentedPair, MaskSynthesisConfig, COUNT_TOLERANCE, MASKS_PER_VARIANT,
    MASK_ATTEMPTS, MIN_PATCH_VERTICES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Segment counts; each model yields their sum in charts.
    pub seeds: Vec<usize>,
    pub test_fraction: f64,
    pub resolution: u32,
    pub curvature_clamp: f64,
    pub mask: MaskSynthesisConfig,
    pub rng_seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            seeds: vec![2, 5, 10],
            test_fraction: 0.15,
            resolution: 512,
            curvature_clamp: 0.02,
            mask: MaskSynthesisConfig::default(),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn dir(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model_id: String,
    pub patch_id: String,
    /// Relative to the dataset root.
    pub image_path: String,
    pub mask_path: String,
    pub augmentation: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub split: Split,
    pub base_charts: usize,
    pub pairs: usize,
    /// Pairs had no mask been dropped.
    pub maximum_pairs: usize,
    pub skipped_charts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedModel {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train_models: usize,
    pub test_models: usize,
    pub base_charts: usize,
    pub train_pairs: usize,
    pub test_pairs: usize,
    /// Emitted pairs over the maximum possible.
    pub achieved_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub counts: SplitCounts,
    pub models: Vec<ModelSummary>,
    pub skipped: Vec<SkippedModel>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Stable per-name seed component (FNV-1a).
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn model_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// A loaded model fit for charting, or why not.
fn load_model(path: &Path) -> std::result::Result<TriMesh, String> {
    let mesh = load_mesh(path).map_err(|e| e.to_string())?;
    let report = validate(&mesh);
    if !(report.watertight && report.manifold && report.single_component) {
        return Err(format!(
            "model must be watertight, manifold and connected (watertight={}, manifold={}, components={})",
            report.watertight, report.manifold, report.components
        ));
    }
    Ok(mesh)
}

/// One base chart: the curvature image with its synthesized mask.
#[derive(Debug, Clone)]
pub struct BaseChart {
    pub patch_id: String,
    pub image: crate::chart::RasterImage,
    pub mask: crate::chart::MaskImage,
    pub hole_vertices: usize,
    pub patch_vertices: usize,
}

/// Charts of one model: one per segment for every seed count. Charts that
/// cannot be built are reported by id with the reason.
pub fn model_charts(mesh: &TriMesh, model_id: &str, cfg: &DatasetConfig) -> (Vec<BaseChart>, Vec<String>) {
    let field = normalize_curvature(&mean_curvature(mesh), cfg.curvature_clamp);
    let base_seed = cfg.rng_seed ^ name_hash(model_id);
    let mut charts = Vec::new();
    let mut skipped = Vec::new();
    for &k in &cfg.seeds {
        let labeling = match segment_by_seeds(mesh, k, base_seed.wrapping_add(k as u64)) {
            Ok(l) => l,
            Err(e) => {
                skipped.push(format!("k{k}: {e}"));
                continue;
            }
        };
        let face_label: Vec<usize> = mesh
            .faces()
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|v| labeling.labels[v]);
                if a == b || a == c {
                    a
                } else if b == c {
                    b
                } else {
                    a.min(b).min(c)
                }
            })
            .collect();
        for (label, &seed_vertex) in labeling.seeds.iter().enumerate() {
            let patch_id = format!("k{k}p{label}");
            let allowed: Vec<bool> = face_label.iter().map(|&l| l == label).collect();
            let built = extract_patch_from(mesh, &[seed_vertex], usize::MAX, Some(&allowed)).and_then(|patch| {
                let local: Vec<f64> = patch.parent_vertices.iter().map(|&v| field.get(v)).collect();
                let chart = parametrize(patch, cfg.resolution)?;
                let image = rasterize(&chart, &ScalarField(local));
                let mask_cfg = MaskSynthesisConfig {
                    rng_seed: base_seed.wrapping_mul(31).wrapping_add(name_hash(&patch_id)),
                    ..cfg.mask
                };
                let (hole, mask) = synthesize_patch_hole(&chart, &mask_cfg)?;
                Ok(BaseChart {
                    patch_id: patch_id.clone(),
                    image,
                    mask,
                    hole_vertices: hole.len(),
                    patch_vertices: chart.uv.len(),
                })
            });
            match built {
                Ok(c) => charts.push(c),
                Err(e) => {
                    log::warn!("{model_id}/{patch_id} skipped: {e}");
                    skipped.push(format!("{patch_id}: {e}"));
                }
            }
        }
    }
    (charts, skipped)
}

/// Builds the corpus under `out_dir` and returns its manifest. Invalid or
/// unreadable models are skipped and listed in the manifest.
pub fn build_dataset(models: &[PathBuf], out_dir: &Path, cfg: &DatasetConfig) -> Result<DatasetManifest> {
    if cfg.seeds.is_empty() || cfg.seeds.contains(&0) {
        return Err(Error::InvalidArgument("seed counts must be positive".into()));
    }
    if !(cfg.test_fraction >= 0.0 && cfg.test_fraction <= 1.0) {
        return Err(Error::InvalidArgument("test fraction must lie in [0, 1]".into()));
    }
    let mut paths: Vec<&PathBuf> = models.iter().collect();
    paths.sort_by_key(|p| (model_id(p), p.to_path_buf()));
    for pair in paths.windows(2) {
        if model_id(pair[0]) == model_id(pair[1]) {
            return Err(Error::InvalidArgument(format!(
                "two models share the id `{}`",
                model_id(pair[0])
            )));
        }
    }
    let loaded: Vec<(String, &PathBuf, std::result::Result<TriMesh, String>)> =
        paths.par_iter().map(|p| (model_id(p), *p, load_model(p))).collect();
    let mut skipped = Vec::new();
    let mut valid = Vec::new();
    for (id, path, result) in loaded {
        match result {
            Ok(mesh) => valid.push((id, mesh)),
            Err(reason) => {
                log::warn!("skipping {}: {reason}", path.display());
                skipped.push(SkippedModel {
                    path: path.display().to_string(),
                    reason,
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..valid.len()).collect();
    order.shuffle(&mut seeded_rng(cfg.rng_seed, 23));
    let n_test = (cfg.test_fraction * valid.len() as f64).round() as usize;
    let mut split = vec![Split::Train; valid.len()];
    for &i in &order[..n_test] {
        split[i] = Split::Test;
    }

    std::fs::create_dir_all(out_dir)?;
    let per_model: Vec<Result<(ModelSummary, Vec<ManifestEntry>)>> = valid
        .par_iter()
        .zip(split.par_iter())
        .map(|((id, mesh), &split)| emit_model(id, mesh, split, out_dir, cfg))
        .collect();

    let mut models_out = Vec::new();
    let mut entries = Vec::new();
    for r in per_model {
        let (summary, mut e) = r?;
        models_out.push(summary);
        entries.append(&mut e);
    }
    let maximum: usize = models_out.iter().map(|m| m.maximum_pairs).sum();
    let pairs_in = |s: Split| entries.iter().filter(|e| e.split == s).count();
    let counts = SplitCounts {
        train_models: models_out.iter().filter(|m| m.split == Split::Train).count(),
        test_models: models_out.iter().filter(|m| m.split == Split::Test).count(),
        base_charts: models_out.iter().map(|m| m.base_charts).sum(),
        train_pairs: pairs_in(Split::Train),
        test_pairs: pairs_in(Split::Test),
        achieved_ratio: if maximum > 0 {
            entries.len() as f64 / maximum as f64
        } else {
            0.0
        },
    };
    let manifest = DatasetManifest {
        config: cfg.clone(),
        counts,
        models: models_out,
        skipped,
        entries,
    };
    manifest.write_json(out_dir.join("manifest.json"))?;
    Ok(manifest)
}

fn emit_model(
    id: &str,
    mesh: &TriMesh,
    split: Split,
    out_dir: &Path,
    cfg: &DatasetConfig,
) -> Result<(ModelSummary, Vec<ManifestEntry>)> {
    let (charts, skipped_charts) = model_charts(mesh, id, cfg);
    let rel_dir = format!("{}/{id}", split.dir());
    let dir = out_dir.join(split.dir()).join(id);
    std::fs::create_dir_all(&dir)?;
    let mut entries = Vec::new();
    for chart in &charts {
        let aug_seed = cfg.rng_seed ^ name_hash(id).rotate_left(17) ^ name_hash(&chart.patch_id);
        for pair in augment_pair(&chart.image, &chart.mask, aug_seed)? {
            let tag = format!("{}-{}", pair.orientation.tag(), pair.mask_index);
            let stem = format!("{}_{tag}", chart.patch_id);
            pair.image.save_png(dir.join(format!("{stem}.png")))?;
            pair.mask.save_png(dir.join(format!("{stem}_mask.png")))?;
            entries.push(ManifestEntry {
                model_id: id.to_string(),
                patch_id: chart.patch_id.clone(),
                image_path: format!("{rel_dir}/{stem}.png"),
                mask_path: format!("{rel_dir}/{stem}_mask.png"),
                augmentation: tag,
                split,
            });
        }
    }
    let summary = ModelSummary {
        model_id: id.to_string(),
        split,
        base_charts: charts.len(),
        pairs: entries.len(),
        maximum_pairs: charts.len() * 6 * MASKS_PER_VARIANT,
        skipped_charts,
    };
    Ok((summary, entries))
}
