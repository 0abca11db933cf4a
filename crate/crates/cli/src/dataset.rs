use std::path::PathBuf;

use anyhow::bail;
use clap::Args;
use curvrepair::dataset::{build_dataset, DatasetConfig, MaskSynthesisConfig};

use crate::Outcome;

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Model files, or directories scanned for `.obj`/`.ply` files.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Dataset root; receives `train/`, `test/` and `manifest.json`.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 512)]
    resolution: u32,
    /// Segment counts per model.
    #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10])]
    seeds: Vec<usize>,
    /// Fraction of models held out for testing.
    #[arg(long, default_value_t = 0.15)]
    test_fraction: f64,
    /// Hole-center spread as a fraction of the image radius.
    #[arg(long, default_value_t = 0.25)]
    center_sigma: f64,
    /// Minimum hole size as a fraction of patch vertices.
    #[arg(long, default_value_t = 0.10)]
    min_hole_fraction: f64,
}

fn collect_models(inputs: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| e.eq_ignore_ascii_case("obj") || e.eq_ignore_ascii_case("ply"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn run(args: GenDatasetArgs) -> anyhow::Result<Outcome> {
    if args.resolution < 16 {
        bail!("--resolution must be at least 16");
    }
    let models = collect_models(&args.input)?;
    if models.is_empty() {
        bail!("no models found");
    }
    let cfg = DatasetConfig {
        seeds: args.seeds,
        test_fraction: args.test_fraction,
        resolution: args.resolution,
        mask: MaskSynthesisConfig {
            min_hole_fraction: args.min_hole_fraction,
            center_sigma: args.center_sigma,
            rng_seed: args.seed,
        },
        rng_seed: args.seed,
        ..DatasetConfig::default()
    };
    let manifest = build_dataset(&models, &args.output, &cfg)?;
    log::info!(
        "{} base charts, {} train / {} test pairs",
        manifest.counts.base_charts,
        manifest.counts.train_pairs,
        manifest.counts.test_pairs
    );
    Ok(Outcome::Success)
}
