use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use curvrepair::chart::RasterImage;
use curvrepair::mesh::{load_mesh, save_ply_colored};
use curvrepair::metrics::{color_by_distance, image_metrics, mesh_distance, MetricRow, DEFAULT_SAMPLE_DENSITY};

use crate::{write_json, Outcome};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Repaired mesh, or an image when both inputs are PNG.
    #[arg(long)]
    input: PathBuf,
    /// Ground truth of the same kind.
    #[arg(long)]
    truth: PathBuf,
    /// JSON result file, or CSV when the name ends in `.csv`. Printed to
    /// stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Model name for the result row (default: input file stem).
    #[arg(long)]
    model: Option<String>,
    /// Method name for the result row.
    #[arg(long, default_value = "curvrepair")]
    method: String,
    /// Surface samples per squared bounding-box diagonal.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_DENSITY)]
    samples: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the input mesh colored by signed distance (PLY).
    #[arg(long)]
    colored: Option<PathBuf>,
}

fn is_png(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn emit(output: Option<&Path>, json: serde_json::Value, row: Option<&MetricRow>) -> anyhow::Result<()> {
    match output {
        Some(path) if path.extension().and_then(|e| e.to_str()) == Some("csv") => {
            let row = row.context("CSV output is only available for mesh evaluation")?;
            let mut w = csv::Writer::from_path(path)?;
            w.serialize(row)?;
            w.flush()?;
        }
        Some(path) => write_json(path, &json)?,
        None => println!("{}", serde_json::to_string_pretty(&json)?),
    }
    Ok(())
}

pub fn run(args: EvalArgs) -> anyhow::Result<Outcome> {
    if is_png(&args.input) && is_png(&args.truth) {
        let a = RasterImage::load_png(&args.input)?;
        let b = RasterImage::load_png(&args.truth)?;
        let m = image_metrics(&a, &b)?;
        // JSON has no infinity; identical images report `"psnr": null`.
        let json = serde_json::json!({
            "input": args.input.display().to_string(),
            "truth": args.truth.display().to_string(),
            "l1": m.l1,
            "psnr": if m.psnr.is_finite() { Some(m.psnr) } else { None },
            "ssim": m.ssim,
        });
        emit(args.output.as_deref(), json, None)?;
        return Ok(Outcome::Success);
    }
    let candidate = load_mesh(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let truth = load_mesh(&args.truth).with_context(|| format!("cannot read {}", args.truth.display()))?;
    let d = mesh_distance(&candidate, &truth, args.samples, args.seed)?;
    if let Some(path) = &args.colored {
        save_ply_colored(path, &candidate, &color_by_distance(&d.signed))?;
    }
    let row = MetricRow {
        model: args.model.clone().unwrap_or_else(|| {
            args.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        }),
        method: args.method.clone(),
        max: d.max,
        mean: d.mean,
    };
    let json = serde_json::json!({
        "model": row.model,
        "method": row.method,
        "max": d.max,
        "mean": d.mean,
        "max_abs": d.max_abs,
        "mean_abs": d.mean_abs,
        "diagonal": d.diagonal,
        "samples": d.samples,
    });
    emit(args.output.as_deref(), json, Some(&row))?;
    Ok(Outcome::Success)
}
