use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::Args;
use curvrepair::inpaint::{BackendConfig, BackendRegistry};
use curvrepair::mesh::{load_mesh, save_mesh, validate, ValidityReport};
use curvrepair::repair::{repair_mesh, DeformConfig, RepairConfig, RepairReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::{write_json, Outcome};

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// Mesh files (OBJ or PLY). Several inputs need a directory for --output.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output mesh file, or a directory when repairing several meshes.
    #[arg(long)]
    output: PathBuf,
    /// Inpainting backend: builtin, external or identity.
    #[arg(long, default_value = "builtin")]
    backend: String,
    /// Command template for the external backend; `{image}`, `{mask}` and
    /// `{output}` are replaced by file paths, otherwise they are appended
    /// as `--image/--mask/--output` flags.
    #[arg(long)]
    backend_cmd: Option<String>,
    /// Time budget per mesh in seconds.
    #[arg(long, default_value_t = 540.0)]
    timeout: f64,
    /// Recorded in the report; the built-in pipeline is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curvature image side length in pixels.
    #[arg(long, default_value_t = 512)]
    resolution: u32,
    /// Face rings around the fill included in the chart.
    #[arg(long, default_value_t = 8)]
    rings: usize,
    /// Per-channel color difference that makes a vertex a control point.
    #[arg(long, default_value_t = 30)]
    threshold: u8,
    /// Deformation iteration cap.
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Report path (single input only; default: next to the output).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    input: String,
    output: String,
    backend: &'a str,
    seed: u64,
    config: &'a RepairConfig,
    validity: Option<ValidityReport>,
    error: Option<String>,
    repair: Option<RepairReport>,
}

fn report_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.report.json"))
}

pub fn run(args: RepairArgs) -> anyhow::Result<Outcome> {
    if !(args.timeout > 0.0 && args.timeout.is_finite()) {
        bail!("--timeout must be a positive number of seconds");
    }
    if args.resolution < 16 {
        bail!("--resolution must be at least 16");
    }
    let deform = DeformConfig {
        color_threshold: args.threshold as f64,
        max_iters: args.max_iters,
        ..DeformConfig::default()
    };
    deform.validate()?;
    let cfg = RepairConfig {
        deform,
        resolution: args.resolution,
        rings: args.rings,
        timeout: Duration::from_secs_f64(args.timeout),
        ..RepairConfig::default()
    };
    let registry = BackendRegistry::default();
    let backend = registry.create(
        &args.backend,
        &BackendConfig {
            command: args.backend_cmd.clone(),
            scratch_dir: None,
        },
    )?;

    let jobs: Vec<(PathBuf, PathBuf)> = if args.input.len() == 1 && !args.output.is_dir() {
        vec![(args.input[0].clone(), args.output.clone())]
    } else {
        if args.report.is_some() {
            bail!("--report is only available with a single input");
        }
        std::fs::create_dir_all(&args.output)?;
        let mut names: Vec<_> = args.input.iter().filter_map(|p| p.file_name()).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) || names.len() != args.input.len() {
            bail!("batch inputs must have distinct file names");
        }
        args.input
            .iter()
            .map(|p| (p.clone(), args.output.join(p.file_name().expect("checked above"))))
            .collect()
    };

    let results: Vec<anyhow::Result<Outcome>> = jobs
        .par_iter()
        .map(|(input, output)| {
            let report = match &args.report {
                Some(r) => r.clone(),
                None => report_path(output),
            };
            repair_one(input, output, &report, backend.as_ref(), &args.backend, args.seed, &cfg)
        })
        .collect();
    let mut outcome = Outcome::Success;
    let mut first_error = None;
    for ((input, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(Outcome::BackendFailed) => outcome = Outcome::BackendFailed,
            Ok(Outcome::Success) => {}
            Err(e) => {
                log::error!("{}: {e:#}", input.display());
                first_error.get_or_insert(e.context(format!("repairing {}", input.display())));
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

fn repair_one(
    input: &Path,
    output: &Path,
    report_path: &Path,
    backend: &dyn curvrepair::inpaint::InpaintBackend,
    backend_name: &str,
    seed: u64,
    cfg: &RepairConfig,
) -> anyhow::Result<Outcome> {
    let mesh = load_mesh(input).with_context(|| format!("cannot read {}", input.display()))?;
    let mut run = RunReport {
        input: input.display().to_string(),
        output: output.display().to_string(),
        backend: backend_name,
        seed,
        config: cfg,
        validity: None,
        error: None,
        repair: None,
    };
    let (repaired, report) = match repair_mesh(&mesh, backend, cfg) {
        Ok(r) => r,
        Err(e) => {
            run.error = Some(e.to_string());
            write_json(report_path, &run)?;
            return Err(e.into());
        }
    };
    save_mesh(output, &repaired).with_context(|| format!("cannot write {}", output.display()))?;
    let outcome = if report.backend_failed() {
        Outcome::BackendFailed
    } else {
        Outcome::Success
    };
    run.validity = Some(validate(&repaired));
    run.repair = Some(report);
    write_json(report_path, &run)?;
    Ok(outcome)
}
