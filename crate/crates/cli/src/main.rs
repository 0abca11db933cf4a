//! `curvrepair`: batch hole filling, hole synthesis, dataset generation and
//! evaluation.

mod dataset;
mod eval;
mod holes;
mod repair;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "curvrepair",
    version,
    about = "Curvature-image guided hole filling for triangle meshes"
)]
struct Cli {
    /// Worker threads for batch work (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fill every hole of one or more meshes.
    Repair(repair::RepairArgs),
    /// Cut synthetic holes into a watertight mesh.
    MakeHoles(holes::MakeHolesArgs),
    /// Build the curvature-image training corpus.
    GenDataset(dataset::GenDatasetArgs),
    /// Compare a result against ground truth (meshes or PNG images).
    Eval(eval::EvalArgs),
    /// Print topology checks for a mesh as JSON.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the built-in inpainter over the external backend file protocol.
    #[command(hide = true)]
    Inpaint {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Non-error results that still need a distinct exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A backend failed and the coarse fill was written instead.
    BackendFailed,
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

fn validate(input: &Path) -> anyhow::Result<Outcome> {
    let mesh = curvrepair::mesh::load_mesh(input)?;
    let report = curvrepair::mesh::validate(&mesh);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(Outcome::Success)
}

fn inpaint(image: &Path, mask: &Path, output: &Path) -> anyhow::Result<Outcome> {
    let image = curvrepair::chart::RasterImage::load_png(image)?;
    let mask = curvrepair::chart::MaskImage::load_png(mask)?;
    curvrepair::inpaint::inpaint_builtin(&image, &mask)?.save_png(output)?;
    Ok(Outcome::Success)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global()?;
    }
    match cli.command {
        Command::Repair(args) => repair::run(args),
        Command::MakeHoles(args) => holes::run(args),
        Command::GenDataset(args) => dataset::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Validate { input } => validate(&input),
        Command::Inpaint { image, mask, output } => inpaint(&image, &mask, &output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::BackendFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
