use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use curvrepair::features::synthesize_holes;
use curvrepair::mesh::{load_mesh, save_mesh};

use crate::{write_json, Outcome};

#[derive(Debug, Args)]
pub struct MakeHolesArgs {
    /// Watertight single-component mesh.
    #[arg(long)]
    input: PathBuf,
    /// Damaged mesh; the hole list is written next to it as `<stem>.holes.json`.
    #[arg(long)]
    output: PathBuf,
    /// Number of holes.
    #[arg(long, default_value_t = 5)]
    holes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(args: MakeHolesArgs) -> anyhow::Result<Outcome> {
    let mesh = load_mesh(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let (damaged, specs) = synthesize_holes(&mesh, args.holes, args.seed)?;
    save_mesh(&args.output, &damaged).with_context(|| format!("cannot write {}", args.output.display()))?;
    let stem = args
        .output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_json(&args.output.with_file_name(format!("{stem}.holes.json")), &specs)?;
    Ok(Outcome::Success)
}
