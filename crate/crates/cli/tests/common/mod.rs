#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvrepair::mesh::{primitives, save_mesh, TriMesh};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvrepair"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Icosphere (2562 vertices) with the 128 highest vertices and their faces
/// removed: one cap-shaped hole of 5% of the vertices.
pub fn cap_sphere() -> (TriMesh, TriMesh) {
    let sphere = primitives::icosphere(4);
    let mut z: Vec<f64> = sphere.positions().iter().map(|p| p.z).collect();
    z.sort_by(f64::total_cmp);
    let cut = z[z.len() - 128];
    let keep: Vec<bool> = sphere
        .faces()
        .iter()
        .map(|f| f.iter().all(|&v| sphere.position(v).z < cut))
        .collect();
    let (open, _) = sphere.retain_faces(&keep);
    (sphere, open)
}

pub fn write(dir: &Path, name: &str, mesh: &TriMesh) -> PathBuf {
    let p = dir.join(name);
    save_mesh(&p, mesh).expect("mesh written");
    p
}

/// Ten smooth closed toy models.
pub fn toy_models(dir: &Path, count: usize) -> Vec<PathBuf> {
    (0..count)
        .map(|i| {
            let m = if i % 2 == 0 {
                primitives::bumpy_sphere(3, 0.05 + 0.02 * i as f64, 2.0 + 0.5 * i as f64, i as f64)
            } else {
                primitives::ellipsoid(3, [1.0, 0.6 + 0.1 * i as f64, 0.8])
            };
            write(dir, &format!("toy{i:02}.ply"), &m)
        })
        .collect()
}

/// Every regular file under `root`, as sorted relative paths with contents.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}

/// Report JSON with every timing field removed.
pub fn without_timings(mut v: serde_json::Value) -> serde_json::Value {
    match &mut v {
        serde_json::Value::Object(map) => {
            map.remove("seconds");
            for (_, x) in map.iter_mut() {
                *x = without_timings(x.take());
            }
        }
        serde_json::Value::Array(items) => {
            for x in items.iter_mut() {
                *x = without_timings(x.take());
            }
        }
        _ => {}
    }
    v
}
