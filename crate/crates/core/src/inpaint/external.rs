use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::InpaintBackend;
use crate::chart::{MaskImage, RasterImage};
use crate::{Error, Result};

/// Environment variable naming the parent directory for scratch workspaces.
pub const SCRATCH_ENV: &str = "CURVREPAIR_TMPDIR";

/// Runs a user command through `sh -c` over PNG files.
///
/// The template may contain `{image}`, `{mask}` and `{output}` placeholders.
/// Without any of them the three paths are appended as
/// `--image <p> --mask <p> --output <p>`.
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub template: String,
    pub scratch_dir: Option<PathBuf>,
}

impl ExternalBackend {
    pub fn new(template: impl Into<String>, scratch_dir: Option<PathBuf>) -> Self {
        Self {
            template: template.into(),
            scratch_dir,
        }
    }
}

impl InpaintBackend for ExternalBackend {
    fn id(&self) -> String {
        format!("external:{}", self.template)
    }

    fn inpaint(&self, image: &RasterImage, mask: &MaskImage, timeout: Duration) -> Result<RasterImage> {
        inpaint_external(&self.template, self.scratch_dir.as_deref(), image, mask, timeout)
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

fn command_line(template: &str, image: &Path, mask: &Path, output: &Path) -> String {
    let has_placeholder = ["{image}", "{mask}", "{output}"].iter().any(|p| template.contains(p));
    if has_placeholder {
        template
            .replace("{image}", &shell_quote(image))
            .replace("{mask}", &shell_quote(mask))
            .replace("{output}", &shell_quote(output))
    } else {
        format!(
            "{template} --image {} --mask {} --output {}",
            shell_quote(image),
            shell_quote(mask),
            shell_quote(output)
        )
    }
}

fn tail(path: &Path, max: usize) -> String {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    let text = text.trim_end();
    match text.char_indices().rev().nth(max) {
        Some((i, _)) => format!("...{}", &text[i..]),
        None => text.to_string(),
    }
}

/// One subprocess round trip: write inputs, run, read the output back.
pub fn inpaint_external(
    template: &str,
    scratch_dir: Option<&Path>,
    image: &RasterImage,
    mask: &MaskImage,
    timeout: Duration,
) -> Result<RasterImage> {
    let backend = format!("external:{template}");
    let fail = |message: String| Error::Backend {
        backend: backend.clone(),
        message,
    };
    let parent = scratch_dir
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(SCRATCH_ENV).map(PathBuf::from));
    let workspace = match &parent {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            tempfile::Builder::new().prefix("inpaint-").tempdir_in(dir)?
        }
        None => tempfile::Builder::new().prefix("inpaint-").tempdir()?,
    };
    let dir = workspace.path();
    let (image_path, mask_path, output_path) = (dir.join("image.png"), dir.join("mask.png"), dir.join("output.png"));
    image.save_png(&image_path)?;
    mask.save_png(&mask_path)?;
    let stderr_path = dir.join("stderr.txt");
    let cmd = command_line(template, &image_path, &mask_path, &output_path);
    log::debug!("running inpainting command: {cmd}");

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .current_dir(dir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(File::create(&stderr_path)?)
        .spawn()
        .map_err(|e| fail(format!("failed to start `sh`: {e}")))?;
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout {
                backend,
                seconds: timeout.as_secs_f64(),
            });
        }
        std::thread::sleep(Duration::from_millis(10));
    };
    if !status.success() {
        return Err(fail(format!(
            "command exited with {status}; stderr: {}",
            tail(&stderr_path, 2000)
        )));
    }
    if !output_path.exists() {
        return Err(fail(format!(
            "command succeeded but wrote no output image; stderr: {}",
            tail(&stderr_path, 2000)
        )));
    }
    let out = RasterImage::load_png(&output_path).map_err(|e| fail(format!("unreadable output image: {e}")))?;
    if (out.width, out.height) != (image.width, image.height) {
        return Err(fail(format!(
            "dimension mismatch: returned {}x{}, expected {}x{}",
            out.width, out.height, image.width, image.height
        )));
    }
    Ok(out)
}
