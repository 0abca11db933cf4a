//! Filling the white region of a curvature image.
//!
//! Backends implement [`InpaintBackend`] and are looked up by name in a
//! [`BackendRegistry`]. [`run_inpaint`] wraps every backend with the same
//! contract: equal dimensions in and out, and pixels outside the mask are
//! restored from the request image no matter what the backend returned.

mod builtin;
mod external;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::chart::{MaskImage, RasterImage};
use crate::{Error, Result};

pub use builtin::{inpaint_builtin, BuiltinBackend};
pub use external::{inpaint_external, ExternalBackend};

/// Default per-mesh time budget, also the default backend timeout.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(540);

pub trait InpaintBackend: Send + Sync {
    /// Stable identifier recorded in reports.
    fn id(&self) -> String;

    /// Fills `mask`-white pixels of `image`. Implementations may return any
    /// values outside the mask; [`run_inpaint`] restores them.
    fn inpaint(&self, image: &RasterImage, mask: &MaskImage, timeout: Duration) -> Result<RasterImage>;
}

/// Returns the image unchanged. The deformation stage sees target = current
/// and moves nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityBackend;

impl InpaintBackend for IdentityBackend {
    fn id(&self) -> String {
        "identity".into()
    }

    fn inpaint(&self, image: &RasterImage, _mask: &MaskImage, _timeout: Duration) -> Result<RasterImage> {
        Ok(image.clone())
    }
}

#[derive(Debug, Clone)]
pub struct InpaintRequest {
    pub image: RasterImage,
    pub mask: MaskImage,
    pub timeout: Duration,
}

#[derive(Debug, Clone)]
pub struct InpaintResult {
    pub image: RasterImage,
    pub backend_id: String,
    pub elapsed: f64,
}

/// Runs a backend under the shared contract.
pub fn run_inpaint(backend: &dyn InpaintBackend, request: &InpaintRequest) -> Result<InpaintResult> {
    let InpaintRequest { image, mask, timeout } = request;
    image.check_same_size(mask.width, mask.height)?;
    if timeout.is_zero() {
        return Err(Error::InvalidArgument("inpainting timeout must be positive".into()));
    }
    let start = Instant::now();
    let mut out = backend.inpaint(image, mask, *timeout)?;
    if (out.width, out.height) != (image.width, image.height) {
        return Err(Error::Backend {
            backend: backend.id(),
            message: format!(
                "dimension mismatch: returned {}x{}, expected {}x{}",
                out.width, out.height, image.width, image.height
            ),
        });
    }
    for ((o, &i), &m) in out.pixels.iter_mut().zip(&image.pixels).zip(&mask.bits) {
        if !m {
            *o = i;
        }
    }
    Ok(InpaintResult {
        image: out,
        backend_id: backend.id(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Options a backend factory may consult.
#[derive(Debug, Clone, Default)]
pub struct BackendConfig {
    /// Command template for subprocess backends.
    pub command: Option<String>,
    /// Parent directory for per-call scratch workspaces.
    pub scratch_dir: Option<PathBuf>,
}

pub type BackendFactory = fn(&BackendConfig) -> Result<Box<dyn InpaintBackend>>;

/// Backend constructors by name.
pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("builtin", |_| Ok(Box::new(BuiltinBackend::default())));
        r.register("identity", |_| Ok(Box::new(IdentityBackend)));
        r.register("external", |cfg| {
            let command = cfg
                .command
                .clone()
                .ok_or_else(|| Error::InvalidArgument("the external backend needs a command template".into()))?;
            Ok(Box::new(ExternalBackend::new(command, cfg.scratch_dir.clone())))
        });
        r
    }
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Adds or replaces a backend under `name`.
    pub fn register(&mut self, name: &str, factory: BackendFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, config: &BackendConfig) -> Result<Box<dyn InpaintBackend>> {
        let factory = self.factories.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown backend `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        factory(config)
    }
}
