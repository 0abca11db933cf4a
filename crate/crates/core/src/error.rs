use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: unsupported mesh format")]
    UnsupportedFormat { path: PathBuf },
    #[error("non-manifold edge ({0}, {1}) is shared by {2} faces")]
    NonManifoldEdge(usize, usize, usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("topology: {0}")]
    Topology(String),
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("inpainting backend `{backend}` failed: {message}")]
    Backend { backend: String, message: String },
    #[error("inpainting backend `{backend}` timed out after {seconds:.1}s")]
    Timeout { backend: String, seconds: f64 },
    #[error("linear solve did not converge: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
