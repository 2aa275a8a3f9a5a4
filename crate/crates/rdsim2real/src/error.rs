//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Command-line contract violation (missing flag, wrong combination).
    #[error("usage: {0}")]
    Usage(String),

    /// Invalid or inconsistent radar/scenario configuration.
    #[error("config: {0}")]
    Config(String),

    /// A scene violates a kinematic or label constraint.
    #[error("scene: {0}")]
    Scene(String),

    /// A scatterer left the unambiguous range/velocity region during simulation.
    #[error("simulation: {0}")]
    Simulation(String),

    /// Dimension or value-range violation in the processing pipeline.
    #[error("processing: {0}")]
    Processing(String),

    /// Invalid metric computation (length mismatch, empty matrix, zero row).
    #[error("metrics: {0}")]
    Metrics(String),

    /// Training diverged or was misconfigured.
    #[error("training: {0}")]
    Training(String),

    /// A frame blob referenced by a manifest does not exist on disk.
    #[error("dataset: missing frame file {path}")]
    MissingFrameFile { path: PathBuf },

    /// A frame blob has the wrong number of cells for the declared shape.
    #[error("dataset: shape mismatch in {path}: expected {expected} cells, found {found}")]
    ShapeMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    /// Manifest version is not supported by this build.
    #[error("dataset: unsupported manifest version {found} (expected {expected})")]
    ManifestVersion { expected: u32, found: u32 },

    /// Any other dataset-level inconsistency.
    #[error("dataset: {0}")]
    Dataset(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("png: {0}")]
    Png(#[from] png::EncodingError),
}

impl Error {
    /// Short machine-parsable category used by the CLI's one-line error output.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Config(_) => "config",
            Error::Scene(_) | Error::Simulation(_) => "simulation",
            Error::Processing(_) => "processing",
            Error::Metrics(_) => "metrics",
            Error::Training(_) => "training",
            Error::MissingFrameFile { .. }
            | Error::ShapeMismatch { .. }
            | Error::ManifestVersion { .. }
            | Error::Dataset(_) => "dataset",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Png(_) => "png",
        }
    }
}
