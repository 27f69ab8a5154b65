use thiserror::Error;

#[derive(Debug, Error)]
pub enum SecError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate metric")]
    DegenerateMetric,
    #[error("bandwidth too small for requested M_s")]
    BandwidthTooSmall,
    #[error("degenerate cloud: all points coincide")]
    DegenerateCloud,
    #[error("dataset too small: {points} points, need at least {needed}")]
    DatasetTooSmall { points: usize, needed: usize },
    #[error("unknown dataset kind `{0}`")]
    UnknownDataset(String),
    #[error("duplicate rows {0} and {1} in point cloud")]
    DuplicatePoints(usize, usize),
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("frame kind mismatch: {0}")]
    KindMismatch(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl SecError {
    /// Stable, machine-parsable category name.
    pub fn category(&self) -> &'static str {
        match self {
            SecError::NotSquare { .. } | SecError::NotSymmetric { .. } | SecError::Shape(_) => "shape",
            SecError::NonFinite(_) => "non_finite",
            SecError::InvalidArgument(_) => "invalid_argument",
            SecError::DegenerateMetric => "degenerate_metric",
            SecError::BandwidthTooSmall => "bandwidth_too_small",
            SecError::DegenerateCloud => "degenerate_cloud",
            SecError::DatasetTooSmall { .. } => "dataset_too_small",
            SecError::UnknownDataset(_) => "unknown_dataset",
            SecError::DuplicatePoints(..) => "duplicate_points",
            SecError::Parse { .. } => "parse",
            SecError::EmptySpectrum => "empty_spectrum",
            SecError::Inconsistent(_) => "inconsistent",
            SecError::KindMismatch(_) => "kind_mismatch",
            SecError::Io { .. } => "io",
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        SecError::Io { context: context.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, SecError>;
