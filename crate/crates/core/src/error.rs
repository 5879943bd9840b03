use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed data on line {line}: {reason}")]
    MalformedData { line: usize, reason: String },

    #[error("point count mismatch: header declares {declared}, found {found}")]
    CountMismatch { declared: usize, found: usize },

    #[error("non-finite value: {0}")]
    NonFiniteValue(String),

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("degenerate reference frame: {0}")]
    DegenerateCloud(String),

    #[error("bad resolution {width}x{height}: both sides must be at least 4")]
    BadResolution { width: usize, height: usize },

    #[error("bad descriptor config: {0}")]
    BadConfig(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("descriptor mismatch: expected `{expected}`, found `{found}`")]
    DescriptorMismatch { expected: String, found: String },

    #[error("pooled feature is the zero vector")]
    ZeroVector,

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("no ask events to compute accuracy from")]
    NoPredictions,

    #[error("no accuracy window was completed")]
    NoWindows,

    #[error("dataset too small: {0}")]
    DatasetTooSmall(String),

    #[error("invalid protocol config: {0}")]
    ConfigInvalid(String),

    #[error("grasp position {0:?} lies outside the object region")]
    PoseOutsideObject([f64; 3]),

    #[error("invalid gripper pose: {0}")]
    InvalidPose(String),

    #[error("template store is empty")]
    EmptyStore,

    #[error("nothing to summarize")]
    EmptyReports,

    #[error("unsupported snapshot: {0}")]
    UnsupportedSnapshot(String),
}
