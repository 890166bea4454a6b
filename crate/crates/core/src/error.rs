use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The surface handed to the Taylor decomposition is not of the `Y·ξ(X/Y)` form.
    #[error("structure mismatch: reconstruction rms {rms:.3e} rad exceeds tolerance {tol:.3e} rad")]
    StructureMismatch { rms: f64, tol: f64 },

    #[error("no isolated peak: {0}")]
    NoIsolatedPeak(String),

    #[error("image is identically zero")]
    ZeroImage,

    #[error("unknown dataset kind `{0}`")]
    UnknownKind(String),

    #[error("dataset kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("payload size mismatch: header implies {expected} bytes, payload has {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("unsupported dataset format version {0}")]
    Version(u32),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
