use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("sample rate {found} Hz does not match required {expected} Hz")]
    RateMismatch { found: u32, expected: u32 },
    #[error("signal too short: {len} samples, need at least {needed}")]
    SignalTooShort { len: usize, needed: usize },
    #[error("frame of {len} samples does not fit a {n_fft}-point transform")]
    FrameTooLong { len: usize, n_fft: usize },
    #[error("frame is identically zero")]
    ZeroFrame,
    #[error("chirp radius must be positive, got {0}")]
    RadiusNonPositive(f64),
    #[error("no voiced content found")]
    NoVoicedContent,
    #[error("need at least {needed} glottal closure instants, got {got}")]
    TooFewGcis { got: usize, needed: usize },
    #[error("phase unwrapping failed")]
    UnwrapFailure,
    #[error("degenerate glottal cycle: {0}")]
    DegenerateCycle(&'static str),
    #[error("empty stream")]
    EmptyStream,
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { got: usize, needed: usize },
    #[error("expected a {expected} spectrogram, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("no rows left after aligning feature streams")]
    EmptyAfterAlignment,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { got: usize, needed: usize },
    #[error("empty input")]
    Empty,
    #[error("label entropy is zero")]
    ZeroLabelEntropy,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("need at least {needed} patients per class, got {got}")]
    TooFewPatients { got: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::IoFailure { path, source }
        }
    }
}
