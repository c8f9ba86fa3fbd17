use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid level model: {0}")]
    InvalidLevelModel(String),

    #[error("invalid qudit spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("level model fit needs at least 2 transition frequencies, got {0}")]
    Underdetermined(usize),

    #[error("transition {transition} appears more than once in one segment")]
    DuplicateTone { transition: usize },

    #[error("transition {transition} does not exist in a {n_levels}-level system")]
    TransitionOutOfRange { transition: usize, n_levels: usize },

    #[error("level {level} does not exist in a {n_levels}-level system")]
    LevelOutOfRange { level: usize, n_levels: usize },

    #[error("invalid drive tone on transition {transition}: {reason}")]
    InvalidTone { transition: usize, reason: String },

    #[error("invalid segment duration {0} ns")]
    InvalidDuration(f64),

    #[error("matrix is not Hermitian (max deviation {deviation:e} MHz)")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalised (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("Rabi rate must be positive for a Grover period")]
    ZeroRabi,

    #[error("searched level {level} is outside the driven band {lo}..={hi}")]
    UndrivenSearchedLevel { level: usize, lo: usize, hi: usize },

    #[error("no accepted shots with initial level {0}")]
    EmptyRow(usize),

    #[error("tone at {freq_ghz} GHz violates Nyquist for {sample_rate_gsps} GS/s")]
    Nyquist { freq_ghz: f64, sample_rate_gsps: f64 },

    #[error("summed tone amplitude {total} exceeds full scale")]
    AmplitudeOverflow { total: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
