use thiserror::Error;

use crate::symbolic::Word;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("digit decision at position {position} is within {distance:e} of a tie (input uncertainty {uncertainty:e})")]
    PrecisionBreach {
        position: usize,
        distance: f64,
        uncertainty: f64,
    },
    #[error("alpha = {alpha} lies outside [0, {upper}]")]
    OutOfRange { alpha: f64, upper: f64 },
    #[error("not a quasi-greedy expansion of 1: {0}")]
    NotQuasiGreedy(String),
    #[error("beta must exceed 1, got {0}")]
    InvalidBeta(f64),
    #[error("admissibility undecided: expansion of 1 known to {depth} digits only")]
    UnknownAtDepth { depth: usize },
    #[error("language at depth {depth} exceeds the cap of {cap} words")]
    LanguageCap { depth: usize, cap: usize },
    #[error("word {0} is not admissible")]
    Inadmissible(Word),
    #[error("table key {0} is not an admissible word of the potential's depth")]
    InadmissibleTableKey(String),
    #[error("potential table is missing word {0}")]
    MissingTableKey(Word),
    #[error("cylinder depth {depth} is smaller than the potential depth {potential_depth}")]
    DepthMismatch { depth: usize, potential_depth: usize },
    #[error("transfer operator is not primitive at depth {depth}")]
    NonPrimitive { depth: usize },
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("transpose potential depends on the filler at {word} (spread {spread:e})")]
    FillerDependence { word: Word, spread: f64 },
    #[error("pair is not bilateral admissible at resolution {resolution}")]
    NotBilateral { resolution: usize },
    #[error("kernel eigenfunction mismatch: {0}")]
    EigenMismatch(String),
    #[error("extrapolation ill-conditioned: residual {residual:e} exceeds {bound:e}")]
    IllConditioned { residual: f64, bound: f64 },
    #[error("at t = {t}: {source}")]
    AtTemperature { t: f64, source: Box<Error> },
    #[error("eigenvalue route gives m = {eigen}, orbit oracle gives {oracle}")]
    OracleMismatch { eigen: f64, oracle: f64 },
    #[error("gamma estimates disagree: {via_constant} from c_t/t, {via_sup} from the direct supremum")]
    EstimateDivergence { via_constant: f64, via_sup: f64 },
    #[error("boundary term did not settle to gamma (gap {gap:e})")]
    BoundaryDivergence { gap: f64 },
    #[error("maximizing measure is not unique: {0}")]
    NonUniqueMaximizer(String),
    #[error("config error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema { .. }
            | Error::Parse(_)
            | Error::InvalidBeta(_)
            | Error::OutOfRange { .. }
            | Error::InadmissibleTableKey(_)
            | Error::MissingTableKey(_)
            | Error::DepthMismatch { .. }
            | Error::LanguageCap { .. }
            | Error::NotQuasiGreedy(_) => 1,
            Error::Inadmissible(_)
            | Error::NotBilateral { .. }
            | Error::UnknownAtDepth { .. }
            | Error::PrecisionBreach { .. } => 2,
            Error::NoConvergence { .. }
            | Error::IllConditioned { .. }
            | Error::NonPrimitive { .. }
            | Error::EigenMismatch(_)
            | Error::FillerDependence { .. }
            | Error::OracleMismatch { .. }
            | Error::EstimateDivergence { .. }
            | Error::BoundaryDivergence { .. } => 3,
            Error::AtTemperature { source, .. } => source.exit_code(),
            Error::NonUniqueMaximizer(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
