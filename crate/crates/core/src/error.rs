use thiserror::Error;

/// Errors raised by structure validation and the analyses built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown symbol `{symbol}` in tuple {tuple}")]
    UnknownSymbol { symbol: String, tuple: String },
    #[error("arity mismatch in tuple {tuple}: `{symbol}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        symbol: String,
        tuple: String,
        expected: usize,
        found: usize,
    },
    #[error("tuple {tuple} references undeclared element `{element}`")]
    DanglingElement { tuple: String, element: String },
    #[error("frontier references undeclared element `{0}`")]
    DanglingFrontier(String),
    #[error("invalid language: {0}")]
    InvalidLanguage(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("radius {requested} exceeds the faithful radius {available} of `{element}`")]
    UnfaithfulRadius {
        element: String,
        requested: u32,
        available: u32,
    },
    #[error("structures are over different languages")]
    LanguageMismatch,
    #[error("no element of the window is faithful at radius {0}")]
    NoFaithfulElements(u32),
    #[error("window exhausted: {0}")]
    WindowExhausted(String),
    #[error("relation is not functional: `{symbol}` from position {i} to {j} at `{element}`")]
    NotFunctional {
        symbol: String,
        i: usize,
        j: usize,
        element: String,
    },
    #[error("structure is not equational: {0}")]
    NotEquational(String),
    #[error("map is not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("quotients require a closed window (empty frontier)")]
    NonClosedWindow,
    #[error("generated group exceeds {0} elements")]
    GroupClosureExceedsBound(usize),
    #[error("gluing conflict at `{element}`: {detail}")]
    GluingConflict {
        element: String,
        detail: String,
        word: Option<String>,
    },
    #[error("no orbit representative for `{0}` inside the window")]
    NoOrbitRepresentative(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("no period of rank at most {0} detected")]
    RankBoundExceeded(usize),
    #[error("hypothesis not certified: {0}")]
    HypothesisUnverified(String),
    #[error("rigidity characterization fails: {0}")]
    CharacterizationFails(String),
    #[error("slope must be irrational")]
    RationalSlope,
    #[error("address entry {entry} outside 1..={k}")]
    BadAddressEntry { entry: u8, k: usize },
    #[error("invalid word step `{0}`")]
    BadStep(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid number literal `{0}`")]
    BadNumber(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
