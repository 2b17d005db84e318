use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { value: String },

    #[error("malformed probability literal {literal:?}: {reason}")]
    MalformedLiteral { literal: String, reason: String },

    #[error("brute-force enumeration refuses n = {n} (limit {limit})")]
    SizeLimit { n: usize, limit: usize },

    #[error("operation requires a non-empty parameter vector")]
    EmptyParams,

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{op} requires the exact backend")]
    FloatBackend { op: &'static str },

    #[error("mass function has a zero at index {index}; mixing coefficients are undefined")]
    ZeroMass { index: usize },

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("index k = {k} outside 0..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("B_{p}({k}) is undefined (needs p <= k+1 and k+1 <= {n})")]
    BUndefined { p: usize, k: usize, n: usize },

    #[error("Q_{{m,p}} needs at least one argument")]
    EmptyArguments,

    #[error("degree {m} is below -1")]
    NegativeDegree { m: i64 },

    #[error("length mismatch: {what} (expected {expected}, got {got})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("moment order r must be at least 1")]
    ZeroOrder,

    #[error("entropy order q = {q} is invalid: {reason}")]
    InvalidOrder { q: f64, reason: &'static str },

    #[error("alpha = {alpha} lies outside [0, 1]")]
    AlphaOutOfRange { alpha: f64 },

    #[error("|x| = {x} exceeds 1")]
    ArgumentOutOfRange { x: f64 },

    #[error("step h = {h} moves p_n = {base} outside [0, 1]")]
    StepOutOfRange { h: f64, base: f64 },

    #[error("parameters violate the (0, 1/2] constraint at position {index}")]
    ConstraintViolation { index: usize },

    #[error("search q range must lie inside (0, 2], got [{lo}, {hi}]")]
    QRange { lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
