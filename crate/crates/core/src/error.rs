use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a discriminant: {0}")]
    NotADiscriminant(i64),

    #[error("precision exhausted for discriminant {disc} after {bits} bits")]
    PrecisionExhausted { disc: i64, bits: u32 },

    #[error("quaternion context mismatch: ({0}, {1}) vs ({2}, {3})")]
    ContextMismatch(i64, i64, i64, i64),

    #[error("degenerate lattice: basis has rank below 4")]
    DegenerateLattice,

    #[error("no Ibukiyama parameters found for p = {0}")]
    NoParams(u64),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("family spec `{spec}`: {reason}")]
    FamilySpec { spec: String, reason: String },

    #[error("table parse error: {0}")]
    TableParse(String),

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
