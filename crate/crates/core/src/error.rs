use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NonPrime(u64),
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u32 },
    #[error("parameter outside the supported envelope: {0}")]
    Envelope(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("Witt structure polynomial exceeds the configured budget ({0})")]
    OverflowGuard(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("values live over different fields")]
    FieldMismatch,
    #[error("bad target length {target} for operator on length {len}")]
    BadTarget { len: usize, target: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("relation violated: {0}")]
    RelationViolation(String),
    #[error("twist violation: {0}")]
    TwistViolation(String),
    #[error("annihilator violation: {0}")]
    AnnihilatorViolation(String),
    #[error("maps at position {0} are not composable")]
    NotComposable(usize),
    #[error("map at position {0} does not commute with F and V")]
    NotEquivariant(usize),
    #[error("precision exceeded: {0}")]
    PrecisionExceeded(String),
    #[error("truncation unstable: {0}")]
    UnstableTruncation(String),
    #[error("missing degree {0} in packet")]
    MissingDegree(i64),
    #[error("missing de Rham data (o/b/d) in degree {0}")]
    MissingDeRhamData(i64),
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("isomorphism search budget exceeded")]
    BudgetExceeded,
}

impl Error {
    pub fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExceeded(_) | Error::UnstableTruncation(_) => 2,
            Error::BudgetExceeded => 3,
            _ => 1,
        }
    }
}
