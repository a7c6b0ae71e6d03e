use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },

    #[error("jet shape mismatch: ({0}, {1}) vs ({2}, {3}) (num_vars, order)")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("requested order {requested} exceeds available jet order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("division by a jet with zero constant term")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value not representable in exact arithmetic: {0}")]
    NotRepresentable(&'static str),

    #[error("invalid chart parameters: {0}")]
    InvalidChart(String),

    #[error("point {point:?} outside chart domain: {reason}")]
    OutsideDomain { point: Vec<f64>, reason: String },

    #[error("chart has no implicit equation")]
    NoImplicit,

    #[error("not an immersion at this point (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("second fundamental form is not definite")]
    Indefinite,

    #[error("singular linear system")]
    Singular,

    #[error("Weingarten residual {residual:e} exceeds tolerance {tol:e}")]
    WeingartenResidual { residual: f64, tol: f64 },

    #[error("jet order {have} insufficient: {what} needs order {need}")]
    InsufficientOrder { what: &'static str, need: usize, have: usize },

    #[error("chart carries no product-block metadata")]
    NoBlocks,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
