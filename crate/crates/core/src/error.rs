use thiserror::Error;

/// Errors raised by the formal calculus.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{name}` at byte {position}")]
    UnknownVariable { name: String, position: usize },

    #[error("exponent overflow at byte {position}")]
    ExponentOverflow { position: usize },

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("fiber variables present in a base-function argument")]
    FiberVariablesPresent,

    #[error("exponential series did not terminate after {iterations} iterations")]
    NonTerminating { iterations: usize },

    #[error("star product requires a constant tensor; entry ({row},{col}) is `{entry}`")]
    NonFlatTensor { row: usize, col: usize, entry: String },

    #[error("operator is not natural: grade {grade} has order {order}")]
    NotNatural { grade: u32, order: u32 },

    #[error("operator has a nonzero grade-0 part where a multiple of nu is required")]
    NotUnipotent,

    #[error("Kähler-Poisson condition {condition} violated at ({indices}): residual {residual}")]
    KahlerPoisson {
        condition: u8,
        indices: String,
        residual: String,
    },

    #[error("D-operators fail to commute: [{which}{i}, {which}{j}] leaves residual {residual}")]
    DOperatorCommutator {
        which: &'static str,
        i: usize,
        j: usize,
        residual: String,
    },

    #[error("Hamiltonian reconstruction inconsistent at degree {degree}: {detail}")]
    Reconstruction { degree: u32, detail: String },

    #[error("Hamiltonian has filtration degree {0}, expected at least 2")]
    FiltrationTooLow(String),

    #[error("insufficient valid order: need fiber order {needed}, have {available}")]
    InsufficientOrder { needed: i32, available: i32 },

    #[error("word length {length} exceeds the cap {cap}")]
    WordTooLong { length: usize, cap: usize },

    #[error("family is not coherent: {0}")]
    Incoherent(String),

    #[error("auxiliary operator check failed: {0}")]
    AuxiliaryOperator(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
