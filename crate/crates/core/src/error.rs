use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of colours must be at least 2, got {0}")]
    TooFewColours(u64),

    #[error("colour {value} out of range for {what} (must be < {bound})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    #[error("cycle length must be at least 3, got {0}")]
    CycleTooShort(usize),

    #[error("odd cycle length required, got {0}")]
    EvenCycle(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} needs {required} candidates but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("trivial protocol: the fixed set is empty")]
    TrivialProtocol,

    #[error("invalid index order: need {0}")]
    IndexOrder(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
