use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for player {player}: expected {expected}, got {got}")]
    DimensionMismatch {
        player: usize,
        expected: usize,
        got: usize,
    },
    #[error("answer index {answer} out of range for player {player} (answer count {count})")]
    AnswerOutOfRange {
        player: usize,
        answer: usize,
        count: usize,
    },
    #[error("question index {question} out of range (count {count})")]
    QuestionOutOfRange { question: usize, count: usize },
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid csp: {0}")]
    InvalidCsp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget exceeded: estimated cost {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty subset for player {player}")]
    EmptySubset { player: usize },
    #[error("no constraints: SAT value undefined")]
    NoConstraints,
    #[error("promise violated: found a profile of value {value}, inside the excluded gap ({low}, 1)")]
    PromiseViolation { value: f64, low: f64 },
    #[error("unbalanced formula: variable occurrence counts are not all equal")]
    Unbalanced,
    #[error("irregular graph: {0}")]
    IrregularGraph(String),
    #[error("non-boolean verifier: value {value} at index {index:?} is neither 0 nor 1")]
    NonBooleanVerifier { value: f64, index: Vec<usize> },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Evaluation-count ceiling for enumeration-heavy operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(100_000_000)
    }
}

impl Budget {
    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            Err(Error::BudgetExceeded {
                required,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}
