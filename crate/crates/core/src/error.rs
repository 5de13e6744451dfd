use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("arithmetic mode mismatch")]
    ArithMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("inverse bound hypothesis violated: |1/f|_R * |g|_R = {0} >= 1")]
    InverseBound(f64),
    #[error("Lie morphism is not injective: rank {rank} < l = {l}")]
    NotInjective { rank: usize, l: usize },
    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("no regular element found after {0} attempts")]
    NoRegularElement(usize),
    #[error("not in the first-integral module: {0}")]
    NotInModule(String),
    #[error("Cartan-type certificate fails: {0}")]
    CartanViolation(String),
    #[error("cohomological solve inconsistent: {0}")]
    SolveInconsistent(String),
    #[error("family does not commute: {0}")]
    CommutationFailure(String),
    #[error("linear part: {0}")]
    LinearPart(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
