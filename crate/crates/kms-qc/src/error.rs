use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p-adic context mismatch: {0}")]
    ContextMismatch(String),
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("{0} is not a quadratic residue mod p")]
    NonResidue(String),
    #[error("odd valuation {0} has no square root")]
    OddValuation(i64),
    #[error("valuation {0} is nonzero")]
    NonzeroValuation(i64),
    #[error("matrix is singular at working precision")]
    Singular,
    #[error("nonzero residue {0} where a residue-free series was required")]
    Residue(String),
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
