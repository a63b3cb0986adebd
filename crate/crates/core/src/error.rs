//! Error types, one enum per module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FfError {
    #[error("{0} is not a prime below 2^63")]
    NotPrime(u64),
    #[error("operands live in different fields or variables")]
    FieldMismatch,
    #[error("leading term is not invertible")]
    NonInvertibleLeadingTerm,
    #[error("compose needs an inner series with offset >= 1")]
    BadCompose,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuessError {
    #[error("no annihilator found up to order {max_order}")]
    NoAnnihilatorFound { max_order: usize },
    #[error("series has {have} terms, need {need}")]
    InsufficientTerms { have: usize, need: usize },
    #[error("no inhomogeneous relation found up to order {max_order}")]
    NoSolutionFound { max_order: usize },
    #[error("operator part vanishes: the series lies in the span of the bases")]
    DegenerateFit,
    #[error("indicial polynomial vanishes at n = {0}")]
    IndicialObstruction(i64),
    #[error("seed too short: {0}")]
    SeedTooShort(String),
    #[error(transparent)]
    Ff(#[from] FfError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("no power of two k <= {k_max} gives a stable lift")]
    NoConsistentK { k_max: u32 },
    #[error("no rational reconstruction within the half-modulus bound")]
    NoRationalFound,
    #[error("need at least {need} samples, have {have}")]
    InsufficientSamples { need: usize, have: usize },
    #[error("empty residue set")]
    Empty,
    #[error("duplicate prime {0}")]
    DuplicatePrime(u64),
    #[error(transparent)]
    Ff(#[from] FfError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpError {
    #[error("series too short: {have} terms for an operator of degree {degree}")]
    SeriesTooShort { have: usize, degree: usize },
    #[error("head polynomial vanishes modulo {0}")]
    BadReduction(u64),
    #[error("zero function has no first-order annihilator")]
    ZeroFunction,
    #[error("block schemes refer to different points: {0} vs {1}")]
    PointMismatch(String, String),
    #[error("divisor must have order >= 1")]
    ZeroOrderDivisor,
    #[error("zero operator")]
    ZeroOperator,
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Ff(#[from] FfError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalError {
    #[error("center is an irrational algebraic point; use the accidental-root path")]
    NotComputable,
    #[error("log depth budget {0} exceeded")]
    DepthBudgetExceeded(usize),
    #[error("polynomial has no simple root modulo {0}")]
    NoSplitRoot(u64),
    #[error("no annihilator of order <= {0} found for the probe series")]
    NoAnnihilator(usize),
    #[error("operator vanishes identically at the frame center")]
    DegenerateFrame,
    #[error("indicial polynomial has {0} irrational exponent(s)")]
    IrrationalExponents(usize),
    #[error("frame `{0}` does not apply to this field")]
    FrameMismatch(String),
    #[error(transparent)]
    Guess(#[from] GuessError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Ff(#[from] FfError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContError {
    #[error("comparison below the precision floor ({0} digits)")]
    BelowPrecision(f64),
    #[error("ill-conditioned: only {achieved:.1} digits achieved")]
    IllConditioned { achieved: f64 },
    #[error("midpoint outside one of the convergence disks")]
    DiskMismatch,
    #[error("need at least {need} usable terms, have {have}")]
    TooFewTerms { need: usize, have: usize },
    #[error("no stable rational limit")]
    NoStableRational,
    #[error("frame out of range: {0}")]
    FrameOutOfRange(String),
    #[error("fit residuals do not decay (relative residual {0:e})")]
    ModelMismatch(f64),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("map must have zero constant term and nonzero linear term")]
    BadMap,
    #[error("winding number {0} must be odd")]
    EvenWinding(i64),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Ff(#[from] FfError),
}
