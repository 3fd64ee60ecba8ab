use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no-arbitrage ordering 0 < D < R < U violated for asset {asset}: D={down}, R={growth}, U={up}")]
    ArbitrageViolation {
        asset: usize,
        down: f64,
        growth: f64,
        up: f64,
    },

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("initial price of asset {asset} must be positive, got {price}")]
    NonpositivePrice { asset: usize, price: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("node at level {level} has no successors in a {steps}-step market")]
    LevelOverflow { level: usize, steps: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("prefix has {found} columns but the node sits at level {expected}")]
    PrefixLevelMismatch { expected: usize, found: usize },

    #[error("conditioning event has zero probability")]
    ZeroMassEvent,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("vector is not sorted in non-increasing order")]
    NotSorted,

    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(f64),

    #[error("lower vertex measure undefined: sum of risk-neutral weights is {sum} > 1")]
    MassOverflow { sum: f64 },

    #[error("budget exceeded: {what} needs {required}, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("operation requires {expected} assets, market has {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("invalid weights: {0}")]
    WeightError(String),

    #[error("invalid payoff: {0}")]
    InvalidPayoff(String),

    #[error("payoff kind mismatch: {0}")]
    KindMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
