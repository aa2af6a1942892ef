use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is not primitive (no positive power up to exponent {bound})")]
    NonPrimitive { bound: usize },
    #[error("Jordan chain construction failed for eigenvalue {mu}: {reason}")]
    DegenerateChain { mu: String, reason: String },
    #[error("symbol {symbol} out of range 1..={dim}")]
    SymbolOutOfRange { symbol: usize, dim: usize },
    #[error("block is not allowable: {0}")]
    NotAllowable(String),
    #[error("enumeration of {count} blocks exceeds the cap {cap}")]
    DepthTooLarge { count: String, cap: u64 },
    #[error("seed is not in the nonnilpotent subspace (residual {residual:.3e})")]
    SeedNotNonNilpotent { residual: f64 },
    #[error("{0} is not a nonzero eigenvalue")]
    NotAnEigenvalue(String),
    #[error("eigenvalue {0} is not simple")]
    EigenvalueNotSimple(String),
    #[error("chain index {index} exceeds chain length {len}")]
    IndexExceedsChain { index: usize, len: usize },
    #[error("depth {depth} is beyond the numerically safe range (cap {cap})")]
    DepthOverflow { depth: usize, cap: usize },
    #[error("transfer operator needs depth at least 2")]
    DepthUnderflow,
    #[error("pairing does not converge: lambda/(r1*r2) = {ratio:.6}")]
    NonConvergent { ratio: f64 },
    #[error("declared bound violated: oscillation {oscillation:.3e} exceeds {bound:.3e} on block {block}")]
    BoundViolated { block: String, oscillation: f64, bound: f64 },
    #[error("grid function depth mismatch: {0}")]
    DepthMismatch(String),
    #[error("block does not start with the chart base symbol {base}")]
    WrongBaseSymbol { base: usize },
    #[error("staf is not unstable (r = {r})")]
    StafNotUnstable { r: f64 },
    #[error("point {x} is outside [0, {a}]")]
    BadPoint { x: f64, a: f64 },
    #[error("Hölder exponents sum to {sum:.4}, need more than 1")]
    ExponentSumTooSmall { sum: f64 },
    #[error("|mu| = {modulus} is not expanding")]
    NotExpanding { modulus: f64 },
    #[error("class functional is not a (generalized) left eigenvector: defect {defect:.3e}")]
    ClassNotEigen { defect: f64 },
    #[error("no generalized class vector: {0}")]
    NoGeneralizedClass(String),
    #[error("invalid torus map: {0}")]
    InvalidMap(String),
    #[error("no samples in window")]
    WindowEmpty,
    #[error("insufficient scales: {0}")]
    InsufficientScales(String),
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("iteration did not converge after {iterations} steps (last change {last:.3e})")]
    NotConverged { iterations: usize, last: f64 },
}

impl Error {
    /// Short variant name, used by front ends when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::NonPrimitive { .. } => "NonPrimitive",
            Error::DegenerateChain { .. } => "DegenerateChain",
            Error::SymbolOutOfRange { .. } => "SymbolOutOfRange",
            Error::NotAllowable(_) => "NotAllowable",
            Error::DepthTooLarge { .. } => "DepthTooLarge",
            Error::SeedNotNonNilpotent { .. } => "SeedNotNonNilpotent",
            Error::NotAnEigenvalue(_) => "NotAnEigenvalue",
            Error::EigenvalueNotSimple(_) => "EigenvalueNotSimple",
            Error::IndexExceedsChain { .. } => "IndexExceedsChain",
            Error::DepthOverflow { .. } => "DepthOverflow",
            Error::DepthUnderflow => "DepthUnderflow",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::BoundViolated { .. } => "BoundViolated",
            Error::DepthMismatch(_) => "DepthMismatch",
            Error::WrongBaseSymbol { .. } => "WrongBaseSymbol",
            Error::StafNotUnstable { .. } => "StafNotUnstable",
            Error::BadPoint { .. } => "BadPoint",
            Error::ExponentSumTooSmall { .. } => "ExponentSumTooSmall",
            Error::NotExpanding { .. } => "NotExpanding",
            Error::ClassNotEigen { .. } => "ClassNotEigen",
            Error::NoGeneralizedClass(_) => "NoGeneralizedClass",
            Error::InvalidMap(_) => "InvalidMap",
            Error::WindowEmpty => "WindowEmpty",
            Error::InsufficientScales(_) => "InsufficientScales",
            Error::InvalidSamples(_) => "InvalidSamples",
            Error::NotConverged { .. } => "NotConverged",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
