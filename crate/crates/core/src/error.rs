use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CknError {
    #[error("dimension d = {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("weight vector has {got} entries, expected d = {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("exponent A_{index} = {value} is negative or not finite")]
    NegativeExponent { index: usize, value: f64 },
    #[error("b - a = {0} is the excluded Hardy endpoint (b = a + 1)")]
    HardyEndpoint(f64),
    #[error("b - a = {0} is outside [0, 1)")]
    DeltaOutOfRange(f64),
    #[error("a = {a} is not below the critical value a_c = (D-2)/2 = {a_c}")]
    AboveCritical { a: f64, a_c: f64 },
    #[error("D - 2 + 2(b - a) = {0} is not positive, the critical exponent is infinite")]
    InfiniteExponent(f64),
    #[error("non-finite parameter {0}")]
    NonFinite(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point outside the chart domain: {0}")]
    ChartDomain(String),
    #[error("deterministic sphere rules support d in {{2, 3}}, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("quadrature did not converge by {nodes} nodes (last relative change {rel_change:e})")]
    NonConvergence { nodes: usize, rel_change: f64 },
    #[error("ill-conditioned Gram matrix: {0}")]
    IllConditioned(String),
    #[error("negative mass {value} in chamber {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("test function support violation: {0}")]
    SupportViolation(String),
    #[error("test function is not positive (min {0})")]
    PositivityViolation(f64),
}

pub type Result<T> = std::result::Result<T, CknError>;
