use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus: complementary parameter m1 = {m1} must lie in (0, 1]")]
    InvalidModulus { m1: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// No `n`-layer stationary solution exists: the modulus equation needs `n * eps < 1 / pi`.
    #[error(
        "no {n}-layer stationary solution for eps = {eps}: requires 0 < eps < 1/({n}*pi) = {bound}"
    )]
    NoStationarySolution { eps: f64, n: u32, bound: f64 },

    #[error(
        "eps = {eps} is too small: the modulus equation leaves the representable range of 1 - k^2"
    )]
    ModulusUnderflow { eps: f64 },

    #[error("hypothesis chi_n < delta violated: chi_n = {chi}, delta = {delta}")]
    HypothesisViolated { chi: f64, delta: f64 },

    #[error("cubic root refinement did not reach the residual target (residual {residual:e})")]
    IllConditioned { residual: f64 },

    #[error("lambda = {re} + {im}i is a pole of the resolvent")]
    Pole { re: f64, im: f64 },

    #[error("the cubic has no complex root pair at tau = {tau}")]
    NoComplexPair { tau: f64 },

    #[error("real part of the complex pair does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("non-finite state after t = {last_finite_t}")]
    BlowUp { last_finite_t: f64 },

    #[error("too few oscillation cycles: found {found} maxima, need at least 2")]
    TooFewCycles { found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("quadrature tolerance {requested:e} not met (error estimate {estimate:e})")]
    ToleranceNotMet { requested: f64, estimate: f64 },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
