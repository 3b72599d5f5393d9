use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension n = {0} is not supported, need n >= 3")]
    Dimension(u32),

    #[error("invalid curvature profile: {0}")]
    Profile(String),

    #[error("radius {r} outside the domain {domain}")]
    Domain { r: f64, domain: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series start at r = {r_start} moves v by {relative_change:.3e}·λ (limit 1e-3); use a smaller r_start")]
    Start { r_start: f64, relative_change: f64 },

    #[error("step budget of {max_steps} exhausted at r = {r}")]
    StepBudget { max_steps: usize, r: f64 },

    #[error("step size underflow at r = {r} (h = {h:e})")]
    StepUnderflow { r: f64, h: f64 },

    #[error("Picard iteration diverged at iteration {iteration} (sup |v| = {sup:e})")]
    OracleDivergence { iteration: usize, sup: f64 },

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("no sign change on bracket [{lo}, {hi}]: G = {g_lo:e}, {g_hi:e}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("integration failed inside the bracket at λ = {lambda}: {reason}")]
    BracketInvalid { lambda: f64, reason: String },

    #[error("root at λ = {lambda} does not give a positive trajectory on [0, 1]")]
    RootNotPositive { lambda: f64 },

    #[error("existence predicate fails at the smallest probe λ = {lambda}")]
    SmallLambdaFailure { lambda: f64 },

    #[error("Kelvin extension requires {0}")]
    Extension(String),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
}
