//! The singular initial value problem
//!
//! ```text
//! v'' + (n-1)/r v' + K(r) v^p = 0,   v(0) = λ,   v'(0) = 0
//! ```
//!
//! integrated on `[0, 1]`. Near the origin the solution is taken from a two-term
//! Picard series; from the handoff radius on, the first-order system for
//! `(v, w)` with `w = r^(n-1) v'` is advanced by an adaptive Dormand–Prince 5(4)
//! pair whose continuous extension is kept as dense output.
//!
//! After every accepted step the state is projected back onto the level set of the
//! Pohozaev quantity `H(r, v, w)`, whose value is carried along by quadrature of
//! `H' = K' r^n |v|^(p+1)/(p+1)`. For large `λ` the unprojected error near the peak is
//! amplified by roughly `λ²` by the time it reaches `r = 1`.

mod dopri;
mod picard;
mod series;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

pub use picard::{picard_oracle, PicardTable};
pub use series::{series_start, SeriesExpansion};
pub use trajectory::{Trajectory, TrajectoryStatus};

/// Odd extension of the power map, `sgn(v)|v|^p`.
pub fn signed_power(v: f64, p: f64) -> f64 {
    v.signum() * v.abs().powf(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Series handoff radius; `None` selects `min(1e-4, 1e-2·λ^(-β))`.
    pub r_start: Option<f64>,
    /// `|v|` above `blowup_factor · λ` stops the run with `BlowUp`.
    pub blowup_factor: f64,
    pub zero_tol: f64,
    pub max_steps: usize,
    /// Keep integrating after `v` first reaches zero.
    pub continue_past_zero: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_start: None,
            blowup_factor: 1e8,
            zero_tol: 1e-13,
            max_steps: 1_000_000,
            continue_past_zero: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) || !positive(self.zero_tol) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if !(self.blowup_factor.is_finite() && self.blowup_factor > 1.0) {
            return Err(Error::InvalidArgument("blowup_factor must exceed 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        if let Some(r) = self.r_start {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("r_start = {r} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Handoff radius actually used for a given height and profile.
    pub fn effective_r_start(&self, lambda: f64, k: &CurvatureProfile, params: &ProblemParams) -> f64 {
        let r = self
            .r_start
            .unwrap_or_else(|| 1e-4_f64.min(1e-2 * lambda.powf(-params.beta())));
        let (_, radius) = k.origin_expansion();
        r.min(0.5 * radius)
    }
}

/// Integrates from the series handoff radius to `r = 1`, stopping at the first zero
/// of `v` (unless continuation is requested) or when `|v|` exceeds the blow-up bound.
pub fn integrate(
    lambda: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    opts.validate()?;
    let r_start = opts.effective_r_start(lambda, k, params);
    let series = SeriesExpansion::new(lambda, k, params);
    series.check_handoff(r_start)?;
    dopri::run(series, r_start, k, params, opts)
}
