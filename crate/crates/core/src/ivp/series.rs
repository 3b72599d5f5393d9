use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

/// Relative change of `v` allowed between the origin and the handoff radius.
const HANDOFF_LIMIT: f64 = 1e-3;

/// Two Picard iterates of the integral equation
/// `v(r) = λ - ∫₀ʳ s^(1-n) ∫₀ˢ t^(n-1) K v^p dt ds` around the origin.
///
/// With `K(r) = Σ c_k r^(e_k)` near 0 this gives
///
/// ```text
/// v(r) = λ - λ^p Σ_k c_k r^(e_k+2) / ((e_k+2)(e_k+n))
///          + p λ^(2p-1) Σ_{j,k} c_j c_k r^(e_j+e_k+4) / ((e_k+2)(e_k+n)(e_j+e_k+4)(e_j+e_k+n+2))
/// ```
///
/// For `K = K0 + K2 r² + …` the `r⁴` coefficient is
/// `[p K0² λ^(2p-1)/(2n) - K2 λ^p] / (4(n+2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    lambda: f64,
    n: u32,
    /// `(coefficient, exponent)` pairs of `v - λ`.
    terms: Vec<(f64, f64)>,
}

impl SeriesExpansion {
    pub fn new(lambda: f64, k: &CurvatureProfile, params: &ProblemParams) -> Self {
        let (kterms, _) = k.origin_expansion();
        let n = params.nf();
        let p = params.p();
        let lp = lambda.powf(p);
        let l2p = p * lambda.powf(2.0 * p - 1.0);

        let mut terms = Vec::with_capacity(kterms.len() * (kterms.len() + 1));
        for &(c, e) in &kterms {
            terms.push((-lp * c / ((e + 2.0) * (e + n)), e + 2.0));
        }
        for &(cj, ej) in &kterms {
            for &(ck, ek) in &kterms {
                let m = ej + ek + 4.0;
                let denom = (ek + 2.0) * (ek + n) * m * (m + n - 2.0);
                terms.push((l2p * cj * ck / denom, m));
            }
        }
        Self {
            lambda,
            n: params.n(),
            terms,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(v(r), v'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r == 0.0 {
            return (self.lambda, 0.0);
        }
        let mut v = self.lambda;
        let mut dv = 0.0;
        for &(c, e) in &self.terms {
            let re = r.powf(e - 1.0);
            v += c * re * r;
            dv += c * e * re;
        }
        (v, dv)
    }

    /// `(v, r^(n-1) v')`, the integrator's state.
    pub(crate) fn state(&self, r: f64) -> [f64; 2] {
        let (v, dv) = self.eval(r);
        [v, r.powi(self.n as i32 - 1) * dv]
    }

    pub(crate) fn check_handoff(&self, r_start: f64) -> Result<()> {
        let (v, _) = self.eval(r_start);
        let change = (v - self.lambda).abs() / self.lambda;
        if !(change < HANDOFF_LIMIT) {
            return Err(Error::Start {
                r_start,
                relative_change: change,
            });
        }
        Ok(())
    }
}

/// `(v, v')` at the handoff radius from the series around the origin.
pub fn series_start(
    lambda: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    r_start: f64,
) -> Result<(f64, f64)> {
    if !(r_start >= 0.0 && r_start < 1.0) {
        return Err(Error::InvalidArgument(format!("r_start = {r_start} must lie in [0, 1)")));
    }
    let series = SeriesExpansion::new(lambda, k, params);
    series.check_handoff(r_start)?;
    Ok(series.eval(r_start))
}
