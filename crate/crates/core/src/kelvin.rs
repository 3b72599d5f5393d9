//! Global solutions on `[0, ∞)` by Kelvin reflection, `v(r) = r^(2-n) v(1/r)` for `r > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::{signed_power, Trajectory};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

/// Relative finite-difference step used by [`GlobalSolution::global_residual`].
pub const FD_STEP: f64 = 1e-5;

/// Default outer radius for residual samples and profile export.
pub const DEFAULT_R_MAX: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct GlobalSolution {
    inner: Trajectory,
    params: ProblemParams,
    k: CurvatureProfile,
}

/// Reflects a positive trajectory on `[0, 1]` to `[0, ∞)`.
pub fn kelvin_extend(
    traj: Trajectory,
    k: &CurvatureProfile,
    params: &ProblemParams,
) -> Result<GlobalSolution> {
    if !k.is_symmetrized() {
        return Err(Error::Extension("a symmetrized curvature profile".into()));
    }
    if !traj.is_positive() {
        return Err(Error::Extension(format!(
            "a completed positive trajectory on [0, 1], got status {:?}",
            traj.status()
        )));
    }
    Ok(GlobalSolution {
        inner: traj,
        params: *params,
        k: k.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    /// `(r, |v'' + (n-1)/r v' + K v^p| / (K v^p))` per sample.
    pub samples: Vec<(f64, f64)>,
}

impl GlobalSolution {
    pub fn inner(&self) -> &Trajectory {
        &self.inner
    }

    pub fn lambda(&self) -> f64 {
        self.inner.lambda()
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.k
    }

    /// `(v(r), v'(r))` for `r >= 0`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || r.is_infinite() {
            return Err(Error::Domain {
                r,
                domain: "[0, ∞)".into(),
            });
        }
        if r <= 1.0 {
            return self.inner.eval(r);
        }
        let nf = self.params.nf();
        let (u, du) = self.inner.eval(1.0 / r)?;
        let v = r.powf(2.0 - nf) * u;
        let dv = (2.0 - nf) * r.powf(1.0 - nf) * u - r.powf(-nf) * du;
        Ok((v, dv))
    }

    /// `v'(1⁺) - v'(1⁻) = (2-n) v(1) - 2 v'(1) = -G(λ)`.
    pub fn derivative_jump(&self) -> f64 {
        let (v1, dv1) = self.inner.at_one().expect("positive trajectories reach r = 1");
        (2.0 - self.params.nf()) * v1 - 2.0 * dv1
    }

    /// Maximum normalized ODE residual over `samples ⊂ (1, r_max]`, with `v''` from a
    /// five-point central difference of the evaluator's `v'` at step `1e-5·r`.
    pub fn global_residual(&self, samples: &[f64], r_max: f64) -> Result<ResidualReport> {
        let mut out = Vec::with_capacity(samples.len());
        let mut max = 0.0_f64;
        for &r in samples {
            if !(r > 1.0 && r <= r_max) {
                return Err(Error::Domain {
                    r,
                    domain: format!("(1, {r_max}]"),
                });
            }
            let h = FD_STEP * r;
            let d = |x: f64| self.eval(x).map(|(_, dv)| dv);
            let ddv = (-d(r + 2.0 * h)? + 8.0 * d(r + h)? - 8.0 * d(r - h)? + d(r - 2.0 * h)?)
                / (12.0 * h);
            let (v, dv) = self.eval(r)?;
            let kr = self.k.eval(r)?;
            let source = kr * signed_power(v, self.params.p());
            let res = ((ddv + (self.params.nf() - 1.0) / r * dv + source) / source).abs();
            max = max.max(res);
            out.push((r, res));
        }
        Ok(ResidualReport { max, samples: out })
    }

    /// `v(r) r^(n-2)`, which tends to `λ` as `r → ∞`.
    pub fn decay_limit(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.0 * r.powf(self.params.nf() - 2.0))
    }
}
