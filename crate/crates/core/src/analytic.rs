//! Closed-form and asymptotic oracles.
//!
//! For constant curvature `K ≡ K0` the solution of the initial value problem is the
//! bubble
//!
//! ```text
//! V_λ(r) = λ / [1 + λ^(2β) K0 r² / (n(n-2))]^(1/β),   β = 2/(n-2)
//! ```
//!
//! Everything else here is either a small-λ expansion, the quantities entering the
//! a-priori bound `γ(ε) < ½ (n/‖K‖∞)^(1/(p-1)) ⇒ |v| < 2γ(ε)` on `[ε, 1]`, or the
//! leading large-λ behaviour of the gluing function.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivp::Trajectory;
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;
use crate::quad;

/// Absolute tolerance for the nested integrals `I` and `J`.
pub const EXPANSION_TOL: f64 = 1e-12;

/// Points of `[ε, 1]` at which the a-priori bound is checked.
pub const BOUND_GRID: usize = 1000;

/// `λ^(2β) K0 / (n(n-2))`, the squared inverse length scale of the bubble.
fn bubble_scale(lambda: f64, k0: f64, params: &ProblemParams) -> f64 {
    lambda.powf(2.0 * params.beta()) * k0 / params.yamabe_constant()
}

pub fn bubble(lambda: f64, k0: f64, params: &ProblemParams, r: f64) -> f64 {
    let c = bubble_scale(lambda, k0, params);
    lambda * (1.0 + c * r * r).powf(-1.0 / params.beta())
}

pub fn bubble_derivative(lambda: f64, k0: f64, params: &ProblemParams, r: f64) -> f64 {
    let c = bubble_scale(lambda, k0, params);
    let b = params.beta();
    -(2.0 / b) * lambda * c * r * (1.0 + c * r * r).powf(-1.0 / b - 1.0)
}

pub fn bubble_second_derivative(lambda: f64, k0: f64, params: &ProblemParams, r: f64) -> f64 {
    let c = bubble_scale(lambda, k0, params);
    let b = params.beta();
    let m = 1.0 / b + 1.0;
    let q = 1.0 + c * r * r;
    let a = (2.0 / b) * lambda * c;
    -a * q.powf(-m) + a * m * 2.0 * c * r * r * q.powf(-m - 1.0)
}

/// `G(λ)` for constant curvature, `(n-2)V_λ(1) + 2V_λ'(1) = (n-2) λ (1-x)(1+x)^(-1/β-1)`
/// with `x = λ^(2β) K0/(n(n-2))`.
pub fn bubble_gluing(lambda: f64, k0: f64, params: &ProblemParams) -> f64 {
    let x = bubble_scale(lambda, k0, params);
    (params.nf() - 2.0) * lambda * (1.0 - x) * (1.0 + x).powf(-1.0 / params.beta() - 1.0)
}

/// Leading term `[n(n-2)/K0]^((n-2)/2) (2-n) / λ` of `G(λ)` as `λ → ∞`.
pub fn large_lambda_g_prediction(k0: f64, params: &ProblemParams, lambda: f64) -> f64 {
    let nf = params.nf();
    (params.yamabe_constant() / k0).powf((nf - 2.0) / 2.0) * (2.0 - nf) / lambda
}

/// First-order small-λ expansion of `(v_λ(r), v_λ'(r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPair {
    pub v_approx: f64,
    pub dv_approx: f64,
    /// `∫₀ʳ s^(1-n) ∫₀ˢ t^(n-1) K dt ds`
    pub i: f64,
    /// `∫₀ʳ t^(n-1) K dt`
    pub j: f64,
}

/// Running inner integral `J(s)`, accumulated from the nearest radius already visited.
struct InnerIntegral<'a> {
    k: &'a CurvatureProfile,
    nm1: i32,
    known: Vec<(f64, f64)>,
}

impl InnerIntegral<'_> {
    fn at(&mut self, s: f64) -> Result<f64> {
        let idx = self.known.partition_point(|(x, _)| *x <= s);
        let (s0, j0) = self.known[idx - 1];
        if s0 == s {
            return Ok(j0);
        }
        let (k, nm1) = (self.k, self.nm1);
        let j = j0 + quad::integrate(|t| t.powi(nm1) * k.eval_unit(t), s0, s, 1e-2 * EXPANSION_TOL)?;
        self.known.insert(idx, (s, j));
        Ok(j)
    }
}

/// Nested integrals `(I(r), J(r))` for `r` in `[0, 1]`.
pub fn expansion_integrals(k: &CurvatureProfile, params: &ProblemParams, r: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain {
            r,
            domain: "[0, 1]".into(),
        });
    }
    let nm1 = params.n() as i32 - 1;
    let inner = RefCell::new(InnerIntegral {
        k,
        nm1,
        known: vec![(0.0, 0.0)],
    });
    let failure = RefCell::new(None);
    let i = quad::integrate(
        |s| match inner.borrow_mut().at(s) {
            Ok(j) => j / s.powi(nm1),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        r,
        EXPANSION_TOL,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let j = inner.borrow_mut().at(r)?;
    Ok((i, j))
}

/// `v ≈ λ - λ^p I(r)`, `v' ≈ -λ^p r^(1-n) J(r)`.
pub fn corollary1_expansion(
    lambda: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    r: f64,
) -> Result<AsymptoticPair> {
    let (i, j) = expansion_integrals(k, params, r)?;
    let lp = lambda.powf(params.p());
    let dv_approx = if r == 0.0 {
        0.0
    } else {
        -lp * j / r.powi(params.n() as i32 - 1)
    };
    Ok(AsymptoticPair {
        v_approx: lambda - lp * i,
        dv_approx,
        i,
        j,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Data {
    pub epsilon: f64,
    /// `v(ε) + ε v'(ε)/(n-2)`
    pub a: f64,
    /// `-ε^(n-1) v'(ε)/(n-2)`
    pub b: f64,
    /// `|a| + |b ε^(2-n)| = |v + ε v'/(n-2)| + |ε v'/(n-2)|`
    pub gamma: f64,
    /// `½ (n/‖K‖∞)^(1/(p-1))`
    pub threshold: f64,
}

pub fn lemma1_threshold(k: &CurvatureProfile, params: &ProblemParams) -> f64 {
    0.5 * (params.nf() / k.sup_norm()).powf(1.0 / (params.p() - 1.0))
}

pub fn lemma1_data(
    traj: &Trajectory,
    epsilon: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
) -> Result<Lemma1Data> {
    let (v, dv) = traj.eval(epsilon)?;
    let nm2 = params.nf() - 2.0;
    let a = v + epsilon * dv / nm2;
    let b = -epsilon.powi(params.n() as i32 - 1) * dv / nm2;
    Ok(Lemma1Data {
        epsilon,
        a,
        b,
        gamma: a.abs() + (epsilon * dv / nm2).abs(),
        threshold: lemma1_threshold(k, params),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Lemma1Report {
    HypothesisNotMet {
        gamma: f64,
        threshold: f64,
    },
    Checked {
        gamma: f64,
        threshold: f64,
        sup_abs_v: f64,
        /// `2γ - sup |v|`
        margin: f64,
        holds: bool,
    },
}

/// Checks `|v| < 2γ(ε)` on a grid of `[ε, 1]` whenever `γ(ε)` is below the threshold.
pub fn lemma1_bound_holds(
    traj: &Trajectory,
    epsilon: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
) -> Result<Lemma1Report> {
    let data = lemma1_data(traj, epsilon, k, params)?;
    if traj.end() < 1.0 {
        return Err(Error::Domain {
            r: 1.0,
            domain: format!("[0, {}] covered by the trajectory", traj.end()),
        });
    }
    if !(data.gamma < data.threshold) {
        return Ok(Lemma1Report::HypothesisNotMet {
            gamma: data.gamma,
            threshold: data.threshold,
        });
    }
    let mut sup = 0.0_f64;
    for i in 0..BOUND_GRID {
        let r = epsilon + (1.0 - epsilon) * i as f64 / (BOUND_GRID - 1) as f64;
        sup = sup.max(traj.eval(r.min(1.0))?.0.abs());
    }
    let margin = 2.0 * data.gamma - sup;
    Ok(Lemma1Report::Checked {
        gamma: data.gamma,
        threshold: data.threshold,
        sup_abs_v: sup,
        margin,
        holds: margin > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivp::{integrate, SolverOptions};
    use crate::params::make_params;

    #[test]
    fn bubble_values() {
        let p4 = make_params(4).unwrap();
        assert!((bubble(2.0, 8.0, &p4, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(bubble(3.7, 8.0, &p4, 0.0), 3.7);
        // n = 3, K0 = 3: (1 + r²)^(-1/2).
        let p3 = make_params(3).unwrap();
        assert!((bubble(1.0, 3.0, &p3, 1.0) - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bubble_derivative_values() {
        let p4 = make_params(4).unwrap();
        assert!((bubble_derivative(1.0, 8.0, &p4, 1.0) + 0.5).abs() < 1e-15);
        assert_eq!(bubble_derivative(1.0, 8.0, &p4, 0.0), 0.0);
        for r in [0.1, 0.4, 0.9, 2.5] {
            let h = 1e-5;
            let fd = (bubble(1.0, 8.0, &p4, r + h) - bubble(1.0, 8.0, &p4, r - h)) / (2.0 * h);
            let d = bubble_derivative(1.0, 8.0, &p4, r);
            assert!((fd - d).abs() <= 1e-8 * d.abs(), "r = {r}");
        }
    }

    #[test]
    fn constant_expansion_integrals() {
        let p4 = make_params(4).unwrap();
        let k = CurvatureProfile::constant(8.0).unwrap();
        let pair = corollary1_expansion(0.1, &k, &p4, 1.0).unwrap();
        assert!((pair.i - 1.0).abs() < 1e-12);
        assert!((pair.j - 2.0).abs() < 1e-12);
        assert!((pair.v_approx - (0.1 - 1e-3)).abs() < 1e-15);
        assert!((pair.dv_approx + 2e-3).abs() < 1e-15);

        let zero = corollary1_expansion(0.4, &k, &p4, 0.0).unwrap();
        assert_eq!((zero.v_approx, zero.dv_approx), (0.4, 0.0));
        assert!(corollary1_expansion(0.4, &k, &p4, 1.5).is_err());
    }

    #[test]
    fn remainder_order_at_small_height() {
        // Exact v_λ(1) = λ/(1+λ²) for n = 4, K ≡ 8, with 2p - 1 = 5.
        let p4 = make_params(4).unwrap();
        let k = CurvatureProfile::constant(8.0).unwrap();
        let rem = |lambda: f64| {
            let pair = corollary1_expansion(lambda, &k, &p4, 1.0).unwrap();
            (bubble(lambda, 8.0, &p4, 1.0) - pair.v_approx).abs()
        };
        let ratio = rem(0.02) / rem(0.01);
        assert!((ratio / 32.0 - 1.0).abs() < 0.15, "ratio = {ratio}");
    }

    #[test]
    fn apriori_threshold_and_values() {
        let p4 = make_params(4).unwrap();
        let k = CurvatureProfile::constant(8.0).unwrap();
        assert!((lemma1_threshold(&k, &p4) - 0.5 * 0.5_f64.sqrt()).abs() < 1e-15);

        let traj = integrate(1.0, &k, &p4, &SolverOptions::default()).unwrap();
        let at0 = lemma1_data(&traj, 0.0, &k, &p4).unwrap();
        assert_eq!((at0.a, at0.b, at0.gamma), (1.0, 0.0, 1.0));
        let at1 = lemma1_data(&traj, 1.0, &k, &p4).unwrap();
        assert!((at1.a - 0.25).abs() < 1e-9);
        assert!((at1.b - 0.25).abs() < 1e-9);
        assert!((at1.gamma - 0.5).abs() < 1e-9);
        assert!(lemma1_data(&traj, 1.2, &k, &p4).is_err());
    }

    #[test]
    fn apriori_bound_report() {
        let p4 = make_params(4).unwrap();
        let k = CurvatureProfile::constant(8.0).unwrap();
        let opts = SolverOptions::default();
        let traj = integrate(0.2, &k, &p4, &opts).unwrap();
        match lemma1_bound_holds(&traj, 0.0, &k, &p4).unwrap() {
            Lemma1Report::Checked { sup_abs_v, margin, holds, gamma, .. } => {
                assert!(holds);
                assert!((sup_abs_v - 0.2).abs() < 1e-15);
                assert!((margin - (2.0 * gamma - sup_abs_v)).abs() < 1e-15);
                assert!(margin > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let traj = integrate(1.0, &k, &p4, &opts).unwrap();
        assert!(matches!(
            lemma1_bound_holds(&traj, 0.0, &k, &p4).unwrap(),
            Lemma1Report::HypothesisNotMet { .. }
        ));
    }

    #[test]
    fn gluing_closed_form_and_prediction() {
        let p4 = make_params(4).unwrap();
        for lambda in [0.25_f64, 0.5, 1.0, 2.0, 4.0] {
            let sym = 2.0 * lambda * (1.0 - lambda * lambda) / (1.0 + lambda * lambda).powi(2);
            assert!((bubble_gluing(lambda, 8.0, &p4) - sym).abs() < 1e-15);
        }
        assert!((large_lambda_g_prediction(8.0, &p4, 100.0) + 0.02).abs() < 1e-17);
        // λ G(λ) = 2λ²(1-λ²)/(1+λ²)² at λ = 100 is -1.99940010
        let lg = 100.0 * bubble_gluing(100.0, 8.0, &p4);
        assert!((lg + 1.999_400_099_986).abs() < 1e-11, "{lg}");
        for n in 3..8 {
            let pr = make_params(n).unwrap();
            let g = large_lambda_g_prediction(pr.yamabe_constant(), &pr, 1e6);
            assert!((g * 1e6 - (2.0 - n as f64)).abs() < 1e-12);
            assert!(g < 0.0 && g > -1e-4);
        }
    }
}
