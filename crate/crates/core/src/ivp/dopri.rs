//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension.

use super::series::SeriesExpansion;
use super::signed_power;
use super::trajectory::{Segment, Trajectory, TrajectoryStatus};
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
/// Largest projection correction accepted, in units of the error scale.
const PROJECTION_LIMIT: f64 = 10.0;

type State = [f64; 2];

struct System<'a> {
    k: &'a CurvatureProfile,
    nm1: i32,
    p: f64,
    /// `(n-2)/2`.
    a: f64,
}

impl System<'_> {
    /// `v' = w / r^(n-1)`, `w' = -K r^(n-1) v^p`.
    fn rhs(&self, r: f64, y: &State) -> State {
        let rn = r.powi(self.nm1);
        [y[1] / rn, -self.k.eval_unit(r.min(1.0)) * rn * signed_power(y[0], self.p)]
    }

    /// Pohozaev quantity `H = w (a v + w r^(2-n) / 2) + K r^n |v|^(p+1) / (p+1)`.
    /// Along solutions `H' = K'(r) r^n |v|^(p+1) / (p+1)`, and `H(0) = 0`.
    fn pohozaev(&self, r: f64, y: &State) -> f64 {
        let rn = r.powi(self.nm1);
        y[1] * (self.a * y[0] + 0.5 * y[1] * r / rn)
            + self.k.eval_unit(r.min(1.0)) * rn * r * y[0].abs().powf(self.p + 1.0) / (self.p + 1.0)
    }

    fn pohozaev_rate(&self, r: f64, y: &State) -> f64 {
        let dk = self.k.derivative_unit(r.min(1.0));
        if dk == 0.0 {
            return 0.0;
        }
        dk * r.powi(self.nm1 + 1) * y[0].abs().powf(self.p + 1.0) / (self.p + 1.0)
    }

    /// Moves `y` onto the level set `H = target` along the scaled gradient.
    /// Returns `None` when the correction is not small against `sc`.
    fn project(&self, r: f64, y: &State, target: f64, sc: &State) -> Option<State> {
        let rn = r.powi(self.nm1);
        let f = self.pohozaev(r, y) - target;
        if f == 0.0 {
            return Some(*y);
        }
        let g = [
            self.a * y[1] + self.k.eval_unit(r.min(1.0)) * rn * r * signed_power(y[0], self.p),
            self.a * y[0] + y[1] * r / rn,
        ];
        let d = [sc[0] * sc[0], sc[1] * sc[1]];
        let t = f / (g[0] * g[0] * d[0] + g[1] * g[1] * d[1]);
        let delta = [-t * d[0] * g[0], -t * d[1] * g[1]];
        let size = (delta[0] / sc[0]).abs().max((delta[1] / sc[1]).abs());
        (size.is_finite() && size <= PROJECTION_LIMIT).then(|| [y[0] + delta[0], y[1] + delta[1]])
    }
}

/// `H` at the handoff radius from the leading term of the series, `v ≈ λ`.
fn initial_pohozaev(series: &SeriesExpansion, k: &CurvatureProfile, params: &ProblemParams, r: f64) -> f64 {
    let (terms, _) = k.origin_expansion();
    let (n, p) = (params.nf(), params.p());
    let lp = series.lambda().powf(p + 1.0) / (p + 1.0);
    terms
        .iter()
        .filter(|(_, e)| *e != 0.0)
        .map(|&(c, e)| lp * c * e * r.powf(e + n) / (e + n))
        .sum()
}

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    std::array::from_fn(|i| y[i] + terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

/// Bisection on the dense output of `seg` for `g(v) = 0` on `[seg.r0, seg.r0 + seg.h]`,
/// given `g(start) > 0 >= g(end)` (or the reverse).
fn refine<G: Fn(f64) -> f64>(seg: &Segment, g: G, tol: f64) -> f64 {
    let eval_v = |r: f64| {
        let s = ((r - seg.r0) / seg.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let c = &seg.rcont;
        c[0][0] + s * (c[1][0] + s1 * (c[2][0] + s * (c[3][0] + s1 * c[4][0])))
    };
    let (mut lo, mut hi) = (seg.r0, seg.r0 + seg.h);
    let g_lo_sign = g(eval_v(lo)).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(eval_v(mid));
        if gm.abs() < tol {
            return mid;
        }
        if gm.signum() == g_lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(eval_v(lo)).abs() < g(eval_v(hi)).abs() {
        lo
    } else {
        hi
    }
}

pub(super) fn run(
    series: SeriesExpansion,
    r_start: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let sys = System {
        k,
        nm1: params.n() as i32 - 1,
        p: params.p(),
        a: 0.5 * (params.nf() - 2.0),
    };
    let lambda = series.lambda();
    let threshold = opts.blowup_factor * lambda;
    let (rtol, atol) = (opts.rel_tol, opts.abs_tol);

    let mut r = r_start;
    let mut y = series.state(r);
    let mut pz = initial_pohozaev(&series, k, params, r);
    let mut traj = Trajectory {
        n: params.n(),
        r: vec![r],
        v: vec![y[0]],
        dv: vec![series.eval(r).1],
        status: TrajectoryStatus::Completed,
        series,
        segments: Vec::new(),
        crossings: Vec::new(),
        steps: 0,
    };

    let mut k1 = sys.rhs(r, &y);
    let mut h = 0.1 * r;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    while r < 1.0 {
        if attempts >= opts.max_steps {
            return Err(Error::StepBudget {
                max_steps: opts.max_steps,
                r,
            });
        }
        attempts += 1;

        let last = r + h >= 1.0;
        let r_new = if last { 1.0 } else { r + h };
        let h_eff = r_new - r;
        if h_eff <= 4.0 * f64::EPSILON * r {
            return Err(Error::StepUnderflow { r, h: h_eff });
        }

        let y2 = axpy(&y, &[(h_eff * A21, &k1)]);
        let k2 = sys.rhs(r + C2 * h_eff, &y2);
        let y3 = axpy(&y, &[(h_eff * A31, &k1), (h_eff * A32, &k2)]);
        let k3 = sys.rhs(r + C3 * h_eff, &y3);
        let y4 = axpy(&y, &[(h_eff * A41, &k1), (h_eff * A42, &k2), (h_eff * A43, &k3)]);
        let k4 = sys.rhs(r + C4 * h_eff, &y4);
        let y5 = axpy(
            &y,
            &[(h_eff * A51, &k1), (h_eff * A52, &k2), (h_eff * A53, &k3), (h_eff * A54, &k4)],
        );
        let k5 = sys.rhs(r + C5 * h_eff, &y5);
        let y6 = axpy(
            &y,
            &[
                (h_eff * A61, &k1),
                (h_eff * A62, &k2),
                (h_eff * A63, &k3),
                (h_eff * A64, &k4),
                (h_eff * A65, &k5),
            ],
        );
        let k6 = sys.rhs(r_new, &y6);
        let y_new = axpy(
            &y,
            &[
                (h_eff * A71, &k1),
                (h_eff * A73, &k3),
                (h_eff * A74, &k4),
                (h_eff * A75, &k5),
                (h_eff * A76, &k6),
            ],
        );
        let mut k7 = sys.rhs(r_new, &y_new);

        let err_vec: State = std::array::from_fn(|i| {
            h_eff * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        // v' = w / r^(n-1), so the absolute tolerance on w carries that factor.
        let sc = [
            atol + rtol * y[0].abs().max(y_new[0].abs()),
            atol * r_new.powi(sys.nm1) + rtol * y[1].abs().max(y_new[1].abs()),
        ];
        let err = ((err_vec[0] / sc[0]).powi(2) + (err_vec[1] / sc[1]).powi(2)) / 2.0;
        let err = err.sqrt();

        if !err.is_finite() {
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        if err > 1.0 {
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
            continue;
        }

        traj.steps += 1;
        // Same quadrature weights as the fifth-order solution.
        let pz_new = pz
            + h_eff
                * (A71 * sys.pohozaev_rate(r, &y)
                    + A73 * sys.pohozaev_rate(r + C3 * h_eff, &y3)
                    + A74 * sys.pohozaev_rate(r + C4 * h_eff, &y4)
                    + A75 * sys.pohozaev_rate(r + C5 * h_eff, &y5)
                    + A76 * sys.pohozaev_rate(r_new, &y6));
        let mut y_new = y_new;
        if let Some(projected) = sys.project(r_new, &y_new, pz_new, &sc) {
            if projected != y_new {
                y_new = projected;
                k7 = sys.rhs(r_new, &y_new);
            }
        }
        let ydiff: State = std::array::from_fn(|i| y_new[i] - y[i]);
        let bspl: State = std::array::from_fn(|i| h_eff * k1[i] - ydiff[i]);
        let seg = Segment {
            r0: r,
            h: h_eff,
            rcont: [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h_eff * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h_eff
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i])
                }),
            ],
        };

        if y_new[0].abs() > threshold {
            let r_star = refine(&seg, |v| threshold - v.abs(), f64::EPSILON * threshold);
            traj.segments.push(seg);
            push_point(&mut traj, r_star);
            traj.status = TrajectoryStatus::BlowUp { r_star };
            return Ok(traj);
        }

        let crossed = (y[0] > 0.0 && y_new[0] <= 0.0) || (y[0] < 0.0 && y_new[0] >= 0.0);
        if crossed {
            let r_star = refine(&seg, |v| v, opts.zero_tol);
            traj.segments.push(seg);
            if !opts.continue_past_zero {
                push_point(&mut traj, r_star);
                traj.status = TrajectoryStatus::HitZero { r_star };
                return Ok(traj);
            }
            if traj.crossings.is_empty() {
                traj.status = TrajectoryStatus::HitZero { r_star };
            }
            traj.crossings.push(r_star);
        } else {
            traj.segments.push(seg);
        }

        r = r_new;
        y = y_new;
        pz = pz_new;
        k1 = k7;
        traj.r.push(r);
        traj.v.push(y[0]);
        traj.dv.push(y[1] / r.powi(sys.nm1));

        let mut fac = (SAFETY * err.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = h_eff * fac;
    }
    Ok(traj)
}

/// Truncates coverage at `r_end` inside the last stored segment.
fn push_point(traj: &mut Trajectory, r_end: f64) {
    if r_end <= traj.end() {
        return;
    }
    let (v, dv) = traj
        .eval_segment_tail(r_end)
        .expect("event radius lies inside the last segment");
    traj.r.push(r_end);
    traj.v.push(v);
    traj.dv.push(dv);
}

impl Trajectory {
    fn eval_segment_tail(&self, r: f64) -> Option<(f64, f64)> {
        let seg = self.segments.last()?;
        let s = ((r - seg.r0) / seg.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let c = &seg.rcont;
        let y: State = std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        });
        Some((y[0], y[1] / r.powi(self.n as i32 - 1)))
    }
}
