use super::signed_power;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

/// Iterates on a uniform grid produced by [`picard_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardTable {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub iterations: usize,
}

/// Cumulative trapezoid rule on a uniform grid.
fn cumulative_trapezoid(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Fixed-point iteration of
///
/// ```text
/// v(r)  = λ - ∫₀ʳ s^(1-n) ∫₀ˢ t^(n-1) v^p K dt ds
/// v'(r) =   - r^(1-n) ∫₀ʳ t^(n-1) v^p K dt
/// ```
///
/// from `v ≡ λ`, with both integrals taken by the composite trapezoid rule on
/// `grid_size` uniform points of `[0, r_end]`. Shares no code with the Runge–Kutta path.
pub fn picard_oracle(
    lambda: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    r_end: f64,
    iterations: usize,
    grid_size: usize,
) -> Result<PicardTable> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
    }
    if !(r_end > 0.0 && r_end <= 1.0) {
        return Err(Error::Domain {
            r: r_end,
            domain: "(0, 1]".into(),
        });
    }
    if grid_size < 1000 {
        return Err(Error::InvalidArgument(format!(
            "grid_size = {grid_size} is below the minimum of 1000"
        )));
    }

    let nm1 = params.n() as i32 - 1;
    let p = params.p();
    let h = r_end / (grid_size - 1) as f64;
    let r: Vec<f64> = (0..grid_size).map(|i| i as f64 * h).collect();
    let kr: Vec<f64> = r.iter().map(|&t| k.eval_unit(t)).collect();
    let rn: Vec<f64> = r.iter().map(|&t| t.powi(nm1)).collect();

    let mut v = vec![lambda; grid_size];
    let mut dv = vec![0.0; grid_size];
    let limit = 2.0 * lambda * 1e3;

    for it in 0..iterations {
        let integrand: Vec<f64> = (0..grid_size)
            .map(|i| rn[i] * signed_power(v[i], p) * kr[i])
            .collect();
        let inner = cumulative_trapezoid(&integrand, h);
        let g: Vec<f64> = (0..grid_size)
            .map(|i| if i == 0 { 0.0 } else { inner[i] / rn[i] })
            .collect();
        let outer = cumulative_trapezoid(&g, h);

        for i in 0..grid_size {
            v[i] = lambda - outer[i];
            dv[i] = -g[i];
        }
        let sup = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !sup.is_finite() || sup > limit {
            return Err(Error::OracleDivergence {
                iteration: it + 1,
                sup,
            });
        }
    }

    Ok(PicardTable {
        r,
        v,
        dv,
        iterations,
    })
}
