//! CSV and JSON artifacts. Floats are written in shortest round-trip form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gluing::GluingScan;
use crate::ivp::{Trajectory, TrajectoryStatus};
use crate::kelvin::GlobalSolution;

/// Shortest decimal that parses back to the same `f64`; exponent form outside `[1e-4, 1e15)`.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_rows<'a>(header: &str, rows: impl Iterator<Item = [String; 3]> + 'a) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for [a, b, c] in rows {
        let _ = writeln!(out, "{a},{b},{c}");
    }
    out
}

/// `r,v,dv` on `points` equally spaced radii of `[0, end]` via the dense output.
pub fn trajectory_csv(traj: &Trajectory, points: usize) -> Result<String> {
    let end = traj.end();
    let radii: Vec<f64> = (0..points.max(2))
        .map(|i| end * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    let mut rows = Vec::with_capacity(radii.len());
    for r in radii {
        let (v, dv) = traj.eval(r.min(end))?;
        rows.push([format_f64(r), format_f64(v), format_f64(dv)]);
    }
    Ok(write_rows("r,v,dv", rows.into_iter()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub lambda: f64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    pub v1: Option<f64>,
    pub dv1: Option<f64>,
}

pub fn trajectory_summary(traj: &Trajectory) -> TrajectorySummary {
    let r_star = match traj.status() {
        TrajectoryStatus::Completed => None,
        TrajectoryStatus::HitZero { r_star } | TrajectoryStatus::BlowUp { r_star } => Some(r_star),
    };
    let at_one = traj.at_one();
    TrajectorySummary {
        lambda: traj.lambda(),
        status: traj.status().label(),
        r_star,
        v1: at_one.map(|x| x.0),
        dv1: at_one.map(|x| x.1),
    }
}

/// `lambda,G,status`; failed samples leave `G` empty.
pub fn scan_csv(scan: &GluingScan) -> String {
    write_rows(
        "lambda,G,status",
        scan.samples.iter().map(|s| {
            [
                format_f64(s.lambda),
                s.g.map(format_f64).unwrap_or_default(),
                s.status.label().to_string(),
            ]
        }),
    )
}

/// Radii `0` followed by `points - 1` log-spaced values from `1e-4` to `r_max`.
pub fn global_profile_radii(r_max: f64, points: usize) -> Vec<f64> {
    let mut radii = vec![0.0];
    radii.extend(crate::gluing::log_grid(1e-4, r_max, points.saturating_sub(1)));
    radii
}

pub fn global_profile_csv(sol: &GlobalSolution, r_max: f64, points: usize) -> Result<String> {
    let mut rows = Vec::new();
    for r in global_profile_radii(r_max, points) {
        let (v, dv) = sol.eval(r)?;
        rows.push([format_f64(r), format_f64(v), format_f64(dv)]);
    }
    Ok(write_rows("r,v,dv", rows.into_iter()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub positive: bool,
    pub residual_max: f64,
    pub derivative_jump: f64,
    /// Positivity, `|G|` and the residual all within the requested bounds.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub lambda1: f64,
    #[serde(rename = "G_at_root")]
    pub g_at_root: f64,
    pub certificate: Certificate,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting_examples() {
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(1.0), "1");
        assert_eq!(format_f64(0.1), "0.1");
        assert_eq!(format_f64(1e-7), "1e-7");
        assert_eq!(format_f64(-2.5e20), "-2.5e20");
    }

    proptest! {
        #[test]
        fn format_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
