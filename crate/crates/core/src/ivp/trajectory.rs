use serde::{Deserialize, Serialize};

use super::series::SeriesExpansion;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    HitZero { r_star: f64 },
    BlowUp { r_star: f64 },
}

impl TrajectoryStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "ok",
            Self::HitZero { .. } => "hit_zero",
            Self::BlowUp { .. } => "blowup",
        }
    }
}

/// One accepted Dormand–Prince step with its continuous extension.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub r0: f64,
    pub h: f64,
    pub rcont: [[f64; 2]; 5],
}

impl Segment {
    fn eval(&self, r: f64) -> [f64; 2] {
        let s = ((r - self.r0) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let c = &self.rcont;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

/// Numerical solution on `[0, end]`: the series on `[0, r_start]`, Dormand–Prince
/// dense output beyond.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub(crate) n: u32,
    pub(crate) r: Vec<f64>,
    pub(crate) v: Vec<f64>,
    pub(crate) dv: Vec<f64>,
    pub(crate) status: TrajectoryStatus,
    pub(crate) series: SeriesExpansion,
    pub(crate) segments: Vec<Segment>,
    pub(crate) crossings: Vec<f64>,
    pub(crate) steps: usize,
}

impl Trajectory {
    pub fn lambda(&self) -> f64 {
        self.series.lambda()
    }

    pub fn status(&self) -> TrajectoryStatus {
        self.status
    }

    /// Accepted step radii; the first entry is the series handoff radius.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn dv(&self) -> &[f64] {
        &self.dv
    }

    pub fn r_start(&self) -> f64 {
        self.r[0]
    }

    /// Largest radius covered by the dense output.
    pub fn end(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Zeros of `v` passed while continuing after the first one.
    pub fn crossings(&self) -> &[f64] {
        &self.crossings
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    /// Completed on `[0, 1]` with `v > 0` at every accepted step.
    pub fn is_positive(&self) -> bool {
        self.status == TrajectoryStatus::Completed && self.v.iter().all(|v| *v > 0.0)
    }

    /// `(v(r), v'(r))` anywhere in `[0, end]`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0 && r <= self.end()) {
            return Err(Error::Domain {
                r,
                domain: format!("[0, {}]", self.end()),
            });
        }
        if r <= self.r_start() {
            return Ok(self.series.eval(r));
        }
        let idx = self
            .segments
            .partition_point(|s| s.r0 <= r)
            .saturating_sub(1);
        let [v, w] = self.segments[idx].eval(r);
        Ok((v, w / r.powi(self.n as i32 - 1)))
    }

    /// `(v(1), v'(1))` when the run reached `r = 1`.
    pub fn at_one(&self) -> Option<(f64, f64)> {
        (self.end() >= 1.0).then(|| (*self.v.last().unwrap(), *self.dv.last().unwrap()))
    }
}
