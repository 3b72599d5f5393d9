//! The gluing function `G(λ) = (n-2) v_λ(1) + 2 v_λ'(1)`.
//!
//! `G(λ) = 0` is exactly the condition for `v_λ` and its Kelvin reflection
//! `r^(2-n) v_λ(1/r)` to match to first order at `r = 1`. Roots are located by
//! scanning λ, bracketing sign changes and refining with safeguarded secant steps.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::analytic::{bubble, bubble_derivative};
use crate::error::{Error, Result};
use crate::ivp::{integrate, SolverOptions, Trajectory, TrajectoryStatus};
use crate::params::ProblemParams;
use crate::profile::CurvatureProfile;

/// Smallest height probed by the existence-threshold estimators.
pub const LAMBDA_PROBE: f64 = 1e-6;

/// Relative resolution of the existence-threshold estimators.
pub const THRESHOLD_RESOLUTION: f64 = 1e-4;

const PROBES_PER_DECADE: usize = 8;
const MAX_ROOT_ITERATIONS: usize = 200;

/// Why `G(λ)` could not be formed.
#[derive(Debug, Clone, PartialEq)]
pub enum GluingFailure {
    HitZero { r_star: f64 },
    BlowUp { r_star: f64 },
    Solver(Error),
}

impl GluingFailure {
    pub fn label(&self) -> &'static str {
        match self {
            Self::HitZero { .. } => "hit_zero",
            Self::BlowUp { .. } => "blowup",
            Self::Solver(_) => "error",
        }
    }
}

impl std::fmt::Display for GluingFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::HitZero { r_star } => write!(f, "v reaches zero at r = {r_star}"),
            Self::BlowUp { r_star } => write!(f, "|v| exceeds the blow-up bound at r = {r_star}"),
            Self::Solver(e) => write!(f, "{e}"),
        }
    }
}

/// `G` from a finished trajectory.
pub fn gluing_from_trajectory(
    traj: &Trajectory,
    params: &ProblemParams,
) -> std::result::Result<f64, GluingFailure> {
    match traj.status() {
        TrajectoryStatus::Completed => {
            let (v1, dv1) = traj.at_one().expect("completed runs reach r = 1");
            Ok((params.nf() - 2.0) * v1 + 2.0 * dv1)
        }
        TrajectoryStatus::HitZero { r_star } => Err(GluingFailure::HitZero { r_star }),
        TrajectoryStatus::BlowUp { r_star } => Err(GluingFailure::BlowUp { r_star }),
    }
}

pub fn gluing_value(
    lambda: f64,
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
) -> std::result::Result<f64, GluingFailure> {
    let traj = integrate(lambda, k, params, opts).map_err(GluingFailure::Solver)?;
    gluing_from_trajectory(&traj, params)
}

/// `points` log-spaced heights from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            let step = (b - a) / (points - 1) as f64;
            (0..points)
                .map(|i| match i {
                    0 => min,
                    i if i == points - 1 => max,
                    i => (a + step * i as f64).exp(),
                })
                .collect()
        }
    }
}

/// `points` linearly spaced heights from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// 41 log-spaced heights over `[1e-3, 1e3]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 41)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Ok,
    HitZero,
    Blowup,
    Error,
}

impl SampleStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::HitZero => "hit_zero",
            Self::Blowup => "blowup",
            Self::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingSample {
    pub lambda: f64,
    pub g: Option<f64>,
    pub status: SampleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl GluingSample {
    fn from_outcome(lambda: f64, outcome: std::result::Result<f64, GluingFailure>) -> Self {
        match outcome {
            Ok(g) => Self {
                lambda,
                g: Some(g),
                status: SampleStatus::Ok,
                detail: None,
            },
            Err(fail) => Self {
                lambda,
                g: None,
                status: match fail {
                    GluingFailure::HitZero { .. } => SampleStatus::HitZero,
                    GluingFailure::BlowUp { .. } => SampleStatus::Blowup,
                    GluingFailure::Solver(_) => SampleStatus::Error,
                },
                detail: Some(fail.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedBracket {
    pub bracket: (f64, f64),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingScan {
    /// Sorted by λ.
    pub samples: Vec<GluingSample>,
    /// Consecutive samples with a sign change of `G`.
    pub brackets: Vec<(f64, f64)>,
    /// Refined roots, one per resolved bracket, ascending.
    pub roots: Vec<f64>,
    pub unresolved: Vec<UnresolvedBracket>,
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("λ grid is empty".into()));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::InvalidArgument("λ grid must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("λ grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Sign-change brackets between consecutive successful samples.
pub fn brackets_of(samples: &[GluingSample]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, w) in samples.windows(2).enumerate() {
        let (Some(ga), Some(gb)) = (w[0].g, w[1].g) else {
            continue;
        };
        // An exact zero at a sample belongs to the bracket on its left only.
        let first_zero = i == 0 && ga == 0.0;
        if ga * gb < 0.0 || gb == 0.0 || first_zero {
            out.push((w[0].lambda, w[1].lambda));
        }
    }
    out
}

pub fn scan_gluing(
    k: &CurvatureProfile,
    params: &ProblemParams,
    grid: &[f64],
    opts: &SolverOptions,
    root_tol: f64,
) -> Result<GluingScan> {
    scan_gluing_parallel(k, params, grid, opts, root_tol, 1)
}

/// [`scan_gluing`] with samples evaluated on up to `jobs` threads. The result does not
/// depend on `jobs`.
pub fn scan_gluing_parallel(
    k: &CurvatureProfile,
    params: &ProblemParams,
    grid: &[f64],
    opts: &SolverOptions,
    root_tol: f64,
    jobs: usize,
) -> Result<GluingScan> {
    validate_grid(grid)?;
    if !(root_tol > 0.0) {
        return Err(Error::InvalidArgument("root_tol must be positive".into()));
    }
    opts.validate()?;

    let jobs = jobs.clamp(1, grid.len());
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<GluingSample>> = vec![None; grid.len()];
    std::thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= grid.len() {
                            break done;
                        }
                        let lambda = grid[i];
                        let outcome = gluing_value(lambda, k, params, opts);
                        done.push((i, GluingSample::from_outcome(lambda, outcome)));
                    }
                })
            })
            .collect();
        for worker in workers {
            for (i, sample) in worker.join().expect("scan worker panicked") {
                slots[i] = Some(sample);
            }
        }
    });
    let samples: Vec<GluingSample> = slots.into_iter().map(|s| s.expect("every λ sampled")).collect();

    let brackets = brackets_of(&samples);
    let mut roots = Vec::new();
    let mut unresolved = Vec::new();
    for &bracket in &brackets {
        match find_root(k, params, bracket, opts, root_tol) {
            Ok(root) => roots.push(root.lambda),
            Err(e) => unresolved.push(UnresolvedBracket {
                bracket,
                reason: e.to_string(),
            }),
        }
    }
    Ok(GluingScan {
        samples,
        brackets,
        roots,
        unresolved,
    })
}

#[derive(Debug, Clone)]
pub struct RootResult {
    pub lambda: f64,
    pub g: f64,
    pub trajectory: Trajectory,
    pub evaluations: usize,
}

/// Refines a sign-change bracket of `G` to `|G| < root_tol` or a bracket narrower
/// than `root_tol · λ`. Any integration failure inside the bracket is an error.
pub fn find_root(
    k: &CurvatureProfile,
    params: &ProblemParams,
    bracket: (f64, f64),
    opts: &SolverOptions,
    root_tol: f64,
) -> Result<RootResult> {
    let (mut a, mut b) = bracket;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid bracket ({a}, {b})")));
    }
    if !(root_tol > 0.0) {
        return Err(Error::InvalidArgument("root_tol must be positive".into()));
    }
    let mut evaluations = 0;
    let mut eval = |x: f64| -> Result<f64> {
        evaluations += 1;
        gluing_value(x, k, params, opts).map_err(|f| Error::BracketInvalid {
            lambda: x,
            reason: f.to_string(),
        })
    };

    let mut ga = eval(a)?;
    let mut gb = eval(b)?;
    if ga * gb > 0.0 {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            g_lo: ga,
            g_hi: gb,
        });
    }

    let mut force_bisect = false;
    let (mut best, mut g_best) = if ga.abs() <= gb.abs() { (a, ga) } else { (b, gb) };
    for _ in 0..MAX_ROOT_ITERATIONS {
        if g_best.abs() < root_tol || b - a < root_tol * best {
            break;
        }
        let width = b - a;
        let secant = b - gb * (b - a) / (gb - ga);
        let x = if force_bisect || !(secant > a && secant < b) {
            0.5 * (a + b)
        } else {
            secant
        };
        let gx = eval(x)?;
        if gx.abs() < g_best.abs() {
            best = x;
            g_best = gx;
        }
        if gx == 0.0 {
            break;
        }
        if gx.signum() == ga.signum() {
            a = x;
            ga = gx;
        } else {
            b = x;
            gb = gx;
        }
        force_bisect = b - a > 0.5 * width;
    }

    let trajectory = integrate(best, k, params, opts)?;
    if !trajectory.is_positive() {
        return Err(Error::RootNotPositive { lambda: best });
    }
    Ok(RootResult {
        lambda: best,
        g: g_best,
        trajectory,
        evaluations,
    })
}

/// Whether `v_λ` exists and stays positive on `[0, 1]`.
pub fn exists_positive(lambda: f64, k: &CurvatureProfile, params: &ProblemParams, opts: &SolverOptions) -> bool {
    integrate(lambda, k, params, opts).is_ok_and(|t| t.is_positive())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lambda0Estimate {
    Finite { estimate: f64 },
    AtLeastCap { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaInfEstimate {
    Finite { estimate: f64 },
    AllProbedExist { lo: f64, hi: f64 },
    NotBracketed { cap: f64 },
}

fn probe_grid(lo: f64, hi: f64) -> Vec<f64> {
    let decades = (hi / lo).log10().max(0.0);
    let points = (decades * PROBES_PER_DECADE as f64).ceil() as usize + 1;
    log_grid(lo, hi, points.max(2))
}

/// Geometric bisection between `good` and `bad` until they agree to the resolution;
/// returns the last height known to satisfy the predicate.
fn bisect_boundary<P: FnMut(f64) -> bool>(mut good: f64, mut bad: f64, mut holds: P) -> f64 {
    while (good / bad).ln().abs() > THRESHOLD_RESOLUTION {
        let mid = (good * bad).sqrt();
        if holds(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Supremum of the heights below which every shot exists and stays positive on `[0, 1]`.
pub fn estimate_lambda0(
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
    lambda_max: f64,
) -> Result<Lambda0Estimate> {
    if !(lambda_max > LAMBDA_PROBE) {
        return Err(Error::InvalidArgument(format!(
            "lambda_max = {lambda_max} must exceed the probe {LAMBDA_PROBE}"
        )));
    }
    let holds = |x: f64| exists_positive(x, k, params, opts);
    if !holds(LAMBDA_PROBE) {
        return Err(Error::SmallLambdaFailure { lambda: LAMBDA_PROBE });
    }
    let mut good = LAMBDA_PROBE;
    for x in probe_grid(LAMBDA_PROBE, lambda_max).into_iter().skip(1) {
        if !holds(x) {
            return Ok(Lambda0Estimate::Finite {
                estimate: bisect_boundary(good, x, holds),
            });
        }
        good = x;
    }
    Ok(Lambda0Estimate::AtLeastCap { cap: lambda_max })
}

/// Infimum of the heights above which every probed shot exists and stays positive,
/// searched downward from `lambda_max` to `lambda_min`.
pub fn estimate_lambda_inf(
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
    lambda_min: f64,
    lambda_max: f64,
) -> Result<LambdaInfEstimate> {
    if !(lambda_min > 0.0 && lambda_max > lambda_min) {
        return Err(Error::InvalidArgument(format!(
            "invalid probe range ({lambda_min}, {lambda_max}]"
        )));
    }
    let holds = |x: f64| exists_positive(x, k, params, opts);
    if !holds(lambda_max) {
        return Ok(LambdaInfEstimate::NotBracketed { cap: lambda_max });
    }
    let mut good = lambda_max;
    for x in probe_grid(lambda_min, lambda_max).into_iter().rev().skip(1) {
        if !holds(x) {
            return Ok(LambdaInfEstimate::Finite {
                estimate: bisect_boundary(good, x, holds),
            });
        }
        good = x;
    }
    Ok(LambdaInfEstimate::AllProbedExist {
        lo: lambda_min,
        hi: lambda_max,
    })
}

/// Comparison of `v_λ` with the bubble `V_λ` of the same height and `K0 = K(0)` at `r = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioDiagnostics {
    pub lambda: f64,
    /// `v_λ(1) / V_λ(1)`
    pub t1: f64,
    /// `v'/v - V'/V` at 1, which equals `T'/T` there.
    pub logderiv_gap: f64,
    /// `v'(1) / v(1)`
    pub logderiv_v: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    pub lambda: f64,
    pub outcome: std::result::Result<RatioDiagnostics, GluingFailure>,
}

/// Ratio diagnostics for each height. Only closed curvature families qualify.
pub fn ratio_diagnostics(
    lambdas: &[f64],
    k: &CurvatureProfile,
    params: &ProblemParams,
    opts: &SolverOptions,
) -> Result<Vec<RatioEntry>> {
    if !k.is_closed_family() {
        return Err(Error::Hypothesis(
            "ratio diagnostics need a curvature that is smooth at the origin".into(),
        ));
    }
    let k0 = k.k_at_origin();
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let outcome = integrate(lambda, k, params, opts)
                .map_err(GluingFailure::Solver)
                .and_then(|traj| {
                    let g = gluing_from_trajectory(&traj, params)?;
                    let (v1, dv1) = traj.at_one().expect("completed");
                    let big_v = bubble(lambda, k0, params, 1.0);
                    let big_dv = bubble_derivative(lambda, k0, params, 1.0);
                    Ok(RatioDiagnostics {
                        lambda,
                        t1: v1 / big_v,
                        logderiv_gap: dv1 / v1 - big_dv / big_v,
                        logderiv_v: dv1 / v1,
                        g,
                    })
                });
            RatioEntry { lambda, outcome }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::bubble_gluing;
    use crate::params::make_params;

    fn four_dim() -> (ProblemParams, CurvatureProfile) {
        (make_params(4).unwrap(), CurvatureProfile::constant(8.0).unwrap())
    }

    #[test]
    fn gluing_values_for_constant_curvature() {
        let (params, k) = four_dim();
        let opts = SolverOptions::default();
        assert!(gluing_value(1.0, &k, &params, &opts).unwrap().abs() < 1e-8);
        assert!((gluing_value(0.5, &k, &params, &opts).unwrap() - 0.48).abs() < 1e-8);
        assert!((gluing_value(2.0, &k, &params, &opts).unwrap() + 0.48).abs() < 1e-8);
    }

    #[test]
    fn small_lambda_gluing_is_linear() {
        let params = make_params(5).unwrap();
        let k = CurvatureProfile::power(4.0, 2.0, 1.0).unwrap();
        let lambda = 1e-4;
        let g = gluing_value(lambda, &k, &params, &SolverOptions::default()).unwrap();
        assert!(g > 0.0);
        assert!((g / ((params.nf() - 2.0) * lambda) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn two_point_scan_brackets_unit_root() {
        let (params, k) = four_dim();
        let scan = scan_gluing(&k, &params, &[0.5, 1.5], &SolverOptions::default(), 1e-10).unwrap();
        assert_eq!(scan.brackets, vec![(0.5, 1.5)]);
        assert_eq!(scan.roots.len(), 1);
        assert!((scan.roots[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_point_scan_has_no_brackets() {
        let (params, k) = four_dim();
        let scan = scan_gluing(&k, &params, &[0.7], &SolverOptions::default(), 1e-10).unwrap();
        assert!(scan.brackets.is_empty() && scan.roots.is_empty());
        assert_eq!(scan.samples.len(), 1);
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let (params, k) = four_dim();
        let opts = SolverOptions::default();
        assert!(scan_gluing(&k, &params, &[], &opts, 1e-10).is_err());
        assert!(scan_gluing(&k, &params, &[1.0, 0.5], &opts, 1e-10).is_err());
        assert!(scan_gluing(&k, &params, &[-1.0, 0.5], &opts, 1e-10).is_err());
    }

    #[test]
    fn parallel_scan_matches_sequential() {
        let params = make_params(4).unwrap();
        let k = CurvatureProfile::power(8.0, 1.0, 2.0).unwrap();
        let grid = log_grid(1e-2, 1e2, 13);
        let opts = SolverOptions::default();
        let seq = scan_gluing(&k, &params, &grid, &opts, 1e-10).unwrap();
        let par = scan_gluing_parallel(&k, &params, &grid, &opts, 1e-10, 4).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn root_refinement() {
        let (params, k) = four_dim();
        let opts = SolverOptions::default();
        let root = find_root(&k, &params, (0.5, 2.0), &opts, 1e-10).unwrap();
        assert!((root.lambda - 1.0).abs() < 1e-6);
        assert!(root.trajectory.is_positive());
        assert!(matches!(
            find_root(&k, &params, (1.5, 2.0), &opts, 1e-10),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn five_dimensional_root_is_unit_height() {
        let params = make_params(5).unwrap();
        let k = CurvatureProfile::constant(15.0).unwrap();
        let opts = SolverOptions::default();
        let scan = scan_gluing(&k, &params, &default_lambda_grid(), &opts, 1e-10).unwrap();
        assert_eq!(scan.roots.len(), 1);
        let root = find_root(&k, &params, scan.brackets[0], &opts, 1e-10).unwrap();
        assert!(root.g.abs() < 1e-8);
        assert!((root.lambda - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symbolic_gluing_identity() {
        let (params, k) = four_dim();
        let opts = SolverOptions::default();
        for lambda in log_grid(1e-2, 1e2, 50) {
            let g = gluing_value(lambda, &k, &params, &opts).unwrap();
            assert!((g - bubble_gluing(lambda, 8.0, &params)).abs() < 1e-8, "λ = {lambda}");
        }
    }

    #[test]
    fn lambda0_unbounded_for_constant_curvature() {
        let (params, k) = four_dim();
        let est = estimate_lambda0(&k, &params, &SolverOptions::default(), 1e6).unwrap();
        assert_eq!(est, Lambda0Estimate::AtLeastCap { cap: 1e6 });
        assert!(exists_positive(LAMBDA_PROBE, &k, &params, &SolverOptions::default()));
    }

    #[test]
    fn lambda_inf_reports_probe_range() {
        let (params, k) = four_dim();
        let est = estimate_lambda_inf(&k, &params, &SolverOptions::default(), 1e-2, 1e4).unwrap();
        assert_eq!(est, LambdaInfEstimate::AllProbedExist { lo: 1e-2, hi: 1e4 });
    }

    #[test]
    fn ratio_diagnostics_trivial_for_constant_curvature() {
        let (params, k) = four_dim();
        let entries = ratio_diagnostics(&[0.3, 3.0, 30.0], &k, &params, &SolverOptions::default()).unwrap();
        for e in entries {
            let d = e.outcome.unwrap();
            assert!((d.t1 - 1.0).abs() < 1e-8);
            assert!(d.logderiv_gap.abs() < 1e-7);
        }
        let table = CurvatureProfile::tabulated(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(ratio_diagnostics(&[1.0], &table, &params, &SolverOptions::default()).is_err());
    }

    #[test]
    fn brackets_skip_failures_and_handle_exact_zeros() {
        let s = |lambda, g: Option<f64>| GluingSample {
            lambda,
            g,
            status: if g.is_some() { SampleStatus::Ok } else { SampleStatus::HitZero },
            detail: None,
        };
        let samples = vec![
            s(1.0, Some(1.0)),
            s(2.0, Some(0.0)),
            s(3.0, Some(-1.0)),
            s(4.0, None),
            s(5.0, Some(1.0)),
        ];
        assert_eq!(brackets_of(&samples), vec![(1.0, 2.0)]);
    }
}
