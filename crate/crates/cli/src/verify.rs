//! The `verify` invariant suite for one `(n, K)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rpn_shoot_core::analytic::{
    bubble, bubble_derivative, bubble_gluing, bubble_second_derivative, corollary1_expansion,
    lemma1_bound_holds, lemma1_threshold, large_lambda_g_prediction, Lemma1Report,
};
use rpn_shoot_core::gluing::{
    estimate_lambda0, exists_positive, gluing_from_trajectory, gluing_value, log_grid,
    ratio_diagnostics, scan_gluing_parallel, Lambda0Estimate, RatioDiagnostics,
};
use rpn_shoot_core::ivp::{integrate, picard_oracle, signed_power, SolverOptions, Trajectory};
use rpn_shoot_core::kelvin::{kelvin_extend, GlobalSolution};
use rpn_shoot_core::profile::CurvatureFamily;
use rpn_shoot_core::{CurvatureProfile, ProblemParams};

use crate::commands::certify_first_root;
use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn compare(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            status: if measured <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: Some(measured),
            tolerance: Some(tolerance),
            detail,
        }
    }

    fn verdict(name: &'static str, ok: bool, measured: Option<f64>, detail: String) -> Self {
        Self {
            name,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            tolerance: None,
            detail,
        }
    }

    fn skipped(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            status: CheckStatus::Skipped,
            measured: None,
            tolerance: None,
            detail: format!("hypothesis: {}", reason.into()),
        }
    }

    fn error(name: &'static str, err: anyhow::Error) -> Self {
        Self {
            name,
            status: CheckStatus::Fail,
            measured: None,
            tolerance: None,
            detail: format!("{err:#}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub n: u32,
    pub curvature: CurvatureProfile,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// No check failed.
    pub passed: bool,
}

const CLOSED_FORM_HEIGHTS: [f64; 3] = [0.5, 1.0, 10.0];
const GRID_POINTS: usize = 200;
const RANDOM_SAMPLES: usize = 10;
const RATIO_HEIGHTS: [f64; 4] = [1e1, 1e2, 1e3, 1e4];
/// `λ^(2β) K0 / (n(n-2))` at which the large-λ prediction is tested.
const ASYMPTOTIC_SCALE: f64 = 1e5;

fn tight() -> SolverOptions {
    SolverOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-20,
        ..SolverOptions::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn unit_grid(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| i as f64 / (points - 1) as f64)
}

/// Curvature smooth enough at the origin for the large-λ ratio argument.
fn smooth_at_origin(k: &CurvatureProfile) -> bool {
    match k.family() {
        CurvatureFamily::Constant { .. } => true,
        CurvatureFamily::Power { rho, .. } => rho.fract() == 0.0,
        CurvatureFamily::Tabulated(_) => false,
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    k: &'a CurvatureProfile,
    params: ProblemParams,
    jobs: usize,
    rng: ChaCha8Rng,
    /// Positive solution used by the Kelvin checks.
    solution: Option<GlobalSolution>,
    root: Option<f64>,
    ratios: Option<Result<Vec<RatioDiagnostics>, String>>,
}

type CheckResult = anyhow::Result<Check>;

pub fn run(cfg: &RunConfig, jobs: usize) -> Report {
    let mut cx = Context {
        cfg,
        k: &cfg.curvature,
        params: cfg.params(),
        jobs,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        solution: None,
        root: None,
        ratios: None,
    };
    let steps: [(&'static str, fn(&mut Context) -> CheckResult); 22] = [
        ("params_identities", params_identities),
        ("profile_nonnegative", profile_nonnegative),
        ("profile_symmetric", profile_symmetric),
        ("closed_form", closed_form),
        ("bubble_residual", bubble_residual),
        ("oracle_equivalence", oracle_equivalence),
        ("apriori_bound", apriori_bound),
        ("expansion_order", expansion_order),
        ("small_lambda_sign", small_lambda_sign),
        ("symbolic_gluing", symbolic_gluing),
        ("large_lambda_asymptotic", large_lambda_asymptotic),
        ("ratio_limit", ratio_limit),
        ("ratio_logderiv", ratio_logderiv),
        ("ratio_gluing_sign", ratio_gluing_sign),
        ("root_certificate", root_certificate),
        ("root_scaling", root_scaling),
        ("kelvin_involution", kelvin_involution),
        ("decay", decay),
        ("jump_identity", jump_identity),
        ("monotonicity", monotonicity),
        ("tolerance_convergence", tolerance_convergence),
        ("lambda0_consistency", lambda0_consistency),
    ];
    let checks: Vec<Check> = steps
        .into_iter()
        .map(|(name, f)| f(&mut cx).unwrap_or_else(|e| Check::error(name, e)))
        .collect();
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Report {
        n: cfg.n,
        curvature: cfg.curvature.clone(),
        seed: cfg.seed,
        checks,
        passed,
    }
}

fn params_identities(cx: &mut Context) -> CheckResult {
    let (n, p, b) = (cx.params.nf(), cx.params.p(), cx.params.beta());
    let dev = [p * (n - 2.0) - (n + 2.0), b * (n - 2.0) - 2.0, b - (p - 1.0) / 2.0]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max);
    Ok(Check::compare("params_identities", dev, 1e-14, format!("p = {p}, β = {b}")))
}

fn profile_nonnegative(cx: &mut Context) -> CheckResult {
    let mut min = f64::INFINITY;
    for r in unit_grid(10_001) {
        min = min.min(cx.k.eval(r)?);
    }
    Ok(Check::verdict("profile_nonnegative", min >= 0.0, Some(min), "min K on [0, 1]".into()))
}

fn profile_symmetric(cx: &mut Context) -> CheckResult {
    if !cx.k.is_symmetrized() {
        return Ok(Check::skipped("profile_symmetric", "profile is not symmetrized"));
    }
    let mut worst = 0.0_f64;
    for big in log_grid(1.0 + 1e-6, 1e3, 100) {
        worst = worst.max((cx.k.eval(big)? - cx.k.eval(1.0 / big)?).abs());
    }
    Ok(Check::compare("profile_symmetric", worst, 0.0, "max |K(R) - K(1/R)|".into()))
}

fn closed_form(cx: &mut Context) -> CheckResult {
    let Some(k0) = cx.k.constant_value() else {
        return Ok(Check::skipped("closed_form", "curvature is not constant"));
    };
    let mut worst = 0.0_f64;
    for lambda in CLOSED_FORM_HEIGHTS {
        let traj = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        for r in unit_grid(GRID_POINTS) {
            worst = worst.max(rel(traj.eval(r)?.0, bubble(lambda, k0, &cx.params, r)));
        }
    }
    Ok(Check::compare(
        "closed_form",
        worst,
        1e-8,
        format!("max relative error against the bubble, λ ∈ {CLOSED_FORM_HEIGHTS:?}"),
    ))
}

fn bubble_residual(cx: &mut Context) -> CheckResult {
    let k0 = cx.k.k_at_origin();
    let p = &cx.params;
    let mut worst = 0.0_f64;
    for lambda in CLOSED_FORM_HEIGHTS {
        for r in unit_grid(GRID_POINTS).skip(1) {
            let terms = [
                bubble_second_derivative(lambda, k0, p, r),
                (p.nf() - 1.0) / r * bubble_derivative(lambda, k0, p, r),
                k0 * signed_power(bubble(lambda, k0, p, r), p.p()),
            ];
            let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
            worst = worst.max(terms.iter().sum::<f64>().abs() / scale);
        }
    }
    Ok(Check::compare("bubble_residual", worst, 1e-9, format!("K0 = K(0) = {k0}")))
}

fn oracle_equivalence(cx: &mut Context) -> CheckResult {
    let cap = 0.5_f64.min(lemma1_threshold(cx.k, &cx.params));
    let mut worst = 0.0_f64;
    for _ in 0..RANDOM_SAMPLES {
        let lambda = cap * cx.rng.gen_range(0.1..1.0);
        let traj = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        let table = picard_oracle(lambda, cx.k, &cx.params, 1.0, 60, 20_000)?;
        for i in (0..table.r.len()).step_by(500) {
            worst = worst.max(rel(traj.eval(table.r[i])?.0, table.v[i]));
        }
    }
    Ok(Check::compare(
        "oracle_equivalence",
        worst,
        1e-6,
        format!("{RANDOM_SAMPLES} seeded heights below {cap:.6}"),
    ))
}

fn apriori_bound(cx: &mut Context) -> CheckResult {
    let threshold = lemma1_threshold(cx.k, &cx.params);
    let mut violations = 0usize;
    for _ in 0..2 * RANDOM_SAMPLES {
        let lambda = threshold * cx.rng.gen_range(0.01..1.0);
        let traj = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        if traj.end() < 1.0 || traj.v().iter().any(|v| v.abs() >= 2.0 * lambda) {
            violations += 1;
            continue;
        }
        for eps in [0.01, 0.1, 0.5] {
            if let Lemma1Report::Checked { holds: false, .. } = lemma1_bound_holds(&traj, eps, cx.k, &cx.params)? {
                violations += 1;
            }
        }
    }
    Ok(Check::compare(
        "apriori_bound",
        violations as f64,
        0.0,
        format!("violations of |v| < 2γ(ε) below the threshold {threshold:.6}"),
    ))
}

/// `|v_λ(1) - (λ - λ^p I(1))|`, with the truth from the bubble for constant `K`.
fn remainder(cx: &Context, lambda: f64) -> anyhow::Result<f64> {
    let v1 = match cx.k.constant_value() {
        Some(k0) => bubble(lambda, k0, &cx.params, 1.0),
        None => integrate(lambda, cx.k, &cx.params, &tight())?
            .at_one()
            .ok_or_else(|| anyhow::anyhow!("v_λ does not reach r = 1 at λ = {lambda}"))?
            .0,
    };
    Ok((v1 - corollary1_expansion(lambda, cx.k, &cx.params, 1.0)?.v_approx).abs())
}

fn expansion_order(cx: &mut Context) -> CheckResult {
    let (n, p) = (cx.params.nf(), cx.params.p());
    // λ^(p-1) ‖K‖ / (2n) = 1e-3 keeps the next term three orders down.
    let hi = (2.0 * n * 1e-3 / cx.k.sup_norm()).powf(1.0 / (p - 1.0));
    let order = (remainder(cx, hi)? / remainder(cx, 0.5 * hi)?).log2();
    let tol = if cx.params.n() == 3 { 0.5 } else { 0.3 };
    Ok(Check::compare(
        "expansion_order",
        (order - (2.0 * p - 1.0)).abs(),
        tol,
        format!("log2 R(λ)/R(λ/2) = {order:.4} at λ = {hi:.4e}, expected {}", 2.0 * p - 1.0),
    ))
}

fn small_lambda_sign(cx: &mut Context) -> CheckResult {
    let lambda = 1e-3 * lemma1_threshold(cx.k, &cx.params);
    let g = gluing_value(lambda, cx.k, &cx.params, &cx.cfg.solver).map_err(|f| anyhow::anyhow!("{f}"))?;
    Ok(Check::verdict("small_lambda_sign", g > 0.0, Some(g), format!("G({lambda:.4e}) > 0")))
}

fn symbolic_gluing(cx: &mut Context) -> CheckResult {
    let Some(k0) = cx.k.constant_value() else {
        return Ok(Check::skipped("symbolic_gluing", "curvature is not constant"));
    };
    let mut worst = 0.0_f64;
    for lambda in log_grid(1e-2, 1e2, 50) {
        let g = gluing_value(lambda, cx.k, &cx.params, &cx.cfg.solver).map_err(|f| anyhow::anyhow!("{f}"))?;
        worst = worst.max((g - bubble_gluing(lambda, k0, &cx.params)).abs());
    }
    Ok(Check::compare("symbolic_gluing", worst, 1e-8, "50 heights in [1e-2, 1e2]".into()))
}

fn large_lambda_asymptotic(cx: &mut Context) -> CheckResult {
    let k0 = cx.k.k_at_origin();
    let g100 = gluing_value(100.0, cx.k, &cx.params, &cx.cfg.solver).map(|g| 100.0 * g);
    let info = match g100 {
        Ok(v) => format!("λG(λ) at λ = 100 is {v}"),
        Err(f) => format!("λ = 100: {f}"),
    };
    if cx.k.constant_value().is_none() {
        return Ok(Check::skipped(
            "large_lambda_asymptotic",
            format!("constant curvature only; {info}"),
        ));
    }
    let lambda = (ASYMPTOTIC_SCALE * cx.params.yamabe_constant() / k0).powf(0.5 / cx.params.beta());
    let g = gluing_value(lambda, cx.k, &cx.params, &cx.cfg.solver).map_err(|f| anyhow::anyhow!("{f}"))?;
    let predicted = large_lambda_g_prediction(k0, &cx.params, lambda);
    Ok(Check::compare(
        "large_lambda_asymptotic",
        rel(g, predicted),
        2.5e-4,
        format!("λ = {lambda:.6e}, λG = {}, prediction {}; {info}", lambda * g, lambda * predicted),
    ))
}

/// Ratio diagnostics at the heights in [`RATIO_HEIGHTS`], or why they do not apply.
fn ratio_data(cx: &mut Context) -> anyhow::Result<Result<Vec<RatioDiagnostics>, String>> {
    if let Some(cached) = &cx.ratios {
        return Ok(cached.clone());
    }
    let data = if !smooth_at_origin(cx.k) {
        Err("K is not smooth at the origin".to_string())
    } else {
        let entries = ratio_diagnostics(&RATIO_HEIGHTS, cx.k, &cx.params, &cx.cfg.solver)?;
        entries
            .into_iter()
            .map(|e| {
                e.outcome.map_err(|f| {
                    format!("v_λ is not positive on [0, 1] at λ = {}: {f}", e.lambda)
                })
            })
            .collect()
    };
    cx.ratios = Some(data.clone());
    Ok(data)
}

fn ratio_limit(cx: &mut Context) -> CheckResult {
    let diags = match ratio_data(cx)? {
        Ok(d) => d,
        Err(reason) => return Ok(Check::skipped("ratio_limit", reason)),
    };
    let gaps: Vec<f64> = diags.iter().map(|d| (d.t1 - 1.0).abs()).collect();
    let listed: Vec<String> = gaps.iter().map(|g| format!("{g:.4e}")).collect();
    let detail = format!("|T(1) - 1| at λ = {RATIO_HEIGHTS:?}: [{}]", listed.join(", "));
    let last = gaps[gaps.len() - 1];
    if cx.k.constant_value().is_some() {
        let worst = gaps.iter().copied().fold(0.0, f64::max);
        return Ok(Check::compare("ratio_limit", worst, 1e-6, detail));
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(Check {
        name: "ratio_limit",
        status: if decreasing && last < 0.05 { CheckStatus::Pass } else { CheckStatus::Fail },
        measured: Some(last),
        tolerance: Some(0.05),
        detail: format!("{detail}; decreasing: {decreasing}"),
    })
}

fn ratio_logderiv(cx: &mut Context) -> CheckResult {
    let diags = match ratio_data(cx)? {
        Ok(d) => d,
        Err(reason) => return Ok(Check::skipped("ratio_logderiv", reason)),
    };
    let last = diags[diags.len() - 1];
    let target = 2.0 - cx.params.nf();
    Ok(Check::compare(
        "ratio_logderiv",
        (last.logderiv_v - target).abs(),
        0.1,
        format!("v'(1)/v(1) = {} at λ = {}, limit {target}", last.logderiv_v, last.lambda),
    ))
}

fn ratio_gluing_sign(cx: &mut Context) -> CheckResult {
    let diags = match ratio_data(cx)? {
        Ok(d) => d,
        Err(reason) => return Ok(Check::skipped("ratio_gluing_sign", reason)),
    };
    let worst = diags.iter().map(|d| d.g).fold(f64::NEG_INFINITY, f64::max);
    Ok(Check::verdict(
        "ratio_gluing_sign",
        worst < 0.0,
        Some(worst),
        format!("max G over λ = {RATIO_HEIGHTS:?}"),
    ))
}

fn root_certificate(cx: &mut Context) -> CheckResult {
    if !cx.k.is_symmetrized() {
        return Ok(Check::skipped("root_certificate", "profile is not symmetrized"));
    }
    let scan = scan_gluing_parallel(
        cx.k,
        &cx.params,
        &cx.cfg.scan.grid(),
        &cx.cfg.solver,
        cx.cfg.root_tol,
        cx.jobs,
    )?;
    let Some(root) = certify_first_root(cx.cfg, &scan.brackets)? else {
        return Ok(Check::skipped("root_certificate", "no sign change of G in the scan range"));
    };
    let r = &root.report;
    let check = Check {
        name: "root_certificate",
        status: if r.certificate.certified { CheckStatus::Pass } else { CheckStatus::Fail },
        measured: Some(r.certificate.residual_max),
        tolerance: Some(cx.cfg.residual_tol),
        detail: format!(
            "λ₁ = {}, G = {:e}, jump = {:e}, positive = {}",
            r.lambda1, r.g_at_root, r.certificate.derivative_jump, r.certificate.positive
        ),
    };
    cx.root = Some(r.lambda1);
    cx.solution = Some(root.solution);
    Ok(check)
}

fn root_scaling(cx: &mut Context) -> CheckResult {
    let (Some(k0), Some(root)) = (cx.k.constant_value(), cx.root) else {
        return Ok(Check::skipped("root_scaling", "needs constant curvature and a root"));
    };
    let exact = (cx.params.yamabe_constant() / k0).powf(0.5 / cx.params.beta());
    Ok(Check::compare(
        "root_scaling",
        rel(root, exact),
        1e-6,
        format!("λ₁ = {root}, expected {exact}"),
    ))
}

/// The root's solution, or a small positive one when no root was found.
fn some_solution<'c>(cx: &'c mut Context) -> anyhow::Result<Option<&'c GlobalSolution>> {
    if !cx.k.is_symmetrized() {
        return Ok(None);
    }
    if cx.solution.is_none() {
        let lambda = 0.5 * lemma1_threshold(cx.k, &cx.params);
        let traj = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        cx.solution = Some(kelvin_extend(traj, cx.k, &cx.params)?);
    }
    Ok(cx.solution.as_ref())
}

fn kelvin_involution(cx: &mut Context) -> CheckResult {
    let nf = cx.params.nf();
    let Some(sol) = some_solution(cx)? else {
        return Ok(Check::skipped("kelvin_involution", "profile is not symmetrized"));
    };
    let mut worst = 0.0_f64;
    for r in (1..=GRID_POINTS).map(|i| 0.99 * i as f64 / GRID_POINTS as f64) {
        let twice = r.powf(2.0 - nf) * sol.eval(1.0 / r)?.0;
        worst = worst.max(rel(twice, sol.eval(r)?.0));
    }
    Ok(Check::compare("kelvin_involution", worst, 1e-13, format!("λ = {}", sol.lambda())))
}

fn decay(cx: &mut Context) -> CheckResult {
    let r_max = cx.cfg.r_max;
    let Some(sol) = some_solution(cx)? else {
        return Ok(Check::skipped("decay", "profile is not symmetrized"));
    };
    let limit = sol.decay_limit(r_max)?;
    Ok(Check::compare(
        "decay",
        rel(limit, sol.lambda()),
        1e-3,
        format!("v(r) r^(n-2) at r = {r_max} is {limit}, λ = {}", sol.lambda()),
    ))
}

fn scan_heights(cx: &Context, points: usize) -> Vec<f64> {
    let s = &cx.cfg.scan;
    log_grid(s.lambda_min, s.lambda_max.max(s.lambda_min * 10.0), points)
}

fn jump_identity(cx: &mut Context) -> CheckResult {
    if !cx.k.is_symmetrized() {
        return Ok(Check::skipped("jump_identity", "profile is not symmetrized"));
    }
    let mut worst = 0.0_f64;
    let mut used = 0;
    for lambda in scan_heights(cx, 20) {
        let traj = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        if !traj.is_positive() {
            continue;
        }
        used += 1;
        let g = gluing_from_trajectory(&traj, &cx.params).map_err(|f| anyhow::anyhow!("{f}"))?;
        let sol = kelvin_extend(traj, cx.k, &cx.params)?;
        worst = worst.max((sol.derivative_jump() + g).abs() / g.abs().max(1.0));
    }
    Ok(Check::compare("jump_identity", worst, 1e-14, format!("{used} positive heights")))
}

fn monotonicity(cx: &mut Context) -> CheckResult {
    let mut violations = 0usize;
    for lambda in scan_heights(cx, 10) {
        let traj: Trajectory = integrate(lambda, cx.k, &cx.params, &cx.cfg.solver)?;
        violations += traj
            .v()
            .iter()
            .zip(traj.dv())
            .filter(|(v, dv)| **v > 0.0 && **dv > 0.0)
            .count();
    }
    Ok(Check::compare("monotonicity", violations as f64, 0.0, "points with v > 0 and v' > 0".into()))
}

fn tolerance_convergence(cx: &mut Context) -> CheckResult {
    let lambda = if exists_positive(1.0, cx.k, &cx.params, &tight()) {
        1.0
    } else {
        0.5 * lemma1_threshold(cx.k, &cx.params)
    };
    let reference = integrate(lambda, cx.k, &cx.params, &tight())?
        .at_one()
        .ok_or_else(|| anyhow::anyhow!("reference run stopped before r = 1"))?
        .0;
    let mut worst = 0.0_f64;
    for tol in [1e-6, 1e-8, 1e-10] {
        let opts = SolverOptions {
            rel_tol: tol,
            abs_tol: 1e-2 * tol,
            ..cx.cfg.solver
        };
        let v1 = integrate(lambda, cx.k, &cx.params, &opts)?
            .at_one()
            .ok_or_else(|| anyhow::anyhow!("run at rel_tol {tol} stopped before r = 1"))?
            .0;
        worst = worst.max(rel(v1, reference) / tol);
    }
    Ok(Check::compare(
        "tolerance_convergence",
        worst,
        1e3,
        format!("max error / rel_tol at λ = {lambda}"),
    ))
}

fn lambda0_consistency(cx: &mut Context) -> CheckResult {
    let cap = cx.cfg.scan.lambda_max.max(1e-3);
    match estimate_lambda0(cx.k, &cx.params, &cx.cfg.solver, cap)? {
        Lambda0Estimate::AtLeastCap { cap } => Ok(Check::verdict(
            "lambda0_consistency",
            true,
            None,
            format!("every probed height up to {cap} stays positive"),
        )),
        Lambda0Estimate::Finite { estimate } => {
            let below = exists_positive(estimate * (1.0 - 1e-3), cx.k, &cx.params, &cx.cfg.solver);
            let above = exists_positive(estimate * (1.0 + 1e-3), cx.k, &cx.params, &cx.cfg.solver);
            Ok(Check::verdict(
                "lambda0_consistency",
                below && !above,
                Some(estimate),
                format!("λ₀ ≈ {estimate}; positive below: {below}, positive above: {above}"),
            ))
        }
    }
}
