use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use rpn_shoot_core::export::{global_profile_csv, scan_csv, Certificate, RootReport};
use rpn_shoot_core::gluing::{find_root, scan_gluing_parallel, GluingScan, RootResult};
use rpn_shoot_core::kelvin::kelvin_extend;

use crate::config::RunConfig;
use crate::verify;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_NO_BRACKET: u8 = 2;

/// Radii beyond 1 at which a root's global residual is sampled.
pub const RESIDUAL_RADII: [f64; 5] = [1.5, 2.0, 5.0, 10.0, 100.0];

/// Exit status plus a human-readable summary for stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub summary: String,
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn run_scan(cfg: &RunConfig, jobs: usize) -> Result<GluingScan> {
    let params = cfg.params();
    let scan = scan_gluing_parallel(
        &cfg.curvature,
        &params,
        &cfg.scan.grid(),
        &cfg.solver,
        cfg.root_tol,
        jobs,
    )?;
    write_artifact(&cfg.output_dir, "scan.csv", &scan_csv(&scan))?;
    Ok(scan)
}

pub fn cmd_scan(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let scan = run_scan(cfg, jobs)?;
    let failed = scan.samples.iter().filter(|s| s.g.is_none()).count();
    let mut summary = format!(
        "{} samples ({} without G), {} sign change(s)",
        scan.samples.len(),
        failed,
        scan.brackets.len()
    );
    for root in &scan.roots {
        summary.push_str(&format!("\nroot near λ = {root}"));
    }
    for u in &scan.unresolved {
        summary.push_str(&format!("\nunresolved bracket {:?}: {}", u.bracket, u.reason));
    }
    Ok(Outcome {
        code: EXIT_OK,
        summary,
    })
}

/// A refined root, its Kelvin-extended solution and the certificate.
pub struct CertifiedRoot {
    pub report: RootReport,
    pub solution: rpn_shoot_core::kelvin::GlobalSolution,
}

/// Refines the first bracket that yields a positive root and certifies it.
pub fn certify_first_root(cfg: &RunConfig, brackets: &[(f64, f64)]) -> Result<Option<CertifiedRoot>> {
    let params = cfg.params();
    let k = &cfg.curvature;
    let mut failures = Vec::new();
    let mut found: Option<RootResult> = None;
    for &bracket in brackets {
        match find_root(k, &params, bracket, &cfg.solver, cfg.root_tol) {
            Ok(root) => {
                found = Some(root);
                break;
            }
            Err(e) => failures.push(format!("{bracket:?}: {e}")),
        }
    }
    let Some(root) = found else {
        if brackets.is_empty() {
            return Ok(None);
        }
        bail!("no bracket could be refined to a positive root:\n  {}", failures.join("\n  "));
    };

    let positive = root.trajectory.is_positive();
    let solution = kelvin_extend(root.trajectory, k, &params)?;
    let radii: Vec<f64> = RESIDUAL_RADII.into_iter().filter(|r| *r <= cfg.r_max).collect();
    let residual = solution.global_residual(&radii, cfg.r_max)?;
    let jump = solution.derivative_jump();
    let certified = positive
        && root.g.abs() < cfg.gluing_tol
        && jump.abs() < cfg.gluing_tol
        && residual.max < cfg.residual_tol;
    Ok(Some(CertifiedRoot {
        report: RootReport {
            lambda1: root.lambda,
            g_at_root: root.g,
            certificate: Certificate {
                positive,
                residual_max: residual.max,
                derivative_jump: jump,
                certified,
            },
        },
        solution,
    }))
}

pub fn cmd_solve(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    if !cfg.curvature.is_symmetrized() {
        bail!("solve needs a symmetrized curvature profile (\"symmetrized\": true)");
    }
    let scan = run_scan(cfg, jobs)?;
    let Some(root) = certify_first_root(cfg, &scan.brackets)? else {
        return Ok(Outcome {
            code: EXIT_NO_BRACKET,
            summary: format!(
                "G(λ) has no sign change on [{}, {}]; widen the λ range (scan.lambda_min / scan.lambda_max) or add points",
                cfg.scan.lambda_min, cfg.scan.lambda_max
            ),
        });
    };
    write_artifact(&cfg.output_dir, "root.json", &to_json(&root.report)?)?;
    let profile = global_profile_csv(&root.solution, cfg.r_max, cfg.profile_points)?;
    write_artifact(&cfg.output_dir, "solution.csv", &profile)?;

    let c = &root.report.certificate;
    let summary = format!(
        "λ₁ = {}, G(λ₁) = {:e}, residual = {:e}, jump = {:e}, positive = {}: {}",
        root.report.lambda1,
        root.report.g_at_root,
        c.residual_max,
        c.derivative_jump,
        c.positive,
        if c.certified { "certified" } else { "NOT certified" }
    );
    Ok(Outcome {
        code: if c.certified { EXIT_OK } else { EXIT_FAILURE },
        summary,
    })
}

pub fn cmd_verify(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let report = verify::run(cfg, jobs);
    write_artifact(&cfg.output_dir, "report.json", &to_json(&report)?)?;
    let mut summary = String::new();
    for check in &report.checks {
        summary.push_str(&format!("{:<8} {}", check.status.label(), check.name));
        if !check.detail.is_empty() {
            summary.push_str(&format!(": {}", check.detail));
        }
        summary.push('\n');
    }
    summary.push_str(if report.passed { "all applicable checks passed" } else { "some checks failed" });
    Ok(Outcome {
        code: if report.passed { EXIT_OK } else { EXIT_FAILURE },
        summary,
    })
}
