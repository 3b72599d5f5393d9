//! Run configuration: a JSON file, optionally patched by command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use rpn_shoot_core::gluing::{linear_grid, log_grid};
use rpn_shoot_core::ivp::SolverOptions;
use rpn_shoot_core::kelvin::DEFAULT_R_MAX;
use rpn_shoot_core::{make_params, CurvatureProfile, ProblemParams};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "RPN_SHOOT_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub log_spaced: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lambda_min: 1e-3,
            lambda_max: 1e3,
            points: 41,
            log_spaced: true,
        }
    }
}

impl ScanConfig {
    pub fn grid(&self) -> Vec<f64> {
        if self.log_spaced {
            log_grid(self.lambda_min, self.lambda_max, self.points)
        } else {
            linear_grid(self.lambda_min, self.lambda_max, self.points)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub curvature: CurvatureProfile,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed for the randomized checks of `verify`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    /// Outer radius for residual samples and the exported global profile.
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    /// Bound on `|G(λ₁)|` and on the derivative jump for a certified root.
    #[serde(default = "default_gluing_tol")]
    pub gluing_tol: f64,
    /// Bound on the normalized global ODE residual for a certified root.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Rows of `solution.csv`.
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_root_tol() -> f64 {
    1e-10
}

fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}

fn default_gluing_tol() -> f64 {
    1e-8
}

fn default_residual_tol() -> f64 {
    1e-5
}

fn default_profile_points() -> usize {
    401
}

/// Values given on the command line; each replaces the matching config entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<u32>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub points: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, root: &mut Map<String, Value>) {
        if let Some(n) = self.n {
            root.insert("n".into(), n.into());
        }
        let scan_entries = [
            ("lambda_min", self.lambda_min.map(Value::from)),
            ("lambda_max", self.lambda_max.map(Value::from)),
            ("points", self.points.map(Value::from)),
        ];
        if scan_entries.iter().any(|(_, v)| v.is_some()) {
            let scan = root
                .entry("scan")
                .or_insert_with(|| Value::Object(Map::new()));
            if let Value::Object(scan) = scan {
                for (key, value) in scan_entries {
                    if let Some(value) = value {
                        scan.insert(key.into(), value);
                    }
                }
            }
        }
        if let Some(out) = &self.out {
            root.insert("output_dir".into(), out.to_string_lossy().into_owned().into());
        }
    }
}

impl RunConfig {
    /// Parses `text`, applies `overrides`, then validates.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).context("config is not valid JSON")?;
        let Value::Object(root) = &mut value else {
            bail!("config must be a JSON object");
        };
        overrides.apply(root);
        let config: RunConfig = serde_json::from_value(value).context("invalid config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text, overrides).with_context(|| format!("in {}", path.display()))
    }

    /// Replaces the seed by the value of [`SEED_ENV`], when given.
    pub fn with_seed_from(mut self, env_value: Option<&str>) -> Result<Self> {
        if let Some(raw) = env_value {
            self.seed = raw
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV} = {raw:?} is not an unsigned integer"))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        make_params(self.n)?;
        self.solver.validate()?;
        let s = &self.scan;
        if !(s.lambda_min.is_finite() && s.lambda_min > 0.0) {
            bail!("scan.lambda_min must be positive, got {}", s.lambda_min);
        }
        if !(s.lambda_max.is_finite() && s.lambda_max >= s.lambda_min) {
            bail!("scan.lambda_max must be finite and at least scan.lambda_min");
        }
        if s.points > 1 && s.lambda_max == s.lambda_min {
            bail!("scan range is a single point but {} points were requested", s.points);
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.root_tol) || !positive(self.gluing_tol) || !positive(self.residual_tol) {
            bail!("root_tol, gluing_tol and residual_tol must be positive");
        }
        if !(self.r_max.is_finite() && self.r_max > 1.0) {
            bail!("r_max must exceed 1, got {}", self.r_max);
        }
        if self.profile_points < 2 {
            bail!("profile_points must be at least 2");
        }
        Ok(())
    }

    pub fn params(&self) -> ProblemParams {
        make_params(self.n).expect("validated dimension")
    }
}
