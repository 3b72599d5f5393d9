//! Radial curvature profiles `K(r)` on `[0, 1]`, optionally extended to `r > 1`
//! through `K(r) = K(1/r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples used to certify non-negativity and to take the sup norm of tabulated profiles.
pub const TABLE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureFamily {
    Constant { k0: f64 },
    /// `K(r) = k0 + k_rho · r^rho`.
    Power { k0: f64, k_rho: f64, rho: f64 },
    Tabulated(Table),
}

/// Monotone cubic (Fritsch–Carlson) interpolant through `(knots, values)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct CurvatureProfile {
    family: CurvatureFamily,
    symmetrized: bool,
}

impl Table {
    fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::Profile(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 2 {
            return Err(Error::Profile("a table needs at least two knots".into()));
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Profile("knots and values must be finite".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::Profile("knots must start at 0 and end at 1".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Profile("knots must be strictly ascending".into()));
        }
        let slopes = pchip_slopes(&knots, &values);
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, r: f64) -> f64 {
        let last = self.knots.len() - 2;
        let i = self.knots.partition_point(|&k| k <= r).saturating_sub(1).min(last);
        let h = self.knots[i + 1] - self.knots[i];
        let t = (r - self.knots[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }

    fn derivative(&self, r: f64) -> f64 {
        let last = self.knots.len() - 2;
        let i = self.knots.partition_point(|&k| k <= r).saturating_sub(1).min(last);
        let h = self.knots[i + 1] - self.knots[i];
        let t = (r - self.knots[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * (y0 - y1) + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1)
            / h
    }

    /// Power-series coefficients of the first cubic piece, valid on `[0, knots[1]]`.
    fn first_piece(&self) -> ([f64; 4], f64) {
        let h = self.knots[1];
        let (y0, y1) = (self.values[0], self.values[1]);
        let (d0, d1) = (self.slopes[0], self.slopes[1]);
        let delta = (y1 - y0) / h;
        let c2 = (3.0 * delta - 2.0 * d0 - d1) / h;
        let c3 = (d0 + d1 - 2.0 * delta) / (h * h);
        ([y0, d0, c2, c3], h)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..m - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if m == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; m];
    for k in 1..m - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = pchip_end_slope(h[0], h[1], delta[0], delta[1]);
    d[m - 1] = pchip_end_slope(h[m - 2], h[m - 3], delta[m - 2], delta[m - 3]);
    d
}

fn pchip_end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

impl CurvatureProfile {
    pub fn constant(k0: f64) -> Result<Self> {
        Self::from_family(CurvatureFamily::Constant { k0 })
    }

    pub fn power(k0: f64, k_rho: f64, rho: f64) -> Result<Self> {
        Self::from_family(CurvatureFamily::Power { k0, k_rho, rho })
    }

    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_family(CurvatureFamily::Tabulated(Table::new(knots, values)?))
    }

    /// Validates `K(0) > 0` and `K >= 0` on `[0, 1]`. Closed families are checked
    /// analytically, tables by dense sampling.
    pub fn from_family(family: CurvatureFamily) -> Result<Self> {
        match &family {
            CurvatureFamily::Constant { k0 } => {
                if !(k0.is_finite() && *k0 > 0.0) {
                    return Err(Error::Profile(format!("K0 must be positive, got {k0}")));
                }
            }
            CurvatureFamily::Power { k0, k_rho, rho } => {
                if !(k0.is_finite() && *k0 > 0.0) {
                    return Err(Error::Profile(format!("K0 must be positive, got {k0}")));
                }
                if !(rho.is_finite() && *rho > 0.0) {
                    return Err(Error::Profile(format!("rho must be positive, got {rho}")));
                }
                if !k_rho.is_finite() {
                    return Err(Error::Profile("K_rho must be finite".into()));
                }
                // r^rho is monotone, so the minimum over [0, 1] sits at an endpoint.
                if k0 + k_rho < 0.0 {
                    return Err(Error::Profile(format!(
                        "K(1) = K0 + K_rho = {} is negative",
                        k0 + k_rho
                    )));
                }
            }
            CurvatureFamily::Tabulated(table) => {
                if table.values[0] <= 0.0 {
                    return Err(Error::Profile("K(0) must be positive".into()));
                }
                for i in 0..=TABLE_SAMPLES {
                    let r = i as f64 / TABLE_SAMPLES as f64;
                    let k = table.eval(r);
                    if k < 0.0 {
                        return Err(Error::Profile(format!("K({r}) = {k} is negative")));
                    }
                }
            }
        }
        Ok(Self {
            family,
            symmetrized: false,
        })
    }

    /// Marks the profile as extended to `r > 1` by `K(r) = K(1/r)`.
    pub fn symmetrized(mut self) -> Self {
        self.symmetrized = true;
        self
    }

    pub fn with_symmetrized(mut self, symmetrized: bool) -> Self {
        self.symmetrized = symmetrized;
        self
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn family(&self) -> &CurvatureFamily {
        &self.family
    }

    /// `Some(K0)` for the constant family.
    pub fn constant_value(&self) -> Option<f64> {
        match self.family {
            CurvatureFamily::Constant { k0 } => Some(k0),
            _ => None,
        }
    }

    /// Constant and power families are smooth enough near the origin for the
    /// large-λ ratio diagnostics; tables are not certified to be.
    pub fn is_closed_family(&self) -> bool {
        !matches!(self.family, CurvatureFamily::Tabulated(_))
    }

    pub fn k_at_origin(&self) -> f64 {
        self.eval_unit(0.0)
    }

    /// `K(r)` for `r >= 0`; radii beyond 1 require a symmetrized profile.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || r.is_infinite() {
            return Err(Error::Domain {
                r,
                domain: "[0, ∞)".into(),
            });
        }
        if r <= 1.0 {
            Ok(self.eval_unit(r))
        } else if self.symmetrized {
            Ok(self.eval_unit(1.0 / r))
        } else {
            Err(Error::Domain {
                r,
                domain: "[0, 1] (profile is not symmetrized)".into(),
            })
        }
    }

    /// `K(r)` for `r` in `[0, 1]`, without domain checks.
    pub(crate) fn eval_unit(&self, r: f64) -> f64 {
        match &self.family {
            CurvatureFamily::Constant { k0 } => *k0,
            CurvatureFamily::Power { k0, k_rho, rho } => k0 + k_rho * r.powf(*rho),
            CurvatureFamily::Tabulated(table) => table.eval(r),
        }
    }

    /// `K'(r)` for `r` in `(0, 1]`.
    pub(crate) fn derivative_unit(&self, r: f64) -> f64 {
        match &self.family {
            CurvatureFamily::Constant { .. } => 0.0,
            CurvatureFamily::Power { k_rho, rho, .. } => k_rho * rho * r.powf(rho - 1.0),
            CurvatureFamily::Tabulated(table) => table.derivative(r),
        }
    }

    /// `sup K` over `[0, 1]`.
    pub fn sup_norm(&self) -> f64 {
        match &self.family {
            CurvatureFamily::Constant { k0 } => *k0,
            CurvatureFamily::Power { k0, k_rho, .. } => k0.max(k0 + k_rho),
            CurvatureFamily::Tabulated(table) => {
                let grid = (0..=TABLE_SAMPLES).map(|i| table.eval(i as f64 / TABLE_SAMPLES as f64));
                grid.chain(table.values.iter().copied())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Terms `(c, e)` with `K(r) = Σ c·r^e` exactly on `[0, radius)`, plus that radius.
    pub fn origin_expansion(&self) -> (Vec<(f64, f64)>, f64) {
        match &self.family {
            CurvatureFamily::Constant { k0 } => (vec![(*k0, 0.0)], f64::INFINITY),
            CurvatureFamily::Power { k0, k_rho, rho } => {
                (vec![(*k0, 0.0), (*k_rho, *rho)], f64::INFINITY)
            }
            CurvatureFamily::Tabulated(table) => {
                let (c, radius) = table.first_piece();
                let terms = c
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(k, c)| (*c, k as f64))
                    .collect();
                (terms, radius)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Profile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    Constant,
    Power,
    Table,
}

fn default_symmetrized() -> bool {
    true
}

/// Wire format of a curvature profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub family: FamilyTag,
    #[serde(rename = "K0", default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    #[serde(rename = "K_rho", default, skip_serializing_if = "Option::is_none")]
    pub k_rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default = "default_symmetrized")]
    pub symmetrized: bool,
}

impl TryFrom<ProfileSpec> for CurvatureProfile {
    type Error = Error;

    fn try_from(spec: ProfileSpec) -> Result<Self> {
        fn required<T>(field: Option<T>, name: &str, family: &str) -> Result<T> {
            field.ok_or_else(|| Error::Profile(format!("family \"{family}\" requires \"{name}\"")))
        }
        fn forbid<T>(field: &Option<T>, name: &str, family: &str) -> Result<()> {
            match field {
                Some(_) => Err(Error::Profile(format!(
                    "field \"{name}\" does not apply to family \"{family}\""
                ))),
                None => Ok(()),
            }
        }

        let profile = match spec.family {
            FamilyTag::Constant => {
                let f = "constant";
                forbid(&spec.k_rho, "K_rho", f)?;
                forbid(&spec.rho, "rho", f)?;
                forbid(&spec.knots, "knots", f)?;
                forbid(&spec.values, "values", f)?;
                Self::constant(required(spec.k0, "K0", f)?)?
            }
            FamilyTag::Power => {
                let f = "power";
                forbid(&spec.knots, "knots", f)?;
                forbid(&spec.values, "values", f)?;
                Self::power(
                    required(spec.k0, "K0", f)?,
                    required(spec.k_rho, "K_rho", f)?,
                    required(spec.rho, "rho", f)?,
                )?
            }
            FamilyTag::Table => {
                let f = "table";
                forbid(&spec.k0, "K0", f)?;
                forbid(&spec.k_rho, "K_rho", f)?;
                forbid(&spec.rho, "rho", f)?;
                Self::tabulated(required(spec.knots, "knots", f)?, required(spec.values, "values", f)?)?
            }
        };
        Ok(profile.with_symmetrized(spec.symmetrized))
    }
}

impl From<CurvatureProfile> for ProfileSpec {
    fn from(profile: CurvatureProfile) -> Self {
        let mut spec = ProfileSpec {
            family: FamilyTag::Constant,
            k0: None,
            k_rho: None,
            rho: None,
            knots: None,
            values: None,
            symmetrized: profile.symmetrized,
        };
        match profile.family {
            CurvatureFamily::Constant { k0 } => spec.k0 = Some(k0),
            CurvatureFamily::Power { k0, k_rho, rho } => {
                spec.family = FamilyTag::Power;
                spec.k0 = Some(k0);
                spec.k_rho = Some(k_rho);
                spec.rho = Some(rho);
            }
            CurvatureFamily::Tabulated(table) => {
                spec.family = FamilyTag::Table;
                spec.knots = Some(table.knots);
                spec.values = Some(table.values);
            }
        }
        spec
    }
}
