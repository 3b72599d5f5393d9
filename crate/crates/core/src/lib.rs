//! Shooting-method solver for the radial prescribed scalar curvature equation
//!
//! ```text
//! v'' + (n-1)/r v' + K(r) v^p = 0,   v(0) = λ,  v'(0) = 0,   p = (n+2)/(n-2)
//! ```
//!
//! on the unit ball, glued to its Kelvin reflection `r^(2-n) v(1/r)` so that the
//! result is a positive solution on `[0, ∞)` for curvatures with `K(r) = K(1/r)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`] and [`profile`]: dimension-derived exponents and radial curvature profiles.
//! - [`ivp`]: the singular initial value problem (series start, adaptive Dormand–Prince
//!   integration with zero/blow-up events, and an independent Picard iteration oracle).
//! - [`analytic`]: closed-form bubbles, small-λ expansions, the a-priori bound quantities
//!   and the large-λ gluing prediction.
//! - [`gluing`]: the gluing function `G(λ) = (n-2)v(1) + 2v'(1)`, scans, root refinement,
//!   existence-threshold estimators and ratio diagnostics.
//! - [`kelvin`]: global extension by the Kelvin transform and its residual certificate.
//! - [`export`]: CSV/JSON artifacts.

pub mod analytic;
pub mod error;
pub mod export;
pub mod gluing;
pub mod ivp;
pub mod kelvin;
pub mod params;
pub mod profile;
pub mod quad;

pub use error::{Error, Result};
pub use params::{make_params, ProblemParams};
pub use profile::{CurvatureFamily, CurvatureProfile};
