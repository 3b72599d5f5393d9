use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension of the ambient space together with the exponents it fixes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: u32,
    p: f64,
    beta: f64,
}

/// Derives the critical exponent `p = (n+2)/(n-2)` and `beta = 2/(n-2)` from `n`.
pub fn make_params(n: u32) -> Result<ProblemParams> {
    if n < 3 {
        return Err(Error::Dimension(n));
    }
    let nf = f64::from(n);
    Ok(ProblemParams {
        n,
        p: (nf + 2.0) / (nf - 2.0),
        beta: 2.0 / (nf - 2.0),
    })
}

impl ProblemParams {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `n (n - 2)`, the curvature for which the unit-height bubble is `(1 + r²)^(1 - n/2)`.
    pub fn yamabe_constant(&self) -> f64 {
        let nf = self.nf();
        nf * (nf - 2.0)
    }
}
