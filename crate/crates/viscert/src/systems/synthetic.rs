//! Synthetic analytic system: failure iff the first coordinate falls in
//! `[0, threshold]`. Ground truth for unbiasedness and coverage tests, with
//! `P_fail = threshold` exactly under the uniform nominal on the unit box.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    /// Ambient dimension of the unit-box candidate set.
    pub dim: usize,
    /// Failure strip width on the first coordinate.
    pub threshold: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            dim: 2,
            threshold: 0.05,
        }
    }
}

impl SyntheticParams {
    pub(super) fn loss(&self, theta: &[f64]) -> Result<u8> {
        let x = theta[0];
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: x,
                reason: "synthetic oracle domain is the unit box",
            });
        }
        Ok(u8::from(x <= self.threshold))
    }
}

/// Scalar form: 1 iff `theta` lies in `[0, 0.05]`. Deterministic.
pub fn synthetic_oracle(theta: f64) -> u8 {
    u8::from((0.0..=0.05).contains(&theta))
}
