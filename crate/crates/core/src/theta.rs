use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The family parameter of the curve `w^2 = z (z^4 + 2 cos 2θ z^2 + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParam {
    theta: f64,
    cos2t: f64,
    sin2sq: f64,
}

impl ThetaParam {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::ThetaDomain(theta));
        }
        let cos2t = (2.0 * theta).cos();
        let s = (2.0 * theta).sin();
        Ok(ThetaParam {
            theta,
            cos2t,
            sin2sq: s * s,
        })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// cos 2θ
    #[inline]
    pub fn cos2t(&self) -> f64 {
        self.cos2t
    }

    /// sin² 2θ
    #[inline]
    pub fn sin2sq(&self) -> f64 {
        self.sin2sq
    }

    /// The parameter π/2 − θ, which flips the sign of cos 2θ.
    pub fn complement(&self) -> Self {
        ThetaParam::new(FRAC_PI_2 - self.theta).expect("complement of a valid theta is valid")
    }
}
