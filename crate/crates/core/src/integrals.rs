//! The four singular integrals `A, B, C, D` that parametrize every period
//! of the curve family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exp_sinh, Estimate};
use crate::theta::ThetaParam;

/// Default absolute tolerance for the integrals.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Which half-line integrand to evaluate.
///
/// `A`/`C` use the quartic `t^4 + 2cos2θ t^2 + 1`, `B`/`D` the quartic with
/// the sign of `cos 2θ` flipped. The moment variants carry one extra power of
/// `t`; under `s = 1/t` they equal `A` and `C` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegralKind {
    A,
    B,
    C,
    D,
    AMoment,
    CMoment,
}

impl IntegralKind {
    pub fn integrand(self, theta: &ThetaParam) -> impl Fn(f64) -> f64 {
        let c = theta.cos2t();
        let (sign, numer_pow, cube) = match self {
            IntegralKind::A => (1.0, 0, false),
            IntegralKind::B => (-1.0, 0, false),
            IntegralKind::C => (1.0, 3, true),
            IntegralKind::D => (-1.0, 3, true),
            IntegralKind::AMoment => (1.0, 1, false),
            IntegralKind::CMoment => (1.0, 4, true),
        };
        move |t: f64| {
            let t2 = t * t;
            let q = t2 * t2 + 2.0 * sign * c * t2 + 1.0;
            let base = (t * q).sqrt();
            let den = if cube { base * base * base } else { base };
            t.powi(numer_pow) / den
        }
    }
}

/// Evaluates one improper integral over `(0, ∞)` to absolute tolerance `tol`.
pub fn quadrature_halfline(kind: IntegralKind, theta: &ThetaParam, tol: f64) -> Result<Estimate> {
    exp_sinh(kind.integrand(theta), tol)
}

/// The values `A, B, C, D` at one θ, with per-entry error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralQuartet {
    pub theta: ThetaParam,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Estimated absolute errors in the order `A, B, C, D`.
    pub err: [f64; 4],
}

impl IntegralQuartet {
    /// `AD + BC`, which appears in every normalization of the period system.
    pub fn ad_bc(&self) -> f64 {
        self.a * self.d + self.b * self.c
    }

    pub fn values(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn integral_quartet(theta: &ThetaParam, tol: f64) -> Result<IntegralQuartet> {
    let mut vals = [0.0; 4];
    let mut err = [0.0; 4];
    for (i, kind) in [IntegralKind::A, IntegralKind::B, IntegralKind::C, IntegralKind::D]
        .into_iter()
        .enumerate()
    {
        let e = quadrature_halfline(kind, theta, tol)?;
        if !(e.value > 0.0) {
            return Err(Error::Consistency(format!(
                "integral {kind:?} at theta = {} is not positive: {}",
                theta.theta(),
                e.value
            )));
        }
        vals[i] = e.value;
        err[i] = e.err;
    }
    Ok(IntegralQuartet {
        theta: *theta,
        a: vals[0],
        b: vals[1],
        c: vals[2],
        d: vals[3],
        err,
    })
}
