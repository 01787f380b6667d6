//! Points, paths, symmetries and homology cycles on the curve
//! `w^2 = z (z^4 + 2 cos 2θ z^2 + 1)`.

mod cycle;
mod path;
mod symmetry;

pub use cycle::{build_cycle, homology_matrix, Cycle, CycleKind};
pub use path::{
    continue_sheet, integrate_path, track_root, PathIntegral, Path, Segment, Trace,
    CONTINUATION_STEPS, MAX_CONTINUATION_STEPS,
};
pub use symmetry::SymmetryElement;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::ThetaParam;

/// Relative tolerance on the curve equation.
pub const CURVE_EPS: f64 = 1e-10;

/// Right-hand side `z (z^4 + 2 cos2θ z^2 + 1)`.
#[inline]
pub fn curve_rhs(theta: &ThetaParam, z: Complex64) -> Complex64 {
    let z2 = z * z;
    z * (z2 * z2 + 2.0 * theta.cos2t() * z2 + 1.0)
}

/// Same curve in the chart at infinity: `v^2 = ζ (1 + 2 cos2θ ζ^2 + ζ^4)`
/// with `ζ = 1/z`, `v = w / z^3`. The polynomial is palindromic, so this is
/// the same expression.
#[inline]
pub fn chart_rhs(theta: &ThetaParam, zeta: Complex64) -> Complex64 {
    curve_rhs(theta, zeta)
}

/// Where a curve point sits: in the affine chart or at the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Locus {
    Finite { z: Complex64, w: Complex64 },
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: ThetaParam,
    pub locus: Locus,
}

impl CurvePoint {
    /// Builds a point, checking the curve equation.
    pub fn new(theta: ThetaParam, z: Complex64, w: Complex64) -> Result<Self> {
        let p = CurvePoint {
            theta,
            locus: Locus::Finite { z, w },
        };
        let r = p.residual();
        if !(r <= CURVE_EPS * (1.0 + z.norm().powi(5))) {
            return Err(Error::Geometry(format!(
                "({z}, {w}) is off the curve: residual {r:e}"
            )));
        }
        Ok(p)
    }

    /// The point over `z` whose `w` is nearest to `hint`.
    pub fn on_sheet(theta: ThetaParam, z: Complex64, hint: Complex64) -> Self {
        let [a, b] = fiber(z, &theta);
        let w = if (a - hint).norm() <= (b - hint).norm() { a } else { b };
        CurvePoint {
            theta,
            locus: Locus::Finite { z, w },
        }
    }

    pub fn infinity(theta: ThetaParam) -> Self {
        CurvePoint {
            theta,
            locus: Locus::Infinity,
        }
    }

    /// The base point `(1, sqrt(2 + 2 cos 2θ))`.
    pub fn base_point(theta: ThetaParam) -> Self {
        let w = Complex64::new((2.0 + 2.0 * theta.cos2t()).sqrt(), 0.0);
        CurvePoint {
            theta,
            locus: Locus::Finite {
                z: Complex64::new(1.0, 0.0),
                w,
            },
        }
    }

    pub fn z(&self) -> Option<Complex64> {
        match self.locus {
            Locus::Finite { z, .. } => Some(z),
            Locus::Infinity => None,
        }
    }

    pub fn w(&self) -> Option<Complex64> {
        match self.locus {
            Locus::Finite { w, .. } => Some(w),
            Locus::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.locus, Locus::Infinity)
    }

    /// `|w^2 - z(z^4 + 2cos2θ z^2 + 1)|`; zero at infinity.
    pub fn residual(&self) -> f64 {
        match self.locus {
            Locus::Finite { z, w } => (w * w - curve_rhs(&self.theta, z)).norm(),
            Locus::Infinity => 0.0,
        }
    }

    pub fn is_on_curve(&self) -> bool {
        match self.locus {
            Locus::Finite { z, .. } => self.residual() <= CURVE_EPS * (1.0 + z.norm().powi(5)),
            Locus::Infinity => true,
        }
    }

    /// Distance in the z-plane between two finite points, or whether both are
    /// at infinity; used for closure checks.
    pub fn distance(&self, other: &CurvePoint) -> f64 {
        match (self.locus, other.locus) {
            (Locus::Finite { z: a, w: wa }, Locus::Finite { z: b, w: wb }) => {
                (a - b).norm().max((wa - wb).norm())
            }
            (Locus::Infinity, Locus::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// The two square roots of `z(z^4 + 2cos2θ z^2 + 1)`: the first has
/// nonnegative real part (ties broken by nonnegative imaginary part), the
/// second is its negative.
pub fn fiber(z: Complex64, theta: &ThetaParam) -> [Complex64; 2] {
    let mut r = curve_rhs(theta, z).sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        r = -r;
    }
    // normalise signed zeros so that the doubled root at a branch point is +0
    if r.re == 0.0 {
        r.re = 0.0;
    }
    if r.im == 0.0 {
        r.im = 0.0;
    }
    [r, -r]
}

/// The five finite branch values: `0` followed by `e^{i(π/2-θ)}`,
/// `e^{i(π/2+θ)}`, `e^{-i(π/2-θ)}`, `e^{-i(π/2+θ)}`.
pub fn finite_branch_points(theta: &ThetaParam) -> [Complex64; 5] {
    let t = theta.theta();
    [
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, FRAC_PI_2 - t),
        Complex64::from_polar(1.0, FRAC_PI_2 + t),
        Complex64::from_polar(1.0, -(FRAC_PI_2 - t)),
        Complex64::from_polar(1.0, -(FRAC_PI_2 + t)),
    ]
}

/// The six ramification points of `(z, w) ↦ z`.
pub fn ramification_points(theta: &ThetaParam) -> [CurvePoint; 6] {
    let b = finite_branch_points(theta);
    let zero = Complex64::new(0.0, 0.0);
    let fin = |z: Complex64| CurvePoint {
        theta: *theta,
        locus: Locus::Finite { z, w: zero },
    };
    [
        fin(b[0]),
        fin(b[1]),
        fin(b[2]),
        fin(b[3]),
        fin(b[4]),
        CurvePoint::infinity(*theta),
    ]
}

/// Smallest distance from `z` to a finite branch value.
pub fn branch_distance(theta: &ThetaParam, z: Complex64) -> f64 {
    finite_branch_points(theta)
        .iter()
        .map(|b| (z - b).norm())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fiber_at_origin_is_double_zero() {
        let t = ThetaParam::new(0.4).unwrap();
        let [a, b] = fiber(c(0.0, 0.0), &t);
        assert_eq!(a, c(0.0, 0.0));
        assert_eq!(b, c(0.0, 0.0));
    }

    #[test]
    fn fiber_at_one_matches_base_point() {
        let t = ThetaParam::new(0.4).unwrap();
        let [a, b] = fiber(c(1.0, 0.0), &t);
        let expected = (2.0 + 2.0 * t.cos2t()).sqrt();
        assert!((a - c(expected, 0.0)).norm() < 1e-15);
        assert!((b + c(expected, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fiber_on_imaginary_axis() {
        let t = ThetaParam::new(0.7).unwrap();
        let s = 1.7;
        let [a, b] = fiber(c(0.0, s), &t);
        let w = Complex64::from_polar(
            (s * (s.powi(4) - 2.0 * t.cos2t() * s * s + 1.0)).sqrt(),
            FRAC_PI_4,
        );
        assert!((a - w).norm() < 1e-13 || (b - w).norm() < 1e-13);
    }

    #[test]
    fn bolza_branch_values_are_primitive_eighth_roots() {
        let t = ThetaParam::new(FRAC_PI_4).unwrap();
        let b = finite_branch_points(&t);
        for z in &b[1..] {
            assert!((z.powu(4) + 1.0).norm() < 1e-14);
            assert!((z.norm() - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
        for p in ramification_points(&t).iter().take(5) {
            assert_eq!(p.w(), Some(c(0.0, 0.0)));
            assert!(p.is_on_curve());
        }
        assert!(ramification_points(&t)[5].is_infinity());
    }

    #[test]
    fn construction_rejects_off_curve_points() {
        let t = ThetaParam::new(0.4).unwrap();
        assert!(CurvePoint::new(t, c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let p = CurvePoint::base_point(t);
        assert!(CurvePoint::new(t, p.z().unwrap(), p.w().unwrap()).is_ok());
    }
}
