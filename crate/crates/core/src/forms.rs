//! Meromorphic one-forms `f(z, w) dz` on the curve, the exact-form
//! reductions to the second-kind basis, and residues at ramification points.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{
    curve_rhs, finite_branch_points, ramification_points, track_root, CurvePoint, Locus,
};
use crate::error::{Error, Result};
use crate::theta::ThetaParam;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `(p, k)` pairs for the monomials `z^p dz / w^k` spanning the nine-dimensional space.
pub const FULL_BASIS: [(i32, i32); 9] = [
    (0, 1),
    (0, 2),
    (1, 2),
    (2, 2),
    (0, 3),
    (1, 3),
    (2, 3),
    (3, 3),
    (4, 3),
];

/// Positions in [`FULL_BASIS`] of the six residue-free forms
/// `dz/w, dz/w³, z dz/w³, z² dz/w³, z³ dz/w³, z⁴ dz/w³`.
pub const HAT_INDICES: [usize; 6] = [0, 4, 5, 6, 7, 8];

/// `(p, k)` pairs for `dz/w, z dz/w, z³ dz/w³, z⁴ dz/w³`.
pub const SECOND_KIND_BASIS: [(i32, i32); 4] = [(0, 1), (1, 1), (3, 3), (4, 3)];

/// A finite sum `Σ c · z^p w^{-k} dz` with arbitrary integer exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialForm {
    pub theta: ThetaParam,
    pub terms: Vec<(i32, i32, C64)>,
}

impl MonomialForm {
    pub fn zero(theta: ThetaParam) -> Self {
        MonomialForm { theta, terms: Vec::new() }
    }

    pub fn monomial(theta: ThetaParam, p: i32, k: i32, coef: C64) -> Self {
        MonomialForm { theta, terms: vec![(p, k, coef)] }
    }

    pub fn plus(mut self, other: &MonomialForm) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self
    }

    pub fn minus(self, other: &MonomialForm) -> Self {
        let neg = other.scale(-ONE);
        self.plus(&neg)
    }

    pub fn scale(&self, s: C64) -> Self {
        MonomialForm {
            theta: self.theta,
            terms: self.terms.iter().map(|&(p, k, c)| (p, k, c * s)).collect(),
        }
    }

    /// Multiplies the density by `z^n`.
    pub fn times_z(&self, n: i32) -> Self {
        MonomialForm {
            theta: self.theta,
            terms: self.terms.iter().map(|&(p, k, c)| (p + n, k, c)).collect(),
        }
    }

    /// Density at a finite point.
    pub fn density(&self, z: C64, w: C64) -> C64 {
        self.terms
            .iter()
            .map(|&(p, k, c)| c * z.powi(p) * w.powi(-k))
            .sum()
    }

    fn has_pole_at(&self, z: C64, w: C64) -> bool {
        self.terms.iter().any(|&(p, k, c)| {
            c != ZERO && ((k > 0 && w == ZERO) || (p < 0 && z == ZERO))
        })
    }

    /// The exact form `d(z^p w^q)`.
    pub fn exact_differential(theta: ThetaParam, p: i32, q: i32) -> Self {
        let (pf, qf) = (p as f64, q as f64);
        let c = theta.cos2t();
        MonomialForm {
            theta,
            terms: vec![
                (p - 1, -q, C64::from((2.0 * pf + 5.0 * qf) / 2.0)),
                (p + 2, 2 - q, C64::from(-2.0 * qf * c)),
                (p, 2 - q, C64::from(-2.0 * qf)),
            ],
        }
    }
}

/// An element of the nine-dimensional space, in [`FULL_BASIS`] coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub theta: ThetaParam,
    pub coeffs: [C64; 9],
}

impl OneForm {
    pub fn new(theta: ThetaParam, coeffs: [C64; 9]) -> Self {
        OneForm { theta, coeffs }
    }

    pub fn basis(theta: ThetaParam, i: usize) -> Self {
        let mut coeffs = [ZERO; 9];
        coeffs[i] = ONE;
        OneForm { theta, coeffs }
    }

    /// `α₁ dz/w + α₂ dz/w³ + α₃ z dz/w³ + α₄ z² dz/w³ + α₅ z³ dz/w³ + α₆ z⁴ dz/w³`.
    pub fn from_alpha(theta: ThetaParam, alpha: [C64; 6]) -> Self {
        let mut coeffs = [ZERO; 9];
        for (a, &i) in alpha.iter().zip(&HAT_INDICES) {
            coeffs[i] = *a;
        }
        OneForm { theta, coeffs }
    }

    /// The six coefficients on the residue-free sub-basis, or an error if
    /// any `1/w²` coefficient is nonzero.
    pub fn alpha(&self) -> Result<[C64; 6]> {
        if self.coeffs[1..4].iter().any(|c| *c != ZERO) {
            return Err(Error::UnsupportedForm(
                "form has components along dz/w^2, z dz/w^2 or z^2 dz/w^2".into(),
            ));
        }
        Ok(HAT_INDICES.map(|i| self.coeffs[i]))
    }

    pub fn to_monomials(&self) -> MonomialForm {
        MonomialForm {
            theta: self.theta,
            terms: FULL_BASIS
                .iter()
                .zip(&self.coeffs)
                .filter(|(_, c)| **c != ZERO)
                .map(|(&(p, k), &c)| (p, k, c))
                .collect(),
        }
    }

    pub fn density(&self, z: C64, w: C64) -> C64 {
        let w1 = w.inv();
        let w2 = w1 * w1;
        let w3 = w2 * w1;
        let c = &self.coeffs;
        c[0] * w1
            + (c[1] + z * (c[2] + z * c[3])) * w2
            + (c[4] + z * (c[5] + z * (c[6] + z * (c[7] + z * c[8])))) * w3
    }
}

/// Evaluates the density of `ω` at a finite curve point.
pub fn eval_form(omega: &OneForm, p: &CurvePoint) -> Result<C64> {
    match p.locus {
        Locus::Finite { z, w } => {
            if w == ZERO && omega.coeffs.iter().any(|c| *c != ZERO) {
                return Err(Error::Pole(format!("density has a pole at ({z}, 0)")));
            }
            Ok(omega.density(z, w))
        }
        Locus::Infinity => Err(Error::Pole("density is not defined at infinity".into())),
    }
}

/// A form in the basis `dz/w, z dz/w, z³ dz/w³, z⁴ dz/w³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondKindForm {
    pub theta: ThetaParam,
    pub coeffs: [C64; 4],
}

impl SecondKindForm {
    pub fn to_monomials(&self) -> MonomialForm {
        MonomialForm {
            theta: self.theta,
            terms: SECOND_KIND_BASIS
                .iter()
                .zip(&self.coeffs)
                .map(|(&(p, k), &c)| (p, k, c))
                .collect(),
        }
    }

    pub fn density(&self, z: C64, w: C64) -> C64 {
        let w1 = w.inv();
        let w3 = w1 * w1 * w1;
        let z3 = z * z * z;
        (self.coeffs[0] + self.coeffs[1] * z) * w1 + (self.coeffs[2] + self.coeffs[3] * z) * z3 * w3
    }
}

impl fmt::Display for SecondKindForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coeffs;
        write!(
            f,
            "({}) dz/w + ({}) z dz/w + ({}) z^3 dz/w^3 + ({}) z^4 dz/w^3",
            c[0], c[1], c[2], c[3]
        )
    }
}

/// Reduction of `ω` modulo exact forms to the second-kind basis.
pub fn reduce_to_second_kind(omega: &OneForm) -> Result<SecondKindForm> {
    let a = omega.alpha()?;
    let c = omega.theta.cos2t();
    Ok(SecondKindForm {
        theta: omega.theta,
        coeffs: [
            a[0] + 0.75 * a[2],
            -1.5 * c * a[1] + 0.25 * a[3],
            -c * a[2] + a[4],
            (-5.0 + 6.0 * c * c) * a[1] - c * a[3] + a[5],
        ],
    })
}

/// Reduction of `z^power · ω` (power 1 or 2) modulo exact forms.
pub fn multiply_reduce(omega: &OneForm, power: u32) -> Result<SecondKindForm> {
    let a = omega.alpha()?;
    let c = omega.theta.cos2t();
    let s = omega.theta.sin2sq();
    let coeffs = match power {
        1 => [
            0.75 * a[1] + 0.25 * a[5],
            a[0] + 0.25 * a[2],
            -c * a[1] + a[3] - c * a[5],
            -c * a[2] + a[4],
        ],
        2 => [
            -c * a[0] + 0.25 * a[4],
            0.25 * a[1] + 0.75 * a[5],
            -4.0 * s * a[0] + a[2] - c * a[4],
            -c * a[1] + a[3] - c * a[5],
        ],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "multiplier power must be 1 or 2, got {power}"
            )))
        }
    };
    Ok(SecondKindForm { theta: omega.theta, coeffs })
}

/// The six basic equivalences used by the reductions, each as `lhs − rhs`
/// (which is exact, so all its periods vanish). Labels name the left side.
pub fn basic_relations(theta: ThetaParam) -> Vec<(&'static str, MonomialForm)> {
    let c = theta.cos2t();
    let s = theta.sin2sq();
    let m = |terms: Vec<(i32, i32, f64)>| MonomialForm {
        theta,
        terms: terms.into_iter().map(|(p, k, v)| (p, k, C64::from(v))).collect(),
    };
    vec![
        ("z dz/w^3", m(vec![(1, 3, 1.0), (0, 1, -0.75), (3, 3, c)])),
        ("z^2 dz/w^3", m(vec![(2, 3, 1.0), (1, 1, -0.25), (4, 3, c)])),
        (
            "dz/w^3",
            m(vec![(0, 3, 1.0), (1, 1, 1.5 * c), (4, 3, 5.0 - 6.0 * c * c)]),
        ),
        ("z^5 dz/w^3", m(vec![(5, 3, 1.0), (0, 1, -0.25), (3, 3, c)])),
        ("z^6 dz/w^3", m(vec![(6, 3, 1.0), (1, 1, -0.75), (4, 3, c)])),
        ("z^2 dz/w", m(vec![(2, 1, 1.0), (0, 1, c), (3, 3, 4.0 * s)])),
    ]
}

/// Default loop radius for residues.
pub const RESIDUE_EPS: f64 = 1e-2;
/// Trapezoid nodes on the doubled loop.
pub const RESIDUE_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residue {
    pub value: C64,
    /// `|value(ε) − value(ε/2)|`
    pub halving_change: f64,
}

/// `(1/2πi)∮ f dz` on the doubled loop `z = b + ε e^{iφ}`, `φ ∈ [0, 4π]`, or
/// on `ζ = 1/z = ε e^{iφ}` for the point at infinity.
fn loop_residue<F: Fn(C64, C64) -> C64>(
    theta: &ThetaParam,
    point: &CurvePoint,
    eps: f64,
    f: &F,
) -> C64 {
    let n = RESIDUE_NODES;
    let dphi = 4.0 * PI / n as f64;
    let mut acc = ZERO;
    match point.locus {
        Locus::Finite { z: b, .. } => {
            let z0 = b + eps;
            let mut w = curve_rhs(theta, z0).sqrt();
            for k in 0..n {
                let e = C64::from_polar(eps, k as f64 * dphi);
                let z = b + e;
                w = track_root(theta, z, w).unwrap_or(w);
                // dz = i e dφ
                acc += f(z, w) * C64::i() * e;
            }
        }
        Locus::Infinity => {
            let mut v = curve_rhs(theta, C64::from(eps)).sqrt();
            for k in 0..n {
                let zeta = C64::from_polar(eps, k as f64 * dphi);
                v = nearest(curve_rhs(theta, zeta).sqrt(), v);
                let z = zeta.inv();
                let w = v * z * z * z;
                // dz = -dζ/ζ², dζ = i ζ dφ
                acc += f(z, w) * (-C64::i() / zeta);
            }
        }
    }
    acc * dphi / (2.0 * PI * C64::i())
}

fn nearest(r: C64, prev: C64) -> C64 {
    if (r - prev).norm() <= (r + prev).norm() {
        r
    } else {
        -r
    }
}

/// Residue of `form` at a ramification point, with the ε/2 check.
pub fn residue_at(form: &MonomialForm, point: &CurvePoint, eps: f64) -> Result<Residue> {
    let theta = point.theta;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("loop radius must be positive, got {eps}")));
    }
    let branch = finite_branch_points(&theta);
    match point.locus {
        Locus::Finite { z: b, w } => {
            if w != ZERO || !branch.iter().any(|x| (*x - b).norm() < 1e-12) {
                return Err(Error::Geometry(format!("({b}, {w}) is not a ramification point")));
            }
            let others = branch
                .iter()
                .filter(|x| (**x - b).norm() >= 1e-12)
                .map(|x| (*x - b).norm())
                .fold(f64::INFINITY, f64::min);
            if eps >= 0.5 * others {
                return Err(Error::Geometry(format!(
                    "loop of radius {eps} around {b} comes within {others} of another branch point"
                )));
            }
        }
        Locus::Infinity => {
            // all finite branch values have modulus ≤ 1
            if eps >= 0.5 {
                return Err(Error::Geometry(format!(
                    "loop of radius 1/{eps} at infinity encloses finite branch points"
                )));
            }
        }
    }
    let f = |z: C64, w: C64| {
        if form.has_pole_at(z, w) {
            C64::new(f64::NAN, f64::NAN)
        } else {
            form.density(z, w)
        }
    };
    let r1 = loop_residue(&theta, point, eps, &f);
    let r2 = loop_residue(&theta, point, 0.5 * eps, &f);
    if !(r1.is_finite() && r2.is_finite()) {
        return Err(Error::Pole("density evaluated at a pole on the residue loop".into()));
    }
    Ok(Residue { value: r2, halving_change: (r1 - r2).norm() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueRow {
    /// Index into [`FULL_BASIS`].
    pub form: usize,
    /// Index into [`ramification_points`]; 5 is the point at infinity.
    pub point: usize,
    pub residue: Residue,
}

/// Residues of the six residue-free basis forms at all ramification points.
pub fn hat_residue_table(theta: ThetaParam, eps: f64) -> Result<Vec<ResidueRow>> {
    let points = ramification_points(&theta);
    let mut rows = Vec::with_capacity(36);
    for form in HAT_INDICES {
        let m = OneForm::basis(theta, form).to_monomials();
        for (point, p) in points.iter().enumerate() {
            rows.push(ResidueRow { form, point, residue: residue_at(&m, p, eps)? });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn th(x: f64) -> ThetaParam {
        ThetaParam::new(x).unwrap()
    }

    #[test]
    fn densities_at_base_point() {
        let t = th(0.6);
        let p0 = CurvePoint::base_point(t);
        let w0 = (2.0 + 2.0 * t.cos2t()).sqrt();
        let v = eval_form(&OneForm::basis(t, 0), &p0).unwrap();
        assert!((v.re - 1.0 / w0).abs() < 1e-15);
        let v = eval_form(&OneForm::basis(t, 5), &p0).unwrap();
        assert!((v.re - w0.powi(-3)).abs() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let t = th(0.6);
        let p = ramification_points(&t)[0];
        assert!(matches!(eval_form(&OneForm::basis(t, 0), &p), Err(Error::Pole(_))));
    }

    #[test]
    fn second_kind_reductions() {
        let t = th(0.5);
        let c = t.cos2t();
        let r = reduce_to_second_kind(&OneForm::basis(t, 0)).unwrap();
        assert_eq!(r.coeffs, [ONE, ZERO, ZERO, ZERO]);
        let r = reduce_to_second_kind(&OneForm::basis(t, 5)).unwrap();
        assert_eq!(r.coeffs, [C64::from(0.75), ZERO, C64::from(-c), ZERO]);
        assert!(reduce_to_second_kind(&OneForm::basis(t, 2)).is_err());
    }

    #[test]
    fn multiplied_reductions() {
        let t = th(0.5);
        let (c, s) = (t.cos2t(), t.sin2sq());
        let r = multiply_reduce(&OneForm::basis(t, 0), 2).unwrap();
        assert_eq!(r.coeffs, [C64::from(-c), ZERO, C64::from(-4.0 * s), ZERO]);
        let r = multiply_reduce(&OneForm::basis(t, 8), 1).unwrap();
        assert_eq!(r.coeffs, [C64::from(0.25), ZERO, C64::from(-c), ZERO]);
        assert!(multiply_reduce(&OneForm::basis(t, 8), 3).is_err());
    }

    #[test]
    fn exact_differential_matches_derivative() {
        // d(z^p w^q)/dz against a centred difference along the tracked sheet
        let t = th(0.7);
        let z = C64::new(0.8, 0.3);
        let w = curve_rhs(&t, z).sqrt();
        for (p, q) in [(1, -1), (0, -1), (3, -1), (2, 1), (1, -3)] {
            let form = MonomialForm::exact_differential(t, p, q);
            let h = 1e-5;
            let g = |zz: C64| {
                let ww = track_root(&t, zz, w).unwrap();
                zz.powi(p) * ww.powi(q)
            };
            let fd = (g(z + h) - g(z - h)) / (2.0 * h);
            assert!((fd - form.density(z, w)).norm() < 1e-7 * (1.0 + fd.norm()), "{p},{q}");
        }
    }

    #[test]
    fn dz_over_w_squared_has_residue_at_origin() {
        let t = th(0.6);
        let p = ramification_points(&t)[0];
        let r = residue_at(&OneForm::basis(t, 1).to_monomials(), &p, RESIDUE_EPS).unwrap();
        assert!((r.value - 2.0).norm() < 1e-10, "{}", r.value);
    }

    #[test]
    fn hat_basis_is_residue_free() {
        let t = th(0.4);
        for i in HAT_INDICES {
            let f = OneForm::basis(t, i).to_monomials();
            for p in ramification_points(&t) {
                let r = residue_at(&f, &p, RESIDUE_EPS).unwrap();
                assert!(r.value.norm() < 1e-8 && r.halving_change < 1e-8);
            }
        }
    }

    #[test]
    fn oversized_loop_is_rejected() {
        let t = th(0.4);
        let p = ramification_points(&t)[1];
        let f = OneForm::basis(t, 0).to_monomials();
        assert!(matches!(residue_at(&f, &p, 0.6), Err(Error::Geometry(_))));
    }

    proptest! {
        #[test]
        fn reductions_are_linear(
            th_ in 0.05f64..1.5,
            re in proptest::array::uniform6(-3.0f64..3.0),
            im in proptest::array::uniform6(-3.0f64..3.0),
            k in -2.0f64..2.0,
        ) {
            let t = th(th_);
            let a: [C64; 6] = std::array::from_fn(|i| C64::new(re[i], im[i]));
            let b: [C64; 6] = std::array::from_fn(|i| C64::new(im[i], -re[i] * 0.5));
            let sum: [C64; 6] = std::array::from_fn(|i| a[i] + b[i] * k);
            let fa = OneForm::from_alpha(t, a);
            let fb = OneForm::from_alpha(t, b);
            let fs = OneForm::from_alpha(t, sum);
            for pow in 0..3u32 {
                let red = |f: &OneForm| if pow == 0 { reduce_to_second_kind(f) } else { multiply_reduce(f, pow) };
                let (ra, rb, rs) = (red(&fa).unwrap(), red(&fb).unwrap(), red(&fs).unwrap());
                for i in 0..4 {
                    let d = rs.coeffs[i] - ra.coeffs[i] - rb.coeffs[i] * k;
                    prop_assert!(d.norm() < 1e-12 * (1.0 + rs.coeffs[i].norm()));
                }
            }
        }

        #[test]
        fn residues_sum_to_zero(th_ in 0.15f64..1.4, i in 0usize..9) {
            let t = th(th_);
            let f = OneForm::basis(t, i).to_monomials();
            let total: C64 = ramification_points(&t)
                .iter()
                .map(|p| residue_at(&f, p, 0.5 * RESIDUE_EPS).unwrap().value)
                .sum();
            prop_assert!(total.norm() < 1e-8, "total {}", total);
        }
    }
}
