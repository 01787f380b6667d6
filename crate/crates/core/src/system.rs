//! The real 6×6 period system, its scripted row reduction, the critical
//! angles where it degenerates, and the null vectors there.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::OneForm;
use crate::integrals::{integral_quartet, IntegralQuartet, DEFAULT_TOL};
use crate::periods::CycleSet;
use crate::theta::ThetaParam;

type C64 = Complex64;

/// Default relative rank threshold for the SVD.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Default root tolerance in θ.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Number of θ samples in the sign-change scan.
pub const SCAN_SAMPLES: usize = 512;

/// The system `M x = 0` with `x = (α₁, α₅, ᾱ₂, ᾱ₄, α₃, ᾱ₆)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSystem {
    pub theta: ThetaParam,
    pub quartet: IntegralQuartet,
    pub m: Matrix6<f64>,
}

impl PeriodSystem {
    pub fn from_quartet(q: &IntegralQuartet) -> Self {
        let (a, b, cc, d) = (q.a, q.b, q.c, q.d);
        let c = q.theta.cos2t();
        let s = q.theta.sin2sq();
        #[rustfmt::skip]
        let m = Matrix6::from_row_slice(&[
            a, cc, 0.75 * a - cc * c,
                cc, 0.25 * a - cc * c, 0.25 * a - cc * c,
            b, -d, -0.75 * b - d * c,
                d, 0.25 * b + d * c, -0.25 * b - d * c,
            b, -d, 0.25 * b + d * c,
                -d, 0.75 * b + d * c, 0.75 * b + d * c,
            a, cc, -0.25 * a + cc * c,
                -cc, 0.75 * a - cc * c, -0.75 * a + cc * c,
            -(a * c + 4.0 * cc * s), 0.25 * a - cc * c, 1.5 * a * c + (5.0 - 6.0 * c * c) * cc,
                -0.25 * a + cc * c, cc, -cc,
            b * c - 4.0 * d * s, -(0.25 * b + d * c), 1.5 * b * c + (-5.0 + 6.0 * c * c) * d,
                -0.25 * b - d * c, d, d,
        ]);
        PeriodSystem { theta: q.theta, quartet: *q, m }
    }
}

pub fn assemble_system(theta: &ThetaParam, tol: f64) -> Result<PeriodSystem> {
    Ok(PeriodSystem::from_quartet(&integral_quartet(theta, tol)?))
}

/// `R[target] ← target_scale·R[target] + source_scale·R[source]` (rows 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowOp {
    pub target: usize,
    pub target_scale: f64,
    pub source: usize,
    pub source_scale: f64,
}

/// The 22 elementary operations that bring the system to block form.
pub fn reduction_ops(q: &IntegralQuartet) -> Vec<RowOp> {
    let (a, b, cc, d) = (q.a, q.b, q.c, q.d);
    let c = q.theta.cos2t();
    let s = q.theta.sin2sq();
    let e = q.ad_bc();
    let op = |t: usize, ts: f64, src: usize, ss: f64| RowOp {
        target: t - 1,
        target_scale: ts,
        source: src - 1,
        source_scale: ss,
    };
    vec![
        op(4, 1.0, 1, -1.0),
        op(5, 1.0, 1, c),
        op(3, 1.0, 2, -1.0),
        op(6, 1.0, 2, -c),
        op(5, a, 1, 4.0 * cc * s),
        op(6, b, 2, 4.0 * d * s),
        op(2, 1.0, 3, 0.5),
        op(6, 1.0, 3, -b * c + 2.0 * d * s),
        op(1, 1.0, 4, 0.5),
        op(5, 1.0, 4, a * c + 2.0 * cc * s),
        op(2, a, 1, -b),
        op(5, cc, 4, -a * a / 8.0),
        op(6, d, 3, -b * b / 8.0),
        op(1, e, 2, cc),
        op(3, cc, 4, -d),
        op(5, e, 2, a * a * cc / 4.0 + 4.0 * cc.powi(3) * s),
        op(6, e, 2, -b * b * d / 4.0 - 4.0 * d.powi(3) * s),
        op(1, e, 3, a * (-a * d + b * cc) / 4.0),
        op(2, e, 3, a * b / 2.0),
        op(4, e, 3, a - 2.0 * cc * c),
        op(
            5,
            e,
            3,
            -a * a * (a * a * d / 8.0 + e * cc * c + 6.0 * cc * cc * d * s)
                - 4.0 * a * b * cc.powi(3) * s,
        ),
        op(
            6,
            e,
            3,
            -b * b * (-b * b * cc / 8.0 + e * d * c - 6.0 * cc * d * d * s)
                + 4.0 * a * b * d.powi(3) * s,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub matrix: Matrix6<f64>,
    /// Self-scaling factor applied to the target row at each step.
    pub scalings: Vec<f64>,
}

/// Applies [`reduction_ops`] in order. Every self-scaling factor must be
/// strictly positive.
pub fn appendix_reduce(sys: &PeriodSystem) -> Result<Reduction> {
    let mut m = sys.m;
    let mut scalings = Vec::with_capacity(22);
    for (step, op) in reduction_ops(&sys.quartet).iter().enumerate() {
        if !(op.target_scale > 0.0) {
            return Err(Error::NonPositiveScaling { step: step + 1, factor: op.target_scale });
        }
        let src = m.row(op.source).clone_owned();
        let new = m.row(op.target) * op.target_scale + src * op.source_scale;
        m.set_row(op.target, &new);
        scalings.push(op.target_scale);
    }
    Ok(Reduction { matrix: m, scalings })
}

/// Evidence that the reduction is an invertible left multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEquivalence {
    /// `det L` for the accumulated row-operation matrix `L`.
    pub det_l: f64,
    /// Product of the self-scaling factors, which `det L` must equal.
    pub scaling_product: f64,
    /// `max |L M − R| / max |R|`.
    pub relative_defect: f64,
}

impl KernelEquivalence {
    pub fn holds(&self, tol: f64) -> bool {
        self.det_l > 0.0
            && (self.det_l - self.scaling_product).abs() <= tol * self.scaling_product
            && self.relative_defect <= tol
    }
}

pub fn kernel_equivalence(sys: &PeriodSystem, red: &Reduction) -> Result<KernelEquivalence> {
    let id = PeriodSystem { m: Matrix6::identity(), ..sys.clone() };
    let l = appendix_reduce(&id)?.matrix;
    Ok(KernelEquivalence {
        det_l: l.determinant(),
        scaling_product: red.scalings.iter().product(),
        relative_defect: (l * sys.m - red.matrix).amax() / red.matrix.amax(),
    })
}

/// `(F₁, F₂)`; the system is singular exactly where one of them vanishes.
pub fn residual_f(q: &IntegralQuartet) -> (f64, f64) {
    let (a, b, cc, d) = (q.a, q.b, q.c, q.d);
    let c = q.theta.cos2t();
    let s = q.theta.sin2sq();
    let e = q.ad_bc();
    let f1 = a * (b * b + 16.0 * d * d * s) + 8.0 * e * (b * c - 4.0 * d * s);
    let f2 = b * (a * a + 16.0 * cc * cc * s) - 8.0 * e * (a * c + 4.0 * cc * s);
    (f1, f2)
}

/// The block-triangular target of the reduction, written in closed form.
pub fn expected_reduced(q: &IntegralQuartet) -> Matrix6<f64> {
    let (a, b, cc, d) = (q.a, q.b, q.c, q.d);
    let c = q.theta.cos2t();
    let e = q.ad_bc();
    let g = -a * d + b * cc;
    let (f1, f2) = residual_f(q);
    #[rustfmt::skip]
    let m = Matrix6::from_row_slice(&[
        a * e * e, 0.0, 0.0, 0.0,
            0.5 * a * e * e + a * g * g / 8.0, 0.5 * a * e * g,
        0.0, -e * e, 0.0, 0.0,
            e * e * c + 0.25 * a * b * g, a * b * e,
        0.0, 0.0, e, 0.0,
            0.5 * g, e,
        0.0, 0.0, 0.0, -2.0 * cc * e,
            (a * b + (a * d - b * cc) * c) * cc, 0.0,
        0.0, 0.0, 0.0, 0.0,
            -a * cc * (3.0 * a * d + b * cc) * f2 / 16.0, 0.25 * a * cc * e * f2,
        0.0, 0.0, 0.0, 0.0,
            -b * d * (a * d + 3.0 * b * cc) * f1 / 16.0, -0.25 * b * d * e * f1,
    ]);
    m
}

/// Determinant of the trailing 2×2 block of a reduced matrix.
pub fn bottom_block_det(r: &Matrix6<f64>) -> f64 {
    r[(4, 4)] * r[(5, 5)] - r[(4, 5)] * r[(5, 4)]
}

/// The strictly positive factor `ABCD(AD+BC)²/16` with
/// `det(bottom block) = F₁ F₂ · factor`.
pub fn bottom_block_factor(q: &IntegralQuartet) -> f64 {
    let e = q.ad_bc();
    q.a * q.b * q.c * q.d * e * e / 16.0
}

/// Largest entrywise relative deviation `|x − y| / max(|y|, scale)`.
pub fn max_rel_deviation(x: &Matrix6<f64>, y: &Matrix6<f64>) -> f64 {
    let scale = y.amax().max(f64::MIN_POSITIVE);
    x.iter()
        .zip(y.iter())
        .map(|(u, v)| (u - v).abs() / v.abs().max(1e-3 * scale))
        .fold(0.0, f64::max)
}

/// Brent's method on a bracketing interval.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub theta: f64,
    pub f1: f64,
    pub f2: f64,
}

/// `F₁`, `F₂` at the midpoints of `n` equal cells of `(0, π/2)`.
pub fn scan_residuals(n: usize, tol: f64) -> Result<Vec<ScanSample>> {
    let h = FRAC_PI_2 / n as f64;
    (0..n)
        .map(|k| {
            let t = ThetaParam::new((k as f64 + 0.5) * h)?;
            let q = quartet_relaxed(&t, tol)?;
            let (f1, f2) = residual_f(&q);
            Ok(ScanSample { theta: t.theta(), f1, f2 })
        })
        .collect()
}

/// Quartet at absolute tolerance `tol`, relaxed to a relative accuracy of
/// `1e-7` for the integrals that blow up as θ approaches the ends of the
/// interval.
fn quartet_relaxed(theta: &ThetaParam, tol: f64) -> Result<IntegralQuartet> {
    let mut tol = tol;
    for _ in 0..4 {
        match integral_quartet(theta, tol) {
            Err(Error::QuadratureNonConvergence { value, achieved, .. })
                if achieved <= 1e-7 * value.abs() =>
            {
                tol = 2.0 * achieved;
            }
            other => return other,
        }
    }
    integral_quartet(theta, tol)
}

fn sign_changes(v: impl Iterator<Item = f64>) -> Vec<usize> {
    let v: Vec<f64> = v.collect();
    (1..v.len()).filter(|&i| v[i - 1].signum() != v[i].signum()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub f1_residual: f64,
    pub f2_residual: f64,
    /// Root of `F₂` found independently of `θ₁`.
    pub theta2_direct: f64,
    pub scan_sign_changes_f1: usize,
    pub scan_sign_changes_f2: usize,
    /// Sign changes of `F₁F₂` (equivalently of the bottom-block determinant).
    pub scan_sign_changes_det: usize,
}

/// Locates `θ₁` (the root of `F₁`) by a sign scan and Brent polish, sets
/// `θ₂ = π/2 − θ₁`, and cross-checks against a direct root of `F₂`.
pub fn solve_critical_thetas(tol_root: f64) -> Result<CriticalAngles> {
    if !(tol_root > 0.0) {
        return Err(Error::InvalidArgument(format!("root tolerance must be positive, got {tol_root}")));
    }
    // sign information only; near the ends one integral grows like log(1/θ)
    let scan = scan_residuals(SCAN_SAMPLES, 1e-9)?;
    let ch1 = sign_changes(scan.iter().map(|s| s.f1));
    let ch2 = sign_changes(scan.iter().map(|s| s.f2));
    let chd = sign_changes(scan.iter().map(|s| s.f1 * s.f2));
    if ch1.len() != 1 {
        return Err(Error::Uniqueness(ch1.len()));
    }
    if ch2.len() != 1 {
        return Err(Error::Uniqueness(ch2.len()));
    }
    let f = |which: usize| {
        move |th: f64| -> Result<f64> {
            let q = integral_quartet(&ThetaParam::new(th)?, DEFAULT_TOL)?;
            let (f1, f2) = residual_f(&q);
            Ok(if which == 1 { f1 } else { f2 })
        }
    };
    let (lo, hi) = (scan[ch1[0] - 1].theta, scan[ch1[0]].theta);
    let theta1 = brent(f(1), lo, hi, tol_root, 200)?;
    let (lo2, hi2) = (scan[ch2[0] - 1].theta, scan[ch2[0]].theta);
    let theta2_direct = brent(f(2), lo2, hi2, tol_root, 200)?;
    let theta2 = FRAC_PI_2 - theta1;
    if (theta2 - theta2_direct).abs() > 2.0 * tol_root.max(1e-10) {
        return Err(Error::Consistency(format!(
            "complement of theta1 ({theta2}) differs from the root of F2 ({theta2_direct})"
        )));
    }
    let q1 = integral_quartet(&ThetaParam::new(theta1)?, DEFAULT_TOL)?;
    let q2 = integral_quartet(&ThetaParam::new(theta2)?, DEFAULT_TOL)?;
    Ok(CriticalAngles {
        theta1,
        theta2,
        f1_residual: residual_f(&q1).0,
        f2_residual: residual_f(&q2).1,
        theta2_direct,
        scan_sign_changes_f1: ch1.len(),
        scan_sign_changes_f2: ch2.len(),
        scan_sign_changes_det: chd.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSpace {
    /// Descending.
    pub singular_values: Vec<f64>,
    pub nullity: usize,
    /// Right singular vectors spanning the numerical kernel.
    pub basis: Vec<[f64; 6]>,
    pub warning: Option<String>,
}

pub fn nullspace(sys: &PeriodSystem, tol_rank: f64) -> Result<NullSpace> {
    if !(tol_rank > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {tol_rank}")));
    }
    let svd = sys.m.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Consistency("SVD did not return V".into()))?;
    let mut idx: Vec<usize> = (0..6).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv[0];
    let mut basis = Vec::new();
    let mut warning = None;
    for (k, &i) in idx.iter().enumerate() {
        let rel = sv[k] / smax;
        if rel < tol_rank {
            let row = v_t.row(i);
            basis.push(std::array::from_fn(|j| row[j]));
        } else if rel <= 10.0 * tol_rank {
            warning = Some(format!(
                "singular value ratio {rel:e} lies in the indeterminate band [{tol_rank:e}, {:e}]",
                10.0 * tol_rank
            ));
        }
    }
    Ok(NullSpace { singular_values: sv, nullity: basis.len(), basis, warning })
}

/// Natural order `(α₁, …, α₆)` from system order `(α₁, α₅, α₂, α₄, α₃, α₆)`.
pub fn system_to_alpha<T: Copy>(x: [T; 6]) -> [T; 6] {
    [x[0], x[2], x[4], x[3], x[1], x[5]]
}

/// System order from natural order.
pub fn alpha_to_system<T: Copy>(a: [T; 6]) -> [T; 6] {
    [a[0], a[4], a[1], a[3], a[2], a[5]]
}

/// Decodes a complex solution `x` of `M x = 0` into α-coefficients
/// (slots 3, 4, 6 of `x` hold conjugates).
pub fn decode_solution(x: [C64; 6]) -> [C64; 6] {
    let a = system_to_alpha(x);
    [a[0], a[1].conj(), a[2], a[3].conj(), a[4], a[5].conj()]
}

/// The closed-form real coefficients `(α₁, …, α₆)` of the first extra form.
pub fn lemma_alpha(q: &IntegralQuartet) -> [f64; 6] {
    let (a, b, cc, d) = (q.a, q.b, q.c, q.d);
    let c = q.theta.cos2t();
    let e = q.ad_bc();
    let a1 = -(a * d + 3.0 * b * cc) / (4.0 * e);
    [
        a1,
        a1,
        1.0,
        (a * b + (a * d - b * cc) * c) / (2.0 * e),
        (a * b + 2.0 * e * c) / (2.0 * e),
        (3.0 * a * d + b * cc) / (4.0 * e),
    ]
}

/// The pair of forms built from a real null vector `y` (system order):
/// `ω₁` from `x = y`, `ω₂` from `x = i y`.
pub fn omega_pair_from_null(theta: ThetaParam, y: [f64; 6]) -> (OneForm, OneForm) {
    let x1 = y.map(C64::from);
    let x2 = y.map(|v| C64::new(0.0, v));
    (
        OneForm::from_alpha(theta, decode_solution(x1)),
        OneForm::from_alpha(theta, decode_solution(x2)),
    )
}

/// `|sin∠(u, v)|` for real vectors.
pub fn sin_angle(u: &[f64; 6], v: &[f64; 6]) -> f64 {
    let (u, v) = (Vector6::from_row_slice(u), Vector6::from_row_slice(v));
    let vh = v / v.norm();
    (u - vh * u.dot(&vh)).norm() / u.norm()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaPair {
    pub theta: f64,
    pub omega1: OneForm,
    pub omega2: OneForm,
    /// Sine of the angle between the SVD null vector and the closed-form
    /// coefficient vector; `None` when no closed form applies.
    pub closed_form_sin_angle: Option<f64>,
    pub null: NullSpace,
}

/// Parallelism threshold between the null vector and the closed form.
pub const PARALLEL_TOL: f64 = 1e-7;

/// The forms spanning the solution space at a critical angle. Where `F₁`
/// vanishes the closed-form coefficients are returned after checking they
/// are parallel to the SVD null vector; where `F₂` vanishes the normalized
/// null vector itself is used.
pub fn omega_pair_at(theta: &ThetaParam, tol_rank: f64) -> Result<OmegaPair> {
    let sys = assemble_system(theta, DEFAULT_TOL)?;
    let null = nullspace(&sys, tol_rank)?;
    if null.nullity != 1 {
        return Err(Error::Consistency(format!(
            "expected a one-dimensional real kernel at theta = {}, found {}",
            theta.theta(),
            null.nullity
        )));
    }
    let (f1, f2) = residual_f(&sys.quartet);
    let y = null.basis[0];
    if f1.abs() <= f2.abs() {
        let closed = lemma_alpha(&sys.quartet);
        let v = alpha_to_system(closed);
        let sa = sin_angle(&v, &y);
        if !(sa <= PARALLEL_TOL) {
            return Err(Error::Consistency(format!(
                "null vector deviates from the closed form by sin(angle) = {sa:e}"
            )));
        }
        let (o1, o2) = omega_pair_from_null(*theta, v);
        Ok(OmegaPair {
            theta: theta.theta(),
            omega1: o1,
            omega2: o2,
            closed_form_sin_angle: Some(sa),
            null,
        })
    } else {
        // normalize as in the closed form: unit coefficient on z dz/w³
        let scale = y[4];
        if scale.abs() < 1e-12 {
            return Err(Error::Consistency("null vector has no z dz/w^3 component".into()));
        }
        let yn = y.map(|v| v / scale);
        let (o1, o2) = omega_pair_from_null(*theta, yn);
        Ok(OmegaPair {
            theta: theta.theta(),
            omega1: o1,
            omega2: o2,
            closed_form_sin_angle: None,
            null,
        })
    }
}

/// `max_ℓ |Re ∫_ℓ (1−z², i(1+z²), 2z) ω|` over the four cycles.
pub fn period_condition_residual(omega: &OneForm, cycles: &CycleSet) -> Result<f64> {
    let i = C64::i();
    let w = *omega;
    let per = cycles.periods(move |z, ww| {
        let f = w.density(z, ww);
        let z2 = z * z;
        [(1.0 - z2) * f, i * (1.0 + z2) * f, 2.0 * z * f]
    })?;
    Ok(per
        .iter()
        .flat_map(|p| p.iter().map(|v| v.re.abs()))
        .fold(0.0, f64::max))
}

/// Residuals of `∫ω = conj(∫z²ω)` and `∫zω = −conj(∫zω)` over the cycles.
pub fn rewritten_condition_residual(omega: &OneForm, cycles: &CycleSet) -> Result<f64> {
    let w = *omega;
    let per = cycles.periods(move |z, ww| {
        let f = w.density(z, ww);
        [f, z * f, z * z * f]
    })?;
    Ok(per
        .iter()
        .map(|p| (p[0] - p[2].conj()).norm().max((p[1] + p[1].conj()).norm()))
        .fold(0.0, f64::max))
}

/// Pullback of a form on the curve at `π/2 − θ` under
/// `R(z, w) = (iz, e^{iπ/4} w)`, which maps the curve at θ onto it.
pub fn rotation_pullback(omega: &OneForm, theta: ThetaParam) -> OneForm {
    use crate::forms::FULL_BASIS;
    let i = C64::i();
    let mut coeffs = [C64::new(0.0, 0.0); 9];
    for (k, &(p, kk)) in FULL_BASIS.iter().enumerate() {
        // z'^p dz'/w'^k = i^{p+1} e^{-ikπ/4} z^p dz/w^k
        let f = i.powi(p + 1) * C64::from_polar(1.0, -(kk as f64) * FRAC_PI_4);
        coeffs[k] = omega.coeffs[k] * f;
    }
    OneForm { theta, coeffs }
}

/// Least-squares distance of `target` from the real span of `basis`,
/// relative to `|target|`.
pub fn real_span_residual(target: &OneForm, basis: &[OneForm]) -> f64 {
    let n = 18;
    let a = DMatrix::from_fn(n, basis.len(), |r, c| {
        let z = basis[c].coeffs[r / 2];
        if r % 2 == 0 { z.re } else { z.im }
    });
    let b = DVector::from_fn(n, |r, _| {
        let z = target.coeffs[r / 2];
        if r % 2 == 0 { z.re } else { z.im }
    });
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).expect("SVD with U and V");
    (a * x - &b).norm() / b.norm()
}

/// Checks that `i·R*ω` lies in the real span of the pair at `π/2 − θ₂`
/// for each form `ω` of the pair at `θ₂`. Returns the larger relative
/// residual.
pub fn complement_rotation_check(theta2: &ThetaParam, tol_rank: f64) -> Result<f64> {
    let at2 = omega_pair_at(theta2, tol_rank)?;
    let theta1 = theta2.complement();
    let at1 = omega_pair_at(&theta1, tol_rank)?;
    let span = [at1.omega1, at1.omega2];
    let i = C64::i();
    let mut worst: f64 = 0.0;
    for om in [at2.omega1, at2.omega2] {
        let mut pulled = rotation_pullback(&om, theta1);
        for c in pulled.coeffs.iter_mut() {
            *c *= i;
        }
        worst = worst.max(real_span_residual(&pulled, &span));
    }
    Ok(worst)
}
