//! Weierstrass data of the forms found at the critical angle: the branched
//! minimal immersion `X`, its unit normal, the support functions `u = ⟨X, N⟩`
//! and numerical checks of their symmetries and eigenvalue equation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{
    branch_distance, continue_sheet, finite_branch_points, integrate_path, CurvePoint, Locus,
    Path, Segment, SymmetryElement, CONTINUATION_STEPS,
};
use crate::error::{Error, Result};
use crate::forms::OneForm;
use crate::theta::ThetaParam;

type C64 = Complex64;

/// Radius of the circular bypass around branch points on routed paths.
pub const DETOUR_RADIUS: f64 = 0.05;
/// Default finite-difference step.
pub const DEFAULT_STENCIL: f64 = 1e-3;

/// `N = (2 Re z, 2 Im z, |z|² − 1) / (|z|² + 1)`, and `(0, 0, 1)` at infinity.
pub fn gauss_normal(p: &CurvePoint) -> [f64; 3] {
    match p.locus {
        Locus::Finite { z, .. } => normal_at(z),
        Locus::Infinity => [0.0, 0.0, 1.0],
    }
}

fn normal_at(z: C64) -> [f64; 3] {
    let r2 = z.norm_sqr();
    let d = r2 + 1.0;
    [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Weierstrass integrands `(1 − z², i(1 + z²), 2z) f` for two forms at once.
fn weierstrass_density(forms: &[OneForm; 2], z: C64, w: C64) -> [C64; 6] {
    let i = C64::i();
    let z2 = z * z;
    let v = [1.0 - z2, i * (1.0 + z2), 2.0 * z];
    let f = [forms[0].density(z, w), forms[1].density(z, w)];
    std::array::from_fn(|k| v[k % 3] * f[k / 3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassValue {
    pub x: [[f64; 3]; 2],
    pub end: CurvePoint,
    pub err: f64,
}

/// `Re ∫ (1 − z², i(1 + z²), 2z) ω` along `path` from `start`, for a pair of forms.
pub fn weierstrass_pair(forms: &[OneForm; 2], path: &Path, start: &CurvePoint) -> Result<WeierstrassValue> {
    let w0 = start
        .w()
        .ok_or_else(|| Error::Geometry("integration must start at a finite point".into()))?;
    if path.is_empty() {
        return Ok(WeierstrassValue { x: [[0.0; 3]; 2], end: *start, err: 0.0 });
    }
    let r = integrate_path(&start.theta, path, w0, |z, w| weierstrass_density(forms, z, w))?;
    let x = [
        [r.values[0].re, r.values[1].re, r.values[2].re],
        [r.values[3].re, r.values[4].re, r.values[5].re],
    ];
    let z = path.end().expect("non-empty path");
    Ok(WeierstrassValue {
        x,
        end: CurvePoint { theta: start.theta, locus: Locus::Finite { z, w: r.end_w } },
        err: r.err,
    })
}

/// Single-form version of [`weierstrass_pair`].
pub fn weierstrass_integrate(omega: &OneForm, path: &Path, start: &CurvePoint) -> Result<[f64; 3]> {
    Ok(weierstrass_pair(&[*omega, *omega], path, start)?.x[0])
}

/// The loop from `z = 1` that encircles `e^{i(π/2 − θ)}` once
/// counterclockwise; its lift from the base point ends at the other point
/// over `z = 1`.
pub fn canonical_loop(theta: &ThetaParam) -> Result<Path> {
    let b = finite_branch_points(theta);
    let target = b[1];
    let others = b
        .iter()
        .filter(|x| (**x - target).norm() > 1e-12)
        .map(|x| (*x - target).norm())
        .fold(f64::INFINITY, f64::min);
    let rho = (0.4 * others).min(0.3);
    let one = C64::new(1.0, 0.0);
    let dir = (one - target) / (one - target).norm();
    let entry = target + dir * rho;
    let a0 = dir.arg();
    Path::new(vec![
        Segment::Line { from: one, to: entry },
        Segment::Arc { center: target, radius: rho, start: a0, end: a0 + 2.0 * PI },
        Segment::Line { from: entry, to: one },
    ])
}

/// A path in the z-plane from `from` to `to`: the straight segment, with a
/// half-circle of radius [`DETOUR_RADIUS`] around every branch value that
/// comes closer than that radius to it.
pub fn route(theta: &ThetaParam, from: C64, to: C64) -> Result<Path> {
    let len = (to - from).norm();
    if len == 0.0 {
        return Ok(Path::empty());
    }
    let r = DETOUR_RADIUS;
    for z in [from, to] {
        if branch_distance(theta, z) <= r {
            return Err(Error::Geometry(format!(
                "route endpoint {z} lies within {r} of a branch point"
            )));
        }
    }
    let dir = (to - from) / len;
    let mut hits: Vec<(f64, C64)> = finite_branch_points(theta)
        .iter()
        .filter_map(|&b| {
            let s = ((b - from) * dir.conj()).re;
            let off = ((b - from) * dir.conj()).im;
            (s > 0.0 && s < len && off.abs() < r).then_some((s, b))
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut segs = Vec::new();
    let mut cur = from;
    for (s, b) in hits {
        let off = ((b - from) * dir.conj()).im;
        let half = (r * r - off * off).sqrt();
        let entry = from + dir * (s - half);
        let exit = from + dir * (s + half);
        if (entry - cur).norm() > 0.0 {
            segs.push(Segment::Line { from: cur, to: entry });
        }
        let a0 = (entry - b).arg();
        // the shorter arc stays on the far side of the chord from b
        let mut d = (exit - b).arg() - a0;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        let a1 = a0 + d;
        segs.push(Segment::Arc { center: b, radius: r, start: a0, end: a1 });
        cur = exit;
    }
    segs.push(Segment::Line { from: cur, to });
    Path::new(segs)
}

/// A path from the base point to `target` whose lift ends on the target's
/// sheet: the route in the z-plane, preceded by the canonical loop when the
/// route alone lands on the other sheet.
pub fn path_to_point(target: &CurvePoint) -> Result<Path> {
    let theta = target.theta;
    let (z, w) = match target.locus {
        Locus::Finite { z, w } => (z, w),
        Locus::Infinity => return Err(Error::Geometry("cannot route to infinity".into())),
    };
    let p0 = CurvePoint::base_point(theta);
    let direct = route(&theta, C64::new(1.0, 0.0), z)?;
    let (end, _) = continue_sheet(&direct, &p0, CONTINUATION_STEPS)?;
    let we = end.w().unwrap();
    if (we - w).norm() <= (we + w).norm() {
        Ok(direct)
    } else {
        canonical_loop(&theta)?.then(&direct)
    }
}

/// `c_i = Re ∫ (1 − z², i(1 + z²), 2z) ω_i` along the canonical loop.
pub fn sheet_constants(forms: &[OneForm; 2]) -> Result<[[f64; 3]; 2]> {
    let theta = forms[0].theta;
    let p0 = CurvePoint::base_point(theta);
    Ok(weierstrass_pair(forms, &canonical_loop(&theta)?, &p0)?.x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionSample {
    pub point: CurvePoint,
    pub x: [f64; 3],
    pub n: [f64; 3],
    pub u: f64,
}

/// Position, normal and support values of both forms at `p`.
pub fn sample_pair(forms: &[OneForm; 2], p: &CurvePoint) -> Result<[ImmersionSample; 2]> {
    let p0 = CurvePoint::base_point(p.theta);
    let path = path_to_point(p)?;
    let v = weierstrass_pair(forms, &path, &p0)?;
    let n = gauss_normal(p);
    Ok(std::array::from_fn(|k| ImmersionSample {
        point: *p,
        x: v.x[k],
        n,
        u: dot(&v.x[k], &n),
    }))
}

/// `u = ⟨X_ω(p), N(p)⟩`.
pub fn support_function(omega: &OneForm, p: &CurvePoint) -> Result<f64> {
    Ok(sample_pair(&[*omega, *omega], p)?[0].u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub theta: f64,
    pub samples: usize,
    pub c1: [f64; 3],
    pub c2: [f64; 3],
    /// `max |u₁∘s₁ − u₁|`
    pub s1_u1: f64,
    /// `max |u₂∘s₁ + u₂|`
    pub s1_u2: f64,
    /// `max |u₁∘s₃ − u₁|`
    pub s3_u1: f64,
    /// `max |u₂∘s₃ − u₂|`
    pub s3_u2: f64,
    /// `max |u₁∘j + u₁ − ⟨c₁, N⟩|`
    pub j_u1: f64,
    /// `max |u₂∘j + u₂ − ⟨c₂, N⟩|`
    pub j_u2: f64,
    /// `max |f₁∘ψ − z⁴ f₁|` for `ω₁ = f₁ dz` (that is, `ψ*ω₁ = −z²ω₁`).
    pub psi_omega1: f64,
    /// `max |f₂∘ψ + z⁴ f₂|` (that is, `ψ*ω₂ = z²ω₂`).
    pub psi_omega2: f64,
    /// `max |f∘s₁ − conj f|` for `ω₁`, `max |f∘s₁ + conj f|` for `ω₂`.
    pub s1_density: f64,
    /// Largest value of `|u|` seen, for scale.
    pub u_scale: f64,
}

impl SymmetryReport {
    pub fn max_residual(&self) -> f64 {
        [self.s1_u1, self.s1_u2, self.s3_u1, self.s3_u2, self.j_u1, self.j_u2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Deterministic sample of `n` curve points with `0.3 ≤ |z| ≤ 2.5` kept
/// at least `0.15` from branch values and off the unit circle's fixed
/// points of `z ↦ 1/z̄`.
pub fn sample_points(theta: &ThetaParam, n: usize, seed: u64) -> Vec<CurvePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.random_range(0.3..2.5);
        let a = rng.random_range(0.0..2.0 * PI);
        let z = C64::from_polar(r, a);
        if branch_distance(theta, z) < 0.15 || (z - 1.0).norm() < 0.05 {
            continue;
        }
        let [w0, w1] = crate::curve::fiber(z, theta);
        let w = if rng.random::<bool>() { w0 } else { w1 };
        out.push(CurvePoint { theta: *theta, locus: Locus::Finite { z, w } });
    }
    out
}

pub fn symmetry_report(forms: &[OneForm; 2], n: usize, seed: u64) -> Result<SymmetryReport> {
    let theta = forms[0].theta;
    let c = sheet_constants(forms)?;
    let mut rep = SymmetryReport {
        theta: theta.theta(),
        samples: n,
        c1: c[0],
        c2: c[1],
        s1_u1: 0.0,
        s1_u2: 0.0,
        s3_u1: 0.0,
        s3_u2: 0.0,
        j_u1: 0.0,
        j_u2: 0.0,
        psi_omega1: 0.0,
        psi_omega2: 0.0,
        s1_density: 0.0,
        u_scale: 0.0,
    };
    for p in sample_points(&theta, n, seed) {
        let base = sample_pair(forms, &p)?;
        let at = |g: SymmetryElement| -> Result<[ImmersionSample; 2]> { sample_pair(forms, &g.apply(&p)?) };
        let s1 = at(SymmetryElement::S1)?;
        let s3 = at(SymmetryElement::S3)?;
        let j = at(SymmetryElement::J)?;
        let n0 = base[0].n;
        let (u1, u2) = (base[0].u, base[1].u);
        rep.u_scale = rep.u_scale.max(u1.abs()).max(u2.abs());
        rep.s1_u1 = rep.s1_u1.max((s1[0].u - u1).abs());
        rep.s1_u2 = rep.s1_u2.max((s1[1].u + u2).abs());
        rep.s3_u1 = rep.s3_u1.max((s3[0].u - u1).abs());
        rep.s3_u2 = rep.s3_u2.max((s3[1].u - u2).abs());
        rep.j_u1 = rep.j_u1.max((j[0].u + u1 - dot(&c[0], &n0)).abs());
        rep.j_u2 = rep.j_u2.max((j[1].u + u2 - dot(&c[1], &n0)).abs());

        let (z, w) = (p.z().unwrap(), p.w().unwrap());
        let q = SymmetryElement::Psi.apply(&p)?;
        let (zq, wq) = (q.z().unwrap(), q.w().unwrap());
        let z4 = z.powi(4);
        let f1 = forms[0].density(z, w);
        let f2 = forms[1].density(z, w);
        let scale = 1.0 + (z4 * f1).norm() + (z4 * f2).norm();
        rep.psi_omega1 = rep.psi_omega1.max((forms[0].density(zq, wq) - z4 * f1).norm() / scale);
        rep.psi_omega2 = rep.psi_omega2.max((forms[1].density(zq, wq) + z4 * f2).norm() / scale);
        let r = SymmetryElement::S1.apply(&p)?;
        let (zr, wr) = (r.z().unwrap(), r.w().unwrap());
        let d1 = (forms[0].density(zr, wr) - f1.conj()).norm();
        let d2 = (forms[1].density(zr, wr) + f2.conj()).norm();
        rep.s1_density = rep.s1_density.max(d1.max(d2) / (1.0 + f1.norm() + f2.norm()));
    }
    Ok(rep)
}

/// `|((1 + |z|²)²/4) Δ_h u + 2u|` with the five-point flat Laplacian of
/// step `h` at `z`.
pub fn stencil_residual<F: Fn(C64) -> Result<f64>>(u: F, z: C64, h: f64) -> Result<f64> {
    let u0 = u(z)?;
    let lap = (u(z + h)? + u(z - h)? + u(z + C64::new(0.0, h))? + u(z - C64::new(0.0, h))? - 4.0 * u0)
        / (h * h);
    let conf = (1.0 + z.norm_sqr()).powi(2) / 4.0;
    Ok((conf * lap + 2.0 * u0).abs())
}

/// [`stencil_residual`] for the support function of `omega` on the sheet
/// of `p`. The stencil values are obtained by integrating from `p` along the
/// four short arms, so they share the (long) integral to `p`.
pub fn eigen_residual(omega: &OneForm, p: &CurvePoint, h: f64) -> Result<f64> {
    let theta = p.theta;
    let z = p.z().ok_or_else(|| Error::Geometry("stencil centre at infinity".into()))?;
    if branch_distance(&theta, z) <= 10.0 * h || z.norm() * h > 0.1 {
        return Err(Error::Geometry(format!(
            "stencil of step {h} at {z} is too close to a branch point"
        )));
    }
    let forms = [*omega, *omega];
    let p0 = CurvePoint::base_point(theta);
    let x0 = weierstrass_pair(&forms, &path_to_point(p)?, &p0)?.x[0];
    let u = |q: C64| -> Result<f64> {
        let x = if q == z {
            x0
        } else {
            let arm = Path::new(vec![Segment::Line { from: z, to: q }])?;
            let dx = weierstrass_pair(&forms, &arm, p)?.x[0];
            [x0[0] + dx[0], x0[1] + dx[1], x0[2] + dx[2]]
        };
        Ok(dot(&x, &normal_at(q)))
    };
    stencil_residual(u, z, h)
}

/// The pulled-back height function `(|z|² − 1)/(|z|² + 1)`.
pub fn pullback_harmonic(z: C64) -> f64 {
    normal_at(z)[2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraFit {
    pub residual: f64,
    pub relative_residual: f64,
    pub condition: f64,
}

/// Least-squares fit of `u` by `span{N₁, N₂, N₃, 1}` over the samples.
pub fn extra_check(samples: &[(CurvePoint, f64)]) -> Result<ExtraFit> {
    if samples.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len();
    let a = DMatrix::from_fn(n, 4, |r, c| {
        if c == 3 {
            1.0
        } else {
            gauss_normal(&samples[r].0)[c]
        }
    });
    let b = DVector::from_fn(n, |r, _| samples[r].1);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e8) {
        return Err(Error::IllConditioned(cond));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Consistency(e.to_string()))?;
    let residual = (a * x - &b).norm();
    let scale = b.norm();
    Ok(ExtraFit {
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { 0.0 },
        condition: cond,
    })
}

/// A closed loop based at `z = 1` around the upper pair of unit-circle
/// branch values, with a closed lift; used to probe path dependence.
pub fn upper_pair_loop(theta: &ThetaParam) -> Result<Path> {
    let t = theta.theta();
    let centre = C64::new(0.0, t.cos());
    let radius = 0.5 * (t.sin() + t.cos());
    if t.cos() - t.sin() < 0.1 {
        return Err(Error::Geometry(format!(
            "no loop around the upper pair separates it from 0 at theta = {t}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    let entry = centre + radius * (one - centre) / (one - centre).norm();
    let a0 = (entry - centre).arg();
    Path::new(vec![
        Segment::Line { from: one, to: entry },
        Segment::Arc { center: centre, radius, start: a0, end: a0 + 2.0 * PI },
        Segment::Line { from: entry, to: one },
    ])
}

/// Minimum residual ratio under step halving accepted as second order.
pub const TREND_MIN_RATIO: f64 = 3.0;
/// Residual level below which quadrature noise masks the stencil error.
pub const NOISE_FLOOR: f64 = 5e-7;
/// Minimum number of points in the extra-eigenfunction fit.
pub const MIN_FIT_SAMPLES: usize = 20;

/// Index (0 or 1) of `w` in the ordered fiber over `z`.
pub fn sheet_index(p: &CurvePoint) -> Option<usize> {
    let (z, w) = (p.z()?, p.w()?);
    let f = crate::curve::fiber(z, &p.theta);
    Some(if (w - f[0]).norm() <= (w - f[1]).norm() { 0 } else { 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResidualRow {
    pub z: [f64; 2],
    pub sheet: usize,
    pub u1: f64,
    pub u2: f64,
    pub residual_h: f64,
    pub residual_half_h: f64,
    /// `residual_h / residual_half_h`; near 4 for second-order behaviour.
    pub ratio: f64,
    pub harmonic_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaVerification {
    pub theta: f64,
    pub h: f64,
    pub symmetry: SymmetryReport,
    pub eigen: Vec<EigenResidualRow>,
    pub extra: ExtraFit,
    /// `|X(p)|` difference between the direct route and the route through
    /// [`upper_pair_loop`] at the eigen-residual sample points.
    pub path_independence: Option<f64>,
}

impl OmegaVerification {
    pub fn max_eigen_residual(&self) -> f64 {
        self.eigen.iter().map(|r| r.residual_h).fold(0.0, f64::max)
    }

    pub fn max_harmonic_residual(&self) -> f64 {
        self.eigen.iter().map(|r| r.harmonic_residual).fold(0.0, f64::max)
    }

    /// Smallest `residual_h / residual_half_h` over the samples.
    pub fn min_ratio(&self) -> f64 {
        self.eigen.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min)
    }

    /// Every sample either shrinks by at least [`TREND_MIN_RATIO`] under
    /// halving or has already reached the integration noise floor.
    pub fn second_order_trend(&self) -> bool {
        self.eigen
            .iter()
            .all(|r| r.ratio >= TREND_MIN_RATIO || r.residual_half_h < NOISE_FLOOR)
    }
}

/// Symmetry report, eigen-equation residuals at `n_eigen` points for the
/// support function of the first form, the extra-eigenfunction fit and a
/// path-independence probe.
pub fn verify_omega(
    forms: &[OneForm; 2],
    n_symmetry: usize,
    n_eigen: usize,
    seed: u64,
    h: f64,
) -> Result<OmegaVerification> {
    let theta = forms[0].theta;
    let symmetry = symmetry_report(forms, n_symmetry, seed)?;
    let pts = sample_points(&theta, n_eigen.max(n_symmetry).max(MIN_FIT_SAMPLES), seed.wrapping_add(1));
    let mut eigen = Vec::with_capacity(pts.len());
    let mut fit = Vec::with_capacity(pts.len());
    let detour = upper_pair_loop(&theta).ok();
    let p0 = CurvePoint::base_point(theta);
    let mut path_gap: Option<f64> = detour.as_ref().map(|_| 0.0);
    for p in pts.iter().take(n_eigen) {
        let s = sample_pair(forms, p)?;
        let z = p.z().expect("finite sample");
        let r1 = eigen_residual(&forms[0], p, h)?;
        let r2 = eigen_residual(&forms[0], p, 0.5 * h)?;
        eigen.push(EigenResidualRow {
            z: [z.re, z.im],
            sheet: sheet_index(p).unwrap_or(0),
            u1: s[0].u,
            u2: s[1].u,
            residual_h: r1,
            residual_half_h: r2,
            ratio: r1 / r2,
            harmonic_residual: stencil_residual(|q| Ok(pullback_harmonic(q)), z, h)?,
        });
        if let (Some(lp), Some(gap)) = (&detour, path_gap.as_mut()) {
            let direct = weierstrass_pair(forms, &path_to_point(p)?, &p0)?;
            let around = weierstrass_pair(forms, &lp.clone().then(&path_to_point(p)?)?, &p0)?;
            if (around.end.w().unwrap() - direct.end.w().unwrap()).norm() > 1e-8 {
                return Err(Error::Consistency("detour loop changed the sheet".into()));
            }
            for k in 0..2 {
                let d: f64 = (0..3).map(|i| (direct.x[k][i] - around.x[k][i]).powi(2)).sum::<f64>().sqrt();
                *gap = gap.max(d);
            }
        }
    }
    for p in &pts {
        fit.push((*p, sample_pair(forms, p)?[0].u));
    }
    let extra = extra_check(&fit)?;
    Ok(OmegaVerification { theta: theta.theta(), h, symmetry, eigen, extra, path_independence: path_gap })
}

/// `Re ∫ (1 − z², i(1 + z²), 2z) ω` around a closed path.
pub fn loop_shift(omega: &OneForm, path: &Path, start: &CurvePoint) -> Result<[f64; 3]> {
    weierstrass_integrate(omega, path, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normals_at_special_points() {
        assert_eq!(normal_at(c(0.0, 0.0)), [0.0, 0.0, -1.0]);
        assert_eq!(normal_at(c(1.0, 0.0)), [1.0, 0.0, 0.0]);
        assert_eq!(normal_at(c(0.0, 1.0)), [0.0, 1.0, 0.0]);
        let t = ThetaParam::new(0.5).unwrap();
        assert_eq!(gauss_normal(&CurvePoint::infinity(t)), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn empty_path_gives_origin() {
        let t = ThetaParam::new(0.5).unwrap();
        let p0 = CurvePoint::base_point(t);
        let x = weierstrass_integrate(&OneForm::basis(t, 0), &Path::empty(), &p0).unwrap();
        assert_eq!(x, [0.0; 3]);
        assert_eq!(support_function(&OneForm::basis(t, 0), &p0).unwrap(), 0.0);
    }

    #[test]
    fn canonical_loop_reaches_other_sheet() {
        let t = ThetaParam::new(0.66).unwrap();
        let p0 = CurvePoint::base_point(t);
        let (end, _) = continue_sheet(&canonical_loop(&t).unwrap(), &p0, 256).unwrap();
        assert!((end.w().unwrap() + p0.w().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn routes_avoid_branch_points_and_reach_both_sheets() {
        let t = ThetaParam::new(0.66).unwrap();
        // straight line from 1 to -1 passes through 0
        let path = route(&t, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        for s in path.segments() {
            assert!(s.branch_clearance(&t) >= DETOUR_RADIUS * 0.999);
        }
        for w in crate::curve::fiber(c(-1.0, 0.3), &t) {
            let target = CurvePoint { theta: t, locus: Locus::Finite { z: c(-1.0, 0.3), w } };
            let p = path_to_point(&target).unwrap();
            let (end, _) = continue_sheet(&p, &CurvePoint::base_point(t), 256).unwrap();
            assert!((end.w().unwrap() - w).norm() < 1e-10);
        }
    }

    #[test]
    fn pullback_harmonic_stencil() {
        let z = c(0.3, 0.4);
        let r = stencil_residual(|q| Ok(pullback_harmonic(q)), z, 1e-3).unwrap();
        assert!(r < 1e-5);
        let k = stencil_residual(|_| Ok(0.7), z, 1e-3).unwrap();
        assert!((k - 1.4).abs() < 1e-12);
    }

    #[test]
    fn fit_reproduces_span() {
        let t = ThetaParam::new(0.5).unwrap();
        let pts = sample_points(&t, 20, 7);
        let s: Vec<(CurvePoint, f64)> = pts
            .iter()
            .map(|p| {
                let n = gauss_normal(p);
                (*p, 0.3 * n[0] - 2.0 * n[1] + 5.0)
            })
            .collect();
        assert!(extra_check(&s).unwrap().residual < 1e-10);
        let s3: Vec<(CurvePoint, f64)> = pts.iter().map(|p| (*p, gauss_normal(p)[2])).collect();
        assert!(extra_check(&s3).unwrap().residual < 1e-12);
        assert!(extra_check(&s3[..5]).is_err());
    }
}
