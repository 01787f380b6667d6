use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::path::{continue_sheet, integrate_path, Path, Segment, CONTINUATION_STEPS};
use super::{CurvePoint, Locus};
use crate::error::{Error, Result};
use crate::theta::ThetaParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleKind {
    C4Loop,
    PhiC4Loop,
    C5Loop,
    PhiC5Loop,
}

impl CycleKind {
    pub const ALL: [CycleKind; 4] = [
        CycleKind::C4Loop,
        CycleKind::PhiC4Loop,
        CycleKind::C5Loop,
        CycleKind::PhiC5Loop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CycleKind::C4Loop => "C4",
            CycleKind::PhiC4Loop => "phiC4",
            CycleKind::C5Loop => "C5",
            CycleKind::PhiC5Loop => "phiC5",
        }
    }

    fn is_phi(self) -> bool {
        matches!(self, CycleKind::PhiC4Loop | CycleKind::PhiC5Loop)
    }

    /// Direction of the half-line the cycle wraps: the positive real axis
    /// for `C4`, the positive imaginary axis for `C5`.
    fn ray_angle(self) -> f64 {
        match self {
            CycleKind::C4Loop | CycleKind::PhiC4Loop => 0.0,
            CycleKind::C5Loop | CycleKind::PhiC5Loop => FRAC_PI_2,
        }
    }
}

/// A closed lifted loop on the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub kind: CycleKind,
    pub path: Path,
    pub start: CurvePoint,
}

const R_IN: f64 = 0.5;
const R_OUT: f64 = 2.0;

/// The value of `w` on the half-line at radius `t`, as parametrized in the
/// definition of the cycle (`w > 0` on the real axis, `w = e^{iπ/4}·(...)`
/// on the imaginary axis).
fn ray_sheet(theta: &ThetaParam, kind: CycleKind, t: f64) -> Complex64 {
    let c = theta.cos2t();
    match kind {
        CycleKind::C4Loop | CycleKind::PhiC4Loop => {
            Complex64::new((t * (t.powi(4) + 2.0 * c * t * t + 1.0)).sqrt(), 0.0)
        }
        CycleKind::C5Loop | CycleKind::PhiC5Loop => Complex64::from_polar(
            (t * (t.powi(4) - 2.0 * c * t * t + 1.0)).sqrt(),
            PI / 4.0,
        ),
    }
}

/// Builds the closed loop `C ∪ (−j C)` for the half-line `C` of the given
/// kind, deformed off the branch points: the boundary of the annular sector
/// `R_IN < |z| < R_OUT` with a thin wedge around the half-line removed.
/// That boundary separates the half-line (and its endpoints `0`, `∞`) from
/// the other four branch points, so it is homologous to the half-line
/// traversed out on one sheet and back on the other.
pub fn build_cycle(theta: &ThetaParam, kind: CycleKind) -> Result<Cycle> {
    let t = theta.theta();
    let delta = 0.5 * t.min(FRAC_PI_2 - t);
    let beta = kind.ray_angle();
    let a0 = beta + delta;
    let a1 = beta + 2.0 * PI - delta;
    let origin = Complex64::new(0.0, 0.0);
    let segs = vec![
        Segment::Line {
            from: Complex64::from_polar(R_IN, a0),
            to: Complex64::from_polar(R_OUT, a0),
        },
        Segment::Arc { center: origin, radius: R_OUT, start: a0, end: a1 },
        Segment::Line {
            from: Complex64::from_polar(R_OUT, a1),
            to: Complex64::from_polar(R_IN, a1),
        },
        Segment::Arc { center: origin, radius: R_IN, start: a1, end: a0 },
    ];
    let mut path = Path::new(segs)?;

    // anchor the sheet on the half-line, then slide off it by delta
    let anchor_z = Complex64::from_polar(R_IN, beta);
    let anchor = CurvePoint {
        theta: *theta,
        locus: Locus::Finite { z: anchor_z, w: ray_sheet(theta, kind, R_IN) },
    };
    let slide = Path::new(vec![Segment::Arc {
        center: origin,
        radius: R_IN,
        start: beta,
        end: a0,
    }])?;
    let (mut start, _) = continue_sheet(&slide, &anchor, CONTINUATION_STEPS)?;

    if kind.is_phi() {
        let minus = Complex64::new(-1.0, 0.0);
        path = path.rotated(minus);
        start = super::SymmetryElement::Phi.apply(&start)?;
    }

    let (end, _) = continue_sheet(&path, &start, CONTINUATION_STEPS)?;
    if start.distance(&end) > 1e-9 {
        return Err(Error::Geometry(format!(
            "cycle {} does not close (gap {:e})",
            kind.name(),
            start.distance(&end)
        )));
    }
    Ok(Cycle { kind, path, start })
}

impl Cycle {
    /// Integrates `density(z, w) dz` around the cycle.
    pub fn integrate<F, const N: usize>(&self, density: F) -> Result<([Complex64; N], f64)>
    where
        F: Fn(Complex64, Complex64) -> [Complex64; N],
    {
        let w0 = self.start.w().expect("cycles start at finite points");
        let r = integrate_path(&self.start.theta, &self.path, w0, density)?;
        if (r.end_w - w0).norm() > 1e-9 * (1.0 + w0.norm()) {
            return Err(Error::Geometry(format!("cycle {} lost its sheet", self.kind.name())));
        }
        Ok((r.values, r.err))
    }
}

/// The real 4×4 matrix whose rows are
/// `(Re ∫dz/w, Im ∫dz/w, Re ∫z dz/w, Im ∫z dz/w)` over the four cycles,
/// with its 2-norm condition number. Fails when the condition number
/// exceeds `max_cond`.
pub fn homology_matrix(theta: &ThetaParam, max_cond: f64) -> Result<(Matrix4<f64>, f64)> {
    let mut m = Matrix4::zeros();
    for (i, kind) in CycleKind::ALL.iter().enumerate() {
        let cyc = build_cycle(theta, *kind)?;
        let ([p, q], _) = cyc.integrate(|z, w| [1.0 / w, z / w])?;
        m[(i, 0)] = p.re;
        m[(i, 1)] = p.im;
        m[(i, 2)] = q.re;
        m[(i, 3)] = q.im;
    }
    let sv = m.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= max_cond) {
        return Err(Error::IllConditioned(cond));
    }
    Ok((m, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::SymmetryElement;

    #[test]
    fn every_cycle_closes_on_its_start_sheet() {
        for th in [0.2, 0.65, 1.3] {
            let t = ThetaParam::new(th).unwrap();
            for k in CycleKind::ALL {
                let c = build_cycle(&t, k).unwrap();
                assert!(c.path.is_closed());
                assert!(c.start.is_on_curve());
            }
        }
    }

    #[test]
    fn phi_cycle_is_pointwise_image() {
        let t = ThetaParam::new(0.5).unwrap();
        let c = build_cycle(&t, CycleKind::C4Loop).unwrap();
        let p = build_cycle(&t, CycleKind::PhiC4Loop).unwrap();
        let img = SymmetryElement::Phi.apply(&c.start).unwrap();
        assert!(img.distance(&p.start) < 1e-14);
        // applying phi twice lands on the other sheet
        let twice = SymmetryElement::Phi.apply(&img).unwrap();
        let flipped = SymmetryElement::J.apply(&c.start).unwrap();
        assert!(twice.distance(&flipped) < 1e-14);
    }

    #[test]
    fn homology_matrix_is_well_conditioned() {
        let t = ThetaParam::new(0.4).unwrap();
        let (_, cond) = homology_matrix(&t, 1e6).unwrap();
        assert!(cond < 1e3, "cond = {cond}");
    }
}
