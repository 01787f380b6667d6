use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CurvePoint, Locus};
use crate::error::Result;

/// The named automorphisms and anti-holomorphic involutions of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryElement {
    /// `(z, w) ↦ (z, -w)`, the hyperelliptic involution
    J,
    /// `(z, w) ↦ (z̄, w̄)`
    S1,
    /// `(z, w) ↦ (-z̄, i w̄)`
    S2,
    /// `(z, w) ↦ (1/z̄, w̄ / z̄^3)`
    S3,
    /// `(z, w) ↦ (-z, i w)`
    Phi,
    /// `(z, w) ↦ (1/z, w / z^3)`
    Psi,
}

impl SymmetryElement {
    pub const ALL: [SymmetryElement; 6] = [
        SymmetryElement::J,
        SymmetryElement::S1,
        SymmetryElement::S2,
        SymmetryElement::S3,
        SymmetryElement::Phi,
        SymmetryElement::Psi,
    ];

    pub fn is_antiholomorphic(self) -> bool {
        matches!(self, SymmetryElement::S1 | SymmetryElement::S2 | SymmetryElement::S3)
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryElement::J => "j",
            SymmetryElement::S1 => "s1",
            SymmetryElement::S2 => "s2",
            SymmetryElement::S3 => "s3",
            SymmetryElement::Phi => "phi",
            SymmetryElement::Psi => "psi",
        }
    }

    /// Image of a curve point. The inversions `s3` and `psi` exchange the
    /// ramification points over `0` and `∞`.
    pub fn apply(self, p: &CurvePoint) -> Result<CurvePoint> {
        let i = Complex64::i();
        let locus = match (self, p.locus) {
            (SymmetryElement::S3 | SymmetryElement::Psi, Locus::Infinity) => Locus::Finite {
                z: Complex64::new(0.0, 0.0),
                w: Complex64::new(0.0, 0.0),
            },
            (_, Locus::Infinity) => Locus::Infinity,
            (SymmetryElement::S3 | SymmetryElement::Psi, Locus::Finite { z, .. }) if z.norm() == 0.0 => {
                Locus::Infinity
            }
            (g, Locus::Finite { z, w }) => {
                let (z2, w2) = match g {
                    SymmetryElement::J => (z, -w),
                    SymmetryElement::S1 => (z.conj(), w.conj()),
                    SymmetryElement::S2 => (-z.conj(), i * w.conj()),
                    SymmetryElement::S3 => {
                        let zb = z.conj();
                        (1.0 / zb, w.conj() / (zb * zb * zb))
                    }
                    SymmetryElement::Phi => (-z, i * w),
                    SymmetryElement::Psi => (1.0 / z, w / (z * z * z)),
                };
                Locus::Finite { z: z2, w: w2 }
            }
        };
        Ok(CurvePoint {
            theta: p.theta,
            locus,
        })
    }

    /// Applies a word of elements right-to-left, i.e. `compose(&[a, b], p) = a(b(p))`.
    pub fn compose(word: &[SymmetryElement], p: &CurvePoint) -> Result<CurvePoint> {
        let mut q = *p;
        for g in word.iter().rev() {
            q = g.apply(&q)?;
        }
        Ok(q)
    }
}
