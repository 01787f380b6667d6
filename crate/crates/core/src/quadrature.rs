//! Quadrature rules: an exp-sinh double-exponential rule for improper
//! integrals over the half-line and Gauss–Legendre panels for smooth arcs.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A quadrature value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Maximum number of step halvings after the initial level.
pub const MAX_HALVINGS: usize = 12;

const INITIAL_STEP: f64 = 0.5;

/// Integrates `f` over `(0, ∞)` through `t = e^x`, `x = (π/2) sinh u`.
///
/// The composite map sends the half-line to the whole `u`-axis; integrable
/// power singularities at either end become double-exponential decay in `u`,
/// so the trapezoidal rule converges geometrically in the number of halvings.
/// The error estimate is the difference of the last two levels.
pub fn exp_sinh<F>(f: F, tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let term = |u: f64| -> Option<f64> {
        let x = FRAC_PI_2 * u.sinh();
        let t = x.exp();
        if t == 0.0 || !t.is_finite() {
            return None;
        }
        let v = f(t) * t * FRAC_PI_2 * u.cosh();
        if v.is_finite() {
            Some(v)
        } else {
            None
        }
    };

    // Sum over u = offset + k*step for k = 0, 1, 2, ... in one direction,
    // stopping once the tail is negligible.
    let tail_sum = |start: f64, step: f64| -> f64 {
        let mut acc = 0.0;
        let mut small = 0;
        let mut k = 0usize;
        loop {
            let u = start + k as f64 * step;
            if u.abs() > 7.0 {
                break;
            }
            match term(u) {
                Some(v) => {
                    acc += v;
                    if v.abs() <= 1e-19 * acc.abs().max(1e-300) && u.abs() > 1.0 {
                        small += 1;
                        if small >= 3 {
                            break;
                        }
                    } else {
                        small = 0;
                    }
                }
                None => break,
            }
            k += 1;
        }
        acc
    };

    let mut h = INITIAL_STEP;
    let mut raw = term(0.0).unwrap_or(0.0) + tail_sum(h, h) + tail_sum(-h, -h);
    let mut prev = raw * h;
    for level in 1..=MAX_HALVINGS {
        h *= 0.5;
        // new nodes are the odd multiples of the halved step
        raw += tail_sum(h, 2.0 * h) + tail_sum(-h, -2.0 * h);
        let cur = raw * h;
        let err = (cur - prev).abs();
        if level >= 3 && err <= tol {
            return Ok(Estimate { value: cur, err });
        }
        prev = cur;
        if level == MAX_HALVINGS {
            return Err(Error::QuadratureNonConvergence {
                value: cur,
                achieved: err,
                tol,
            });
        }
    }
    unreachable!()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre
    /// polynomial, nodes sorted ascending.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sinh_known_integrals() {
        // ∫ e^{-t} = 1
        let e = exp_sinh(|t| (-t).exp(), 1e-13).unwrap();
        assert!((e.value - 1.0).abs() < 1e-13, "{e:?}");
        // ∫ t^{-1/2}/(1+t) = π
        let e = exp_sinh(|t| 1.0 / (t.sqrt() * (1.0 + t)), 1e-13).unwrap();
        assert!((e.value - std::f64::consts::PI).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn exp_sinh_rejects_bad_tol() {
        assert!(exp_sinh(|t| (-t).exp(), 0.0).is_err());
    }

    #[test]
    fn exp_sinh_reports_nonconvergence() {
        // below double-precision resolution: the level differences never settle
        let r = exp_sinh(|t| (-t).exp(), 1e-30);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 is exact for 8 nodes
        let v = gl.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }
}
