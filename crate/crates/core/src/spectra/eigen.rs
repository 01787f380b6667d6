//! Smallest eigenpairs of the symmetric pencil `K x = λ M x`.
//!
//! Small problems go through a dense Cholesky reduction. Larger ones use
//! Lanczos on `(K − σM)⁻¹M` in the `M` inner product with full
//! reorthogonalization, with the shifted matrix factored by a sparse LDLᵀ.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sprs::{CsMat, FillInReduction};
use sprs_ldl::{Ldl, LdlNumeric};

use super::fem::matvec;
use crate::error::{Error, Result};

/// Problems with fewer unknowns are solved densely.
pub const DENSE_THRESHOLD: usize = 800;
/// Shift used for the inverse iteration; below the spectrum of `K ≥ 0`.
pub const DEFAULT_SHIFT: f64 = -1.0;
/// Relative Ritz residual required for convergence.
pub const RITZ_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`; `M`-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    /// Relative residual bound per pair.
    pub residuals: Vec<f64>,
}

pub fn smallest_eigenpairs(k: &CsMat<f64>, m: &CsMat<f64>, nev: usize) -> Result<EigenPairs> {
    let n = k.rows();
    if nev == 0 || nev > n {
        return Err(Error::InvalidArgument(format!("cannot extract {nev} eigenpairs from {n} unknowns")));
    }
    if n < DENSE_THRESHOLD {
        dense(k, m, nev)
    } else {
        lanczos(k, m, nev, DEFAULT_SHIFT)
    }
}

pub fn dense(k: &CsMat<f64>, m: &CsMat<f64>, nev: usize) -> Result<EigenPairs> {
    let n = k.rows();
    let kd = to_dense(k);
    let md = to_dense(m);
    let chol = md
        .cholesky()
        .ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("singular Cholesky factor".into()))?;
    let a = &linv * kd * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut values = Vec::with_capacity(nev);
    let mut vectors = Vec::with_capacity(nev);
    for &i in order.iter().take(nev) {
        values.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let x = lt
            .clone()
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
        vectors.push(x.as_slice().to_vec());
    }
    Ok(EigenPairs { values, vectors, residuals: vec![0.0; nev] })
}

fn to_dense(a: &CsMat<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.rows(), a.cols());
    for (v, (i, j)) in a.iter() {
        d[(i, j)] += *v;
    }
    d
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct ShiftInvert {
    m: CsMat<f64>,
    ldl: LdlNumeric<f64, usize>,
}

impl ShiftInvert {
    fn new(k: &CsMat<f64>, m: &CsMat<f64>, shift: f64) -> Result<Self> {
        let shifted = (k - &m.map(|v| v * shift)).to_csc();
        let ldl = Ldl::new()
            .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
            .numeric(shifted.view())
            .map_err(|e| Error::Eigen(format!("factorization of K - sigma M failed: {e:?}")))?;
        Ok(ShiftInvert { m: m.clone(), ldl })
    }

    fn apply(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mx = matvec(&self.m, x);
        let y = self.ldl.solve(&mx);
        (y, mx)
    }
}

pub fn lanczos(k: &CsMat<f64>, m: &CsMat<f64>, nev: usize, shift: f64) -> Result<EigenPairs> {
    let n = k.rows();
    let op = ShiftInvert::new(k, m, shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut steps = (3 * nev + 30).min(n);
    loop {
        let res = lanczos_run(&op, n, nev, steps, shift, &mut rng)?;
        let converged = res.residuals.iter().all(|&r| r <= RITZ_TOL);
        if converged || steps == n {
            if !converged {
                return Err(Error::Eigen(format!(
                    "Lanczos did not converge: residual bounds {:?}",
                    res.residuals
                )));
            }
            return Ok(res);
        }
        steps = (2 * steps).min(n);
    }
}

fn lanczos_run(
    op: &ShiftInvert,
    n: usize,
    nev: usize,
    steps: usize,
    shift: f64,
    rng: &mut ChaCha8Rng,
) -> Result<EigenPairs> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut mq: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);

    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut mv = matvec(&op.m, &v);
    let nrm = dot(&v, &mv).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    mv.iter_mut().for_each(|x| *x /= nrm);

    let mut last_beta = 0.0;
    for j in 0..steps {
        q.push(v);
        mq.push(mv);
        let (mut r, _) = op.apply(&q[j]);
        let a = dot(&mq[j], &r);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt in the M inner product.
        for _ in 0..2 {
            for i in 0..=j {
                let c = dot(&mq[i], &r);
                r.iter_mut().zip(&q[i]).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mr = matvec(&op.m, &r);
        let b = dot(&r, &mr).max(0.0).sqrt();
        last_beta = b;
        if j + 1 == steps {
            break;
        }
        if b <= 1e-14 * a.abs().max(1e-300) {
            // Invariant subspace: continue with a fresh orthogonal direction.
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for i in 0..=j {
                    let c = dot(&mq[i], &w);
                    w.iter_mut().zip(&q[i]).for_each(|(x, y)| *x -= c * y);
                }
            }
            let mw = matvec(&op.m, &w);
            let s = dot(&w, &mw).sqrt();
            v = w.iter().map(|x| x / s).collect();
            mv = mw.iter().map(|x| x / s).collect();
            beta.push(0.0);
        } else {
            v = r.iter().map(|x| x / b).collect();
            mv = mr.iter().map(|x| x / b).collect();
            beta.push(b);
        }
    }

    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let take = nev.min(m);
    let mut values = Vec::with_capacity(take);
    let mut vectors = Vec::with_capacity(take);
    let mut residuals = Vec::with_capacity(take);
    for &i in order.iter().take(take) {
        let mu = eig.eigenvalues[i];
        if !(mu > 0.0) {
            return Err(Error::Eigen(format!("non-positive Ritz value {mu} of the shift-inverted operator")));
        }
        let s = eig.eigenvectors.column(i);
        let mut x = vec![0.0; n];
        for (c, qi) in s.iter().zip(&q) {
            x.iter_mut().zip(qi).for_each(|(a, b)| *a += c * b);
        }
        values.push(shift + 1.0 / mu);
        vectors.push(x);
        residuals.push((last_beta * s[m - 1]).abs() / mu);
    }
    Ok(EigenPairs { values, vectors, residuals })
}

/// `‖K x − λ M x‖ / ‖M x‖` (Euclidean) for diagnostics.
pub fn pair_residual(k: &CsMat<f64>, m: &CsMat<f64>, lambda: f64, x: &[f64]) -> f64 {
    let kx = matvec(k, x);
    let mx = matvec(m, x);
    let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - lambda * b).powi(2)).sum();
    r.sqrt() / dot(&mx, &mx).sqrt().max(1e-300) / lambda.abs().max(1.0)
}
