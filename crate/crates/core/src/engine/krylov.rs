use nalgebra::DMatrix;

use super::eigen::{dot, reorthogonalize, vnorm};
use crate::{Complex64, Error, Result, C0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Maximum Krylov subspace dimension per substep.
    pub max_dim: usize,
    /// Error target for the whole evolution, relative to the vector norm.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { max_dim: 30, tol: 1e-13 }
    }
}

/// `exp(-i t H) v` for a Hermitian `H` given as a matrix-vector product.
///
/// Substeps are chosen adaptively from the standard Lanczos a posteriori
/// error estimate `τ β_m |[exp(-i τ T) e_1]_m|`; `norm` is an estimate of
/// `‖H‖` used for the first step size.
pub fn expm_krylov<F>(matvec: F, v: &[Complex64], t: f64, norm: f64, opts: KrylovOptions) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let dim = v.len();
    let mut w = v.to_vec();
    if t == 0.0 || dim == 0 {
        return Ok(w);
    }
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut tau = if norm > 0.0 { (10.0 / norm).min(total) } else { total };
    let min_tau = total * 1e-13;
    let mut scratch = vec![C0; dim];

    while total - done > total * 1e-14 {
        let beta0 = vnorm(&w);
        if beta0 == 0.0 {
            return Ok(w);
        }
        let mut q: Vec<Vec<Complex64>> = vec![w.iter().map(|x| x / beta0).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut breakdown = false;
        let m_max = opts.max_dim.min(dim);
        let target = tau.min(total - done);
        let allowed_target = (opts.tol * target / total).max(1e-16);
        for k in 0..m_max {
            matvec(&q[k], &mut scratch);
            alpha.push(dot(&q[k], &scratch).re);
            reorthogonalize(&mut scratch, &q);
            let b = vnorm(&scratch);
            beta.push(b);
            if b <= 1e-14 * (alpha[k].abs() + 1.0) {
                breakdown = true;
                break;
            }
            // stop growing once the pending substep already meets its target
            if k >= 4 && k % 2 == 0 {
                let y = exp_tridiagonal_e1(&alpha, &beta, target, sign);
                if target * b * y[k].norm() <= 0.5 * allowed_target {
                    break;
                }
            }
            if k + 1 < m_max {
                q.push(scratch.iter().map(|x| x / b).collect());
            }
        }
        let m = alpha.len();
        let eig = tridiagonal(&alpha, &beta).symmetric_eigen();
        let last_beta = if breakdown { 0.0 } else { beta[m - 1] };

        tau = tau.min(total - done);
        loop {
            // y = exp(-i s τ T) e_1
            let y: Vec<Complex64> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|c| {
                            let phase = Complex64::from_polar(1.0, -sign * tau * eig.eigenvalues[c]);
                            eig.eigenvectors[(r, c)] * eig.eigenvectors[(0, c)] * phase
                        })
                        .sum()
                })
                .collect();
            let err = tau * last_beta * y[m - 1].norm();
            let allowed = (opts.tol * tau / total).max(1e-16);
            if err <= allowed {
                let mut next = vec![C0; dim];
                for (qk, yk) in q.iter().zip(&y) {
                    let c = yk * beta0;
                    next.iter_mut().zip(qk).for_each(|(n, x)| *n += x * c);
                }
                w = next;
                done += tau;
                if err < 0.1 * allowed {
                    tau *= 1.5;
                }
                break;
            }
            tau *= 0.5;
            if tau < min_tau {
                return Err(Error::StepSize(format!(
                    "Krylov substep underflow at t = {done:e} (error estimate {err:e})"
                )));
            }
        }
    }
    Ok(w)
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    })
}

/// `exp(-i s τ T) e_1` for the Lanczos tridiagonal `T`.
fn exp_tridiagonal_e1(alpha: &[f64], beta: &[f64], tau: f64, sign: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let eig = tridiagonal(alpha, beta).symmetric_eigen();
    (0..m)
        .map(|r| {
            (0..m)
                .map(|c| eig.eigenvectors[(r, c)] * eig.eigenvectors[(0, c)] * Complex64::from_polar(1.0, -sign * tau * eig.eigenvalues[c]))
                .sum()
        })
        .collect()
}
