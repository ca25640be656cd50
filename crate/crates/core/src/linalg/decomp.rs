//! Dense factorisations for small matrices: Cholesky, Householder QR,
//! cyclic Jacobi eigenvalues, and one-sided Jacobi singular values.

use crate::error::{Error, Result};
use crate::linalg::matrix::SquareMatrix;

const MAX_SWEEPS: usize = 64;

/// Plain Cholesky factor `L` with `L Lᵗ = m`. Reads only the lower triangle.
pub(crate) fn cholesky_lower(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.dim();
    let mut l = SquareMatrix::zeros(n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum();
        let pivot = m[(j, j)] - s;
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            l.set(i, j, (m[(i, j)] - s) / d);
        }
    }
    Ok(l)
}

/// Householder QR, `b = Q R`, with every diagonal entry of `R` made nonnegative.
/// Entries of `R` below the diagonal are exactly zero.
pub(crate) fn householder_qr(b: &SquareMatrix) -> (SquareMatrix, SquareMatrix) {
    let n = b.dim();
    let mut r = b.clone();
    let mut q = SquareMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let norm = (k..n).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        for j in 0..n {
            let dot: f64 = (k..n).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..n {
                r.set(i, j, r[(i, j)] - 2.0 * v[i - k] * dot);
            }
        }
        for i in 0..n {
            let dot: f64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..n {
                q.set(i, j, q[(i, j)] - 2.0 * dot * v[j - k]);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            r.set(i, j, 0.0);
        }
        if r[(i, i)] < 0.0 {
            for j in 0..n {
                r.set(i, j, -r[(i, j)]);
                q.set(j, i, -q[(j, i)]);
            }
        }
    }
    (q, r)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Eigenvalues come
/// back ascending; the eigenvector matrix holds them column-wise.
///
/// The off-diagonal threshold is relative to the geometric mean of the two
/// diagonal entries, which keeps small eigenvalues of positive definite
/// inputs accurate to working precision.
pub(crate) fn symmetric_eigen(m: &SquareMatrix) -> Result<(Vec<f64>, SquareMatrix)> {
    let n = m.dim();
    let mut a = m.symmetrized();
    let mut v = SquareMatrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt()
                    || apq.abs() < f64::MIN_POSITIVE
                {
                    if apq != 0.0 {
                        a.set(p, q, 0.0);
                        a.set(q, p, 0.0);
                    }
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, new_col, v[(k, old_col)]);
        }
    }
    Ok((values, vectors))
}

/// Singular values by one-sided (Hestenes) Jacobi, descending. Works directly
/// on the columns of `m`, so small singular values keep high relative accuracy.
pub(crate) fn jacobi_singular_values(m: &SquareMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut u = m.as_slice().to_vec();
    let col = |u: &[f64], j: usize| -> Vec<f64> { (0..n).map(|i| u[i * n + j]).collect() };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = (col(&u, p), col(&u, q));
                let alpha: f64 = cp.iter().map(|x| x * x).sum();
                let beta: f64 = cq.iter().map(|x| x * x).sum();
                let gamma: f64 = cp.iter().zip(&cq).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let up = u[i * n + p];
                    let uq = u[i * n + q];
                    u[i * n + p] = c * up - s * uq;
                    u[i * n + q] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|j| col(&u, j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}
