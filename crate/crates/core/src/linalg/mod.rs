//! Dense linear algebra on small square matrices: the LQ and Cholesky
//! factorisations, SPD matrix functions, singular values, and rotation logs.

pub(crate) mod decomp;
mod matrix;

pub use matrix::{
    LowerTriangularPD, OrthogonalMatrix, SpdMatrix, SquareMatrix, MAX_CONDITION, SYMMETRY_TOLERANCE,
};

use crate::error::{Error, Result};

/// Largest |eigenvalue| accepted by [`spd_exp`]; `exp(±700)` stays normal.
const EXP_LIMIT: f64 = 700.0;

/// Singular values of `a` (descending) after checking the condition number.
pub(crate) fn ensure_invertible(a: &SquareMatrix) -> Result<Vec<f64>> {
    let sigma = decomp::jacobi_singular_values(a)?;
    let max = sigma[0];
    let min = *sigma.last().unwrap();
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::SingularMatrix {
            condition: max / min,
        });
    }
    Ok(sigma)
}

/// Singular values of an invertible matrix, descending.
pub fn singular_values(a: &SquareMatrix) -> Result<Vec<f64>> {
    ensure_invertible(a)
}

/// The unique factorisation `a = L·Q` with `L` lower triangular with positive
/// diagonal and `Q` orthogonal.
///
/// Computed from a Householder QR of `aᵗ`: if `aᵗ = Q'R` then `a = Rᵗ Q'ᵗ`.
pub fn lq_decompose(a: &SquareMatrix) -> Result<(LowerTriangularPD, OrthogonalMatrix)> {
    ensure_invertible(a)?;
    let (q, r) = decomp::householder_qr(&a.transpose());
    let l = LowerTriangularPD::new(r.transpose())?;
    Ok((l, OrthogonalMatrix::from_orthonormal(q.transpose())))
}

/// The factorisation `a = Q·R` with `R` upper triangular with positive diagonal.
/// Returned as `(Q, Rᵗ)` so the triangular factor keeps the lower-triangular type.
pub fn qr_decompose(a: &SquareMatrix) -> Result<(OrthogonalMatrix, LowerTriangularPD)> {
    let (l, q) = lq_decompose(&a.transpose())?;
    Ok((q.transpose(), l))
}

/// Cholesky factor: the unique `L` with `L·Lᵗ = p`.
pub fn cholesky_factor(p: &SpdMatrix) -> Result<LowerTriangularPD> {
    LowerTriangularPD::new(decomp::cholesky_lower(p.matrix())?)
}

/// The Cholesky map `L ↦ L·Lᵗ`.
pub fn cholesky_map(l: &LowerTriangularPD) -> SpdMatrix {
    SpdMatrix::from_symmetric_unchecked(l.matrix().gram())
}

/// Eigenvalues (ascending, positive) and orthonormal eigenvectors (columns).
pub fn spd_eigen(p: &SpdMatrix) -> Result<(Vec<f64>, OrthogonalMatrix)> {
    let (values, vectors) = decomp::symmetric_eigen(p.matrix())?;
    Ok((values, OrthogonalMatrix::from_orthonormal(vectors)))
}

pub(crate) fn spectral_map(
    values: &[f64],
    vectors: &SquareMatrix,
    f: impl Fn(f64) -> f64,
) -> SquareMatrix {
    let n = values.len();
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n)
                .map(|k| vectors[(i, k)] * f(values[k]) * vectors[(j, k)])
                .sum();
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// Principal matrix logarithm of an SPD matrix (symmetric result).
pub fn spd_log(p: &SpdMatrix) -> Result<SquareMatrix> {
    let (values, vectors) = decomp::symmetric_eigen(p.matrix())?;
    Ok(spectral_map(&values, &vectors, f64::ln))
}

/// Matrix exponential of a symmetric matrix.
pub fn spd_exp(s: &SquareMatrix) -> Result<SpdMatrix> {
    let asymmetry = s.asymmetry();
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let (values, vectors) = decomp::symmetric_eigen(s)?;
    if let Some(&eigenvalue) = values.iter().find(|v| v.abs() > EXP_LIMIT) {
        return Err(Error::Overflow { eigenvalue });
    }
    Ok(SpdMatrix::from_symmetric_unchecked(spectral_map(
        &values,
        &vectors,
        f64::exp,
    )))
}

/// Principal square root of an SPD matrix.
pub fn spd_sqrt(p: &SpdMatrix) -> Result<SpdMatrix> {
    spd_power(p, 0.5)
}

/// `p^t` for real `t` via the spectral decomposition.
pub fn spd_power(p: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    let (values, vectors) = decomp::symmetric_eigen(p.matrix())?;
    Ok(SpdMatrix::from_symmetric_unchecked(spectral_map(
        &values,
        &vectors,
        |x| x.powf(t),
    )))
}

/// Principal logarithm of a rotation in two or three dimensions.
pub fn so_log(q: &OrthogonalMatrix) -> Result<SquareMatrix> {
    if q.determinant_sign() < 0 {
        return Err(Error::ReflectionNotSupported {
            determinant: q.matrix().determinant(),
        });
    }
    let m = q.matrix();
    match q.dim() {
        1 => Ok(SquareMatrix::zeros(1)),
        2 => {
            let mut theta = m[(1, 0)].atan2(m[(0, 0)]);
            if theta <= -std::f64::consts::PI {
                theta = std::f64::consts::PI;
            }
            Ok(SquareMatrix::from_raw(2, vec![0.0, -theta, theta, 0.0]))
        }
        3 => Ok(hat(so3_log_vector(m))),
        dim => Err(Error::UnsupportedDimension {
            dim,
            context: "rotation logarithm",
        }),
    }
}

/// Exponential of a skew-symmetric matrix in two or three dimensions.
pub fn so_exp(omega: &SquareMatrix) -> Result<OrthogonalMatrix> {
    let asymmetry = omega.add(&omega.transpose()).frobenius_norm()
        / omega.frobenius_norm().max(f64::MIN_POSITIVE);
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::InvalidMatrix(
            "generator is not skew-symmetric".into(),
        ));
    }
    match omega.dim() {
        1 => Ok(OrthogonalMatrix::identity(1)),
        2 => Ok(OrthogonalMatrix::rotation_2d(
            0.5 * (omega[(1, 0)] - omega[(0, 1)]),
        )),
        3 => {
            let w = vee(omega);
            Ok(OrthogonalMatrix::from_orthonormal(so3_exp_vector(w)))
        }
        dim => Err(Error::UnsupportedDimension {
            dim,
            context: "rotation exponential",
        }),
    }
}

fn hat([x, y, z]: [f64; 3]) -> SquareMatrix {
    SquareMatrix::from_raw(3, vec![0.0, -z, y, z, 0.0, -x, -y, x, 0.0])
}

fn vee(k: &SquareMatrix) -> [f64; 3] {
    [
        0.5 * (k[(2, 1)] - k[(1, 2)]),
        0.5 * (k[(0, 2)] - k[(2, 0)]),
        0.5 * (k[(1, 0)] - k[(0, 1)]),
    ]
}

fn so3_exp_vector(w: [f64; 3]) -> SquareMatrix {
    let theta2 = w.iter().map(|x| x * x).sum::<f64>();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(w);
    SquareMatrix::identity(3)
        .add(&k.scale(a))
        .add(&k.matmul(&k).scale(b))
}

/// Rodrigues inverse, with a separate branch near a half turn where
/// `sin θ` carries no usable information about the axis.
fn so3_log_vector(q: &SquareMatrix) -> [f64; 3] {
    let cos = ((q.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let skew = vee(q);
    let sin = skew.iter().map(|x| x * x).sum::<f64>().sqrt();
    let theta = sin.atan2(cos);
    if theta < 1e-4 {
        let f = 1.0 + theta * theta / 6.0;
        return skew.map(|x| x * f);
    }
    if sin > 1e-3 || theta < std::f64::consts::FRAC_PI_2 {
        let f = theta / sin;
        return skew.map(|x| x * f);
    }
    let sym = q.symmetrized();
    let denom = 1.0 - cos;
    let k = (0..3)
        .max_by(|&i, &j| sym[(i, i)].total_cmp(&sym[(j, j)]))
        .unwrap();
    let mut axis = [0.0; 3];
    for (i, a) in axis.iter_mut().enumerate() {
        let delta = if i == k { cos } else { 0.0 };
        *a = (sym[(i, k)] - delta) / denom;
    }
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    axis.iter_mut().for_each(|x| *x /= norm);
    if axis.iter().zip(&skew).map(|(a, s)| a * s).sum::<f64>() < 0.0 {
        axis.iter_mut().for_each(|x| *x = -*x);
    }
    axis.map(|x| x * theta)
}
