use std::fmt;
use std::ops::{Index, Mul};

use crate::error::{Error, Result};

/// Relative asymmetry accepted before a matrix is rejected as non-symmetric.
/// Anything below is treated as rounding noise and symmetrized away.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Largest condition number accepted as invertible.
pub const MAX_CONDITION: f64 = 1e12;

/// Dense n×n real matrix stored row-major. All entries are finite.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds a matrix without validation. Callers guarantee finiteness.
    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![0.0; dim * dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        m
    }

    /// Counter-clockwise planar rotation by `theta` radians.
    pub fn rotation_2d(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_raw(2, vec![c, -s, s, c])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Self::from_raw(n, out)
    }

    /// `self · selfᵗ`, exactly symmetric by construction.
    pub fn gram(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = (0..n)
                    .map(|k| self.data[i * n + k] * self.data[j * n + k])
                    .sum();
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_raw(
            self.dim,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_raw(
            self.dim,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// ‖self − other‖_F / max(‖other‖_F, tiny).
    pub fn relative_error(&self, other: &Self) -> f64 {
        self.sub(other).frobenius_norm() / other.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// ‖A − Aᵗ‖_F / ‖A‖_F.
    pub fn asymmetry(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.sub(&self.transpose()).frobenius_norm() / norm
    }

    pub fn symmetrized(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    /// LU factorisation with partial pivoting. Returns the packed factors, the
    /// row permutation, and the permutation parity, or `None` on an exact zero pivot.
    fn lu(&self) -> Option<(Vec<f64>, Vec<usize>, f64)> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
                .unwrap();
            if a[pivot_row * n + col] == 0.0 {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
                parity = -parity;
            }
            let pivot = a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                for j in col + 1..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
        Some((a, perm, parity))
    }

    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        match self.lu() {
            None => 0.0,
            Some((lu, _, parity)) => (0..n).fold(parity, |d, i| d * lu[i * n + i]),
        }
    }

    /// General inverse by LU with partial pivoting. Rejects matrices whose
    /// condition number exceeds [`MAX_CONDITION`].
    pub fn inverse(&self) -> Result<Self> {
        crate::linalg::ensure_invertible(self)?;
        let n = self.dim;
        let (lu, perm, _) = self.lu().ok_or(Error::SingularMatrix {
            condition: f64::INFINITY,
        })?;
        let mut inv = vec![0.0; n * n];
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<f64> = perm
                .iter()
                .map(|&p| if p == col { 1.0 } else { 0.0 })
                .collect();
            for i in 0..n {
                let s: f64 = (0..i).map(|k| lu[i * n + k] * x[k]).sum();
                x[i] -= s;
            }
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|k| lu[i * n + k] * x[k]).sum();
                x[i] = (x[i] - s) / lu[i * n + i];
            }
            for i in 0..n {
                inv[i * n + col] = x[i];
            }
        }
        Ok(Self::from_raw(n, inv))
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Symmetric positive definite matrix, a point of the SPD cone.
#[derive(Clone, PartialEq)]
pub struct SpdMatrix(SquareMatrix);

impl SpdMatrix {
    /// Symmetrizes `m` and checks positive definiteness with a Cholesky pass.
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let asymmetry = m.asymmetry();
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let m = m.symmetrized();
        crate::linalg::decomp::cholesky_lower(&m)?;
        Ok(Self(m))
    }

    pub(crate) fn from_symmetric_unchecked(m: SquareMatrix) -> Self {
        Self(m.symmetrized())
    }

    pub fn identity(dim: usize) -> Self {
        Self(SquareMatrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SquareMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    /// `x · self · xᵗ`.
    pub fn congruence(&self, x: &SquareMatrix) -> Result<Self> {
        Self::new(x.matmul(&self.0).matmul(&x.transpose()).symmetrized())
    }

    pub fn inverse(&self) -> Result<Self> {
        let l = crate::linalg::cholesky_factor(self)?;
        let linv = l.inverse();
        Ok(Self::from_symmetric_unchecked(
            linv.matrix().transpose().matmul(linv.matrix()),
        ))
    }
}

impl fmt::Debug for SpdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SpdMatrix").field(&self.0).finish()
    }
}

/// Lower triangular matrix with strictly positive diagonal.
#[derive(Clone, PartialEq)]
pub struct LowerTriangularPD(SquareMatrix);

impl LowerTriangularPD {
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let n = m.dim();
        for i in 0..n {
            for j in i + 1..n {
                if m[(i, j)] != 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({i}, {j}) above the diagonal is nonzero"
                    )));
                }
            }
            if !(m[(i, i)] > 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is not positive"
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(SquareMatrix::identity(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SquareMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.0
    }

    /// Inverse by forward substitution; stays in the group.
    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let l = &self.0;
        let mut inv = SquareMatrix::zeros(n);
        for col in 0..n {
            inv.set(col, col, 1.0 / l[(col, col)]);
            for i in col + 1..n {
                let s: f64 = (col..i).map(|k| l[(i, k)] * inv[(k, col)]).sum();
                inv.set(i, col, -s / l[(i, i)]);
            }
        }
        Self(inv)
    }

    /// Group product; the result is again lower triangular with positive diagonal.
    pub fn compose(&self, other: &Self) -> Self {
        Self(self.0.matmul(&other.0))
    }
}

impl fmt::Debug for LowerTriangularPD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("LowerTriangularPD").field(&self.0).finish()
    }
}

/// Orthogonal matrix together with the sign of its determinant.
#[derive(Clone, PartialEq)]
pub struct OrthogonalMatrix {
    matrix: SquareMatrix,
    determinant_sign: i8,
}

impl OrthogonalMatrix {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: SquareMatrix) -> Result<Self> {
        let err = m.gram().max_abs_diff(&SquareMatrix::identity(m.dim()));
        if err > Self::TOLERANCE {
            return Err(Error::InvalidMatrix(format!(
                "matrix is not orthogonal (max |QQᵗ - I| = {err:e})"
            )));
        }
        Ok(Self::from_orthonormal(m))
    }

    pub(crate) fn from_orthonormal(m: SquareMatrix) -> Self {
        let determinant_sign = if m.determinant() < 0.0 { -1 } else { 1 };
        Self {
            matrix: m,
            determinant_sign,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: SquareMatrix::identity(dim),
            determinant_sign: 1,
        }
    }

    pub fn rotation_2d(theta: f64) -> Self {
        Self {
            matrix: SquareMatrix::rotation_2d(theta),
            determinant_sign: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn determinant_sign(&self) -> i8 {
        self.determinant_sign
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.matrix
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            determinant_sign: self.determinant_sign,
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.matmul(&other.matrix),
            determinant_sign: self.determinant_sign * other.determinant_sign,
        }
    }
}

impl fmt::Debug for OrthogonalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrthogonalMatrix")
            .field("matrix", &self.matrix)
            .field("determinant_sign", &self.determinant_sign)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(SquareMatrix::new(0, vec![]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0; 3]).is_err());
        assert!(SquareMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn inverse_and_determinant() {
        let a = SquareMatrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        assert!((a.determinant() - 5.0).abs() < 1e-14);
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&SquareMatrix::identity(2)) < 1e-14);

        let singular = SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(
            singular.inverse(),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn spd_construction() {
        let p = SquareMatrix::from_rows(&[[2.0, 1.0], [1.0 + 1e-15, 2.0]]).unwrap();
        let spd = SpdMatrix::new(p).unwrap();
        assert_eq!(spd.matrix()[(0, 1)], spd.matrix()[(1, 0)]);

        let not_sym = SquareMatrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        assert!(matches!(
            SpdMatrix::new(not_sym),
            Err(Error::NotSymmetric { .. })
        ));

        let indefinite = SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            SpdMatrix::new(indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn lower_triangular_validation_and_inverse() {
        let upper = SquareMatrix::from_rows(&[[1.0, 1e-300], [0.0, 1.0]]).unwrap();
        assert!(LowerTriangularPD::new(upper).is_err());
        let neg = SquareMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(LowerTriangularPD::new(neg).is_err());

        let l = LowerTriangularPD::new(
            SquareMatrix::from_rows(&[[2.0, 0.0, 0.0], [1.0, 3.0, 0.0], [-1.0, 0.5, 0.25]])
                .unwrap(),
        )
        .unwrap();
        let prod = l.compose(&l.inverse());
        assert!(prod.matrix().max_abs_diff(&SquareMatrix::identity(3)) < 1e-14);
        assert!(LowerTriangularPD::new(prod.into_matrix()).is_ok());
    }

    #[test]
    fn orthogonal_determinant_sign() {
        let r = OrthogonalMatrix::new(SquareMatrix::rotation_2d(0.3)).unwrap();
        assert_eq!(r.determinant_sign(), 1);
        let f = OrthogonalMatrix::new(SquareMatrix::from_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(f.determinant_sign(), -1);
        assert!(OrthogonalMatrix::new(SquareMatrix::from_diagonal(&[1.0, 2.0])).is_err());
    }
}
