//! Fisher distortion of linear and affine maps, the affine-invariant
//! (Fisher) distance on SPD matrices, and its pullback to the lower
//! triangular group through the Cholesky map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cholesky_map, spd_eigen, spd_power, LowerTriangularPD, SpdMatrix, SquareMatrix,
};

/// Affine map `x ↦ A·x + b` with an invertible linear part.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTransform {
    linear: SquareMatrix,
    translation: Vec<f64>,
}

impl AffineTransform {
    pub fn new(linear: SquareMatrix, translation: Vec<f64>) -> Result<Self> {
        if translation.len() != linear.dim() {
            return Err(Error::DimensionMismatch {
                expected: linear.dim(),
                found: translation.len(),
            });
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite translation".into()));
        }
        linalg::ensure_invertible(&linear)?;
        Ok(Self {
            linear,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            linear: SquareMatrix::identity(dim),
            translation: vec![0.0; dim],
        }
    }

    pub fn from_linear(linear: SquareMatrix) -> Result<Self> {
        let dim = linear.dim();
        Self::new(linear, vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn linear(&self) -> &SquareMatrix {
        &self.linear
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn apply(&self, point: &[f64]) -> Vec<f64> {
        self.linear
            .mul_vec(point)
            .into_iter()
            .zip(&self.translation)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let linear = self.linear.matmul(&other.linear);
        let translation = self.apply(&other.translation);
        Self {
            linear,
            translation,
        }
    }

    /// Left-multiplies by a linear map `m`, i.e. `x ↦ m·(A·x + b)`.
    pub fn premultiply(&self, m: &SquareMatrix) -> Self {
        Self {
            linear: m.matmul(&self.linear),
            translation: m.mul_vec(&self.translation),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let translation = self
            .translation
            .iter()
            .zip(shift)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            linear: self.linear.clone(),
            translation,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let linear = self.linear.inverse()?;
        let translation = linear
            .mul_vec(&self.translation)
            .into_iter()
            .map(|v| -v)
            .collect();
        Ok(Self {
            linear,
            translation,
        })
    }
}

/// Fisher distortion with its two planar components.
///
/// For singular values `a ≥ b`: `angular = |ln(a/b)|`, `areal = |ln(ab)|`
/// and `total = √(ln²a + ln²b)`, so `angular² + areal² = 2·total²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionBreakdown {
    pub total: f64,
    pub angular: f64,
    pub areal: f64,
}

fn distortion_from_singular_values(sigma: &[f64]) -> f64 {
    sigma.iter().map(|s| s.ln().powi(2)).sum::<f64>().sqrt()
}

/// `√(Σ ln² σᵢ)` over the singular values of `a`; zero exactly on orthogonal maps.
pub fn fisher_distortion(a: &SquareMatrix) -> Result<f64> {
    Ok(distortion_from_singular_values(&linalg::singular_values(
        a,
    )?))
}

/// Affine-invariant distance `‖log(p^{-1/2} q p^{-1/2})‖_F`.
pub fn fisher_distance(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let whitening = spd_power(p, -0.5)?;
    let relative = q.congruence(whitening.matrix())?;
    let (values, _) = spd_eigen(&relative)?;
    Ok(values.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// Fisher distance measured through the Cholesky map.
pub fn pullback_distance(l1: &LowerTriangularPD, l2: &LowerTriangularPD) -> Result<f64> {
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch {
            expected: l1.dim(),
            found: l2.dim(),
        });
    }
    fisher_distance(&cholesky_map(l1), &cholesky_map(l2))
}

/// Planar breakdown into angular and areal parts.
pub fn distortion_breakdown_2d(a: &SquareMatrix) -> Result<DistortionBreakdown> {
    if a.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            dim: a.dim(),
            context: "distortion breakdown",
        });
    }
    let sigma = linalg::singular_values(a)?;
    let (major, minor) = (sigma[0], sigma[1]);
    Ok(DistortionBreakdown {
        total: distortion_from_singular_values(&sigma),
        angular: (major.ln() - minor.ln()).abs(),
        areal: (major.ln() + minor.ln()).abs(),
    })
}
