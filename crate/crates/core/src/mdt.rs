//! Mean distorting transformation: the reference frame `T` minimising
//! `Σᵢ Dist_F²(T⁻¹·Aᵢ)` over a set of invertible linear maps.
//!
//! The objective only sees `Aᵢ·Aᵢᵗ`, so the problem reduces to the Fréchet
//! mean of those SPD matrices. The Cholesky factor of the mean is returned
//! as the canonical representative; any `T·Q` with `Q` orthogonal attains
//! the same objective.

use crate::distortion::fisher_distortion;
use crate::error::{Error, Result};
use crate::frechet::{karcher_mean, KarcherConfig, MeanResult};
use crate::linalg::{self, cholesky_factor, LowerTriangularPD, SpdMatrix, SquareMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MdtResult {
    pub transform: LowerTriangularPD,
    /// `Σᵢ Dist_F²(T⁻¹Aᵢ)`.
    pub objective: f64,
    /// Objective obtained when input `j` is taken as the reference.
    pub baseline_objectives: Vec<f64>,
    pub solver: MeanResult,
}

impl MdtResult {
    /// Index and objective of the best fixed-reference choice.
    pub fn best_baseline(&self) -> (usize, f64) {
        self.baseline_objectives
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("baseline objectives are never empty")
    }
}

fn check_transforms(transforms: &[SquareMatrix]) -> Result<usize> {
    let first = transforms.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    for a in transforms {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.dim(),
            });
        }
        linalg::ensure_invertible(a)?;
    }
    Ok(dim)
}

pub fn mdt(transforms: &[SquareMatrix], config: &KarcherConfig) -> Result<MdtResult> {
    check_transforms(transforms)?;
    let grams = transforms
        .iter()
        .map(|a| SpdMatrix::new(a.gram()))
        .collect::<Result<Vec<_>>>()?;
    let solver = karcher_mean(&grams, config)?;
    let transform = cholesky_factor(&solver.mean)?;

    let objective = total_distortion(transform.matrix(), transforms)?;
    let baseline_objectives = transforms
        .iter()
        .map(|reference| total_distortion(reference, transforms))
        .collect::<Result<Vec<_>>>()?;

    Ok(MdtResult {
        transform,
        objective,
        baseline_objectives,
        solver,
    })
}

/// `Σᵢ Dist_F²(reference⁻¹ · Aᵢ)`.
pub fn total_distortion(reference: &SquareMatrix, transforms: &[SquareMatrix]) -> Result<f64> {
    if let Some(a) = transforms.iter().find(|a| a.dim() != reference.dim()) {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: a.dim(),
        });
    }
    let inv = reference.inverse()?;
    transforms
        .iter()
        .map(|a| fisher_distortion(&inv.matmul(a)).map(|d| d * d))
        .sum()
}
