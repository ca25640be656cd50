//! Mean distorting transformations.
//!
//! Given invertible linear maps `A₁ … A_N`, find the reference `T` that
//! minimises the total squared Fisher distortion `Σᵢ Dist_F²(T⁻¹Aᵢ)`, where
//! `Dist_F(A) = √(Σ ln² σₖ(A))`. The problem reduces to the Fréchet mean of
//! `AᵢAᵢᵗ` under the affine-invariant metric on SPD matrices; the Cholesky
//! factor of that mean is the answer.
//!
//! The [`panorama`] module applies this to affine panoramas: it picks the
//! common plane so that no single image is privileged, then removes the
//! remaining global rotation and translation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distortion;
pub mod error;
pub mod formats;
pub mod frechet;
pub mod image_io;
pub mod linalg;
pub mod mdt;
pub mod panorama;

pub use distortion::{
    distortion_breakdown_2d, fisher_distance, fisher_distortion, pullback_distance,
    AffineTransform, DistortionBreakdown,
};
pub use error::{Error, Result};
pub use frechet::{frechet_objective, geodesic_midpoint, karcher_mean, KarcherConfig, MeanResult};
pub use linalg::{LowerTriangularPD, OrthogonalMatrix, SpdMatrix, SquareMatrix};
pub use mdt::{mdt, total_distortion, MdtResult};
