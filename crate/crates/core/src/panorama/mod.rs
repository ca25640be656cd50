//! Affine panorama re-referencing.
//!
//! Every image `i` comes with a transform `Tᵢ(x) = Aᵢx + bᵢ` into a common
//! plane. The plane itself is a free gauge: any global affine map can be
//! composed on the left. [`rereference`] replaces the gauge by the mean
//! distorting transformation `T`, then removes the mean residual rotation
//! and finally shifts the panorama so its bounding box starts at the origin.

mod composite;
mod estimate;

pub use composite::{composite, composite_transforms, Canvas, RgbaImage};
pub use estimate::{chain_transforms, estimate_affine, AffineEstimate, PairCorrespondences};

use serde::{Deserialize, Serialize};

use crate::distortion::{distortion_breakdown_2d, AffineTransform, DistortionBreakdown};
use crate::error::{Error, Result};
use crate::frechet::KarcherConfig;
use crate::linalg::{qr_decompose, so_exp, so_log, OrthogonalMatrix, SquareMatrix};
use crate::mdt::{mdt, MdtResult};

/// One source image. `width` and `height` are in pixels; pixel centres sit
/// on integer coordinates, so the image covers `[0, w-1] × [0, h-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaImage {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub pixels: Option<RgbaImage>,
}

impl PanoramaImage {
    pub fn new(id: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            id: id.into(),
            width,
            height,
            pixels: None,
        }
    }

    pub fn with_pixels(id: impl Into<String>, pixels: RgbaImage) -> Self {
        Self {
            id: id.into(),
            width: pixels.width,
            height: pixels.height,
            pixels: Some(pixels),
        }
    }

    pub(crate) fn corners(&self) -> [[f64; 2]; 4] {
        let x = self.width.saturating_sub(1) as f64;
        let y = self.height.saturating_sub(1) as f64;
        [[0.0, 0.0], [x, 0.0], [0.0, y], [x, y]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanoramaInput {
    images: Vec<PanoramaImage>,
    transforms: Vec<AffineTransform>,
}

impl PanoramaInput {
    pub fn new(images: Vec<PanoramaImage>, transforms: Vec<AffineTransform>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::EmptyInput);
        }
        if images.len() != transforms.len() {
            return Err(Error::InvalidInput(format!(
                "{} images but {} transforms",
                images.len(),
                transforms.len()
            )));
        }
        if let Some(t) = transforms.iter().find(|t| t.dim() != 2) {
            return Err(Error::UnsupportedDimension {
                dim: t.dim(),
                context: "panorama",
            });
        }
        Ok(Self { images, transforms })
    }

    pub fn images(&self) -> &[PanoramaImage] {
        &self.images
    }

    pub fn transforms(&self) -> &[AffineTransform] {
        &self.transforms
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// The same images under different transforms.
    pub fn with_transforms(&self, transforms: Vec<AffineTransform>) -> Result<Self> {
        Self::new(self.images.clone(), transforms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageDistortion {
    pub id: String,
    pub before: DistortionBreakdown,
    pub after: DistortionBreakdown,
}

/// Per-image distortion under the best fixed-reference choice ("before")
/// and after re-referencing ("after").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub per_image: Vec<ImageDistortion>,
    pub total_before_best_fixed: f64,
    pub total_after: f64,
    pub chosen_fixed_baseline: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    /// `S ∘ q ∘ T⁻¹ ∘ Tᵢ` for each image.
    pub corrected_transforms: Vec<AffineTransform>,
    pub mdt: MdtResult,
    pub global_rotation: OrthogonalMatrix,
    pub global_shift: [f64; 2],
    pub report: DistortionReport,
}

/// `exp(−mean(log qᵢ))`, the inverse of the log-mean rotation.
pub fn rotation_average(rotations: &[OrthogonalMatrix]) -> Result<OrthogonalMatrix> {
    let first = rotations.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension {
            dim,
            context: "rotation average",
        });
    }
    let mut sum = SquareMatrix::zeros(dim);
    for q in rotations {
        if q.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
        sum = sum.add(&so_log(q)?);
    }
    so_exp(&sum.scale(-1.0 / rotations.len() as f64))
}

/// Translation that moves the bounding box of all transformed image
/// corners to start at the origin.
pub fn alignment_shift(images: &[PanoramaImage], transforms: &[AffineTransform]) -> [f64; 2] {
    let mut min = [f64::INFINITY; 2];
    for (image, t) in images.iter().zip(transforms) {
        for corner in image.corners() {
            let p = t.apply(&corner);
            min[0] = min[0].min(p[0]);
            min[1] = min[1].min(p[1]);
        }
    }
    [-min[0], -min[1]]
}

pub fn rereference(input: &PanoramaInput, config: &KarcherConfig) -> Result<CorrectionResult> {
    let linear: Vec<SquareMatrix> = input
        .transforms
        .iter()
        .map(|t| t.linear().clone())
        .collect();
    for a in &linear {
        let determinant = a.determinant();
        if !(determinant > 0.0) {
            return Err(Error::ReflectionNotSupported { determinant });
        }
    }

    let mdt = mdt(&linear, config)?;
    let t_inv = mdt.transform.inverse();
    let rereferenced: Vec<AffineTransform> = input
        .transforms
        .iter()
        .map(|t| t.premultiply(t_inv.matrix()))
        .collect();

    // Residual rotations from the orthogonal-left factorisation Aᵢ' = qᵢRᵢ,
    // which commutes with a global left rotation.
    let rotations = rereferenced
        .iter()
        .map(|t| qr_decompose(t.linear()).map(|(q, _)| q))
        .collect::<Result<Vec<_>>>()?;
    let global_rotation = rotation_average(&rotations)?;
    let rotated: Vec<AffineTransform> = rereferenced
        .iter()
        .map(|t| t.premultiply(global_rotation.matrix()))
        .collect();

    let global_shift = alignment_shift(&input.images, &rotated);
    let corrected_transforms: Vec<AffineTransform> = rotated
        .iter()
        .map(|t| t.translated(&global_shift))
        .collect();

    let (best, total_before_best_fixed) = mdt.best_baseline();
    let best_inv = linear[best].inverse()?;
    let mut per_image = Vec::with_capacity(input.len());
    let mut total_after = 0.0;
    for ((image, a), corrected) in input.images.iter().zip(&linear).zip(&corrected_transforms) {
        let before = distortion_breakdown_2d(&best_inv.matmul(a))?;
        let after = distortion_breakdown_2d(corrected.linear())?;
        total_after += after.total * after.total;
        per_image.push(ImageDistortion {
            id: image.id.clone(),
            before,
            after,
        });
    }
    let report = DistortionReport {
        per_image,
        total_before_best_fixed,
        total_after,
        chosen_fixed_baseline: input.images[best].id.clone(),
    };

    Ok(CorrectionResult {
        corrected_transforms,
        mdt,
        global_rotation,
        global_shift,
        report,
    })
}
