use std::collections::{HashMap, VecDeque};

use crate::distortion::AffineTransform;
use crate::error::{Error, Result};
use crate::linalg::{decomp::symmetric_eigen, SquareMatrix};

/// Smallest accepted ratio between the two principal spreads of the source points.
const MIN_SPREAD_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineEstimate {
    pub transform: AffineTransform,
    /// Root-mean-square residual `‖T(p) − p'‖` over the correspondences.
    pub rms: f64,
}

/// Least-squares affine map taking each source point onto its target.
pub fn estimate_affine(correspondences: &[([f64; 2], [f64; 2])]) -> Result<AffineEstimate> {
    let n = correspondences.len();
    if n < 3 {
        return Err(Error::DegenerateConfiguration(format!(
            "need at least 3 correspondences, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mut src_mean = [0.0; 2];
    let mut dst_mean = [0.0; 2];
    for (s, d) in correspondences {
        for k in 0..2 {
            src_mean[k] += s[k] * inv_n;
            dst_mean[k] += d[k] * inv_n;
        }
    }

    // Centred normal equations: A · (XᵗX) = YᵗX.
    let mut xx = [[0.0; 2]; 2];
    let mut yx = [[0.0; 2]; 2];
    for (s, d) in correspondences {
        let x = [s[0] - src_mean[0], s[1] - src_mean[1]];
        let y = [d[0] - dst_mean[0], d[1] - dst_mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                xx[i][j] += x[i] * x[j];
                yx[i][j] += y[i] * x[j];
            }
        }
    }
    let xx = SquareMatrix::from_rows(&xx)
        .map_err(|_| Error::DegenerateConfiguration("non-finite coordinates".into()))?;
    let (spread, _) = symmetric_eigen(&xx)?;
    if !(spread[0] > MIN_SPREAD_RATIO * spread[1]) {
        return Err(Error::DegenerateConfiguration(
            "source points are collinear or coincident".into(),
        ));
    }
    let yx = SquareMatrix::from_rows(&yx)
        .map_err(|_| Error::DegenerateConfiguration("non-finite coordinates".into()))?;
    let linear = yx.matmul(&xx.inverse()?);
    let moved = linear.mul_vec(&src_mean);
    let translation = vec![dst_mean[0] - moved[0], dst_mean[1] - moved[1]];
    let transform = AffineTransform::new(linear, translation).map_err(|e| match e {
        Error::SingularMatrix { .. } => {
            Error::DegenerateConfiguration("target points collapse to a line".into())
        }
        other => other,
    })?;

    let sq: f64 = correspondences
        .iter()
        .map(|(s, d)| {
            let p = transform.apply(s);
            (p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2)
        })
        .sum();
    Ok(AffineEstimate {
        transform,
        rms: (sq * inv_n).sqrt(),
    })
}

/// Matched points between two images: `pairs[k] = (point in from, point in to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrespondences {
    pub from_id: String,
    pub to_id: String,
    pub pairs: Vec<([f64; 2], [f64; 2])>,
}

/// Estimates every pairwise map and chains them into per-image transforms
/// onto the frame of the first image mentioned. Returns `(id, estimate)` in
/// order of first appearance; `rms` is that of the edge used to reach the image.
pub fn chain_transforms(edges: &[PairCorrespondences]) -> Result<Vec<(String, AffineEstimate)>> {
    let first = edges.first().ok_or(Error::EmptyInput)?;
    let mut order: Vec<String> = Vec::new();
    for e in edges {
        for id in [&e.from_id, &e.to_id] {
            if !order.contains(id) {
                order.push(id.clone());
            }
        }
    }
    let estimates = edges
        .iter()
        .map(|e| estimate_affine(&e.pairs))
        .collect::<Result<Vec<_>>>()?;

    let mut known: HashMap<String, AffineEstimate> = HashMap::new();
    known.insert(
        first.from_id.clone(),
        AffineEstimate {
            transform: AffineTransform::identity(2),
            rms: 0.0,
        },
    );
    let mut queue = VecDeque::from([first.from_id.clone()]);
    while let Some(id) = queue.pop_front() {
        let base = known[&id].transform.clone();
        for (edge, est) in edges.iter().zip(&estimates) {
            // from → to maps from-coordinates into to-coordinates.
            let (other, transform) = if edge.to_id == id && !known.contains_key(&edge.from_id) {
                (&edge.from_id, base.compose(&est.transform))
            } else if edge.from_id == id && !known.contains_key(&edge.to_id) {
                (&edge.to_id, base.compose(&est.transform.inverse()?))
            } else {
                continue;
            };
            known.insert(
                other.clone(),
                AffineEstimate {
                    transform,
                    rms: est.rms,
                },
            );
            queue.push_back(other.clone());
        }
    }

    order
        .into_iter()
        .map(|id| match known.remove(&id) {
            Some(est) => Ok((id, est)),
            None => Err(Error::DegenerateConfiguration(format!(
                "image '{id}' is not connected to '{}'",
                first.from_id
            ))),
        })
        .collect()
}
