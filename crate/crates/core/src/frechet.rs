//! Fréchet (Karcher) mean of SPD matrices under the affine-invariant metric.
//!
//! The solver is the Riemannian gradient iteration
//!
//! ```text
//! X ← X^{1/2} · exp( (τ/N) Σᵢ log(X^{-1/2} Pᵢ X^{-1/2}) ) · X^{1/2}
//! ```
//!
//! started from the arithmetic mean. The first trial step at each iterate is
//!
//! ```text
//! τ = 2N / Σᵢ ((cᵢ + 1)/(cᵢ − 1)) · ln cᵢ
//! ```
//!
//! with `cᵢ` the condition number of the whitened point `X^{-1/2} Pᵢ X^{-1/2}`.
//! It never exceeds 1 and tends to 1 as the points cluster; a constant unit
//! step oscillates once the points are widely spread. The unit step is
//! still tried alongside it, since it lands on the mean at once when the
//! points commute; the lower objective wins. If neither decreases the
//! objective, the adaptive step is shrunk by `backtrack_factor` until one does.

use serde::{Deserialize, Serialize};

use crate::distortion::fisher_distance;
use crate::error::{Error, Result};
use crate::linalg::{self, decomp, spd_power, SpdMatrix, SquareMatrix};

/// Relative slack when comparing objectives; differences below this are
/// rounding noise once the iteration is close to the mean.
const OBJECTIVE_SLACK: f64 = 1e-12;

/// Smallest step tried before the line search gives up.
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KarcherConfig {
    pub max_iterations: usize,
    /// Bound on the Frobenius norm of the whitened mean log, which is
    /// dimensionless and unchanged by rescaling the inputs.
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    pub backtrack_factor: f64,
}

impl Default for KarcherConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-12,
            initial_step: 1.0,
            backtrack_factor: 0.5,
        }
    }
}

impl KarcherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidInput(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidInput(
                "gradient_tolerance must be positive".into(),
            ));
        }
        if !(self.initial_step > 0.0 && self.initial_step <= 1.0) {
            return Err(Error::InvalidInput(
                "initial_step must lie in (0, 1]".into(),
            ));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidInput(
                "backtrack_factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanResult {
    pub mean: SpdMatrix,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// `Σ d²(mean, Pᵢ)`.
    pub objective: f64,
}

/// Whitened view of the point set at one iterate.
struct Iterate {
    point: SpdMatrix,
    sqrt: SquareMatrix,
    mean_log: SquareMatrix,
    gradient_norm: f64,
    objective: f64,
    /// Adaptive unit-scaled step for this iterate.
    step: f64,
}

/// `((c + 1)/(c − 1)) · ln c`, which tends to 2 as `c → 1`.
fn dispersion_weight(c: f64) -> f64 {
    let d = c - 1.0;
    if d < 1e-8 {
        2.0 + d * d / 6.0
    } else {
        (c + 1.0) / d * c.ln()
    }
}

impl Iterate {
    fn at(point: SpdMatrix, points: &[SpdMatrix]) -> Result<Self> {
        let (values, vectors) = decomp::symmetric_eigen(point.matrix())?;
        let sqrt = linalg::spectral_map(&values, &vectors, f64::sqrt);
        let inv_sqrt = linalg::spectral_map(&values, &vectors, |x| 1.0 / x.sqrt());

        let n = point.dim();
        let mut sum = SquareMatrix::zeros(n);
        let mut objective = 0.0;
        let mut dispersion = 0.0;
        // Fixed summation order keeps runs reproducible.
        for p in points {
            let whitened = p.congruence(&inv_sqrt)?;
            let (lambda, v) = decomp::symmetric_eigen(whitened.matrix())?;
            objective += lambda.iter().map(|l| l.ln().powi(2)).sum::<f64>();
            dispersion += dispersion_weight(lambda[lambda.len() - 1] / lambda[0]);
            sum = sum.add(&linalg::spectral_map(&lambda, &v, f64::ln));
        }
        let count = points.len() as f64;
        let mean_log = sum.scale(1.0 / count);
        let gradient_norm = mean_log.frobenius_norm();
        let step = (2.0 * count / dispersion).min(1.0);
        Ok(Self {
            point,
            sqrt,
            mean_log,
            gradient_norm,
            objective,
            step,
        })
    }

    fn step(&self, tau: f64) -> Result<SpdMatrix> {
        linalg::spd_exp(&self.mean_log.scale(tau))?.congruence(&self.sqrt)
    }
}

fn check_points(points: &[SpdMatrix]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    Ok(dim)
}

fn arithmetic_mean(points: &[SpdMatrix]) -> Result<SpdMatrix> {
    let n = points[0].dim();
    let sum = points
        .iter()
        .fold(SquareMatrix::zeros(n), |acc, p| acc.add(p.matrix()));
    SpdMatrix::new(sum.scale(1.0 / points.len() as f64))
}

/// Karcher mean of `points`. Fails with [`Error::NoConvergence`] when the
/// gradient tolerance is not reached within `max_iterations` updates or the
/// line search stalls.
pub fn karcher_mean(points: &[SpdMatrix], config: &KarcherConfig) -> Result<MeanResult> {
    config.validate()?;
    check_points(points)?;

    let mut current = Iterate::at(arithmetic_mean(points)?, points)?;
    let mut iterations = 0;
    loop {
        if current.gradient_norm <= config.gradient_tolerance {
            return Ok(MeanResult {
                mean: current.point,
                iterations,
                final_gradient_norm: current.gradient_norm,
                objective: current.objective,
            });
        }
        if iterations == config.max_iterations {
            break;
        }

        let accept = |c: &Iterate| c.objective <= current.objective * (1.0 + OBJECTIVE_SLACK);
        let full = config.initial_step;
        let mut tau = full * current.step;
        // The full step is exact for commuting points, so it competes with
        // the adaptive one whenever they differ.
        let mut full_candidate = if tau < full {
            current
                .step(full)
                .and_then(|p| Iterate::at(p, points))
                .ok()
                .filter(|c| accept(c))
        } else {
            None
        };
        let next = loop {
            let candidate = Iterate::at(current.step(tau)?, points)?;
            if accept(&candidate) {
                break Some(match full_candidate.take() {
                    Some(f) if f.objective < candidate.objective => f,
                    _ => candidate,
                });
            }
            if full_candidate.is_some() {
                break full_candidate.take();
            }
            tau *= config.backtrack_factor;
            if tau < MIN_STEP {
                break None;
            }
        };
        match next {
            Some(next) => current = next,
            None => break,
        }
        iterations += 1;
    }
    Err(Error::NoConvergence {
        iterations,
        gradient_norm: current.gradient_norm,
        objective: current.objective,
    })
}

/// `p^{1/2} (p^{-1/2} q p^{-1/2})^{1/2} p^{1/2}`, the midpoint of the geodesic
/// from `p` to `q` and the closed-form mean of two points.
pub fn geodesic_midpoint(p: &SpdMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let root = linalg::spd_sqrt(p)?;
    let inv_root = spd_power(p, -0.5)?;
    let middle = linalg::spd_sqrt(&q.congruence(inv_root.matrix())?)?;
    middle.congruence(root.matrix())
}

/// `Σᵢ d²(candidate, pointsᵢ)` under the Fisher distance.
pub fn frechet_objective(candidate: &SpdMatrix, points: &[SpdMatrix]) -> Result<f64> {
    points
        .iter()
        .map(|p| fisher_distance(candidate, p).map(|d| d * d))
        .sum()
}
