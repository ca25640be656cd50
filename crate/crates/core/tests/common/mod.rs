//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use mdt_core::{LowerTriangularPD, SpdMatrix, SquareMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut impl Rng, dim: usize) -> SquareMatrix {
    SquareMatrix::new(
        dim,
        (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Haar-ish orthogonal matrix by Gram–Schmidt on uniform columns. Kept
/// independent of the library's Householder code. `proper` forces det = +1.
pub fn random_orthogonal(rng: &mut impl Rng, dim: usize, proper: bool) -> SquareMatrix {
    loop {
        let m = uniform_matrix(rng, dim);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for j in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|i| m[(i, j)]).collect();
            for _ in 0..2 {
                for c in &cols {
                    let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
                }
            }
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-3 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
        if !ok {
            continue;
        }
        let mut data = vec![0.0; dim * dim];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                data[i * dim + j] = c[i];
            }
        }
        let mut q = SquareMatrix::new(dim, data).unwrap();
        let choose_flip = if proper {
            q.determinant() < 0.0
        } else {
            rng.gen_bool(0.5)
        };
        if choose_flip {
            let mut rows = q.rows();
            rows[0].iter_mut().for_each(|x| *x = -*x);
            q = SquareMatrix::from_rows(&rows).unwrap();
        }
        return q;
    }
}

/// Lower triangular with log-uniform diagonal in `[e^-2, e^2]` and uniform
/// off-diagonal entries in `[-1, 1]`.
pub fn random_lower(rng: &mut impl Rng, dim: usize) -> LowerTriangularPD {
    let mut data = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..i {
            data[i * dim + j] = rng.gen_range(-1.0..1.0);
        }
        data[i * dim + i] = rng.gen_range(-2.0f64..2.0).exp();
    }
    LowerTriangularPD::new(SquareMatrix::new(dim, data).unwrap()).unwrap()
}

/// `Q₁ · diag(σ) · Q₂` with `ln σ` uniform in `[-half_log_cond, half_log_cond]`,
/// so the condition number is at most `exp(2·half_log_cond)`.
pub fn random_invertible(rng: &mut impl Rng, dim: usize, half_log_cond: f64) -> SquareMatrix {
    let q1 = random_orthogonal(rng, dim, false);
    let q2 = random_orthogonal(rng, dim, false);
    let sigma: Vec<f64> = (0..dim)
        .map(|_| rng.gen_range(-half_log_cond..half_log_cond).exp())
        .collect();
    q1.matmul(&SquareMatrix::from_diagonal(&sigma)).matmul(&q2)
}

/// Invertible with positive determinant.
pub fn random_orientation_preserving(
    rng: &mut impl Rng,
    dim: usize,
    half_log_cond: f64,
) -> SquareMatrix {
    let q1 = random_orthogonal(rng, dim, true);
    let q2 = random_orthogonal(rng, dim, true);
    let sigma: Vec<f64> = (0..dim)
        .map(|_| rng.gen_range(-half_log_cond..half_log_cond).exp())
        .collect();
    q1.matmul(&SquareMatrix::from_diagonal(&sigma)).matmul(&q2)
}

/// SPD with condition number at most `max_cond`.
pub fn random_spd(rng: &mut impl Rng, dim: usize, max_cond: f64) -> SpdMatrix {
    let q = random_orthogonal(rng, dim, false);
    let half = 0.5 * max_cond.ln();
    let scale = rng.gen_range(-1.0f64..1.0).exp();
    let lambda: Vec<f64> = (0..dim)
        .map(|_| scale * rng.gen_range(-half * 0.999..half * 0.999).exp())
        .collect();
    let m = q
        .matmul(&SquareMatrix::from_diagonal(&lambda))
        .matmul(&q.transpose());
    SpdMatrix::new(m.symmetrized()).unwrap()
}

/// Closed-form singular values of a 2×2 matrix: square roots of the
/// eigenvalues of `MᵗM` from its trace and determinant.
pub fn singular_values_2x2(m: [[f64; 2]; 2]) -> (f64, f64) {
    let [[a, b], [c, d]] = m;
    let det = (a * d - b * c).abs();
    let fro2 = a * a + b * b + c * c + d * d;
    // σ₁² + σ₂² = ‖M‖², σ₁σ₂ = |det|  ⇒  σ₁ ± σ₂ = √(‖M‖² ± 2|det|).
    let sum = (fro2 + 2.0 * det).sqrt();
    let diff = (fro2 - 2.0 * det).max(0.0).sqrt();
    let s1 = 0.5 * (sum + diff);
    (s1, det / s1)
}

/// Squared Fisher distortion of a 2×2 matrix via [`singular_values_2x2`].
pub fn distortion2_2x2(m: [[f64; 2]; 2]) -> f64 {
    let (s1, s2) = singular_values_2x2(m);
    s1.ln().powi(2) + s2.ln().powi(2)
}

pub fn as_2x2(m: &SquareMatrix) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub mod fixture {
    //! Two-image synthetic panorama used by the golden compositing tests.

    use std::path::PathBuf;

    use mdt_core::panorama::{PanoramaImage, PanoramaInput, RgbaImage};
    use mdt_core::{AffineTransform, SquareMatrix};

    pub const SIZE: u32 = 40;

    pub fn dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pano")
    }

    /// Procedural scene on the common plane.
    fn scene(x: f64, y: f64) -> [u8; 4] {
        let r = 128.0 + 127.0 * (x / 5.0).sin();
        let checker = ((x / 8.0).floor() + (y / 8.0).floor()).rem_euclid(2.0);
        let b = (y * 4.0).clamp(0.0, 255.0);
        [r.round() as u8, (checker * 200.0) as u8, b as u8, 255]
    }

    /// Image-to-plane maps of the two views.
    pub fn transforms() -> Vec<AffineTransform> {
        let left = AffineTransform::new(
            SquareMatrix::from_rows(&[[1.1, 0.15], [0.0, 0.9]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        let right = AffineTransform::new(
            SquareMatrix::rotation_2d(0.1).matmul(&SquareMatrix::from_diagonal(&[1.0, 1.05])),
            vec![30.0, 2.0],
        )
        .unwrap();
        vec![left, right]
    }

    pub fn ids() -> [&'static str; 2] {
        ["left", "right"]
    }

    /// Each view samples the scene through its own transform.
    pub fn render_views() -> Vec<RgbaImage> {
        transforms()
            .iter()
            .map(|t| {
                let mut img = RgbaImage::new(SIZE, SIZE);
                for v in 0..SIZE {
                    for u in 0..SIZE {
                        let p = t.apply(&[u as f64, v as f64]);
                        img.put_pixel(u, v, scene(p[0], p[1]));
                    }
                }
                img
            })
            .collect()
    }

    pub fn input(views: Vec<RgbaImage>) -> PanoramaInput {
        let images = ids()
            .iter()
            .zip(views)
            .map(|(id, px)| PanoramaImage::with_pixels(*id, px))
            .collect();
        PanoramaInput::new(images, transforms()).unwrap()
    }
}
