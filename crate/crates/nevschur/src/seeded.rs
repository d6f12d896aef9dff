//! Seeded generators for reproducible fixtures.
//!
//! The PRNG is ChaCha8 keyed from a 64-bit seed (`ChaCha8Rng::seed_from_u64`)
//! and normal deviates come from the Box-Muller transform on uniform draws in
//! (0, 1]; both are pinned here so that fixtures regenerate identically on
//! any platform or implementation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numkit::{opnorm, ComplexMatrix, HermitianMatrix};

/// Margin keeping generated contractions strictly inside the unit ball.
const CONTRACTION_MARGIN: f64 = 1e-3;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal deviate via Box-Muller: with u, v uniform in (0, 1],
/// returns sqrt(-2 ln u) cos(2 pi v).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = loop {
        let x: f64 = rng.gen::<f64>();
        if x > 0.0 {
            break x;
        }
    };
    let v: f64 = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn standard_normal_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re = standard_normal(rng);
    let im = standard_normal(rng);
    Complex64::new(re, im)
}

/// Matrix of iid complex Gaussian entries, filled row-major.
pub fn random_gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(standard_normal_complex(rng));
    }
    ComplexMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::new_unchecked(random_gaussian_matrix(rng, n, n).hermitize())
}

/// Gaussian matrix rescaled by (opnorm + margin)^-1: a strict contraction
/// with benign conditioning.
pub fn random_contraction(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, rows, cols);
    let norm = opnorm(&g);
    if norm == 0.0 {
        return g;
    }
    g.scale_re(1.0 / (norm + CONTRACTION_MARGIN))
}

pub fn random_hermitian_contraction(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let h = random_hermitian(rng, n);
    let norm = opnorm(h.as_matrix());
    if norm == 0.0 {
        return h;
    }
    HermitianMatrix::new_unchecked(h.as_matrix().scale_re(1.0 / (norm + CONTRACTION_MARGIN)))
}

/// Unitary matrix: the eigenvector frame of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, n);
    crate::numkit::eigh(&h).vectors
}
