#![allow(dead_code)]

use lrsc_core::Matrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_from(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_from(&mut seeded_rng(seed), rows, cols)
}

/// Orthonormal columns through the QR of a seeded Gaussian draw.
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> Matrix {
    assert!(cols <= rows, "need rows >= cols for orthonormal columns");
    let g = gaussian(rows, cols, seed);
    g.qr().q().columns(0, cols).into_owned()
}

pub fn random_orthonormal_from(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows, "need rows >= cols for orthonormal columns");
    let g = gaussian_from(rng, rows, cols);
    g.qr().q().columns(0, cols).into_owned()
}

/// Random matrix of rank exactly `r` (with probability one), built as a
/// product of Gaussian factors.
pub fn random_low_rank(rows: usize, cols: usize, r: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    gaussian_from(&mut rng, rows, r) * gaussian_from(&mut rng, r, cols)
}
