//! Shared fixtures for the criterion benchmarks: seeded random matrices and
//! a mid-sized synthetic clustering dataset, so every bench run measures the
//! same inputs.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::StandardNormal;

use lrsc_core::clustering::Dataset;
use lrsc_core::datagen::{self, SynthConfig};
use lrsc_core::Matrix;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Rank-deficient target: the product of two thin Gaussian factors.
pub fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> Matrix {
    gaussian(rows, rank, seed) * gaussian(rank, cols, seed.wrapping_add(1))
}

/// Four 6-dimensional subspaces in ambient dimension 60, 25 points each,
/// with a third of the points corrupted. Large enough that the SVD and the
/// spectral embedding dominate, small enough for a quick bench cycle.
pub fn bench_dataset() -> Dataset {
    let config = SynthConfig {
        n_subspaces: 4,
        dim: 6,
        ambient: 60,
        points_per_subspace: 25,
        corrupted_fraction: 0.33,
        noise_scale: 0.3,
        calibrate_noise: true,
        seed: 17,
    };
    datagen::generate(&config).expect("bench dataset")
}
