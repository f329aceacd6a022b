//! Synthetic union-of-subspaces datasets and the text formats used to move
//! matrices in and out of the CLI.
//!
//! Generation protocol: draw an orthonormal basis per subspace, draw
//! standard Gaussian coefficients per point, then corrupt a uniformly random
//! fraction of the points with dense Gaussian noise whose size tracks the
//! point's own length. Everything is driven by one seeded stream, so a
//! `(config, seed)` pair pins the dataset bit for bit.
//!
//! File format: plain text, one matrix row per line, entries separated by
//! single spaces, written with 17 significant digits so a round trip is
//! exact. Labels travel in a sidecar file, one `usize` per line, because
//! external point clouds come as bare matrices with labels (if any) shipped
//! separately.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use rand_distr::StandardNormal;

use crate::clustering::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Parameters of the synthetic generator. The defaults match the evaluation
/// protocol used across the test suite: 5 independent 10-dimensional
/// subspaces in ambient dimension 100 with 40 points each.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_subspaces: usize,
    /// Dimension of each subspace.
    pub dim: usize,
    /// Ambient dimension.
    pub ambient: usize,
    pub points_per_subspace: usize,
    /// Fraction of points (over the whole dataset) that receive noise.
    pub corrupted_fraction: f64,
    /// Noise size relative to the point length; see `calibrate_noise`.
    pub noise_scale: f64,
    /// When true (default), the per-entry noise std is
    /// `noise_scale * ||x|| / sqrt(ambient)`, so the expected noise norm is
    /// about `noise_scale * ||x||`. When false the per-entry std is
    /// `noise_scale * ||x||` directly.
    pub calibrate_noise: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subspaces: 5,
            dim: 10,
            ambient: 100,
            points_per_subspace: 40,
            corrupted_fraction: 0.0,
            noise_scale: 0.3,
            calibrate_noise: true,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subspaces == 0 || self.dim == 0 || self.points_per_subspace == 0 {
            return Err(Error::InvalidConfig(
                "subspace count, dimension, and points per subspace must be positive".into(),
            ));
        }
        if self.dim > self.ambient {
            return Err(Error::InvalidConfig(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                self.dim, self.ambient
            )));
        }
        if !(0.0..=1.0).contains(&self.corrupted_fraction) {
            return Err(Error::InvalidConfig(format!(
                "corrupted fraction must lie in [0, 1], got {}",
                self.corrupted_fraction
            )));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise scale must be non-negative, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.n_subspaces * self.points_per_subspace
    }
}

/// Draws a dataset according to `config`. Points are grouped by subspace in
/// column order and labeled accordingly.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = config.ambient;
    let n = config.n_points();

    let mut points = Matrix::zeros(d, n);
    let mut labels = Vec::with_capacity(n);
    for s in 0..config.n_subspaces {
        let basis = Matrix::from_fn(d, config.dim, |_, _| rng.sample::<f64, _>(StandardNormal))
            .qr()
            .q();
        for j in 0..config.points_per_subspace {
            let coeff =
                nalgebra::DVector::from_fn(config.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            points.set_column(s * config.points_per_subspace + j, &(&basis * coeff));
            labels.push(s);
        }
    }

    let n_corrupt = (config.corrupted_fraction * n as f64).floor() as usize;
    if n_corrupt > 0 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut chosen = order[..n_corrupt].to_vec();
        chosen.sort_unstable();
        for &j in &chosen {
            let len = points.column(j).norm();
            let std = if config.calibrate_noise {
                config.noise_scale * len / (d as f64).sqrt()
            } else {
                config.noise_scale * len
            };
            for i in 0..d {
                let g: f64 = rng.sample(StandardNormal);
                points[(i, j)] += std * g;
            }
        }
    }

    Dataset::new(points, labels)
}

/// Writes `m` as plain text, one row per line with 17 significant digits.
pub fn save_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 24);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a whitespace-separated text matrix. Blank lines are skipped; every
/// remaining line must hold the same number of finite values. Errors carry
/// 1-based line numbers.
pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("non-finite value `{tok}`"),
                });
            }
            row.push(v);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {w} values per row, found {}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "matrix file holds no data".into() });
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// Writes labels, one per line.
pub fn save_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 4);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads labels, one per line, skipping blanks.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(line.parse::<usize>().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad label `{line}`"),
        })?);
    }
    Ok(labels)
}

/// Saves points and labels to `points_path` and its `.labels` sidecar.
pub fn save_dataset(points_path: &Path, data: &Dataset) -> Result<()> {
    save_matrix(points_path, &data.points)?;
    if !data.labels.is_empty() {
        save_labels(&labels_sidecar(points_path), &data.labels)?;
    }
    Ok(())
}

/// Loads a dataset; when `labels_path` is `None` the `.labels` sidecar is
/// used if present, otherwise the dataset is unlabeled.
pub fn load_dataset(points_path: &Path, labels_path: Option<&Path>) -> Result<Dataset> {
    let points = load_matrix(points_path)?;
    let labels = match labels_path {
        Some(p) => load_labels(p)?,
        None => {
            let sidecar = labels_sidecar(points_path);
            if sidecar.exists() {
                load_labels(&sidecar)?
            } else {
                Vec::new()
            }
        }
    };
    Dataset::new(points, labels)
}

fn labels_sidecar(points_path: &Path) -> std::path::PathBuf {
    let mut os = points_path.as_os_str().to_owned();
    os.push(".labels");
    std::path::PathBuf::from(os)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{thin_svd, DEFAULT_RANK_TOL};
    use std::path::PathBuf;
    use std::sync::atomic::{AtomicUsize, Ordering};

    static STAMP: AtomicUsize = AtomicUsize::new(0);

    fn scratch(name: &str) -> PathBuf {
        let stamp = STAMP.fetch_add(1, Ordering::Relaxed);
        std::env::temp_dir().join(format!(
            "lrsc-datagen-{}-{stamp}-{name}",
            std::process::id()
        ))
    }

    #[test]
    fn clean_default_dataset_has_block_labels_and_rank_fifty() {
        let data = generate(&SynthConfig { seed: 3, ..SynthConfig::default() }).unwrap();
        assert_eq!(data.points.shape(), (100, 200));
        assert_eq!(data.labels.len(), 200);
        for s in 0..5 {
            for j in 0..40 {
                assert_eq!(data.labels[s * 40 + j], s);
            }
        }
        let f = thin_svd(&data.points, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 50, "5 independent 10-dim subspaces stack to rank 50");
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let config = SynthConfig { corrupted_fraction: 0.5, seed: 11, ..SynthConfig::default() };
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 12, ..config }).unwrap();
        assert!((a.points.clone() - &c.points).norm() > 1e-6, "different seeds must differ");
    }

    #[test]
    fn zero_noise_scale_leaves_points_clean() {
        let base = SynthConfig { seed: 5, ..SynthConfig::default() };
        let clean = generate(&base).unwrap();
        let corrupted_but_silent = generate(&SynthConfig {
            corrupted_fraction: 1.0,
            noise_scale: 0.0,
            ..base
        })
        .unwrap();
        assert_eq!(clean.points, corrupted_but_silent.points);
        assert_eq!(clean.labels, corrupted_but_silent.labels);
    }

    #[test]
    fn noise_norm_tracks_the_requested_scale() {
        let base = SynthConfig { seed: 21, ..SynthConfig::default() };
        let clean = generate(&base).unwrap();
        let noisy = generate(&SynthConfig { corrupted_fraction: 1.0, ..base }).unwrap();
        let mut ratios = Vec::new();
        for j in 0..clean.points.ncols() {
            let x = clean.points.column(j);
            let delta = noisy.points.column(j) - x;
            ratios.push(delta.norm() / x.norm());
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!(
            (0.25..=0.35).contains(&mean),
            "mean noise-to-signal ratio {mean} drifted from 0.3"
        );
    }

    #[test]
    fn uncalibrated_noise_is_sqrt_ambient_larger() {
        let base = SynthConfig { seed: 22, corrupted_fraction: 1.0, ..SynthConfig::default() };
        let clean = generate(&SynthConfig { corrupted_fraction: 0.0, ..base.clone() }).unwrap();
        let raw = generate(&SynthConfig { calibrate_noise: false, ..base }).unwrap();
        let j = 0;
        let ratio = (raw.points.column(j) - clean.points.column(j)).norm()
            / clean.points.column(j).norm();
        assert!(ratio > 2.0, "raw per-entry std should inflate the noise, got ratio {ratio}");
    }

    #[test]
    fn matrix_files_round_trip_exactly() {
        let m = crate::test_util::gaussian(7, 5, 31);
        let path = scratch("roundtrip.txt");
        save_matrix(&path, &m).unwrap();
        let back = load_matrix(&path).unwrap();
        assert_eq!(m, back, "17 significant digits must reproduce f64 exactly");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn dataset_files_round_trip_with_sidecar_labels() {
        let data = generate(&SynthConfig {
            n_subspaces: 2,
            dim: 2,
            ambient: 6,
            points_per_subspace: 3,
            seed: 41,
            ..SynthConfig::default()
        })
        .unwrap();
        let path = scratch("dataset.txt");
        save_dataset(&path, &data).unwrap();
        let back = load_dataset(&path, None).unwrap();
        assert_eq!(data, back);
        std::fs::remove_file(&path).ok();
        std::fs::remove_file(labels_sidecar(&path)).ok();
    }

    #[test]
    fn hand_written_fixture_parses_to_expected_entries() {
        let path = scratch("fixture.txt");
        std::fs::write(&path, "1.0 2.0 3.0\n\n4e0 5.0 6.0\n").unwrap();
        let m = load_matrix(&path).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 2)], 6.0);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn malformed_files_report_line_numbers() {
        let ragged = scratch("ragged.txt");
        std::fs::write(&ragged, "1.0 2.0\n3.0\n").unwrap();
        match load_matrix(&ragged) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Parse error, got {other:?}"),
        }
        std::fs::remove_file(&ragged).ok();

        let bad = scratch("badnum.txt");
        std::fs::write(&bad, "1.0 two\n").unwrap();
        assert!(matches!(load_matrix(&bad), Err(Error::Parse { line: 1, .. })));
        std::fs::remove_file(&bad).ok();

        let empty = scratch("empty.txt");
        std::fs::write(&empty, "\n\n").unwrap();
        assert!(matches!(load_matrix(&empty), Err(Error::Parse { .. })));
        std::fs::remove_file(&empty).ok();
    }

    #[test]
    fn label_count_mismatch_is_rejected_on_load() {
        let data = generate(&SynthConfig {
            n_subspaces: 2,
            dim: 1,
            ambient: 3,
            points_per_subspace: 2,
            seed: 51,
            ..SynthConfig::default()
        })
        .unwrap();
        let path = scratch("mismatch.txt");
        save_matrix(&path, &data.points).unwrap();
        let labels_path = scratch("mismatch-labels.txt");
        save_labels(&labels_path, &[0, 1]).unwrap(); // 2 labels for 4 points
        assert!(matches!(
            load_dataset(&path, Some(&labels_path)),
            Err(Error::InvalidInput(_))
        ));
        std::fs::remove_file(&path).ok();
        std::fs::remove_file(&labels_path).ok();
    }

    #[test]
    fn config_validation_catches_bad_ranges() {
        let mut c = SynthConfig::default();
        c.dim = 200;
        assert!(c.validate().is_err());
        let mut c = SynthConfig::default();
        c.corrupted_fraction = 1.5;
        assert!(c.validate().is_err());
        let mut c = SynthConfig::default();
        c.noise_scale = -0.1;
        assert!(c.validate().is_err());
        let mut c = SynthConfig::default();
        c.n_subspaces = 0;
        assert!(c.validate().is_err());
    }
}
