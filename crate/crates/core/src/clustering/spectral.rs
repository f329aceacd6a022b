//! Normalized spectral clustering with seeded k-means.
//!
//! The embedding is the symmetric-normalized one: top-k eigenvectors of
//! `D^{-1/2} W D^{-1/2}` with rows renormalized to the unit sphere, then
//! k-means++ with a fixed restart budget. Zero-degree points cannot be
//! embedded at all; they are attached to the largest cluster afterwards and
//! the result is flagged degenerate so callers can tell.

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const KMEANS_RESTARTS: usize = 20;
const KMEANS_MAX_ITER: usize = 100;

/// Clusters the nodes of the affinity `w` into `k` groups. Returns the label
/// vector and a degeneracy flag (true when some nodes had zero degree and
/// were assigned by fallback). `seed` drives only the k-means
/// initialization; everything else is deterministic.
pub fn spectral_cluster(w: &Matrix, k: usize, seed: u64) -> Result<(Vec<usize>, bool)> {
    let n = w.nrows();
    if w.ncols() != n || n == 0 {
        return Err(Error::ShapeMismatch(format!(
            "affinity must be square and non-empty, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("affinity contains a NaN or infinite entry".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "cluster count must lie in 1..={n}, got {k}"
        )));
    }
    let scale = w.amax().max(1.0);
    if w.iter().any(|&x| x < -1e-10 * scale) {
        return Err(Error::InvalidInput("affinity has negative entries".into()));
    }
    let asym = (w - w.transpose()).norm();
    if asym > 1e-8 * (1.0 + w.norm()) {
        return Err(Error::InvalidInput(format!(
            "affinity is not symmetric (||w - w^T|| = {asym:.3e})"
        )));
    }

    let ws = Matrix::from_fn(n, n, |i, j| (0.5 * (w[(i, j)] + w[(j, i)])).max(0.0));
    let degrees: Vec<f64> = (0..n).map(|i| ws.row(i).sum()).collect();
    let d_max = degrees.iter().cloned().fold(0.0f64, f64::max);
    if d_max <= 0.0 {
        return Ok((vec![0; n], true));
    }
    let active: Vec<usize> = (0..n).filter(|&i| degrees[i] > 1e-12 * d_max).collect();
    let degenerate = active.len() < n;
    let k_eff = k.min(active.len());

    let inv_sqrt: Vec<f64> = active.iter().map(|&i| 1.0 / degrees[i].sqrt()).collect();
    let na = active.len();
    let m = Matrix::from_fn(na, na, |i, j| {
        ws[(active[i], active[j])] * inv_sqrt[i] * inv_sqrt[j]
    });
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Factorization("eigendecomposition did not converge".into()))?;

    let mut order: Vec<usize> = (0..na).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });

    let mut embed = Matrix::zeros(na, k_eff);
    for (col, &src) in order.iter().take(k_eff).enumerate() {
        embed.set_column(col, &eig.eigenvectors.column(src));
    }
    for i in 0..na {
        let norm = embed.row(i).norm();
        if norm > 0.0 {
            embed.row_mut(i).scale_mut(1.0 / norm);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub_labels = kmeans(&embed, k_eff, &mut rng);

    // Scatter back; zero-degree nodes join the most populous cluster.
    let mut counts = vec![0usize; k_eff];
    for &l in &sub_labels {
        counts[l] += 1;
    }
    let fallback = counts
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut labels = vec![fallback; n];
    for (pos, &node) in active.iter().enumerate() {
        labels[node] = sub_labels[pos];
    }
    Ok((labels, degenerate))
}

/// Lloyd's algorithm with k-means++ seeding, `KMEANS_RESTARTS` restarts, and
/// deterministic tie-breaking. `points` holds one point per row.
fn kmeans(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.nrows();
    debug_assert!(k >= 1 && k <= n);
    let mut best_labels = vec![0usize; n];
    let mut best_inertia = f64::INFINITY;

    for _ in 0..KMEANS_RESTARTS {
        let mut centers = plus_plus_init(points, k, rng);
        let mut labels = vec![0usize; n];
        for _ in 0..KMEANS_MAX_ITER {
            let mut changed = false;
            for i in 0..n {
                let l = nearest_center(points, i, &centers);
                if l != labels[i] {
                    labels[i] = l;
                    changed = true;
                }
            }
            update_centers(points, &labels, &mut centers);
            if !changed {
                break;
            }
        }
        let inertia: f64 = (0..n)
            .map(|i| dist_sq(points, i, &centers, labels[i]))
            .sum();
        if inertia < best_inertia {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    best_labels
}

fn dist_sq(points: &Matrix, i: usize, centers: &Matrix, c: usize) -> f64 {
    let mut acc = 0.0;
    for d in 0..points.ncols() {
        let diff = points[(i, d)] - centers[(c, d)];
        acc += diff * diff;
    }
    acc
}

fn nearest_center(points: &Matrix, i: usize, centers: &Matrix) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for c in 0..centers.nrows() {
        let d = dist_sq(points, i, centers, c);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn plus_plus_init(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = points.nrows();
    let mut centers = Matrix::zeros(k, points.ncols());
    let first = rng.random_range(0..n);
    centers.set_row(0, &points.row(first));

    let mut d2: Vec<f64> = (0..n).map(|i| dist_sq(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.set_row(c, &points.row(chosen));
        for i in 0..n {
            d2[i] = d2[i].min(dist_sq(points, i, &centers, c));
        }
    }
    centers
}

fn update_centers(points: &Matrix, labels: &[usize], centers: &mut Matrix) {
    let k = centers.nrows();
    let d = points.ncols();
    let mut counts = vec![0usize; k];
    let mut sums = Matrix::zeros(k, d);
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..d {
            sums[(l, j)] += points[(i, j)];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centers[(c, j)] = sums[(c, j)] / counts[c] as f64;
            }
        } else {
            // Empty cluster: restart it at the point farthest from its
            // current center assignment.
            let far = (0..points.nrows())
                .max_by(|&a, &b| {
                    dist_sq(points, a, centers, labels[a])
                        .partial_cmp(&dist_sq(points, b, centers, labels[b]))
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap_or(0);
            centers.set_row(c, &points.row(far));
        }
    }
}
