//! Subspace clustering by shrinkage of the self-expressive representation.
//!
//! For a data matrix `X` (one point per column) with thin SVD
//! `X = U diag(sigma) V^T`, every method here builds a symmetric coefficient
//! matrix `Z = V diag(c) V^T` and differs only in the coefficients:
//!
//! * [`sim`]: `c_i = 1`, the row space projector `X^+ X`. For noiseless
//!   points drawn from independent subspaces `Z` is block diagonal under the
//!   cluster ordering, which is what makes spectral clustering on it exact.
//! * [`dssim`]: `c_i = 1` for the top `r` directions, zero past them, with
//!   `r` chosen by minimizing `sum_{i>r} sigma_i + lambda * r`.
//! * [`cssim`]: `c_i = (1 - lambda / (2 sigma_i^2))_+`, the soft rule.
//! * [`ssim`]: `c_i = sigma_i^2 / (sigma_i^2 + lambda)`, the smooth rule.
//!
//! The rest of the pipeline is conventional: affinity `|Z| + |Z^T|`,
//! normalized spectral embedding, seeded k-means, and accuracy under the
//! best label matching.

mod assignment;
mod spectral;

pub use assignment::accuracy;
pub use spectral::spectral_cluster;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix, DEFAULT_RANK_TOL};

/// A labeled point cloud: `points` is ambient-dim by n-points, one point per
/// column; `labels` is empty for unlabeled data, otherwise one cluster id
/// per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Matrix,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(points: Matrix, labels: Vec<usize>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::InvalidInput("dataset must contain at least one point".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("dataset contains a NaN or infinite entry".into()));
        }
        if !labels.is_empty() && labels.len() != points.ncols() {
            return Err(Error::InvalidInput(format!(
                "got {} labels for {} points",
                labels.len(),
                points.ncols()
            )));
        }
        Ok(Self { points, labels })
    }

    pub fn n_points(&self) -> usize {
        self.points.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.nrows()
    }

    /// Number of clusters implied by the labels, zero when unlabeled.
    pub fn n_clusters(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Outcome of [`run_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    /// Fraction of points assigned to the right cluster under the best
    /// label matching; `None` when the dataset is unlabeled.
    pub accuracy: Option<f64>,
    /// The rank selected internally, currently only reported by `dssim`.
    pub chosen_rank: Option<usize>,
    /// Set when the affinity had isolated points or collapsed entirely, in
    /// which case the leftover points were attached to the largest cluster.
    pub degenerate: bool,
}

/// The four representation builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sim,
    Dssim,
    Cssim,
    Ssim,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sim, Method::Dssim, Method::Cssim, Method::Ssim];

    /// Whether `lambda` has any effect for this method.
    pub fn uses_lambda(&self) -> bool {
        !matches!(self, Method::Sim)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sim => write!(f, "sim"),
            Method::Dssim => write!(f, "dssim"),
            Method::Cssim => write!(f, "cssim"),
            Method::Ssim => write!(f, "ssim"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sim" => Ok(Method::Sim),
            "dssim" => Ok(Method::Dssim),
            "cssim" => Ok(Method::Cssim),
            "ssim" => Ok(Method::Ssim),
            other => Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected sim|dssim|cssim|ssim)"
            ))),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be non-negative and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Builds `V diag(coeffs) V^T` from the right singular frame.
fn in_frame(v: &Matrix, coeffs: &[f64]) -> Matrix {
    let mut vs = v.columns(0, coeffs.len()).into_owned();
    for (j, c) in coeffs.iter().enumerate() {
        vs.column_mut(j).scale_mut(*c);
    }
    vs * v.columns(0, coeffs.len()).transpose()
}

/// Row space projector `X^+ X = V V^T`.
pub fn sim(x: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let f = thin_svd(x, rank_tol)?;
    Ok(&f.v * f.v.transpose())
}

/// Rank-selected projector `V_(r) V_(r)^T` where `r` minimizes
/// `sum_{i>r} sigma_i + lambda * r` (the trace-norm residual plus a rank
/// penalty, both computable from the spectrum alone). Ties prefer smaller
/// `r`. Returns the representation and the selected rank.
pub fn dssim(x: &Matrix, lambda: f64) -> Result<(Matrix, usize)> {
    check_lambda(lambda)?;
    let f = thin_svd(x, DEFAULT_RANK_TOL)?;
    let mut best_r = 0usize;
    let mut best = f64::INFINITY;
    for r in 0..=f.rank() {
        let tail: f64 = f.sigma[r..].iter().sum();
        let score = tail + lambda * r as f64;
        if score < best {
            best = score;
            best_r = r;
        }
    }
    Ok((dssim_with_rank_from(&f.v, best_r), best_r))
}

/// Expert entry for a caller who already knows the target rank; `r` is
/// capped at the numerical rank of `x`.
pub fn dssim_with_rank(x: &Matrix, r: usize) -> Result<Matrix> {
    let f = thin_svd(x, DEFAULT_RANK_TOL)?;
    Ok(dssim_with_rank_from(&f.v, r.min(f.rank())))
}

fn dssim_with_rank_from(v: &Matrix, r: usize) -> Matrix {
    let head = v.columns(0, r).into_owned();
    if r == 0 {
        return Matrix::zeros(v.nrows(), v.nrows());
    }
    &head * head.transpose()
}

/// Soft-thresholded projector: coefficients `(1 - lambda / (2 sigma_i^2))_+`.
pub fn cssim(x: &Matrix, lambda: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    let f = thin_svd(x, DEFAULT_RANK_TOL)?;
    let coeffs: Vec<f64> = f
        .sigma
        .iter()
        .map(|s| (1.0 - lambda / (2.0 * s * s)).max(0.0))
        .collect();
    Ok(in_frame(&f.v, &coeffs))
}

/// Smoothly shrunk projector: coefficients `sigma_i^2 / (sigma_i^2 + lambda)`.
pub fn ssim(x: &Matrix, lambda: f64) -> Result<Matrix> {
    check_lambda(lambda)?;
    let f = thin_svd(x, DEFAULT_RANK_TOL)?;
    let coeffs: Vec<f64> = f.sigma.iter().map(|s| s * s / (s * s + lambda)).collect();
    Ok(in_frame(&f.v, &coeffs))
}

/// Symmetric non-negative affinity `w_ij = |z_ij| + |z_ji|`.
pub fn affinity(z: &Matrix) -> Result<Matrix> {
    if z.nrows() != z.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "representation must be square, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("representation contains a NaN or infinite entry".into()));
    }
    let n = z.nrows();
    Ok(Matrix::from_fn(n, n, |i, j| z[(i, j)].abs() + z[(j, i)].abs()))
}

/// Builds the representation for `method` at `lambda`; the second component
/// is the rank chosen internally (dssim only). `lambda` is ignored by `sim`.
pub fn reconstruction(points: &Matrix, method: Method, lambda: f64) -> Result<(Matrix, Option<usize>)> {
    match method {
        Method::Sim => Ok((sim(points, DEFAULT_RANK_TOL)?, None)),
        Method::Dssim => {
            let (z, r) = dssim(points, lambda)?;
            Ok((z, Some(r)))
        }
        Method::Cssim => Ok((cssim(points, lambda)?, None)),
        Method::Ssim => Ok((ssim(points, lambda)?, None)),
    }
}

/// Representation, affinity, spectral clustering, and (for labeled data)
/// accuracy in one call. `k` is the number of clusters to extract; `seed`
/// drives only the k-means initialization.
pub fn run_pipeline(
    data: &Dataset,
    method: Method,
    lambda: f64,
    k: usize,
    seed: u64,
) -> Result<ClusterResult> {
    let (z, chosen_rank) = reconstruction(&data.points, method, lambda)?;
    let w = affinity(&z)?;
    let (labels, degenerate) = spectral_cluster(&w, k, seed)?;
    let acc = if data.labels.is_empty() {
        None
    } else {
        Some(accuracy(&labels, &data.labels)?)
    };
    Ok(ClusterResult { labels, accuracy: acc, chosen_rank, degenerate })
}
