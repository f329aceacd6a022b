//! Thin SVD, truncation, pseudoinverse, and orthogonal projectors.
//!
//! Everything downstream (norm evaluation, the closed-form solvers, the
//! clustering methods) is built on the factorizations in this module, so the
//! conventions are fixed here once: singular values are sorted in descending
//! order, the numerical rank cuts at `rank_tol * sigma_max`, and a truncation
//! is reported as unique only when the spectrum has a clear gap at the cut.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`, the carrier type for the whole crate.
pub type Matrix = DMatrix<f64>;

/// Relative cutoff below which a singular value is treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative spectral gap below which two singular values are treated as tied,
/// which makes the corresponding truncation non-unique.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

const SVD_MAX_ITER: usize = 100_000;

/// Residual bound for accepting a backend factorization, relative to
/// `1 + ||a||`. The backend SVD occasionally returns factors that fail to
/// reproduce the input on small rank-deficient matrices, and when it does the
/// residual is enormous, so any threshold in this range separates the two
/// outcomes cleanly.
const SVD_VERIFY_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Rank-revealing thin SVD: `u` is m-by-r, `v` is n-by-r, both with
/// orthonormal columns, and `sigma` holds the r singular values above the
/// rank cutoff in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    /// Numerical rank, the length of `sigma`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Rebuilds `u * diag(sigma) * v^T`.
    pub fn reconstruct(&self) -> Matrix {
        scaled_product(&self.u, &self.sigma, &self.v, self.rank())
    }

    /// Rebuilds the rank-`min(k, rank)` truncation from the leading factors.
    pub fn reconstruct_truncated(&self, k: usize) -> Matrix {
        scaled_product(&self.u, &self.sigma, &self.v, k.min(self.rank()))
    }
}

/// Forms `u[:, :k] * diag(sigma[:k]) * v[:, :k]^T` without materializing the
/// diagonal matrix.
fn scaled_product(u: &Matrix, sigma: &[f64], v: &Matrix, k: usize) -> Matrix {
    let mut us = u.columns(0, k).into_owned();
    for (j, s) in sigma.iter().take(k).enumerate() {
        us.column_mut(j).scale_mut(*s);
    }
    us * v.columns(0, k).transpose()
}

fn check_finite(name: &str, a: &Matrix) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{name} contains a NaN or infinite entry"
        )));
    }
    Ok(())
}

fn check_rank_tol(rank_tol: f64) -> Result<()> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rank_tol must lie in (0, 1), got {rank_tol}"
        )));
    }
    Ok(())
}

/// Full factorization `a = u * diag(sigma) * v^T` with `p = min(m, n)`
/// triplets in descending order, `u` m-by-p and `v` n-by-p orthonormal.
///
/// The backend SVD is tried first and the result is verified by
/// reconstruction and factor orthonormality. The backend sometimes returns
/// badly wrong factors on small rank-deficient inputs (a rank-1 projector can
/// come back with a leading singular value above 1.1), so a rejected result
/// falls back to a one-sided Jacobi routine that is slower but dependable.
pub(crate) fn svd_full(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    if let Some(svd) = SVD::try_new(a.clone(), true, true, f64::EPSILON, SVD_MAX_ITER) {
        let u_raw = svd.u.expect("u requested");
        let v_t_raw = svd.v_t.expect("v_t requested");

        // The backend documents descending order; re-sort defensively so the
        // invariant never depends on it.
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .unwrap()
                .then(i.cmp(&j))
        });

        let p = order.len();
        let mut u = Matrix::zeros(a.nrows(), p);
        let mut v = Matrix::zeros(a.ncols(), p);
        let mut sigma = Vec::with_capacity(p);
        for (out, &src) in order.iter().enumerate() {
            u.set_column(out, &u_raw.column(src));
            v.set_column(out, &v_t_raw.row(src).transpose());
            sigma.push(svd.singular_values[src].max(0.0));
        }

        if factors_verify(a, &u, &sigma, &v) {
            return Ok((u, sigma, v));
        }
    }
    jacobi_svd(a)
}

fn factors_verify(a: &Matrix, u: &Matrix, sigma: &[f64], v: &Matrix) -> bool {
    let p = sigma.len();
    let recon = scaled_product(u, sigma, v, p);
    let scale = 1.0 + a.norm();
    if (recon - a).norm() > SVD_VERIFY_TOL * scale {
        return false;
    }
    let eye = Matrix::identity(p, p);
    (u.transpose() * u - &eye).norm() <= SVD_VERIFY_TOL
        && (v.transpose() * v - &eye).norm() <= SVD_VERIFY_TOL
}

/// One-sided Jacobi SVD: cyclically rotates column pairs of the (tall
/// orientation of the) matrix until all pairs are orthogonal, then reads off
/// singular values as column norms. Deterministic sweep order, no branching
/// on data beyond the rotation threshold.
fn jacobi_svd(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let transposed = a.nrows() < a.ncols();
    let mut w = if transposed { a.transpose() } else { a.clone() };
    let (m, p) = w.shape();
    // v accumulates the column rotations and stays exactly orthogonal.
    let mut v = Matrix::identity(p, p);

    let ortho_tol = 1e-13;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let (alpha, beta, gamma) = {
                    let ci = w.column(i);
                    let cj = w.column(j);
                    (ci.dot(&ci), cj.dot(&cj), ci.dot(&cj))
                };
                if gamma.abs() <= ortho_tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for row in 0..m {
                    let x = w[(row, i)];
                    let y = w[(row, j)];
                    w[(row, i)] = c * x - s * y;
                    w[(row, j)] = s * x + c * y;
                }
                for row in 0..p {
                    let x = v[(row, i)];
                    let y = v[(row, j)];
                    v[(row, i)] = c * x - s * y;
                    v[(row, j)] = s * x + c * y;
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Factorization(
            "Jacobi SVD did not converge within the sweep budget".into(),
        ));
    }

    let mut order: Vec<usize> = (0..p).collect();
    let norms: Vec<f64> = (0..p).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u = Matrix::zeros(m, p);
    let mut v_sorted = Matrix::zeros(p, p);
    let mut sigma = Vec::with_capacity(p);
    for (out, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            u.set_column(out, &(w.column(src) / s));
        }
        v_sorted.set_column(out, &v.column(src));
    }
    fill_null_columns(&mut u, &sigma);

    if transposed {
        Ok((v_sorted, sigma, u))
    } else {
        Ok((u, sigma, v_sorted))
    }
}

/// Replaces the columns of `u` whose singular value is exactly zero with an
/// orthonormal completion built from standard basis vectors, so that the
/// factor keeps orthonormal columns even when the input had a null space.
fn fill_null_columns(u: &mut Matrix, sigma: &[f64]) {
    let m = u.nrows();
    let mut next_candidate = 0;
    for (j, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            continue;
        }
        while next_candidate < m {
            let mut cand = Matrix::zeros(m, 1);
            cand[(next_candidate, 0)] = 1.0;
            next_candidate += 1;
            // Two Gram-Schmidt passes against every column already placed.
            for _ in 0..2 {
                for k in 0..u.ncols() {
                    if k == j {
                        continue;
                    }
                    let proj = u.column(k).dot(&cand.column(0));
                    let col = u.column(k).into_owned();
                    cand.column_mut(0).axpy(-proj, &col.column(0), 1.0);
                }
            }
            let norm = cand.norm();
            if norm > 0.5 {
                u.set_column(j, &(cand.column(0) / norm));
                break;
            }
        }
    }
}

/// Computes the rank-revealing thin SVD of `a`, keeping exactly the singular
/// triplets with `sigma_i > rank_tol * sigma_max`. A zero matrix yields rank 0
/// with 0-column factors.
pub fn thin_svd(a: &Matrix, rank_tol: f64) -> Result<SvdFactors> {
    check_finite("matrix", a)?;
    check_rank_tol(rank_tol)?;

    let (u_full, sigma_full, v_full) = svd_full(a)?;
    let sigma_max = sigma_full.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * sigma_max;

    let r = sigma_full.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let u = u_full.columns(0, r).into_owned();
    let v = v_full.columns(0, r).into_owned();
    let sigma = sigma_full[..r].to_vec();

    Ok(SvdFactors { u, sigma, v })
}

/// Best rank-`min(k, rank)` reconstruction of `a` together with a uniqueness
/// flag. The flag is `true` when `k` is 0, when `k` reaches the numerical
/// rank, or when the relative gap `sigma_k - sigma_{k+1}` clears
/// [`DEFAULT_GAP_TOL`].
pub fn truncate(a: &Matrix, k: usize, rank_tol: f64) -> Result<(Matrix, bool)> {
    let f = thin_svd(a, rank_tol)?;
    let unique = truncation_is_unique(&f.sigma, k);
    Ok((f.reconstruct_truncated(k), unique))
}

/// Gap test shared by [`truncate`] and the solvers that report uniqueness.
/// `sigma` must be descending; `k` is the requested rank.
pub fn truncation_is_unique(sigma: &[f64], k: usize) -> bool {
    if k == 0 || k >= sigma.len() {
        return true;
    }
    let scale = sigma[0].max(f64::MIN_POSITIVE);
    (sigma[k - 1] - sigma[k]) > DEFAULT_GAP_TOL * scale
}

/// Moore-Penrose pseudoinverse through the thin SVD: `v * diag(1/sigma) * u^T`.
pub fn pinv(a: &Matrix, rank_tol: f64) -> Result<Matrix> {
    let f = thin_svd(a, rank_tol)?;
    let inv_sigma: Vec<f64> = f.sigma.iter().map(|s| 1.0 / s).collect();
    Ok(scaled_product(&f.v, &inv_sigma, &f.u, f.rank()))
}

/// Orthogonal projectors onto the column space and the row space of `a`,
/// returned as `(u u^T, v v^T)`. A zero matrix yields zero projectors.
pub fn projectors(a: &Matrix, rank_tol: f64) -> Result<(Matrix, Matrix)> {
    let f = thin_svd(a, rank_tol)?;
    Ok((&f.u * f.u.transpose(), &f.v * f.v.transpose()))
}

/// Orthonormal basis for the orthogonal complement of the column space of
/// `q`, which must itself have orthonormal columns (checked to 1e-8). For an
/// m-by-r input the result is m-by-(m-r); a full basis returns an m-by-0
/// matrix.
pub fn orth_complement(q: &Matrix) -> Result<Matrix> {
    let m = q.nrows();
    let r = q.ncols();
    if m == 0 {
        return Err(Error::InvalidInput("basis must have at least one row".into()));
    }
    if q.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("basis contains a NaN or infinite entry".into()));
    }
    let gram_err = (q.transpose() * q - Matrix::identity(r, r)).norm();
    if gram_err > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "basis columns are not orthonormal (||q^T q - I|| = {gap:.3e})",
            gap = gram_err
        )));
    }
    if r >= m {
        return Ok(Matrix::zeros(m, 0));
    }

    // The complement is the range of the residual projector I - q q^T, whose
    // singular values are exactly 1 (complement directions) and 0 (basis
    // directions), so a 0.5 cutoff separates them unambiguously.
    let p = Matrix::identity(m, m) - q * q.transpose();
    let f = thin_svd(&p, 0.5)?;
    debug_assert_eq!(f.rank(), m - r);
    Ok(f.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::gaussian;
    use approx::assert_abs_diff_eq;

    #[test]
    fn thin_svd_of_diagonal_is_exact() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let f = thin_svd(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 3);
        assert_abs_diff_eq!(f.sigma[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.sigma[2], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.reconstruct(), a, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_product_has_rank_ten() {
        let x = gaussian(50, 10, 7) * gaussian(10, 40, 8);
        let f = thin_svd(&x, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 10, "rank of a 50x10 * 10x40 product");

        // Independent count through the Gram spectrum. The eigensolver noise
        // floor sits near machine epsilon relative to the top eigenvalue, so
        // the cutoff must stay well above it.
        let gram = x.transpose() * &x;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let gram_rank = eig.eigenvalues.iter().filter(|&&l| l > 1e-12 * lmax).count();
        assert_eq!(gram_rank, 10, "Gram eigenvalue count disagrees with SVD");
    }

    #[test]
    fn thin_svd_survives_degenerate_inputs() {
        // Rank-deficient products, projector residuals, and PSD Gram matrices
        // are exactly the shapes the backend SVD is known to botch, with
        // reconstruction errors near 1 when it does. Every factorization here
        // must reproduce its input and keep orthonormal factors.
        let check = |a: &Matrix, label: &str| {
            let f = thin_svd(a, DEFAULT_RANK_TOL).unwrap();
            let scale = 1.0 + a.norm();
            let recon_err = (f.reconstruct() - a).norm();
            assert!(
                recon_err <= 1e-9 * scale,
                "{label}: reconstruction error {recon_err:.3e}"
            );
            let r = f.rank();
            let eye = Matrix::identity(r, r);
            assert!(
                (f.u.transpose() * &f.u - &eye).norm() <= 1e-9,
                "{label}: left factor lost orthonormality"
            );
            assert!(
                (f.v.transpose() * &f.v - &eye).norm() <= 1e-9,
                "{label}: right factor lost orthonormality"
            );
        };

        for seed in 0..40u64 {
            let m = 2 + (seed as usize % 6);
            let n = 2 + ((seed as usize / 2) % 6);
            let r = 1 + (seed as usize % m.min(n));
            let product = gaussian(m, r, 100 + seed) * gaussian(r, n, 200 + seed);
            check(&product, "low-rank product");

            let q = crate::test_util::random_orthonormal(m, r.min(m - 1).max(1), 300 + seed);
            let projector = Matrix::identity(m, m) - &q * q.transpose();
            check(&projector, "projector residual");

            let g = gaussian(m, r, 400 + seed);
            check(&(&g * g.transpose()), "PSD Gram");
        }
    }

    #[test]
    fn zero_matrix_has_rank_zero_everywhere() {
        let a = Matrix::zeros(4, 3);
        let f = thin_svd(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(f.u.shape(), (4, 0));
        assert_eq!(f.v.shape(), (3, 0));

        let p = pinv(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(p.shape(), (3, 4));
        assert_eq!(p.norm(), 0.0);

        let (pl, pr) = projectors(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(pl, Matrix::zeros(4, 4));
        assert_eq!(pr, Matrix::zeros(3, 3));
    }

    #[test]
    fn truncate_keeps_leading_block_and_reports_gap() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let (t, unique) = truncate(&a, 2, DEFAULT_RANK_TOL).unwrap();
        assert!(unique, "3 > 2 > 1 has clear gaps");
        let expected = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert_abs_diff_eq!(t, expected, epsilon = 1e-12);
    }

    #[test]
    fn tied_singular_values_make_truncation_non_unique() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.0, 1.0]));
        let (_, unique) = truncate(&a, 1, DEFAULT_RANK_TOL).unwrap();
        assert!(!unique, "sigma_1 == sigma_2 means many rank-1 minimizers");
        let (_, unique_edge) = truncate(&a, 0, DEFAULT_RANK_TOL).unwrap();
        assert!(unique_edge, "k = 0 always has the unique answer 0");
        let (_, unique_full) = truncate(&a, 3, DEFAULT_RANK_TOL).unwrap();
        assert!(unique_full, "k = rank recovers the matrix itself");
    }

    #[test]
    fn truncate_beyond_rank_returns_matrix() {
        let a = gaussian(5, 4, 3);
        let (t, unique) = truncate(&a, 9, DEFAULT_RANK_TOL).unwrap();
        assert!(unique);
        assert_abs_diff_eq!(t, a, epsilon = 1e-10);
    }

    #[test]
    fn pinv_matches_normal_equations_on_full_column_rank() {
        let a = gaussian(8, 5, 21);
        let p = pinv(&a, DEFAULT_RANK_TOL).unwrap();
        // For full column rank, (a^T a)^{-1} a^T is an independent route.
        let oracle = (a.transpose() * &a).try_inverse().unwrap() * a.transpose();
        assert_abs_diff_eq!(p, oracle, epsilon = 1e-10);
    }

    #[test]
    fn pinv_satisfies_penrose_identities() {
        let a = gaussian(6, 9, 4) * gaussian(9, 7, 5); // rank 6, wide-ish
        let p = pinv(&a, DEFAULT_RANK_TOL).unwrap();
        let scale = 1.0 + a.norm();
        assert!(((&a * &p * &a) - &a).norm() <= 1e-9 * scale);
        assert!(((&p * &a * &p) - &p).norm() <= 1e-9 * scale);
        let ap = &a * &p;
        assert!((ap.transpose() - &ap).norm() <= 1e-9 * scale);
        let pa = &p * &a;
        assert!((pa.transpose() - &pa).norm() <= 1e-9 * scale);
    }

    #[test]
    fn projectors_are_idempotent_and_reproduce_a() {
        let a = gaussian(7, 4, 11) * gaussian(4, 6, 12);
        let (pl, pr) = projectors(&a, DEFAULT_RANK_TOL).unwrap();
        assert!(((&pl * &pl) - &pl).norm() <= 1e-10);
        assert!(((&pr * &pr) - &pr).norm() <= 1e-10);
        assert!((&pl * &a - &a).norm() <= 1e-9 * (1.0 + a.norm()));
        assert!((&a * &pr - &a).norm() <= 1e-9 * (1.0 + a.norm()));
    }

    #[test]
    fn orth_complement_spans_the_missing_directions() {
        let f = thin_svd(&gaussian(6, 2, 9), DEFAULT_RANK_TOL).unwrap();
        let q = f.u; // 6x2 orthonormal
        let w = orth_complement(&q).unwrap();
        assert_eq!(w.shape(), (6, 4));
        assert!((q.transpose() * &w).norm() <= 1e-10, "complement not orthogonal to basis");
        assert!((w.transpose() * &w - Matrix::identity(4, 4)).norm() <= 1e-10);
    }

    #[test]
    fn orth_complement_of_full_basis_is_empty() {
        let f = thin_svd(&gaussian(4, 4, 30), DEFAULT_RANK_TOL).unwrap();
        let w = orth_complement(&f.u).unwrap();
        assert_eq!(w.shape(), (4, 0));
    }

    #[test]
    fn orth_complement_rejects_skewed_basis() {
        let q = Matrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.7, 0.7, 0.0]);
        let err = orth_complement(&q).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "got {err:?}");
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let mut a = Matrix::zeros(2, 2);
        a[(0, 0)] = f64::NAN;
        assert!(matches!(
            thin_svd(&a, DEFAULT_RANK_TOL),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            thin_svd(&Matrix::zeros(2, 2), 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            thin_svd(&Matrix::zeros(2, 2), 1.0),
            Err(Error::InvalidInput(_))
        ));
    }
}
