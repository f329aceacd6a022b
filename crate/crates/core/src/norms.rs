//! Unitarily invariant matrix norms evaluated through singular value
//! profiles.
//!
//! The family covered here sums the `p`-th powers of the top `k` singular
//! values and takes the `1/p` root. Special cases get canonical names:
//! `trace` (all values, p = 1), `fro` (all values, p = 2), `spec` (p = inf),
//! and Ky Fan norms (top k, p = 1). `rank` and `fro2` (squared Frobenius) are
//! not norms but share the evaluation interface because the rank-penalized
//! and shrinkage solvers score objectives with them.
//!
//! [`ky_fan_dominates`] implements the partial-sum test that decides whether
//! one spectrum beats another under every unitarily invariant norm
//! simultaneously; the solver certificates are built on it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, DEFAULT_RANK_TOL};

/// How many leading singular values a `kp` norm consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpDepth {
    /// The top `k` values (`k >= 1`); values past the spectrum length are
    /// treated as zero.
    Top(usize),
    /// Every singular value, i.e. `k = min(m, n)`.
    Full,
}

/// The exponent of a `kp` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    /// Finite exponent, `p >= 1`.
    Finite(f64),
    /// The limit `p -> inf`, i.e. the largest of the selected values.
    Inf,
}

/// An objective evaluable on a singular value profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    /// `(sum of the top-k sigma_i^p)^(1/p)`.
    Kp { k: KpDepth, p: PNorm },
    /// Numerical rank (count of values above the relative cutoff). Not a
    /// norm; used as the penalty term of rank-regularized objectives.
    Rank,
    /// `sum sigma_i^2`, the squared Frobenius norm. Not a norm itself; used
    /// as the smooth loss of shrinkage problems.
    SquaredFrobenius,
}

impl NormSpec {
    pub fn trace() -> Self {
        NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(1.0) }
    }

    pub fn frobenius() -> Self {
        NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(2.0) }
    }

    pub fn spectral() -> Self {
        NormSpec::Kp { k: KpDepth::Full, p: PNorm::Inf }
    }

    /// Ky Fan k-norm: sum of the k largest singular values.
    pub fn ky_fan(k: usize) -> Self {
        NormSpec::Kp { k: KpDepth::Top(k), p: PNorm::Finite(1.0) }
    }

    /// Schatten p-norm: `p`-norm of the full singular value vector.
    pub fn schatten(p: f64) -> Self {
        NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(p) }
    }

    pub fn validate(&self) -> Result<()> {
        if let NormSpec::Kp { k, p } = self {
            if let KpDepth::Top(0) = k {
                return Err(Error::InvalidConfig("kp norm requires k >= 1".into()));
            }
            if let PNorm::Finite(p) = p {
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "kp norm requires p >= 1, got {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True for specs that are genuine unitarily invariant norms (everything
    /// except `rank` and `fro2`).
    pub fn is_norm(&self) -> bool {
        matches!(self, NormSpec::Kp { .. })
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Rank => write!(f, "rank"),
            NormSpec::SquaredFrobenius => write!(f, "fro2"),
            NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(p) } if *p == 1.0 => {
                write!(f, "trace")
            }
            NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(p) } if *p == 2.0 => {
                write!(f, "fro")
            }
            NormSpec::Kp { k: KpDepth::Full, p: PNorm::Inf } => write!(f, "spec"),
            NormSpec::Kp { k, p } => {
                write!(f, "kp:k=")?;
                match k {
                    KpDepth::Top(k) => write!(f, "{k}")?,
                    KpDepth::Full => write!(f, "full")?,
                }
                match p {
                    PNorm::Finite(p) => write!(f, ",p={p}"),
                    PNorm::Inf => write!(f, ",p=inf"),
                }
            }
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    /// Accepts `rank`, `fro`, `fro2`, `trace`, `spec`, and the general form
    /// `kp:k=K,p=P` where `K` is a positive integer or `full` and `P` is a
    /// number `>= 1` or `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rank" => return Ok(NormSpec::Rank),
            "fro" => return Ok(NormSpec::frobenius()),
            "fro2" => return Ok(NormSpec::SquaredFrobenius),
            "trace" => return Ok(NormSpec::trace()),
            "spec" => return Ok(NormSpec::spectral()),
            _ => {}
        }
        let body = s.strip_prefix("kp:").ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown norm `{s}` (expected rank|fro|fro2|trace|spec|kp:k=K,p=P)"
            ))
        })?;
        let mut k = None;
        let mut p = None;
        for part in body.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("malformed kp component `{part}`"))
            })?;
            match key.trim() {
                "k" => {
                    let value = value.trim();
                    k = Some(if value == "full" {
                        KpDepth::Full
                    } else {
                        KpDepth::Top(value.parse::<usize>().map_err(|_| {
                            Error::InvalidConfig(format!("bad k value `{value}`"))
                        })?)
                    });
                }
                "p" => {
                    let value = value.trim();
                    p = Some(if value == "inf" {
                        PNorm::Inf
                    } else {
                        PNorm::Finite(value.parse::<f64>().map_err(|_| {
                            Error::InvalidConfig(format!("bad p value `{value}`"))
                        })?)
                    });
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown kp component `{other}`"
                    )))
                }
            }
        }
        let spec = NormSpec::Kp {
            k: k.ok_or_else(|| Error::InvalidConfig("kp norm is missing k".into()))?,
            p: p.ok_or_else(|| Error::InvalidConfig("kp norm is missing p".into()))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The full singular value spectrum of a matrix, descending, length
/// `min(m, n)` including zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularProfile {
    values: Vec<f64>,
}

impl SingularProfile {
    pub fn from_matrix(a: &Matrix) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "matrix contains a NaN or infinite entry".into(),
            ));
        }
        let (_, values, _) = crate::linalg::svd_full(a)?;
        Ok(Self { values })
    }

    /// Wraps an explicit spectrum; it must be non-empty, finite,
    /// non-negative, and descending.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("profile must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "profile values must be finite and non-negative".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("profile must be descending".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `i`-th value, zero-padded past the end.
    fn get(&self, i: usize) -> f64 {
        self.values.get(i).copied().unwrap_or(0.0)
    }
}

/// Evaluates `spec` on the spectrum of `a`.
pub fn evaluate(spec: &NormSpec, a: &Matrix) -> Result<f64> {
    evaluate_profile(spec, &SingularProfile::from_matrix(a)?)
}

/// Evaluates `spec` on a precomputed spectrum.
pub fn evaluate_profile(spec: &NormSpec, profile: &SingularProfile) -> Result<f64> {
    spec.validate()?;
    let vals = profile.values();
    Ok(match spec {
        NormSpec::Rank => {
            let top = vals.first().copied().unwrap_or(0.0);
            let cutoff = DEFAULT_RANK_TOL * top;
            vals.iter().filter(|&&s| s > cutoff && s > 0.0).count() as f64
        }
        NormSpec::SquaredFrobenius => vals.iter().map(|s| s * s).sum(),
        NormSpec::Kp { k, p } => {
            let k_eff = match k {
                KpDepth::Top(k) => (*k).min(vals.len()),
                KpDepth::Full => vals.len(),
            };
            let head = &vals[..k_eff];
            match p {
                PNorm::Inf => head.first().copied().unwrap_or(0.0),
                PNorm::Finite(p) if *p == 1.0 => head.iter().sum(),
                PNorm::Finite(p) if *p == 2.0 => {
                    head.iter().map(|s| s * s).sum::<f64>().sqrt()
                }
                PNorm::Finite(p) => head
                    .iter()
                    .map(|s| s.powf(*p))
                    .sum::<f64>()
                    .powf(1.0 / p),
            }
        }
    })
}

/// Partial-sum dominance: true when every Ky Fan norm of `a` is at most the
/// matching Ky Fan norm of `b`, each comparison slack by
/// `tol * (1 + partial sum of b)`. This is equivalent to `||a|| <= ||b||`
/// under every unitarily invariant norm at once.
pub fn ky_fan_dominates(a: &Matrix, b: &Matrix, tol: f64) -> Result<bool> {
    Ok(profile_dominates(
        &SingularProfile::from_matrix(a)?,
        &SingularProfile::from_matrix(b)?,
        tol,
    ))
}

/// Partial-sum dominance on precomputed spectra; see [`ky_fan_dominates`].
pub fn profile_dominates(a: &SingularProfile, b: &SingularProfile, tol: f64) -> bool {
    let len = a.len().max(b.len());
    let mut sum_a = 0.0;
    let mut sum_b = 0.0;
    for i in 0..len {
        sum_a += a.get(i);
        sum_b += b.get(i);
        if sum_a > sum_b + tol * (1.0 + sum_b) {
            return false;
        }
    }
    true
}
