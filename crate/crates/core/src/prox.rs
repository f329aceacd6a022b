//! Shrinkage solvers for `loss(A - B X C) + lambda * reg(X)`.
//!
//! When the factors align and the core `U_B^T A V_C` is diagonal (the SD
//! condition checked by [`crate::eym::check_assumptions`]), the matrix
//! problem splits into independent scalar problems, one per singular
//! direction, each with a closed-form answer. Three loss/regularizer pairs
//! ship:
//!
//! | loss   | reg    | scalar rule (s = scale_b * scale_c)                |
//! |--------|--------|----------------------------------------------------|
//! | `fro2` | `trace`| `x = (sigma - lambda / (2 s))_+ / s`               |
//! | `fro2` | `fro2` | `x = s * sigma / (s^2 + lambda)`                   |
//! | `trace`| `trace`| `x = sigma / s` if `s > lambda`, else `0`          |
//!
//! Any other pairing returns [`Error::UnsupportedPair`]; nothing is solved
//! iteratively here. [`svt`] is the classic special case: plain structure,
//! `fro2` loss, `trace` penalty, unit scales.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eym::{check_assumptions, SolveReport, DEFAULT_ASSUMPTION_TOL};
use crate::linalg::{thin_svd, Matrix, DEFAULT_RANK_TOL};
use crate::norms::{evaluate, KpDepth, NormSpec, PNorm};

/// How `A`, `B`, `C` are wired in the problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// `loss(A - X) + lambda * reg(X)`: both factors are identities, every
    /// scale is 1, and the answer shrinks the spectrum of `A` in place.
    Plain,
    /// `loss(A - A Z) + lambda * reg(Z)`: the data matrix is its own left
    /// factor, so direction `i` carries scale `sigma_i(A)` and the answer is
    /// symmetric in the right singular frame, `Z = V diag(z) V^T`.
    SelfExpressive,
    /// Explicit `B` and `C` with the SD condition verified numerically on
    /// their computed factors.
    GeneralSd,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Plain => write!(f, "plain"),
            Structure::SelfExpressive => write!(f, "self"),
            Structure::GeneralSd => write!(f, "general"),
        }
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plain" => Ok(Structure::Plain),
            "self" | "self-expressive" => Ok(Structure::SelfExpressive),
            "general" | "general-sd" => Ok(Structure::GeneralSd),
            other => Err(Error::InvalidConfig(format!(
                "unknown structure `{other}` (expected plain|self|general)"
            ))),
        }
    }
}

/// A validated shrinkage problem.
#[derive(Debug, Clone)]
pub struct RegularizedProblem {
    pub loss: NormSpec,
    pub reg: NormSpec,
    pub lambda: f64,
    pub structure: Structure,
}

/// The scalar objectives the closed table covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarKind {
    /// Squared value: the `fro2` loss or penalty.
    Square,
    /// Absolute value: the trace norm contribution of one direction.
    Abs,
}

fn classify(spec: &NormSpec) -> Option<ScalarKind> {
    match spec {
        NormSpec::SquaredFrobenius => Some(ScalarKind::Square),
        NormSpec::Kp { k: KpDepth::Full, p: PNorm::Finite(p) } if *p == 1.0 => {
            Some(ScalarKind::Abs)
        }
        _ => None,
    }
}

fn supported(loss: &NormSpec, reg: &NormSpec) -> Result<(ScalarKind, ScalarKind)> {
    let pair = (classify(loss), classify(reg));
    match pair {
        (Some(ScalarKind::Square), Some(k)) => Ok((ScalarKind::Square, k)),
        (Some(ScalarKind::Abs), Some(ScalarKind::Abs)) => Ok((ScalarKind::Abs, ScalarKind::Abs)),
        _ => Err(Error::UnsupportedPair { loss: loss.to_string(), reg: reg.to_string() }),
    }
}

impl RegularizedProblem {
    /// Builds a problem, rejecting unsupported pairs and non-positive
    /// `lambda` up front.
    pub fn new(loss: NormSpec, reg: NormSpec, lambda: f64, structure: Structure) -> Result<Self> {
        supported(&loss, &reg)?;
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { loss, reg, lambda, structure })
    }
}

/// Scalar minimizer of `loss(sigma - scale_b * x * scale_c) + lambda *
/// reg(x)` for one singular direction. `sigma` must be non-negative; the
/// scales must be positive. This is the quantity tabulated in the module
/// docs; callers with signed core entries apply the sign afterwards.
pub fn vector_rule(
    loss: &NormSpec,
    reg: &NormSpec,
    sigma: f64,
    scale_b: f64,
    scale_c: f64,
    lambda: f64,
) -> Result<f64> {
    rule_with_uniqueness(loss, reg, sigma, scale_b, scale_c, lambda).map(|(x, _)| x)
}

fn rule_with_uniqueness(
    loss: &NormSpec,
    reg: &NormSpec,
    sigma: f64,
    scale_b: f64,
    scale_c: f64,
    lambda: f64,
) -> Result<(f64, bool)> {
    let pair = supported(loss, reg)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be non-negative, got {sigma}")));
    }
    if !(scale_b.is_finite() && scale_b > 0.0 && scale_c.is_finite() && scale_c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scales must be positive, got scale_b = {scale_b}, scale_c = {scale_c}"
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be non-negative, got {lambda}")));
    }
    let s = scale_b * scale_c;
    Ok(match pair {
        (ScalarKind::Square, ScalarKind::Abs) => ((sigma - lambda / (2.0 * s)).max(0.0) / s, true),
        (ScalarKind::Square, ScalarKind::Square) => (s * sigma / (s * s + lambda), true),
        (ScalarKind::Abs, ScalarKind::Abs) => {
            if s > lambda {
                (sigma / s, true)
            } else if s < lambda {
                (0.0, true)
            } else {
                // The scalar objective is flat on [0, sigma/s]; report the
                // smallest-penalty point and flag the tie.
                (0.0, sigma == 0.0)
            }
        }
        (ScalarKind::Abs, ScalarKind::Square) => unreachable!("rejected by supported()"),
    })
}

/// Singular value thresholding, the minimizer of
/// `||A - X||_F^2 + lambda * ||X||_tr`: shrink each singular value by
/// `lambda / 2` and clip at zero.
pub fn svt(a: &Matrix, lambda: f64) -> Result<Matrix> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be non-negative and finite, got {lambda}"
        )));
    }
    let f = thin_svd(a, DEFAULT_RANK_TOL)?;
    let shrunk: Vec<f64> = f.sigma.iter().map(|s| (s - lambda / 2.0).max(0.0)).collect();
    Ok(rebuild(&f.u, &shrunk, &f.v))
}

fn rebuild(u: &Matrix, coeffs: &[f64], v: &Matrix) -> Matrix {
    let mut us = u.columns(0, coeffs.len()).into_owned();
    for (j, c) in coeffs.iter().enumerate() {
        us.column_mut(j).scale_mut(*c);
    }
    us * v.columns(0, coeffs.len()).transpose()
}

/// Solves the problem described by `problem`. `b` and `c` must be `None`
/// for the plain and self-expressive structures (their factors are implied)
/// and present for [`Structure::GeneralSd`], where the SD condition is
/// checked at [`DEFAULT_ASSUMPTION_TOL`] before anything is solved.
///
/// The report's objective is `loss + lambda * reg` evaluated on the actual
/// matrices, `chosen_rank` counts the surviving directions, and `unique`
/// reflects scalar-level ties (only the trace/trace rule can tie).
pub fn solve_sd(
    a: &Matrix,
    b: Option<&Matrix>,
    c: Option<&Matrix>,
    problem: &RegularizedProblem,
) -> Result<SolveReport> {
    supported(&problem.loss, &problem.reg)?;
    if !(problem.lambda.is_finite() && problem.lambda > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must be positive and finite, got {}",
            problem.lambda
        )));
    }
    match problem.structure {
        Structure::Plain | Structure::SelfExpressive => {
            if b.is_some() || c.is_some() {
                return Err(Error::InvalidConfig(format!(
                    "structure `{}` takes no explicit factors",
                    problem.structure
                )));
            }
        }
        Structure::GeneralSd => {
            if b.is_none() || c.is_none() {
                return Err(Error::InvalidConfig(
                    "structure `general` requires both B and C".into(),
                ));
            }
        }
    }

    match problem.structure {
        Structure::Plain => {
            let f = thin_svd(a, DEFAULT_RANK_TOL)?;
            let mut coeffs = Vec::with_capacity(f.rank());
            let mut unique = true;
            for s in &f.sigma {
                let (x, uq) =
                    rule_with_uniqueness(&problem.loss, &problem.reg, *s, 1.0, 1.0, problem.lambda)?;
                unique &= uq;
                coeffs.push(x);
            }
            let x = rebuild(&f.u, &coeffs, &f.v);
            finish(problem, a, &(a - &x), x, coeffs, unique, "spectrum of A shrunk in place")
        }
        Structure::SelfExpressive => {
            let f = thin_svd(a, DEFAULT_RANK_TOL)?;
            let mut coeffs = Vec::with_capacity(f.rank());
            let mut unique = true;
            for s in &f.sigma {
                let (z, uq) =
                    rule_with_uniqueness(&problem.loss, &problem.reg, *s, *s, 1.0, problem.lambda)?;
                unique &= uq;
                coeffs.push(z);
            }
            let z = rebuild(&f.v, &coeffs, &f.v);
            finish(
                problem,
                a,
                &(a - a * &z),
                z,
                coeffs,
                unique,
                "self-expressive coefficients in the right singular frame",
            )
        }
        Structure::GeneralSd => {
            let (b, c) = (b.unwrap(), c.unwrap());
            let rep = check_assumptions(a, b, c, DEFAULT_ASSUMPTION_TOL)?;
            if !rep.sd_holds {
                return Err(Error::AssumptionViolated {
                    assumption: "SD (alignment with diagonal core)".into(),
                    residual: rep.sb_residual.max(rep.sd_residual),
                });
            }
            let fb = thin_svd(b, DEFAULT_RANK_TOL)?;
            let fc = thin_svd(c, DEFAULT_RANK_TOL)?;
            let core = fb.u.transpose() * a * &fc.v;
            let matched = fb.rank().min(fc.rank());
            let mut coeffs = Vec::with_capacity(matched);
            let mut unique = true;
            for i in 0..matched {
                let ahat = core[(i, i)];
                let (x, uq) = rule_with_uniqueness(
                    &problem.loss,
                    &problem.reg,
                    ahat.abs(),
                    fb.sigma[i],
                    fc.sigma[i],
                    problem.lambda,
                )?;
                unique &= uq;
                coeffs.push(x * ahat.signum());
            }
            // X = V_B diag(x) U_C^T on the matched directions.
            let x = rebuild(
                &fb.v.columns(0, matched).into_owned(),
                &coeffs,
                &fc.u.columns(0, matched).into_owned(),
            );
            finish(
                problem,
                a,
                &(a - b * &x * c),
                x,
                coeffs,
                unique,
                "signed diagonal core shrunk against the factor scales",
            )
        }
    }
}

fn finish(
    problem: &RegularizedProblem,
    _a: &Matrix,
    residual: &Matrix,
    solution: Matrix,
    coeffs: Vec<f64>,
    unique: bool,
    note: &str,
) -> Result<SolveReport> {
    let loss_val = evaluate(&problem.loss, residual)?;
    let reg_val = evaluate(&problem.reg, &solution)?;
    let objective = loss_val + problem.lambda * reg_val;
    let chosen_rank = coeffs.iter().filter(|x| **x != 0.0).count();
    let certificate = format!(
        "{note}; pair (loss {}, reg {}), lambda {}; {} of {} directions survive; \
         loss {loss_val:.6e} + lambda * reg {reg_val:.6e}",
        problem.loss,
        problem.reg,
        problem.lambda,
        chosen_rank,
        coeffs.len()
    );
    Ok(SolveReport { solution, objective, unique, chosen_rank, certificate })
}
