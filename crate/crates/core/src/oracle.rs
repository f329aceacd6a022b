//! Brute-force minimizers used to cross-check the closed-form solvers.
//!
//! These deliberately share no machinery with the solvers they audit: a grid
//! scan plus local refinement for one- and two-parameter problems, and seeded
//! random sampling that hunts for a feasible point beating a claimed optimum.
//! They ship in the library (not behind `cfg(test)`) so the CLI can re-run
//! every check in a released binary.

use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::error::{Error, Result};

/// A 1-D scan range with optional local refinement. Each refinement round
/// re-scans a window of one old step around the incumbent with a 10x finer
/// step, so the final resolution is `step / 10^refine_rounds`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub refine_rounds: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "grid range must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(step.is_finite() && step > 0.0 && step <= hi - lo) {
            return Err(Error::InvalidConfig(format!(
                "grid step must lie in (0, hi - lo], got {step}"
            )));
        }
        Ok(Self { lo, hi, step, refine_rounds: 0 })
    }

    pub fn with_refine(mut self, rounds: usize) -> Self {
        self.refine_rounds = rounds;
        self
    }
}

impl Default for GridSpec {
    /// The scan used throughout the test suite: `[-5, 5]` at step `1e-3`
    /// with two refinement rounds.
    fn default() -> Self {
        Self { lo: -5.0, hi: 5.0, step: 1e-3, refine_rounds: 2 }
    }
}

fn scan_1d<F: FnMut(f64) -> f64>(lo: f64, hi: f64, step: f64, f: &mut F) -> (f64, f64) {
    let mut best_x = lo;
    let mut best_v = f(lo);
    let mut i: u64 = 1;
    loop {
        let x = lo + (i as f64) * step;
        if x > hi + 0.5 * step {
            break;
        }
        let x = x.min(hi);
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
        i += 1;
    }
    (best_x, best_v)
}

/// Scans `f` over the grid and returns `(argmin, min)`. Ties keep the
/// smallest argument, so reruns are deterministic.
pub fn grid_minimize<F: FnMut(f64) -> f64>(mut f: F, spec: &GridSpec) -> (f64, f64) {
    let (mut x, mut v) = scan_1d(spec.lo, spec.hi, spec.step, &mut f);
    let mut step = spec.step;
    for _ in 0..spec.refine_rounds {
        let lo = (x - step).max(spec.lo);
        let hi = (x + step).min(spec.hi);
        step /= 10.0;
        let (rx, rv) = scan_1d(lo, hi, step, &mut f);
        if rv < v {
            x = rx;
            v = rv;
        }
    }
    (x, v)
}

/// Product-grid variant of [`grid_minimize`] for two free parameters.
pub fn grid_minimize_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    spec: &GridSpec,
) -> ((f64, f64), f64) {
    let scan = |lo: (f64, f64), hi: (f64, f64), step: f64, f: &mut F| {
        let (mut bx, mut by, mut bv) = (lo.0, lo.1, f64::INFINITY);
        let mut i: u64 = 0;
        loop {
            let x = lo.0 + (i as f64) * step;
            if x > hi.0 + 0.5 * step {
                break;
            }
            let x = x.min(hi.0);
            let mut j: u64 = 0;
            loop {
                let y = lo.1 + (j as f64) * step;
                if y > hi.1 + 0.5 * step {
                    break;
                }
                let y = y.min(hi.1);
                let v = f(x, y);
                if v < bv {
                    bv = v;
                    bx = x;
                    by = y;
                }
                j += 1;
            }
            i += 1;
        }
        ((bx, by), bv)
    };

    let ((mut x, mut y), mut v) = scan((spec.lo, spec.lo), (spec.hi, spec.hi), spec.step, &mut f);
    let mut step = spec.step;
    for _ in 0..spec.refine_rounds {
        let lo = ((x - step).max(spec.lo), (y - step).max(spec.lo));
        let hi = ((x + step).min(spec.hi), (y + step).min(spec.hi));
        step /= 10.0;
        let (rxy, rv) = scan(lo, hi, step, &mut f);
        if rv < v {
            (x, y) = rxy;
            v = rv;
        }
    }
    ((x, y), v)
}

/// Tries `draws` seeded random feasible points against a claimed optimum.
/// `sample` maps the RNG to the objective value of one feasible draw.
/// Returns the first `(draw index, value)` that beats `claimed_min` by more
/// than `tol * (1 + |claimed_min|)`, or `None` when the claim survives.
pub fn sample_falsify<F>(
    draws: usize,
    seed: u64,
    tol: f64,
    claimed_min: f64,
    mut sample: F,
) -> Option<(usize, f64)>
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = tol * (1.0 + claimed_min.abs());
    for i in 0..draws {
        let v = sample(&mut rng);
        if v < claimed_min - slack {
            return Some((i, v));
        }
    }
    None
}
