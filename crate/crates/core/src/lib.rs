//! Closed-form solvers for low-rank approximation problems and the subspace
//! clustering methods built on top of them.
//!
//! The crate is organized as a stack:
//!
//! * [`linalg`]: rank-revealing thin SVD, truncation, pseudoinverse,
//!   projectors. All conventions (descending singular values, rank and gap
//!   tolerances) live here.
//! * [`norms`]: the unitarily invariant norm family used for objectives,
//!   evaluated from singular value profiles, plus the partial-sum dominance
//!   test that certifies optimality across the whole family at once.
//! * [`eym`]: truncation-based minimizers for `||A - B X C||` and friends,
//!   with assumption checks, uniqueness reports, and rank-penalized variants.
//! * [`prox`]: regularized problems `loss(A - X) + lambda * reg(X)` whose
//!   minimizers reduce to per-singular-value shrinkage rules.
//! * [`clustering`]: the shrinkage rules specialized to self-expressive
//!   representations, affinity construction, spectral clustering, and the
//!   evaluation pipeline.
//! * [`datagen`]: synthetic union-of-subspaces datasets and the text formats
//!   used to exchange matrices with the CLI.
//! * [`oracle`]: brute-force grid minimizers and randomized falsification
//!   used to cross-check every closed form independently.

pub mod clustering;
pub mod datagen;
pub mod error;
pub mod eym;
pub mod linalg;
pub mod norms;
pub mod oracle;
pub mod prox;

pub use error::{Error, Result};
pub use linalg::{Matrix, SvdFactors, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};
pub use norms::{KpDepth, NormSpec, PNorm, SingularProfile};
