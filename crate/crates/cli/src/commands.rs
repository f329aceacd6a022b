//! The `synth`, `solve`, and `cluster` subcommands. Each prints a single
//! JSON document on stdout; matrices travel as whitespace-separated text
//! files in the `datagen` format.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde_json::json;

use lrsc_core::clustering::{self, Method};
use lrsc_core::datagen::{self, SynthConfig};
use lrsc_core::eym::{self, RankRegMode, SolveReport};
use lrsc_core::prox::{self, RegularizedProblem, Structure};
use lrsc_core::{Error, Matrix, NormSpec, Result};

#[derive(Args)]
pub struct SynthArgs {
    /// Number of subspaces.
    #[arg(long, default_value_t = 5)]
    pub subspaces: usize,
    /// Dimension of each subspace.
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Ambient dimension.
    #[arg(long, default_value_t = 100)]
    pub ambient: usize,
    /// Points per subspace.
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    /// Fraction of points that receive additive noise, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub corrupted: f64,
    /// Noise size relative to each point's length.
    #[arg(long, default_value_t = 0.3)]
    pub noise_scale: f64,
    /// Use the raw per-entry noise std instead of the calibrated one.
    #[arg(long)]
    pub raw_noise: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the points matrix; labels go to `<out>.labels`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let config = SynthConfig {
        n_subspaces: args.subspaces,
        dim: args.dim,
        ambient: args.ambient,
        points_per_subspace: args.points,
        corrupted_fraction: args.corrupted,
        noise_scale: args.noise_scale,
        calibrate_noise: !args.raw_noise,
        seed: args.seed,
    };
    let data = datagen::generate(&config)?;
    datagen::save_dataset(&args.out, &data)?;
    let labels_path = format!("{}.labels", args.out.display());
    let summary = json!({
        "points": args.out.display().to_string(),
        "labels": labels_path,
        "ambient_dim": data.ambient_dim(),
        "n_points": data.n_points(),
        "subspaces": args.subspaces,
        "subspace_dim": args.dim,
        "corrupted_fraction": args.corrupted,
        "noise_scale": args.noise_scale,
        "seed": args.seed,
    });
    println!("{}", pretty(&summary));
    Ok(())
}

/// `json!` documents have string keys and plain values, so serialization
/// cannot fail.
fn pretty(doc: &serde_json::Value) -> String {
    serde_json::to_string_pretty(doc).expect("json document serializes")
}

/// Selects which closed form `solve` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    /// Best rank-k approximation of A.
    Eym,
    /// Frobenius-optimal X for ||A - B X C|| at rank k.
    GenEym,
    /// Rank-k solve valid under every unitarily invariant norm; requires
    /// the two-sided alignment assumption and exits 2 when it fails.
    EymSb,
    /// Rank-k solve for the middle-factor problem ||B A C - B X C||.
    Bac,
    /// Frobenius residual plus lambda times rank, rank chosen in closed form.
    RankReg,
    /// Rank of the middle-factor residual plus lambda times reg(X).
    RankPlusReg,
    /// Minimum-norm exact solution of A = B X C; exits 3 when infeasible.
    MinNorm,
    /// Singular value thresholding: fro2 loss with a trace norm penalty.
    Svt,
    /// Spectral shrinkage for a chosen loss/reg pair and structure; exits 4
    /// on pairs with no closed form.
    SdReg,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub solver: Solver,
    /// Target matrix file.
    #[arg(long)]
    pub a: PathBuf,
    /// Left factor file, required by the three-factor solvers.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Right factor file, required by the three-factor solvers.
    #[arg(long)]
    pub c: Option<PathBuf>,
    /// Rank budget for the truncating solvers.
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Penalty weight for the regularized solvers.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Loss term for sd-reg: fro2 or trace.
    #[arg(long)]
    pub loss: Option<String>,
    /// Regularizer for sd-reg and rank-plus-reg, e.g. trace, fro2, spec.
    #[arg(long)]
    pub reg: Option<String>,
    /// Problem structure for sd-reg: plain, self, or general.
    #[arg(long)]
    pub structure: Option<String>,
    /// Guarantee mode for rank-reg: fro or require-sb.
    #[arg(long)]
    pub mode: Option<String>,
    /// Feasibility tolerance for min-norm.
    #[arg(long, default_value_t = 1e-8)]
    pub feas_tol: f64,
    /// Write the solution matrix to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include the solution entries in the JSON report.
    #[arg(long)]
    pub print_solution: bool,
}

fn need_k(args: &SolveArgs) -> Result<usize> {
    args.k
        .ok_or_else(|| Error::InvalidConfig("this solver needs a rank budget, pass --k".into()))
}

fn need_lambda(args: &SolveArgs) -> Result<f64> {
    args.lambda
        .ok_or_else(|| Error::InvalidConfig("this solver needs a penalty weight, pass --lambda".into()))
}

fn load(path: &Path) -> Result<Matrix> {
    datagen::load_matrix(path)
}

fn need_factor(path: &Option<PathBuf>, name: &str) -> Result<Matrix> {
    match path {
        Some(p) => load(p),
        None => Err(Error::InvalidConfig(format!(
            "this solver needs the {name} factor, pass --{name}"
        ))),
    }
}

fn parse_norm(raw: &Option<String>, default: NormSpec) -> Result<NormSpec> {
    match raw {
        Some(s) => NormSpec::from_str(s),
        None => Ok(default),
    }
}

fn parse_mode(raw: &Option<String>) -> Result<RankRegMode> {
    match raw.as_deref().map(str::trim) {
        None | Some("fro") | Some("frobenius") => Ok(RankRegMode::Frobenius),
        Some("require-sb") | Some("sb") => Ok(RankRegMode::RequireSb),
        Some(other) => Err(Error::InvalidConfig(format!(
            "unknown mode `{other}` (expected fro|require-sb)"
        ))),
    }
}

pub fn run_solve(args: &SolveArgs) -> Result<()> {
    let a = load(&args.a)?;
    let report = match args.solver {
        Solver::Eym => eym::eym(&a, need_k(args)?)?,
        Solver::GenEym => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            eym::gen_eym_frobenius(&a, &b, &c, need_k(args)?)?
        }
        Solver::EymSb => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            eym::eym_sb(&a, &b, &c, need_k(args)?, &eym::default_panel())?
        }
        Solver::Bac => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            eym::eym_bac(&a, &b, &c, need_k(args)?)?
        }
        Solver::RankReg => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            eym::rank_regularized(&a, &b, &c, need_lambda(args)?, parse_mode(&args.mode)?)?
        }
        Solver::RankPlusReg => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            let reg = parse_norm(&args.reg, NormSpec::trace())?;
            eym::rank_plus_reg(&a, &b, &c, need_lambda(args)?, &reg)?
        }
        Solver::MinNorm => {
            let b = need_factor(&args.b, "b")?;
            let c = need_factor(&args.c, "c")?;
            eym::min_norm_exact(&a, &b, &c, args.feas_tol)?
        }
        Solver::Svt => {
            let problem = RegularizedProblem::new(
                NormSpec::SquaredFrobenius,
                NormSpec::trace(),
                need_lambda(args)?,
                Structure::Plain,
            )?;
            prox::solve_sd(&a, None, None, &problem)?
        }
        Solver::SdReg => {
            let loss = parse_norm(&args.loss, NormSpec::SquaredFrobenius)?;
            let reg = parse_norm(&args.reg, NormSpec::trace())?;
            let structure = match &args.structure {
                Some(s) => Structure::from_str(s)?,
                None => Structure::Plain,
            };
            let problem = RegularizedProblem::new(loss, reg, need_lambda(args)?, structure)?;
            let b = args.b.as_deref().map(load).transpose()?;
            let c = args.c.as_deref().map(load).transpose()?;
            prox::solve_sd(&a, b.as_ref(), c.as_ref(), &problem)?
        }
    };
    if let Some(out) = &args.out {
        datagen::save_matrix(out, &report.solution)?;
    }
    print_report(args, &report)?;
    Ok(())
}

fn print_report(args: &SolveArgs, report: &SolveReport) -> Result<()> {
    let mut doc = json!({
        "solver": format!("{:?}", args.solver).to_lowercase(),
        "rows": report.solution.nrows(),
        "cols": report.solution.ncols(),
        "objective": report.objective,
        "unique": report.unique,
        "chosen_rank": report.chosen_rank,
        "certificate": report.certificate,
    });
    if args.print_solution {
        doc["solution"] = json!(matrix_rows(&report.solution));
    }
    if let Some(out) = &args.out {
        doc["written"] = json!(out.display().to_string());
    }
    println!("{}", pretty(&doc));
    Ok(())
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Points matrix file, one ambient row per line.
    #[arg(long)]
    pub points: PathBuf,
    /// Ground-truth labels file; defaults to the `.labels` sidecar when it
    /// exists, otherwise the run is unlabeled and accuracy is omitted.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Representation: sim, dssim, cssim, or ssim.
    #[arg(long)]
    pub method: String,
    /// Shrinkage weight; ignored by sim.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Number of clusters; defaults to the number of distinct labels.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Seed for the k-means initialization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the predicted labels to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_cluster(args: &ClusterArgs) -> Result<()> {
    let data = datagen::load_dataset(&args.points, args.labels.as_deref())?;
    let method = Method::from_str(&args.method)?;
    let k = match args.clusters {
        Some(k) => k,
        None => {
            let k = data.n_clusters();
            if k == 0 {
                return Err(Error::InvalidConfig(
                    "no labels available to infer the cluster count, pass --clusters".into(),
                ));
            }
            k
        }
    };
    let result = clustering::run_pipeline(&data, method, args.lambda, k, args.seed)?;
    if let Some(out) = &args.out {
        datagen::save_labels(out, &result.labels)?;
    }
    let doc = json!({
        "method": method.to_string(),
        "lambda": args.lambda,
        "clusters": k,
        "seed": args.seed,
        "n_points": data.n_points(),
        "accuracy": result.accuracy,
        "chosen_rank": result.chosen_rank,
        "degenerate": result.degenerate,
        "labels": result.labels,
    });
    println!("{}", pretty(&doc));
    Ok(())
}
