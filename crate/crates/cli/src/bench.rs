//! The `bench` subcommand: sweep clustering methods over corruption levels
//! and shrinkage weights, then write two tidy CSVs.
//!
//! `results.csv` holds one row per (method, p, lambda, trial) cell with the
//! trial's accuracy. `plot.csv` reduces that to one row per (method, p):
//! accuracies are averaged over trials at each lambda first, and the lambda
//! with the best mean is reported next to its mean. Cells run on a rayon
//! pool, but rows are emitted in a fixed sort order and timing goes to
//! stderr only, so the CSV bytes depend on nothing but the config.
//!
//! Config files are sectioned `key = value` text. `#` starts a comment,
//! blank lines are skipped, and every diagnostic carries its 1-based line
//! number:
//!
//! ```text
//! [synth]
//! subspaces = 5
//! dim = 10
//! ambient = 100
//! points = 40
//! noise_scale = 0.3
//!
//! [sweep]
//! methods = sim, dssim, cssim, ssim
//! p_grid = 0.0, 0.5, 1.0
//! lambda_grid = 0.01, 0.1, 1.0
//! trials = 10
//! seed = 0
//! ```
//!
//! The sweep owns the corruption fraction and the dataset seeds, so the
//! `[synth]` section rejects `corrupted` and `seed` keys. Trial `t` at
//! corruption index `i` uses dataset seed `seed + 1000 * i + t` and k-means
//! seed `kmeans_seed + t`, which keeps every method looking at the same
//! datasets.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;
use rayon::prelude::*;

use lrsc_core::clustering::{self, Dataset, Method};
use lrsc_core::datagen::{self, SynthConfig};
use lrsc_core::{Error, Result};

#[derive(Args)]
pub struct BenchArgs {
    /// Experiment description file (sectioned key = value text).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory receiving results.csv and plot.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// A parsed experiment: the generator template plus the sweep axes.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    pub methods: Vec<Method>,
    pub p_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub clusters: Option<usize>,
    pub kmeans_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            methods: Method::ALL.to_vec(),
            p_grid: vec![0.0],
            lambda_grid: (-4..=4).map(|e| 10f64.powi(e)).collect(),
            trials: 10,
            seed: 0,
            clusters: None,
            kmeans_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if self.methods.is_empty() || self.p_grid.is_empty() || self.lambda_grid.is_empty() {
            return Err(Error::InvalidConfig(
                "methods, p_grid, and lambda_grid must all be non-empty".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        for &p in &self.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "corruption fractions must lie in [0, 1], got {p}"
                )));
            }
        }
        for &l in &self.lambda_grid {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "lambda grid entries must be non-negative, got {l}"
                )));
            }
        }
        if self.clusters == Some(0) {
            return Err(Error::InvalidConfig("clusters must be at least 1".into()));
        }
        Ok(())
    }

    fn cluster_count(&self) -> usize {
        self.clusters.unwrap_or(self.synth.n_subspaces)
    }

    fn dataset_seed(&self, p_index: usize, trial: usize) -> u64 {
        self.seed + 1000 * p_index as u64 + trial as u64
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad value for `{key}`: `{}`", raw.trim())))
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|piece| parse_num(line, key, piece)).collect()
}

/// Parses the sectioned config text. Unknown sections and keys are errors,
/// not warnings, so a typo cannot silently fall back to a default.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Synth,
        Sweep,
    }
    let mut config = ExperimentConfig::default();
    let mut section = Section::None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, "unterminated section header"))?
                .trim();
            section = match name {
                "synth" => Section::Synth,
                "sweep" => Section::Sweep,
                other => return Err(parse_err(line, format!("unknown section `[{other}]`"))),
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        match section {
            Section::None => {
                return Err(parse_err(line, "key before any [synth] or [sweep] section"))
            }
            Section::Synth => match key {
                "subspaces" => config.synth.n_subspaces = parse_num(line, key, value)?,
                "dim" => config.synth.dim = parse_num(line, key, value)?,
                "ambient" => config.synth.ambient = parse_num(line, key, value)?,
                "points" | "points_per_subspace" => {
                    config.synth.points_per_subspace = parse_num(line, key, value)?
                }
                "noise_scale" => config.synth.noise_scale = parse_num(line, key, value)?,
                "calibrate_noise" => config.synth.calibrate_noise = parse_num(line, key, value)?,
                "corrupted" | "seed" => {
                    return Err(parse_err(
                        line,
                        format!("`{key}` is owned by the sweep; set it under [sweep]"),
                    ))
                }
                other => return Err(parse_err(line, format!("unknown [synth] key `{other}`"))),
            },
            Section::Sweep => match key {
                "methods" => {
                    config.methods = value
                        .split(',')
                        .map(|m| m.trim().parse::<Method>())
                        .collect::<Result<_>>()
                        .map_err(|e| parse_err(line, e.to_string()))?
                }
                "p_grid" => config.p_grid = parse_list(line, key, value)?,
                "lambda_grid" => config.lambda_grid = parse_list(line, key, value)?,
                "trials" => config.trials = parse_num(line, key, value)?,
                "seed" => config.seed = parse_num(line, key, value)?,
                "clusters" => config.clusters = Some(parse_num(line, key, value)?),
                "kmeans_seed" => config.kmeans_seed = parse_num(line, key, value)?,
                other => return Err(parse_err(line, format!("unknown [sweep] key `{other}`"))),
            },
        }
    }
    config.validate()?;
    Ok(config)
}

/// One sweep cell: indices into the config's axes. `lambda_index` is `None`
/// for methods that ignore lambda, which get a single cell per (p, trial).
#[derive(Debug, Clone, Copy)]
struct Job {
    method_index: usize,
    p_index: usize,
    lambda_index: Option<usize>,
    trial: usize,
}

#[derive(Debug, Clone)]
struct Row {
    job: Job,
    seed: u64,
    accuracy: f64,
    reconstruction_time: Duration,
}

fn run_cell(config: &ExperimentConfig, datasets: &[Dataset], job: Job) -> Result<Row> {
    let method = config.methods[job.method_index];
    let lambda = job.lambda_index.map_or(0.0, |li| config.lambda_grid[li]);
    let data = &datasets[job.p_index * config.trials + job.trial];

    let started = Instant::now();
    let (z, _) = clustering::reconstruction(&data.points, method, lambda)?;
    let reconstruction_time = started.elapsed();

    let w = clustering::affinity(&z)?;
    let kmeans_seed = config.kmeans_seed + job.trial as u64;
    let (labels, _) = clustering::spectral_cluster(&w, config.cluster_count(), kmeans_seed)?;
    let accuracy = clustering::accuracy(&labels, &data.labels)?;
    Ok(Row {
        job,
        seed: config.dataset_seed(job.p_index, job.trial),
        accuracy,
        reconstruction_time,
    })
}

/// Runs every cell and returns rows sorted by (method, p, lambda, trial)
/// in config order, plus per-method reconstruction time totals.
fn sweep_rows(config: &ExperimentConfig) -> Result<(Vec<Row>, Vec<Duration>)> {
    config.validate()?;

    // Every (p, trial) pair gets one dataset shared across methods and
    // lambdas; generation is seeded per pair, so parallel order is moot.
    let pairs: Vec<(usize, usize)> = (0..config.p_grid.len())
        .flat_map(|pi| (0..config.trials).map(move |t| (pi, t)))
        .collect();
    let datasets: Vec<Dataset> = pairs
        .par_iter()
        .map(|&(pi, trial)| {
            let mut synth = config.synth.clone();
            synth.corrupted_fraction = config.p_grid[pi];
            synth.seed = config.dataset_seed(pi, trial);
            datagen::generate(&synth)
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for mi in 0..config.methods.len() {
        let lambda_slots: Vec<Option<usize>> = if config.methods[mi].uses_lambda() {
            (0..config.lambda_grid.len()).map(Some).collect()
        } else {
            vec![None]
        };
        for pi in 0..config.p_grid.len() {
            for &li in &lambda_slots {
                for trial in 0..config.trials {
                    jobs.push(Job { method_index: mi, p_index: pi, lambda_index: li, trial });
                }
            }
        }
    }

    let mut rows = jobs
        .par_iter()
        .map(|&job| run_cell(config, &datasets, job))
        .collect::<Result<Vec<Row>>>()?;
    rows.sort_by_key(|r| {
        (r.job.method_index, r.job.p_index, r.job.lambda_index.unwrap_or(0), r.job.trial)
    });

    let mut recon_totals = vec![Duration::ZERO; config.methods.len()];
    for row in &rows {
        recon_totals[row.job.method_index] += row.reconstruction_time;
    }
    Ok((rows, recon_totals))
}

fn results_csv(config: &ExperimentConfig, rows: &[Row]) -> String {
    let mut out = String::from("method,p,lambda,trial,seed,accuracy\n");
    for r in rows {
        let lambda = r.job.lambda_index.map_or(0.0, |li| config.lambda_grid[li]);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            config.methods[r.job.method_index],
            config.p_grid[r.job.p_index],
            lambda,
            r.job.trial,
            r.seed,
            r.accuracy
        );
    }
    out
}

/// Collapses trials: mean accuracy per lambda first, then the best lambda
/// per (method, p). Ties keep the earliest lambda in grid order.
fn plot_csv(config: &ExperimentConfig, rows: &[Row]) -> String {
    let mut out = String::from("method,p,mean_accuracy,best_lambda\n");
    for mi in 0..config.methods.len() {
        for pi in 0..config.p_grid.len() {
            let slots: Vec<Option<usize>> = if config.methods[mi].uses_lambda() {
                (0..config.lambda_grid.len()).map(Some).collect()
            } else {
                vec![None]
            };
            let mut best_mean = f64::NEG_INFINITY;
            let mut best_lambda = 0.0;
            for li in slots {
                let cell: Vec<f64> = rows
                    .iter()
                    .filter(|r| {
                        r.job.method_index == mi
                            && r.job.p_index == pi
                            && r.job.lambda_index == li
                    })
                    .map(|r| r.accuracy)
                    .collect();
                let mean = cell.iter().sum::<f64>() / cell.len() as f64;
                if mean > best_mean {
                    best_mean = mean;
                    best_lambda = li.map_or(0.0, |i| config.lambda_grid[i]);
                }
            }
            let _ = writeln!(
                out,
                "{},{},{:.6},{}",
                config.methods[mi], config.p_grid[pi], best_mean, best_lambda
            );
        }
    }
    out
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let config = parse_config(&text)?;
    let started = Instant::now();
    let (rows, recon_totals) = sweep_rows(&config)?;

    fs::create_dir_all(&args.out_dir)?;
    let results_path = args.out_dir.join("results.csv");
    let plot_path = args.out_dir.join("plot.csv");
    fs::write(&results_path, results_csv(&config, &rows))?;
    fs::write(&plot_path, plot_csv(&config, &rows))?;

    // Timing is informational and excludes spectral clustering and the
    // lambda selection; it stays on stderr so the CSVs are reproducible.
    for (mi, total) in recon_totals.iter().enumerate() {
        let cells = rows.iter().filter(|r| r.job.method_index == mi).count();
        eprintln!(
            "{}: reconstruction {:.1} ms total over {} cells",
            config.methods[mi],
            total.as_secs_f64() * 1e3,
            cells
        );
    }
    eprintln!(
        "sweep finished in {:.1} s; wrote {} and {}",
        started.elapsed().as_secs_f64(),
        results_path.display(),
        plot_path.display()
    );
    Ok(())
}
