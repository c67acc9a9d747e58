//! Command-line front end: estimate tail indices from data files, run
//! single hypothesis tests, replicate the built-in experiment tables,
//! and generate reproducible Pareto samples.
//!
//! Exit codes: 0 success, 2 usage, 3 data format, 4 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use tailix::baselines::{hill, moment, qq, t_hill, t_lg_hill, TailFraction};
use tailix::distributions::{sample_pareto, ParetoLaw, SeedSpec};
use tailix::experiments::{emit_table, preset, run_preset, Preset, TableFormat};
use tailix::inference::{
    baseline_test_stat, boundary_test_stat, decide, truncated_test_stat, EstimatorId, Hypothesis,
};
use tailix::truncated::{
    estimate, theorem_admissible, Branch, SolverConfig, TruncationSchedule,
};
use tailix::{Sample, TailixError};

#[derive(Parser)]
#[command(name = "tailix", version, about = "Tail-index estimation for heavy-tailed data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    /// Fixed-point solver on (0, 1)
    Lower,
    /// Fixed-point solver on (1, 2)
    Upper,
    /// Closed-form estimator targeting alpha = 1
    Boundary1,
    /// Closed-form estimator targeting alpha = 2
    Boundary2,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Branch {
        match b {
            BranchArg::Lower => Branch::Lower,
            BranchArg::Upper => Branch::Upper,
            BranchArg::Boundary1 => Branch::BoundaryOne,
            BranchArg::Boundary2 => Branch::BoundaryTwo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail index from a file of observations (one per line)
    Estimate {
        /// Input file: one nonnegative number per line, `#` comments ignored
        input: PathBuf,
        /// Truncation exponent: the level is b_n = n^q
        #[arg(long)]
        q: f64,
        /// Force a solver branch instead of the automatic pilot rule
        #[arg(long)]
        branch: Option<BranchArg>,
        /// Successive-iterate tolerance
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Iteration cap
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Pilot size for the automatic branch rule
        #[arg(long, default_value_t = 50)]
        n0: usize,
    },
    /// Test H0: alpha = alpha0 against the two-sided alternative
    Test {
        input: PathBuf,
        /// Hypothesized tail index in (0, 2]
        #[arg(long)]
        alpha0: f64,
        /// Truncation exponent for the truncated estimator
        #[arg(long)]
        q: f64,
        /// Which estimator's rejection region to use
        #[arg(long, default_value = "truncated")]
        estimator: String,
        /// Upper order statistics for the baselines
        /// (default: sqrt(n) rounded; n/2 for tlghill)
        #[arg(long)]
        m: Option<usize>,
        /// Critical value
        #[arg(long, default_value_t = 1.96)]
        z: f64,
    },
    /// Run a built-in experiment preset and write its tables
    Replicate {
        /// One of table1..table6
        preset: String,
        /// Override the Monte Carlo repetition count
        #[arg(long)]
        reps: Option<usize>,
        /// Base seed for the experiment's substreams
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Format echoed to stdout (CSV and JSON files are always written)
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Generate a reproducible Pareto sample file
    Sample {
        /// Tail index in (0, 2]
        #[arg(long)]
        alpha: f64,
        /// Number of observations
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Substream index
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<TailixError> for CliError {
    fn from(e: TailixError) -> Self {
        match e {
            TailixError::UnknownPreset(_) | TailixError::UnknownFormat(_) => {
                CliError::Usage(e.to_string())
            }
            TailixError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            TailixError::EmptySample | TailixError::InsufficientData { .. } => {
                CliError::Data(e.to_string())
            }
            TailixError::DegenerateTail(_) | TailixError::Numerical(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

/// Reads one observation per line; blank lines and lines starting with
/// `#` are skipped. Malformed or negative entries report their line.
fn read_observations(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{line_no}: cannot parse `{trimmed}` as a number",
                path.display()
            ))
        })?;
        if !v.is_finite() {
            return Err(CliError::Data(format!(
                "{}:{line_no}: observation is not finite",
                path.display()
            )));
        }
        if v < 0.0 {
            return Err(CliError::Data(format!(
                "{}:{line_no}: negative observation {v}; only nonnegative data are supported",
                path.display()
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no observations found",
            path.display()
        )));
    }
    Ok(values)
}

fn load_sample(path: &Path) -> Result<Sample, CliError> {
    Sample::new(read_observations(path)?).map_err(|e| CliError::Data(e.to_string()))
}

fn cmd_estimate(
    input: &Path,
    q: f64,
    branch: Option<BranchArg>,
    epsilon: f64,
    max_iter: usize,
    n0: usize,
) -> Result<(), CliError> {
    let sample = load_sample(input)?;
    let sched = TruncationSchedule::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = SolverConfig {
        epsilon,
        max_iter,
        n0,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = estimate(&sample, &sched, &cfg, branch.map(Branch::from))?;

    let b_n = sched.level(sample.len())?;
    if matches!(outcome.branch, Branch::Lower | Branch::Upper)
        && !theorem_admissible(outcome.alpha_hat, sample.len(), b_n, 0.0)
    {
        eprintln!(
            "warning: b_n^alpha ln b_n exceeds alpha n / ln n at the estimate; \
             convergence guarantees are asymptotic only"
        );
    }

    println!("alpha_hat = {:.6}", outcome.alpha_hat);
    println!("branch = {}", outcome.branch);
    println!("iterations = {}", outcome.iterations);
    println!("converged = {}", outcome.converged);
    if !outcome.converged {
        return Err(CliError::Numerical(
            "solver did not converge within the iteration cap".into(),
        ));
    }
    Ok(())
}

fn cmd_test(
    input: &Path,
    alpha0: f64,
    q: f64,
    estimator: &str,
    m_override: Option<usize>,
    z: f64,
) -> Result<(), CliError> {
    let id: EstimatorId = estimator
        .parse()
        .map_err(|e: TailixError| CliError::Usage(e.to_string()))?;
    let hyp = Hypothesis::new(alpha0)
        .and_then(|h| h.with_critical_value(z))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let sample = load_sample(input)?;
    let n = sample.len();
    let sched = TruncationSchedule::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
    let b_n = sched.level(n)?;

    let (alpha_hat, statistic) = match id {
        EstimatorId::Truncated => {
            // the estimator regime follows the hypothesis: solver branch
            // inside (0,1)/(1,2), closed-form boundary at exactly 1 or 2
            let branch = if alpha0 < 1.0 {
                Branch::Lower
            } else if alpha0 == 1.0 {
                Branch::BoundaryOne
            } else if alpha0 < 2.0 {
                Branch::Upper
            } else {
                Branch::BoundaryTwo
            };
            let outcome = estimate(&sample, &sched, &SolverConfig::default(), Some(branch))?;
            if !outcome.converged {
                return Err(CliError::Numerical(
                    "solver did not converge within the iteration cap".into(),
                ));
            }
            let stat = match branch {
                Branch::BoundaryOne | Branch::BoundaryTwo => {
                    if !tailix::inference::boundary_admissible(branch, n, b_n, 0.0) {
                        eprintln!(
                            "warning: truncation level violates the boundary-law growth \
                             condition; the test is asymptotic only"
                        );
                    }
                    boundary_test_stat(outcome.alpha_hat, branch, n, b_n)?
                }
                _ => truncated_test_stat(outcome.alpha_hat, &hyp, n, b_n)?,
            };
            (outcome.alpha_hat, stat)
        }
        _ => {
            let m = m_override.unwrap_or_else(|| {
                if id == EstimatorId::TLgHill {
                    n / 2
                } else {
                    (n as f64).sqrt().round() as usize
                }
            });
            let m = TailFraction::new(m).map_err(|e| CliError::Usage(e.to_string()))?;
            let view = sample.order_stats();
            let alpha_hat = match id {
                EstimatorId::Hill => hill(&view, m)?,
                EstimatorId::Qq => qq(&view, m)?,
                EstimatorId::Moment => moment(&view, m)?,
                EstimatorId::THill => t_hill(&view, m)?,
                EstimatorId::TLgHill => t_lg_hill(&view, m)?,
                EstimatorId::Truncated => unreachable!(),
            };
            let stat = baseline_test_stat(id, alpha_hat, &hyp, m.m())?;
            (alpha_hat, stat)
        }
    };

    let decision = decide(statistic, &hyp, id)?;
    println!("estimator = {id}");
    println!("alpha_hat = {alpha_hat:.6}");
    println!("statistic = {statistic:.6}");
    println!("threshold = {:.6}", decision.threshold);
    println!(
        "decision = {}",
        if decision.reject { "reject" } else { "accept" }
    );
    Ok(())
}

/// Everything needed to reproduce and audit one replicate run.
#[derive(Serialize)]
struct RunManifest {
    preset: Preset,
    /// SHA-256 of the resolved configuration JSON.
    config_sha256: String,
    outputs: Vec<String>,
    duration_ms: u128,
}

fn cmd_replicate(
    name: &str,
    reps: Option<usize>,
    seed: u64,
    out_dir: &Path,
    format: FormatArg,
) -> Result<(), CliError> {
    let started = Instant::now();
    let mut preset = preset(name, seed)?;
    if let Some(reps) = reps {
        preset.config.reps = reps;
    }
    preset
        .config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for w in preset.config.warnings() {
        eprintln!("warning: {w}");
    }

    let table = run_preset(&preset)?;
    let csv = emit_table(&table, TableFormat::Csv)?;
    let json = emit_table(&table, TableFormat::Json)?;

    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("{name}.csv"));
    let json_path = out_dir.join(format!("{name}.json"));
    let manifest_path = out_dir.join(format!("{name}_manifest.json"));
    fs::write(&csv_path, &csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", csv_path.display())))?;
    fs::write(&json_path, &json)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", json_path.display())))?;

    let config_json = serde_json::to_string(&preset)
        .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
    let manifest = RunManifest {
        config_sha256: hex::encode(Sha256::digest(config_json.as_bytes())),
        outputs: vec![
            csv_path.display().to_string(),
            json_path.display().to_string(),
        ],
        duration_ms: started.elapsed().as_millis(),
        preset,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
    fs::write(&manifest_path, manifest_json)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", manifest_path.display())))?;

    match format {
        FormatArg::Csv => print!("{csv}"),
        FormatArg::Json => println!("{json}"),
    }
    eprintln!(
        "wrote {}, {}, {}",
        csv_path.display(),
        json_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn cmd_sample(
    alpha: f64,
    n: usize,
    seed: u64,
    trial: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let law = ParetoLaw::new(alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let sample = sample_pareto(law, n, SeedSpec::new(seed, trial))?;
    let mut body = String::with_capacity(n * 20);
    for v in sample.values() {
        body.push_str(&format!("{v}\n"));
    }
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => {
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn configure_thread_pool() {
    if let Ok(raw) = std::env::var("TAILIX_THREADS") {
        match raw.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid TAILIX_THREADS value `{raw}`"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate {
            input,
            q,
            branch,
            epsilon,
            max_iter,
            n0,
        } => cmd_estimate(&input, q, branch, epsilon, max_iter, n0),
        Command::Test {
            input,
            alpha0,
            q,
            estimator,
            m,
            z,
        } => cmd_test(&input, alpha0, q, &estimator, m, z),
        Command::Replicate {
            preset,
            reps,
            seed,
            out,
            format,
        } => cmd_replicate(&preset, reps, seed, &out, format),
        Command::Sample {
            alpha,
            n,
            seed,
            trial,
            out,
        } => cmd_sample(alpha, n, seed, trial, out.as_deref()),
    }
}

fn main() {
    configure_thread_pool();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
