//! Seeded Monte Carlo experiment engine.
//!
//! Three experiment families share one engine: estimation error (AE),
//! Type I error (AT), and power (AP). Each grid row fixes a tail index
//! and truncation exponent; trials within a row draw independent samples
//! from per-trial substreams derived from (base_seed, row, trial), so
//! results are bit-identical across runs and worker counts, and raising
//! the repetition count never changes earlier trials' draws.
//!
//! Trials where an estimator degenerates (ties, non-convergence) are
//! excluded from that estimator's column only, with exclusion counts
//! kept per row. Aggregation folds trial values in index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{hill, moment, qq, t_hill, t_lg_hill, TailFraction};
use crate::distributions::{sample_pareto, ParetoLaw, SeedSpec};
use crate::error::{Result, TailixError};
use crate::inference::{baseline_test_stat, decide, truncated_test_stat, EstimatorId, Hypothesis};
use crate::truncated::{
    boundary_lower, boundary_upper, default_start, solve_lower, solve_upper, truncated_mean,
    truncated_second_moment, Branch, SolverConfig, TruncationSchedule,
};

/// Which summary metric a table aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    /// Average estimation error: mean over rows of |estimate - alpha|.
    AverageError,
    /// Average Type I error: mean over rows of the rejection rate at the null.
    TypeOneError,
    /// Average power: mean over rows of the rejection rate off the null.
    AveragePower,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::AverageError => "AE",
            MetricKind::TypeOneError => "AT",
            MetricKind::AveragePower => "AP",
        }
    }
}

/// One experiment row: a true tail index and its truncation exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub q: f64,
    /// Solver starting point; the branch default applies when absent.
    pub start: Option<f64>,
}

impl GridRow {
    pub fn new(alpha: f64, q: f64) -> Self {
        Self {
            alpha,
            q,
            start: None,
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Per-trial sample size.
    pub n: usize,
    /// Monte Carlo repetitions per row.
    pub reps: usize,
    pub base_seed: u64,
    pub grid: Vec<GridRow>,
    /// Solver branch for the truncated estimator column.
    pub branch: Branch,
    /// Estimator columns in output order.
    pub estimators: Vec<EstimatorId>,
    /// Upper order statistics for Hill/QQ/Moment/t-Hill.
    pub m_tail: usize,
    /// Upper order statistics for t-lgHill.
    pub m_tlg: usize,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    /// Paper-protocol defaults: n = 10^4, N = 10^3 repetitions,
    /// m = sqrt(n) = 100 and m = n/2 = 5000, all six estimators.
    pub fn with_defaults(grid: Vec<GridRow>, branch: Branch, base_seed: u64) -> Self {
        Self {
            n: 10_000,
            reps: 1_000,
            base_seed,
            grid,
            branch,
            estimators: EstimatorId::ALL.to_vec(),
            m_tail: 100,
            m_tlg: 5_000,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(TailixError::invalid("reps", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(TailixError::invalid("n", "must be at least 2"));
        }
        if self.estimators.is_empty() {
            return Err(TailixError::invalid("estimators", "must name at least one"));
        }
        self.solver.validate()?;
        for row in &self.grid {
            if !(row.alpha > 0.0 && row.alpha <= 2.0) {
                return Err(TailixError::invalid(
                    "grid",
                    format!("row alpha {} outside (0, 2]", row.alpha),
                ));
            }
            TruncationSchedule::new(row.q)?;
        }
        Ok(())
    }

    /// Non-fatal protocol warnings: rows whose (alpha, q) leave the
    /// 0 < alpha*q < 1 band where the truncated moments concentrate.
    pub fn warnings(&self) -> Vec<String> {
        self.grid
            .iter()
            .filter(|row| row.alpha * row.q >= 1.0)
            .map(|row| {
                format!(
                    "row alpha={} q={}: alpha*q = {:.3} >= 1; truncated-moment \
                     concentration degrades in this regime",
                    row.alpha,
                    row.q,
                    row.alpha * row.q
                )
            })
            .collect()
    }
}

/// One output row: parameters, solver iteration count, and one value per
/// estimator (mean estimate or rejection rate), with exclusion counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub alpha: f64,
    pub q: f64,
    /// Rounded mean iteration count of the truncated solver.
    pub k: u32,
    pub values: Vec<Option<f64>>,
    pub exclusions: Vec<usize>,
}

/// Finished experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub kind: MetricKind,
    /// Hypothesized index for power tables.
    pub alpha0: Option<f64>,
    pub estimators: Vec<EstimatorId>,
    pub rows: Vec<MetricsRow>,
    /// Column aggregate (AE, AT, or AP) per estimator.
    pub aggregate: Vec<Option<f64>>,
}

/// Serialization formats for [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = TailixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(TailixError::UnknownFormat(other.into())),
        }
    }
}

/// Deterministic per-row seed: a splitmix-style mix of the base seed and
/// the row index. Trials within the row select ChaCha substreams, so the
/// triple (base_seed, row, trial) fully determines every draw.
fn derive_row_seed(base_seed: u64, row: u64) -> u64 {
    let mut z = base_seed ^ row.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream for one (row, trial) cell.
pub fn trial_seed(base_seed: u64, row: usize, trial: usize) -> SeedSpec {
    SeedSpec::new(derive_row_seed(base_seed, row as u64), trial as u64)
}

struct TrialOutput {
    /// One slot per configured estimator.
    values: Vec<Option<f64>>,
    iterations: Option<usize>,
}

fn truncated_outcome(
    cfg: &ExperimentConfig,
    row: &GridRow,
    b_n: f64,
    sample: &crate::sample::Sample,
) -> Result<crate::truncated::EstimatorOutcome> {
    let start = row.start.unwrap_or(default_start(cfg.branch));
    match cfg.branch {
        Branch::Lower => {
            let mu = truncated_mean(sample, b_n)?;
            solve_lower(mu, b_n, start, &cfg.solver)
        }
        Branch::Upper => {
            let nu2 = truncated_second_moment(sample, b_n)?;
            solve_upper(nu2, b_n, start, &cfg.solver)
        }
        Branch::BoundaryOne => {
            let mu = truncated_mean(sample, b_n)?;
            let alpha_hat = boundary_lower(mu, b_n)?;
            Ok(crate::truncated::EstimatorOutcome {
                alpha_hat,
                branch: Branch::BoundaryOne,
                iterations: 0,
                trace: vec![alpha_hat],
                converged: true,
            })
        }
        Branch::BoundaryTwo => {
            let nu2 = truncated_second_moment(sample, b_n)?;
            let alpha_hat = boundary_upper(nu2, b_n)?;
            Ok(crate::truncated::EstimatorOutcome {
                alpha_hat,
                branch: Branch::BoundaryTwo,
                iterations: 0,
                trace: vec![alpha_hat],
                converged: true,
            })
        }
    }
}

fn point_estimate(
    cfg: &ExperimentConfig,
    id: EstimatorId,
    sample: &crate::sample::Sample,
    outcome: &Option<crate::truncated::EstimatorOutcome>,
) -> Option<f64> {
    match id {
        EstimatorId::Truncated => outcome
            .as_ref()
            .filter(|o| o.converged)
            .map(|o| o.alpha_hat),
        EstimatorId::Hill => TailFraction::new(cfg.m_tail)
            .and_then(|m| hill(&sample.order_stats(), m))
            .ok(),
        EstimatorId::Qq => TailFraction::new(cfg.m_tail)
            .and_then(|m| qq(&sample.order_stats(), m))
            .ok(),
        EstimatorId::Moment => TailFraction::new(cfg.m_tail)
            .and_then(|m| moment(&sample.order_stats(), m))
            .ok(),
        EstimatorId::THill => TailFraction::new(cfg.m_tail)
            .and_then(|m| t_hill(&sample.order_stats(), m))
            .ok(),
        EstimatorId::TLgHill => TailFraction::new(cfg.m_tlg)
            .and_then(|m| t_lg_hill(&sample.order_stats(), m))
            .ok(),
    }
}

/// Rejection indicator (1.0 reject, 0.0 accept) for one estimator
/// against the hypothesis, or None when the estimate degenerated.
fn rejection_indicator(
    cfg: &ExperimentConfig,
    id: EstimatorId,
    estimate: Option<f64>,
    hyp: &Hypothesis,
    b_n: f64,
) -> Option<f64> {
    let alpha_hat = estimate?;
    let stat = match id {
        EstimatorId::Truncated => {
            if hyp.alpha0 == 1.0 {
                crate::inference::boundary_test_stat(alpha_hat, Branch::BoundaryOne, cfg.n, b_n)
            } else if hyp.alpha0 == 2.0 {
                crate::inference::boundary_test_stat(alpha_hat, Branch::BoundaryTwo, cfg.n, b_n)
            } else {
                truncated_test_stat(alpha_hat, hyp, cfg.n, b_n)
            }
        }
        EstimatorId::TLgHill => baseline_test_stat(id, alpha_hat, hyp, cfg.m_tlg),
        _ => baseline_test_stat(id, alpha_hat, hyp, cfg.m_tail),
    };
    let stat = stat.ok()?;
    let d = decide(stat, hyp, id).ok()?;
    Some(if d.reject { 1.0 } else { 0.0 })
}

fn run_row(
    cfg: &ExperimentConfig,
    row_index: usize,
    row: &GridRow,
    hypothesis: Option<Hypothesis>,
) -> Result<MetricsRow> {
    let law = ParetoLaw::new(row.alpha)?;
    let b_n = TruncationSchedule::new(row.q)?.level(cfg.n)?;

    let trials: Vec<TrialOutput> = (0..cfg.reps)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, row_index, t);
            let sample = sample_pareto(law, cfg.n, seed).expect("validated parameters");
            let outcome = truncated_outcome(cfg, row, b_n, &sample).ok();
            let values = cfg
                .estimators
                .iter()
                .map(|&id| {
                    let est = point_estimate(cfg, id, &sample, &outcome);
                    match &hypothesis {
                        None => est,
                        Some(hyp) => rejection_indicator(cfg, id, est, hyp, b_n),
                    }
                })
                .collect();
            let iterations = outcome.as_ref().filter(|o| o.converged).map(|o| o.iterations);
            TrialOutput { values, iterations }
        })
        .collect();

    // sequential fold in trial order keeps sums reproducible
    let cols = cfg.estimators.len();
    let mut sums = vec![0.0f64; cols];
    let mut counts = vec![0usize; cols];
    let mut iter_sum = 0usize;
    let mut iter_count = 0usize;
    for trial in &trials {
        for (c, v) in trial.values.iter().enumerate() {
            if let Some(v) = v {
                sums[c] += v;
                counts[c] += 1;
            }
        }
        if let Some(k) = trial.iterations {
            iter_sum += k;
            iter_count += 1;
        }
    }
    let values: Vec<Option<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    let exclusions = counts.iter().map(|&c| cfg.reps - c).collect();
    let k = if iter_count > 0 {
        (iter_sum as f64 / iter_count as f64).round() as u32
    } else {
        0
    };
    Ok(MetricsRow {
        alpha: row.alpha,
        q: row.q,
        k,
        values,
        exclusions,
    })
}

fn aggregate(kind: MetricKind, rows: &[MetricsRow], cols: usize) -> Vec<Option<f64>> {
    (0..cols)
        .map(|c| {
            let mut sum = 0.0;
            for row in rows {
                match row.values[c] {
                    Some(v) => {
                        sum += match kind {
                            MetricKind::AverageError => (v - row.alpha).abs(),
                            _ => v,
                        }
                    }
                    None => return None,
                }
            }
            if rows.is_empty() {
                None
            } else {
                Some(sum / rows.len() as f64)
            }
        })
        .collect()
}

fn run_experiment(
    cfg: &ExperimentConfig,
    kind: MetricKind,
    alpha0: Option<f64>,
) -> Result<MetricsTable> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.grid.len());
    for (i, row) in cfg.grid.iter().enumerate() {
        let hyp = match kind {
            MetricKind::AverageError => None,
            MetricKind::TypeOneError => Some(Hypothesis::new(row.alpha)?),
            MetricKind::AveragePower => {
                let a0 = alpha0.ok_or_else(|| {
                    TailixError::invalid("alpha0", "power experiments need a hypothesized index")
                })?;
                Some(Hypothesis::new(a0)?)
            }
        };
        rows.push(run_row(cfg, i, row, hyp)?);
    }
    let agg = aggregate(kind, &rows, cfg.estimators.len());
    Ok(MetricsTable {
        kind,
        alpha0,
        estimators: cfg.estimators.clone(),
        rows,
        aggregate: agg,
    })
}

/// Mean point estimate per (row, estimator) with the AE aggregate.
pub fn run_estimation_experiment(cfg: &ExperimentConfig) -> Result<MetricsTable> {
    run_experiment(cfg, MetricKind::AverageError, None)
}

/// Rejection rate of H0: alpha = alpha0 with data drawn at alpha0
/// (each row tests its own alpha), aggregated as AT.
pub fn run_type1_experiment(cfg: &ExperimentConfig) -> Result<MetricsTable> {
    run_experiment(cfg, MetricKind::TypeOneError, None)
}

/// Rejection rate with data drawn at each row's alpha* against the fixed
/// hypothesis alpha0, aggregated as AP.
pub fn run_power_experiment(cfg: &ExperimentConfig, alpha0: f64) -> Result<MetricsTable> {
    run_experiment(cfg, MetricKind::AveragePower, Some(alpha0))
}

/// Renders a finished table.
///
/// CSV layout: header `alpha,q,k,<estimator columns>`, one row per grid
/// entry with statistics at 3 decimal places, then an aggregate row
/// keyed by the metric label. JSON mirrors the full structure including
/// exclusion counts.
pub fn emit_table(table: &MetricsTable, format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Json => serde_json::to_string_pretty(table)
            .map_err(|e| TailixError::Numerical(format!("serialization failed: {e}"))),
        TableFormat::Csv => {
            let mut out = String::from("alpha,q,k");
            for id in &table.estimators {
                out.push(',');
                out.push_str(id.label());
            }
            out.push('\n');
            for row in &table.rows {
                out.push_str(&format!("{:.2},{:.2},{}", row.alpha, row.q, row.k));
                for v in &row.values {
                    match v {
                        Some(v) => out.push_str(&format!(",{v:.3}")),
                        None => out.push(','),
                    }
                }
                out.push('\n');
            }
            out.push_str(table.kind.label());
            out.push_str(",,");
            for v in &table.aggregate {
                match v {
                    Some(v) => out.push_str(&format!(",{v:.3}")),
                    None => out.push(','),
                }
            }
            out.push('\n');
            Ok(out)
        }
    }
}

/// Distributional diagnostic for the truncated estimators' limit laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    /// Empirical mean of the standardized statistic.
    pub mean: f64,
    /// Empirical standard deviation; missing for a single repetition.
    pub sd: Option<f64>,
    /// Fraction of trials beyond +-1.96 (expected near 0.05 under the law).
    pub tail_frac: f64,
    pub reps: usize,
    /// Trials dropped for non-convergence.
    pub excluded: usize,
}

/// Simulates the standardized statistic of the limit law matching
/// `alpha`: the solver branches on (0,1) and (1,2) and the closed-form
/// boundary laws at exactly 1 and 2. Reports its empirical mean, spread,
/// and two-sided 1.96-tail frequency.
pub fn normality_diagnostic(
    cfg: &ExperimentConfig,
    alpha: f64,
    q: f64,
) -> Result<NormalityReport> {
    cfg.validate()?;
    let law = ParetoLaw::new(alpha)?;
    let b_n = TruncationSchedule::new(q)?.level(cfg.n)?;
    let ln_b = b_n.ln();
    let sqrt_n = (cfg.n as f64).sqrt();

    let zs: Vec<Option<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, 0, t);
            let sample = sample_pareto(law, cfg.n, seed).expect("validated parameters");
            let alpha_hat = if alpha < 1.0 {
                let mu = truncated_mean(&sample, b_n).ok()?;
                let out = solve_lower(mu, b_n, 0.5, &cfg.solver).ok()?;
                out.converged.then_some(out.alpha_hat)?
            } else if alpha == 1.0 {
                boundary_lower(truncated_mean(&sample, b_n).ok()?, b_n).ok()?
            } else if alpha < 2.0 {
                let nu2 = truncated_second_moment(&sample, b_n).ok()?;
                let out = solve_upper(nu2, b_n, 1.5, &cfg.solver).ok()?;
                out.converged.then_some(out.alpha_hat)?
            } else {
                boundary_upper(truncated_second_moment(&sample, b_n).ok()?, b_n).ok()?
            };
            let z = if alpha == 1.0 {
                sqrt_n * (alpha_hat - 1.0) * ln_b / b_n.sqrt()
            } else if alpha == 2.0 {
                sqrt_n * (alpha_hat - 2.0) * ln_b / b_n
            } else if alpha < 1.0 {
                sqrt_n * (alpha_hat - alpha) * ln_b / b_n.powf(alpha / 2.0)
                    * (alpha * (2.0 - alpha)).sqrt()
                    / (1.0 - alpha)
            } else {
                sqrt_n * (alpha_hat - alpha) * ln_b / b_n.powf(alpha / 2.0)
                    * (alpha * (4.0 - alpha)).sqrt()
                    / (2.0 - alpha)
            };
            Some(z)
        })
        .collect();

    let kept: Vec<f64> = zs.iter().flatten().copied().collect();
    let excluded = cfg.reps - kept.len();
    if kept.is_empty() {
        return Err(TailixError::Numerical(
            "every trial failed; no diagnostic available".into(),
        ));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let sd = if kept.len() > 1 {
        let ss = kept.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>();
        Some((ss / (kept.len() - 1) as f64).sqrt())
    } else {
        None
    };
    let tail = kept.iter().filter(|z| z.abs() > 1.96).count() as f64 / kept.len() as f64;
    Ok(NormalityReport {
        mean,
        sd,
        tail_frac: tail,
        reps: cfg.reps,
        excluded,
    })
}

/// A named built-in experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub kind: MetricKind,
    pub alpha0: Option<f64>,
    pub config: ExperimentConfig,
}

/// Built-in grids `table1`..`table6`.
///
/// table1/table2: estimation error on the (0,1) and (1,2) grids.
/// table3/table4: Type I error on the same grids.
/// table5/table6: power against alpha0 = 0.60 (b_n = n^1.5) and
/// alpha0 = 1.40 (b_n = n^0.63).
pub fn preset(name: &str, base_seed: u64) -> Result<Preset> {
    let lower_grid = || -> Vec<GridRow> {
        [
            (0.10, 2.00),
            (0.20, 2.00),
            (0.30, 2.00),
            (0.40, 1.80),
            (0.50, 1.70),
            (0.60, 1.50),
            (0.70, 1.30),
            (0.80, 1.20),
            (0.90, 1.10),
        ]
        .into_iter()
        .map(|(a, q)| GridRow::new(a, q))
        .collect()
    };
    let upper_grid = || -> Vec<GridRow> {
        [
            (1.10, 0.80),
            (1.20, 0.70),
            (1.30, 0.65),
            (1.40, 0.63),
            (1.50, 0.61),
            (1.60, 0.60),
            (1.70, 0.60),
            (1.80, 0.58),
            (1.90, 0.45),
        ]
        .into_iter()
        .map(|(a, q)| GridRow::new(a, q))
        .collect()
    };

    let (kind, alpha0, grid, branch) = match name {
        "table1" => (MetricKind::AverageError, None, lower_grid(), Branch::Lower),
        "table2" => (MetricKind::AverageError, None, upper_grid(), Branch::Upper),
        "table3" => (MetricKind::TypeOneError, None, lower_grid(), Branch::Lower),
        "table4" => (MetricKind::TypeOneError, None, upper_grid(), Branch::Upper),
        "table5" => {
            let grid = (0..9)
                .map(|i| GridRow::new(0.60 + 0.04 * i as f64, 1.5))
                .collect();
            (MetricKind::AveragePower, Some(0.60), grid, Branch::Lower)
        }
        "table6" => {
            let grid = (0..8)
                .map(|i| GridRow::new(1.40 + 0.08 * i as f64, 0.63))
                .collect();
            (MetricKind::AveragePower, Some(1.40), grid, Branch::Upper)
        }
        other => return Err(TailixError::UnknownPreset(other.into())),
    };
    Ok(Preset {
        name: name.to_string(),
        kind,
        alpha0,
        config: ExperimentConfig::with_defaults(grid, branch, base_seed),
    })
}

/// Runs a preset, dispatching on its metric kind.
pub fn run_preset(preset: &Preset) -> Result<MetricsTable> {
    match preset.kind {
        MetricKind::AverageError => run_estimation_experiment(&preset.config),
        MetricKind::TypeOneError => run_type1_experiment(&preset.config),
        MetricKind::AveragePower => {
            let a0 = preset.alpha0.ok_or_else(|| {
                TailixError::invalid("alpha0", "power preset is missing its hypothesis")
            })?;
            run_power_experiment(&preset.config, a0)
        }
    }
}
