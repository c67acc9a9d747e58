//! Tail-index estimation for extremely heavy-tailed data.
//!
//! The model family is F(x) = 1 - 1/x^alpha on [1, inf) with unknown
//! tail index alpha in (0, 2], so the mean is infinite for alpha <= 1
//! and the variance is infinite for alpha <= 2. The crate provides:
//!
//! - [`truncated`]: tail-index estimators built from truncated sample
//!   moments, recovered by fixed-point iteration on (0,1) and (1,2) with
//!   closed-form boundary estimators at alpha = 1 and alpha = 2;
//! - [`baselines`]: the classical order-statistics comparisons (Hill,
//!   QQ, Moment, t-Hill, t-lgHill);
//! - [`inference`]: asymptotic rejection regions at the 0.95 level for
//!   all estimators;
//! - [`experiments`]: a deterministic, seed-substreamed Monte Carlo
//!   engine with built-in grids `table1`..`table6` covering estimation
//!   error, Type I error, and power;
//! - [`distributions`]: reproducible Pareto sampling and exact
//!   CDF/quantile utilities.

pub mod baselines;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod sample;
pub mod truncated;

pub use baselines::{MomentIndexing, OrderStatView, TailFraction};
pub use distributions::{sample_pareto, ParetoLaw, SeedSpec};
pub use error::{Result, TailixError};
pub use experiments::{
    emit_table, normality_diagnostic, preset, run_estimation_experiment, run_power_experiment,
    run_preset, run_type1_experiment, ExperimentConfig, GridRow, MetricKind, MetricsRow,
    MetricsTable, NormalityReport, Preset, TableFormat,
};
pub use inference::{
    baseline_test_stat, boundary_test_stat, decide, truncated_test_stat, EstimatorId, Hypothesis,
    TestDecision,
};
pub use sample::Sample;
pub use truncated::{
    boundary_lower, boundary_upper, convergence_bound, estimate, g1, g2, initial_value,
    solve_lower, solve_upper, truncated_mean, truncated_second_moment, Branch, EstimatorOutcome,
    InitialValue, SolverConfig, TruncatedMoments, TruncationSchedule,
};
