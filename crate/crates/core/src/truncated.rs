//! Truncated-moment tail-index estimators.
//!
//! Observations above a deterministic truncation level b_n = n^q are
//! zeroed (not capped), which makes the truncated sample mean and second
//! moment finite even when the underlying distribution has infinite mean
//! or variance. The tail index is then recovered as the fixed point of a
//! contraction built from the truncated moment:
//!
//!   lower branch, alpha in (0,1):  x = 1 - ln(((1-x)/x) mu_hat  + 1)/ln b_n
//!   upper branch, alpha in (1,2):  y = 2 - ln(((2-y)/y) nu2_hat + 1)/ln b_n
//!
//! with closed-form boundary estimators mu_hat/ln b_n and nu2_hat/ln b_n
//! at alpha = 1 and alpha = 2. The solvers iterate the maps until the
//! successive-iterate difference drops below the configured tolerance,
//! recording the full trace for convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TailixError};
use crate::sample::Sample;

/// Iterates leaving the open branch interval are pulled back to this
/// distance from the endpoints; two consecutive pull-backs abort the run.
const CLAMP_MARGIN: f64 = 1e-6;

/// The rule b_n = n^q mapping sample size to truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    q: f64,
}

impl TruncationSchedule {
    /// Creates the schedule b_n = n^q; requires q > 0 so b_n grows to
    /// infinity with n.
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(TailixError::invalid(
                "q",
                format!("truncation exponent must be positive, got {q}"),
            ));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The truncation level b_n = n^q. Requires n >= 2 so that ln b_n is
    /// positive and usable as a divisor.
    pub fn level(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(TailixError::invalid(
                "n",
                format!("sample size must be at least 2, got {n}"),
            ));
        }
        Ok((n as f64).powf(self.q))
    }
}

/// Solver tuning: successive-iterate tolerance, iteration cap, and the
/// pilot size used by the automatic branch rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub n0: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_iter: 200,
            n0: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(TailixError::invalid("epsilon", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(TailixError::invalid("max_iter", "must be at least 1"));
        }
        if self.n0 == 0 {
            return Err(TailixError::invalid("n0", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which estimator produced an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Fixed point on (0, 1).
    Lower,
    /// Fixed point on (1, 2).
    Upper,
    /// Closed form mu_hat/ln b_n targeting alpha = 1.
    BoundaryOne,
    /// Closed form nu2_hat/ln b_n targeting alpha = 2.
    BoundaryTwo,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
            Branch::BoundaryOne => "boundary-one",
            Branch::BoundaryTwo => "boundary-two",
        };
        f.write_str(s)
    }
}

/// Point estimate with its iteration trace and convergence diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOutcome {
    pub alpha_hat: f64,
    pub branch: Branch,
    /// Number of map applications actually performed.
    pub iterations: usize,
    /// Iterates from the initial value through the final one.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Truncated sample mean and second moment at a common level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMoments {
    pub mu_hat: f64,
    pub nu2_hat: f64,
    pub n: usize,
    pub b_n: f64,
}

impl TruncatedMoments {
    /// Computes both truncated moments in one pass.
    pub fn from_sample(sample: &Sample, b_n: f64) -> Result<Self> {
        let mu_hat = truncated_mean(sample, b_n)?;
        let nu2_hat = truncated_second_moment(sample, b_n)?;
        Ok(Self {
            mu_hat,
            nu2_hat,
            n: sample.len(),
            b_n,
        })
    }
}

fn check_level(b_n: f64) -> Result<()> {
    if !b_n.is_finite() || b_n <= 0.0 {
        return Err(TailixError::invalid(
            "b_n",
            format!("truncation level must be positive, got {b_n}"),
        ));
    }
    Ok(())
}

fn check_log_level(b_n: f64) -> Result<f64> {
    check_level(b_n)?;
    let ln_b = b_n.ln();
    if ln_b <= 0.0 {
        return Err(TailixError::invalid(
            "b_n",
            format!("ln(b_n) must be positive, got b_n = {b_n}"),
        ));
    }
    Ok(ln_b)
}

/// Mean of X_k I(X_k <= b_n): observations above the level contribute
/// zero (truncation, not capping); the boundary value itself is kept.
pub fn truncated_mean(sample: &Sample, b_n: f64) -> Result<f64> {
    check_level(b_n)?;
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&x| if x <= b_n { x } else { 0.0 })
        .sum();
    Ok(sum / sample.len() as f64)
}

/// Mean of X_k^2 I(X_k <= b_n), with the same zeroing convention.
pub fn truncated_second_moment(sample: &Sample, b_n: f64) -> Result<f64> {
    check_level(b_n)?;
    let sum: f64 = sample
        .values()
        .iter()
        .map(|&x| if x <= b_n { x * x } else { 0.0 })
        .sum();
    Ok(sum / sample.len() as f64)
}

/// Lower-branch map: g1(x) = 1 - ln(((1-x)/x) mu_hat + 1)/ln b_n.
///
/// The log argument is at least 1 for x in (0,1) and mu_hat >= 0, so the
/// value never exceeds 1.
pub fn g1(x: f64, mu_hat: f64, b_n: f64) -> Result<f64> {
    let ln_b = check_log_level(b_n)?;
    if !(0.0..=1.0).contains(&x) || x == 0.0 || x == 1.0 {
        return Err(TailixError::invalid(
            "x",
            format!("lower-branch candidate must lie in (0, 1), got {x}"),
        ));
    }
    if !(mu_hat >= 0.0) {
        return Err(TailixError::invalid("mu_hat", "must be nonnegative"));
    }
    Ok(1.0 - (((1.0 - x) / x) * mu_hat + 1.0).ln() / ln_b)
}

/// Upper-branch map: g2(y) = 2 - ln(((2-y)/y) nu2_hat + 1)/ln b_n.
pub fn g2(y: f64, nu2_hat: f64, b_n: f64) -> Result<f64> {
    let ln_b = check_log_level(b_n)?;
    if !(1.0..=2.0).contains(&y) || y == 1.0 || y == 2.0 {
        return Err(TailixError::invalid(
            "y",
            format!("upper-branch candidate must lie in (1, 2), got {y}"),
        ));
    }
    if !(nu2_hat >= 0.0) {
        return Err(TailixError::invalid("nu2_hat", "must be nonnegative"));
    }
    Ok(2.0 - (((2.0 - y) / y) * nu2_hat + 1.0).ln() / ln_b)
}

fn run_fixed_point<F>(map: F, start: f64, lo: f64, hi: f64, cfg: &SolverConfig, branch: Branch) -> Result<EstimatorOutcome>
where
    F: Fn(f64) -> Result<f64>,
{
    cfg.validate()?;
    if start <= lo || start >= hi {
        return Err(TailixError::invalid(
            "start",
            format!("initial value must lie in ({lo}, {hi}), got {start}"),
        ));
    }
    let lo_c = lo + CLAMP_MARGIN;
    let hi_c = hi - CLAMP_MARGIN;
    let mut current = start.clamp(lo_c, hi_c);
    let mut trace = vec![current];
    let mut consecutive_clamps = 0usize;
    let mut converged = false;

    for _ in 0..cfg.max_iter {
        let raw = map(current)?;
        let clamped = !(lo_c..=hi_c).contains(&raw);
        let next = raw.clamp(lo_c, hi_c);
        trace.push(next);
        if clamped {
            consecutive_clamps += 1;
            if consecutive_clamps >= 2 {
                break;
            }
        } else {
            consecutive_clamps = 0;
            if (next - current).abs() <= cfg.epsilon {
                converged = true;
                break;
            }
        }
        current = next;
    }

    let alpha_hat = *trace.last().expect("trace holds at least the start");
    Ok(EstimatorOutcome {
        alpha_hat,
        branch,
        iterations: trace.len() - 1,
        trace,
        converged,
    })
}

/// Iterates g1 from `x0` until successive iterates differ by at most
/// `cfg.epsilon` or the iteration cap is hit.
///
/// When the map is contracting, the trace is monotone toward the fixed
/// point from either side. Iterates pushed outside (0, 1) are clamped
/// just inside; two consecutive clamps flag non-convergence and return
/// the last iterate.
pub fn solve_lower(mu_hat: f64, b_n: f64, x0: f64, cfg: &SolverConfig) -> Result<EstimatorOutcome> {
    check_log_level(b_n)?;
    run_fixed_point(|x| g1(x, mu_hat, b_n), x0, 0.0, 1.0, cfg, Branch::Lower)
}

/// Mirror of [`solve_lower`] on (1, 2) using g2.
pub fn solve_upper(nu2_hat: f64, b_n: f64, y0: f64, cfg: &SolverConfig) -> Result<EstimatorOutcome> {
    check_log_level(b_n)?;
    run_fixed_point(|y| g2(y, nu2_hat, b_n), y0, 1.0, 2.0, cfg, Branch::Upper)
}

/// Closed-form estimator mu_hat/ln b_n for the alpha = 1 boundary.
pub fn boundary_lower(mu_hat: f64, b_n: f64) -> Result<f64> {
    let ln_b = check_log_level(b_n)?;
    if !(mu_hat >= 0.0) {
        return Err(TailixError::invalid("mu_hat", "must be nonnegative"));
    }
    Ok(mu_hat / ln_b)
}

/// Closed-form estimator nu2_hat/ln b_n for the alpha = 2 boundary.
pub fn boundary_upper(nu2_hat: f64, b_n: f64) -> Result<f64> {
    let ln_b = check_log_level(b_n)?;
    if !(nu2_hat >= 0.0) {
        return Err(TailixError::invalid("nu2_hat", "must be nonnegative"));
    }
    Ok(nu2_hat / ln_b)
}

/// Branch choice and starting point produced by the pilot rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialValue {
    pub branch: Branch,
    pub start: f64,
    /// The pilot diagnostic r = truncated_mean/ln b_n0 the choice is
    /// based on.
    pub ratio: f64,
    /// Set when the pilot's truncated mean vanished (every pilot value
    /// above the level) and the default had to be used.
    pub degenerate: bool,
}

/// Pilot rule for choosing the branch when the range of alpha is
/// unknown. The diagnostic r = truncated_mean(pilot)/ln b_n0 estimates
/// the alpha = 1 boundary value: its population counterpart is exactly 1
/// at alpha = 1, grows without bound as the tail gets heavier
/// (alpha < 1), and falls below 1 on the finite-mean side (alpha > 1).
/// So r > 1 dispatches to the lower branch (started at 0.5) and
/// 0 < r <= 1 to the upper branch (started at 1.5). A vanishing r means
/// every pilot value exceeded the level, which itself indicates a very
/// heavy tail: fall back to the lower branch with the degenerate flag
/// set.
pub fn initial_value(pilot: &Sample, b_n0: f64) -> Result<InitialValue> {
    let ln_b = check_log_level(b_n0)?;
    let r = truncated_mean(pilot, b_n0)? / ln_b;
    if r == 0.0 {
        return Ok(InitialValue {
            branch: Branch::Lower,
            start: 0.5,
            ratio: r,
            degenerate: true,
        });
    }
    if r > 1.0 {
        Ok(InitialValue {
            branch: Branch::Lower,
            start: 0.5,
            ratio: r,
            degenerate: false,
        })
    } else {
        Ok(InitialValue {
            branch: Branch::Upper,
            start: 1.5,
            ratio: r,
            degenerate: false,
        })
    }
}

/// Default starting values when a branch is forced explicitly.
pub fn default_start(branch: Branch) -> f64 {
    match branch {
        Branch::Lower | Branch::BoundaryOne => 0.5,
        Branch::Upper | Branch::BoundaryTwo => 1.5,
    }
}

/// Full estimation pipeline on one sample.
///
/// With `branch_override` the chosen solver runs from its default start
/// (0.5 lower, 1.5 upper); otherwise the pilot rule on the first
/// `cfg.n0` observations selects the branch. Boundary overrides return
/// the closed-form estimate with a single-element trace.
pub fn estimate(
    sample: &Sample,
    sched: &TruncationSchedule,
    cfg: &SolverConfig,
    branch_override: Option<Branch>,
) -> Result<EstimatorOutcome> {
    cfg.validate()?;
    if sample.len() < cfg.n0 {
        return Err(TailixError::InsufficientData {
            required: cfg.n0,
            got: sample.len(),
        });
    }
    let b_n = sched.level(sample.len())?;
    let (branch, start) = match branch_override {
        Some(b) => (b, default_start(b)),
        None => {
            let pilot = sample.head(cfg.n0)?;
            let b_n0 = sched.level(cfg.n0)?;
            let init = initial_value(&pilot, b_n0)?;
            (init.branch, init.start)
        }
    };
    match branch {
        Branch::Lower => {
            let mu_hat = truncated_mean(sample, b_n)?;
            solve_lower(mu_hat, b_n, start, cfg)
        }
        Branch::Upper => {
            let nu2_hat = truncated_second_moment(sample, b_n)?;
            solve_upper(nu2_hat, b_n, start, cfg)
        }
        Branch::BoundaryOne => {
            let mu_hat = truncated_mean(sample, b_n)?;
            let alpha_hat = boundary_lower(mu_hat, b_n)?;
            Ok(EstimatorOutcome {
                alpha_hat,
                branch,
                iterations: 0,
                trace: vec![alpha_hat],
                converged: true,
            })
        }
        Branch::BoundaryTwo => {
            let nu2_hat = truncated_second_moment(sample, b_n)?;
            let alpha_hat = boundary_upper(nu2_hat, b_n)?;
            Ok(EstimatorOutcome {
                alpha_hat,
                branch,
                iterations: 0,
                trace: vec![alpha_hat],
                converged: true,
            })
        }
    }
}

/// Contraction base of the convergence-rate bound:
/// min(ref, start) * (1 - ref) * ln b_n on the lower branch and
/// min(ref, start) * (2 - ref) * ln b_n / 2 on the upper branch.
/// The bound contracts only when this exceeds 1.
pub fn contraction_base(alpha_ref: f64, alpha_0: f64, b_n: f64, branch: Branch) -> Result<f64> {
    let ln_b = check_log_level(b_n)?;
    let a_star = alpha_ref.min(alpha_0);
    match branch {
        Branch::Lower => {
            for (name, v) in [("alpha_ref", alpha_ref), ("alpha_0", alpha_0)] {
                if v <= 0.0 || v >= 1.0 {
                    return Err(TailixError::invalid(name, format!("must lie in (0, 1), got {v}")));
                }
            }
            Ok(a_star * (1.0 - alpha_ref) * ln_b)
        }
        Branch::Upper => {
            for (name, v) in [("alpha_ref", alpha_ref), ("alpha_0", alpha_0)] {
                if v <= 1.0 || v >= 2.0 {
                    return Err(TailixError::invalid(name, format!("must lie in (1, 2), got {v}")));
                }
            }
            Ok(a_star * (2.0 - alpha_ref) * ln_b / 2.0)
        }
        _ => Err(TailixError::invalid(
            "branch",
            "convergence bounds apply to the lower and upper branches only",
        )),
    }
}

/// Right-hand side of the k-step convergence-rate bound:
/// (1/base)^k * |alpha_ref - alpha_0|.
///
/// k = 0 returns the plain distance. A base at or below 1 carries no
/// contraction information and is reported as the +infinity sentinel.
pub fn convergence_bound(
    k: usize,
    alpha_ref: f64,
    alpha_0: f64,
    b_n: f64,
    branch: Branch,
) -> Result<f64> {
    let base = contraction_base(alpha_ref, alpha_0, b_n, branch)?;
    let d0 = (alpha_ref - alpha_0).abs();
    if k == 0 {
        return Ok(d0);
    }
    if base <= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(base.powi(-(k as i32)) * d0)
}

/// Checks the large-n admissibility condition
/// b_n^alpha * ln b_n <= alpha * n^(1-2*beta) / ln n
/// under which the fixed-point characterization is guaranteed.
/// Reported as a warning by callers, never enforced.
pub fn theorem_admissible(alpha: f64, n: usize, b_n: f64, beta: f64) -> bool {
    if n < 2 {
        return false;
    }
    let nf = n as f64;
    b_n.powf(alpha) * b_n.ln() <= alpha * nf.powf(1.0 - 2.0 * beta) / nf.ln()
}
