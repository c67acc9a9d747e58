//! Asymptotic hypothesis tests at the 0.95 confidence level.
//!
//! Each estimator carries a central limit law; standardizing the
//! distance between the estimate and the hypothesized index against the
//! law's asymptotic scale yields a statistic compared against the
//! two-sided critical value 1.96. The truncated estimators standardize
//! on the alpha scale; the five baselines standardize the reciprocal
//! alpha_hat^(-1) - alpha0^(-1) exactly as their limit laws are stated.
//! All scalings fix beta = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TailixError};
use crate::truncated::Branch;

/// Two-sided critical value for the 0.95 confidence level.
pub const DEFAULT_CRITICAL_VALUE: f64 = 1.96;

/// Null hypothesis alpha = alpha0 with its critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub alpha0: f64,
    pub z: f64,
}

impl Hypothesis {
    /// Hypothesized index in (0, 2] with the default critical value.
    pub fn new(alpha0: f64) -> Result<Self> {
        if !alpha0.is_finite() || alpha0 <= 0.0 || alpha0 > 2.0 {
            return Err(TailixError::invalid(
                "alpha0",
                format!("hypothesized index must lie in (0, 2], got {alpha0}"),
            ));
        }
        Ok(Self {
            alpha0,
            z: DEFAULT_CRITICAL_VALUE,
        })
    }

    pub fn with_critical_value(mut self, z: f64) -> Result<Self> {
        if !z.is_finite() || z <= 0.0 {
            return Err(TailixError::invalid("z", "critical value must be positive"));
        }
        self.z = z;
        Ok(self)
    }
}

/// Which estimator a statistic or decision refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorId {
    Truncated,
    Hill,
    Qq,
    Moment,
    THill,
    TLgHill,
}

impl EstimatorId {
    /// Paper-order listing used for table columns.
    pub const ALL: [EstimatorId; 6] = [
        EstimatorId::Truncated,
        EstimatorId::Hill,
        EstimatorId::Qq,
        EstimatorId::Moment,
        EstimatorId::THill,
        EstimatorId::TLgHill,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorId::Truncated => "truncated",
            EstimatorId::Hill => "hill",
            EstimatorId::Qq => "qq",
            EstimatorId::Moment => "moment",
            EstimatorId::THill => "thill",
            EstimatorId::TLgHill => "tlghill",
        }
    }
}

impl std::fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for EstimatorId {
    type Err = TailixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "truncated" => Ok(EstimatorId::Truncated),
            "hill" => Ok(EstimatorId::Hill),
            "qq" => Ok(EstimatorId::Qq),
            "moment" => Ok(EstimatorId::Moment),
            "thill" | "t-hill" => Ok(EstimatorId::THill),
            "tlghill" | "t-lghill" => Ok(EstimatorId::TLgHill),
            other => Err(TailixError::invalid(
                "estimator",
                format!("unknown estimator `{other}`"),
            )),
        }
    }
}

/// Outcome of one rejection-region evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub estimator: EstimatorId,
}

fn check_scaling_inputs(n: usize, b_n: f64) -> Result<f64> {
    if n < 2 {
        return Err(TailixError::invalid("n", "sample size must be at least 2"));
    }
    if !b_n.is_finite() || b_n <= 1.0 {
        return Err(TailixError::invalid("b_n", "truncation level must exceed 1"));
    }
    Ok(b_n.ln())
}

/// Standardized statistic for the truncated estimators:
///
///   sqrt(n) sqrt(a0(2-a0)) |x - a0| ln b_n / ((1-a0) b_n^(a0/2))   on (0,1)
///   sqrt(n) sqrt(a0(4-a0)) |x - a0| ln b_n / ((2-a0) b_n^(a0/2))   on (1,2)
///
/// Hypotheses at exactly 1 or 2 have degenerate scalings here and must
/// go through [`boundary_test_stat`].
pub fn truncated_test_stat(alpha_hat: f64, hyp: &Hypothesis, n: usize, b_n: f64) -> Result<f64> {
    let ln_b = check_scaling_inputs(n, b_n)?;
    if !alpha_hat.is_finite() {
        return Err(TailixError::Numerical("estimate is not finite".into()));
    }
    let a0 = hyp.alpha0;
    if a0 == 1.0 || a0 == 2.0 {
        return Err(TailixError::invalid(
            "alpha0",
            "degenerate scaling at the boundary; use boundary_test_stat",
        ));
    }
    let sqrt_n = (n as f64).sqrt();
    let dev = (alpha_hat - a0).abs();
    let stat = if a0 < 1.0 {
        sqrt_n * (a0 * (2.0 - a0)).sqrt() * dev * ln_b / ((1.0 - a0) * b_n.powf(a0 / 2.0))
    } else {
        sqrt_n * (a0 * (4.0 - a0)).sqrt() * dev * ln_b / ((2.0 - a0) * b_n.powf(a0 / 2.0))
    };
    Ok(stat)
}

/// Standardized statistic for the boundary estimators:
///
///   sqrt(n) |x - 1| ln b_n / sqrt(b_n)   targeting alpha = 1
///   sqrt(n) |x - 2| ln b_n / b_n         targeting alpha = 2
pub fn boundary_test_stat(alpha_hat: f64, target: Branch, n: usize, b_n: f64) -> Result<f64> {
    let ln_b = check_scaling_inputs(n, b_n)?;
    if !alpha_hat.is_finite() {
        return Err(TailixError::Numerical("estimate is not finite".into()));
    }
    let sqrt_n = (n as f64).sqrt();
    match target {
        Branch::BoundaryOne => Ok(sqrt_n * (alpha_hat - 1.0).abs() * ln_b / b_n.sqrt()),
        Branch::BoundaryTwo => Ok(sqrt_n * (alpha_hat - 2.0).abs() * ln_b / b_n),
        _ => Err(TailixError::invalid(
            "target",
            "boundary statistic targets alpha = 1 or alpha = 2 only",
        )),
    }
}

/// Checks the truncation-growth condition under which the boundary limit
/// laws hold: b_n <= n^(1-2*beta)/ln n at alpha = 1 and
/// b_n^2 <= n^(1-beta)/ln n at alpha = 2. Violations are reported by
/// callers as warnings.
pub fn boundary_admissible(target: Branch, n: usize, b_n: f64, beta: f64) -> bool {
    if n < 2 {
        return false;
    }
    let nf = n as f64;
    match target {
        Branch::BoundaryOne => b_n <= nf.powf(1.0 - 2.0 * beta) / nf.ln(),
        Branch::BoundaryTwo => b_n * b_n <= nf.powf(1.0 - beta) / nf.ln(),
        _ => false,
    }
}

/// Standardized statistic for a baseline estimator, acting on the
/// reciprocal scale |alpha_hat^(-1) - alpha0^(-1)| with the estimator's
/// own normal scaling:
///
///   Hill     a0 sqrt(m)
///   QQ       a0 sqrt(m/2)
///   Moment   a0 sqrt(m) / sqrt(1 + a0^2)
///   t-Hill   a0 sqrt(a0(a0+2)) sqrt(m) / (1 + a0)
///   t-lgHill a0 sqrt(m) / (2 sqrt(2))
pub fn baseline_test_stat(
    estimator: EstimatorId,
    alpha_hat: f64,
    hyp: &Hypothesis,
    m: usize,
) -> Result<f64> {
    if m == 0 {
        return Err(TailixError::invalid("m", "must be at least 1"));
    }
    if !alpha_hat.is_finite() || alpha_hat <= 0.0 {
        return Err(TailixError::Numerical(format!(
            "cannot standardize estimate {alpha_hat}"
        )));
    }
    let a0 = hyp.alpha0;
    let sqrt_m = (m as f64).sqrt();
    let dev = (1.0 / alpha_hat - 1.0 / a0).abs();
    let scale = match estimator {
        EstimatorId::Hill => a0 * sqrt_m,
        EstimatorId::Qq => a0 * (m as f64 / 2.0).sqrt(),
        EstimatorId::Moment => a0 * sqrt_m / (1.0 + a0 * a0).sqrt(),
        EstimatorId::THill => a0 * (a0 * (a0 + 2.0)).sqrt() * sqrt_m / (1.0 + a0),
        EstimatorId::TLgHill => a0 * sqrt_m / (2.0 * 2f64.sqrt()),
        EstimatorId::Truncated => {
            return Err(TailixError::invalid(
                "estimator",
                "the truncated estimator uses truncated_test_stat",
            ))
        }
    };
    Ok(scale * dev)
}

/// Rejects when the statistic strictly exceeds the critical value.
pub fn decide(statistic: f64, hyp: &Hypothesis, estimator: EstimatorId) -> Result<TestDecision> {
    if !statistic.is_finite() || statistic < 0.0 {
        return Err(TailixError::invalid(
            "statistic",
            format!("must be a nonnegative finite number, got {statistic}"),
        ));
    }
    Ok(TestDecision {
        statistic,
        threshold: hyp.z,
        reject: statistic > hyp.z,
        estimator,
    })
}

/// Asymptotic variance of the truncated-estimator limit law:
/// (1-a)^2/(a(2-a)) on (0,1) and (2-a)^2/(a(4-a)) on (1,2).
pub fn truncated_asymptotic_variance(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok((1.0 - alpha).powi(2) / (alpha * (2.0 - alpha)))
    } else if alpha > 1.0 && alpha < 2.0 {
        Ok((2.0 - alpha).powi(2) / (alpha * (4.0 - alpha)))
    } else {
        Err(TailixError::invalid(
            "alpha",
            format!("variance defined on (0,1) and (1,2), got {alpha}"),
        ))
    }
}
