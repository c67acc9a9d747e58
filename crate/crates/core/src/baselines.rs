//! Order-statistics baseline estimators: Hill, QQ, Moment, t-Hill, and
//! t-lgHill.
//!
//! Every estimator is a function of ratios of upper order statistics, so
//! all of them are invariant under positive rescaling of the data. The
//! number of upper order statistics `m` is the caller's choice; the
//! experiment presets use m = sqrt(n) for Hill/QQ/Moment/t-Hill and
//! m = n/2 for t-lgHill.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TailixError};
use crate::sample::Sample;

/// Sorted ascending view with 1-indexed order statistics
/// X_(1) <= X_(2) <= ... <= X_(n).
#[derive(Debug, Clone, Copy)]
pub struct OrderStatView<'a> {
    sorted: &'a [f64],
}

impl<'a> OrderStatView<'a> {
    /// Wraps an ascending slice; the order must already hold.
    pub fn from_sorted(sorted: &'a [f64]) -> Result<Self> {
        if sorted.is_empty() {
            return Err(TailixError::EmptySample);
        }
        if sorted.windows(2).any(|w| w[0] > w[1]) {
            return Err(TailixError::invalid("sorted", "slice is not ascending"));
        }
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// X_(i), 1-indexed from the smallest observation.
    pub fn order_stat(&self, i: usize) -> f64 {
        assert!(
            i >= 1 && i <= self.sorted.len(),
            "order statistic index {i} out of 1..={}",
            self.sorted.len()
        );
        self.sorted[i - 1]
    }

    /// The i-th largest observation, 1-indexed from the maximum.
    pub fn largest(&self, i: usize) -> f64 {
        assert!(
            i >= 1 && i <= self.sorted.len(),
            "largest index {i} out of 1..={}",
            self.sorted.len()
        );
        self.sorted[self.sorted.len() - i]
    }
}

impl Sample {
    /// Order-statistics view over the cached sorted data.
    pub fn order_stats(&self) -> OrderStatView<'_> {
        OrderStatView {
            sorted: self.sorted(),
        }
    }
}

/// Number of upper order statistics entering a tail estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailFraction {
    m: usize,
}

impl TailFraction {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(TailixError::invalid("m", "must be at least 1"));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn checked_against(&self, n: usize) -> Result<usize> {
        if self.m >= n {
            return Err(TailixError::invalid(
                "m",
                format!("must satisfy m < n, got m = {} with n = {n}", self.m),
            ));
        }
        Ok(self.m)
    }
}

/// Indexing convention for the log-ratio moments M^(l).
///
/// The displayed definition runs over X_(n-i), which leaves the sample
/// maximum out; the conventional variant runs over X_(n-i+1) and keeps
/// it. Both are exposed for sensitivity checks; the display form is the
/// default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentIndexing {
    /// Ratios X_(n-i)/X_(n-m), i = 1..m (maximum excluded).
    ExcludeMax,
    /// Ratios X_(n-i+1)/X_(n-m), i = 1..m (maximum included).
    IncludeMax,
}

fn require_positive_threshold(value: f64, what: &'static str) -> Result<()> {
    if value <= 0.0 {
        return Err(TailixError::invalid(
            "sample",
            format!("{what} must be positive, got {value}"),
        ));
    }
    Ok(())
}

/// Hill estimator: the reciprocal of the mean log-ratio
/// (1/m) sum_{i=1..m} ln(X_(n-i+1)/X_(n-m)).
pub fn hill(view: &OrderStatView, m: TailFraction) -> Result<f64> {
    let n = view.len();
    let m = m.checked_against(n)?;
    let threshold = view.order_stat(n - m);
    require_positive_threshold(threshold, "X_(n-m)")?;
    let mean_log: f64 = (1..=m)
        .map(|i| (view.order_stat(n - i + 1) / threshold).ln())
        .sum::<f64>()
        / m as f64;
    if mean_log == 0.0 {
        return Err(TailixError::DegenerateTail(
            "top order statistics are all equal; Hill estimate is infinite".into(),
        ));
    }
    Ok(1.0 / mean_log)
}

/// QQ estimator: reciprocal of the least-squares slope of log upper
/// order statistics on log theoretical quantiles ln((m+1)/j).
pub fn qq(view: &OrderStatView, m: TailFraction) -> Result<f64> {
    let n = view.len();
    let m = m.checked_against(n)?;
    if m < 2 {
        return Err(TailixError::invalid(
            "m",
            "the QQ regression needs at least two design points",
        ));
    }
    require_positive_threshold(view.order_stat(n - m + 1), "X_(n-m+1)")?;
    let mf = m as f64;
    let mut sw = 0.0;
    let mut sww = 0.0;
    let mut sy = 0.0;
    let mut swy = 0.0;
    for j in 1..=m {
        let w = ((mf + 1.0) / j as f64).ln();
        let y = view.order_stat(n - j + 1).ln();
        sw += w;
        sww += w * w;
        sy += y;
        swy += w * y;
    }
    let den = sww - sw * sw / mf;
    let num = swy - sw * sy / mf;
    if den <= 0.0 {
        return Err(TailixError::Numerical(
            "degenerate QQ design matrix".into(),
        ));
    }
    if num <= 0.0 {
        return Err(TailixError::DegenerateTail(
            "nonpositive QQ slope; estimate undefined".into(),
        ));
    }
    Ok(den / num)
}

/// Log-ratio moment M^(l) = (1/m) sum (ln X_(n-i)/X_(n-m))^l under the
/// chosen indexing, for l = 1 or 2.
pub fn m_stat_with(
    view: &OrderStatView,
    m: TailFraction,
    l: u32,
    indexing: MomentIndexing,
) -> Result<f64> {
    if !(l == 1 || l == 2) {
        return Err(TailixError::invalid("l", "moment order must be 1 or 2"));
    }
    let n = view.len();
    let m = m.checked_against(n)?;
    let threshold = view.order_stat(n - m);
    require_positive_threshold(threshold, "X_(n-m)")?;
    let sum: f64 = (1..=m)
        .map(|i| {
            let idx = match indexing {
                MomentIndexing::ExcludeMax => n - i,
                MomentIndexing::IncludeMax => n - i + 1,
            };
            let r = (view.order_stat(idx) / threshold).ln();
            if l == 1 {
                r
            } else {
                r * r
            }
        })
        .sum();
    Ok(sum / m as f64)
}

/// M^(l) under the display indexing (maximum excluded).
pub fn m_stat(view: &OrderStatView, m: TailFraction, l: u32) -> Result<f64> {
    m_stat_with(view, m, l, MomentIndexing::ExcludeMax)
}

/// Moment estimator: reciprocal of
/// M^(1) + 1 - (1/2) (1 - (M^(1))^2 / M^(2))^(-1).
pub fn moment_with(view: &OrderStatView, m: TailFraction, indexing: MomentIndexing) -> Result<f64> {
    let m1 = m_stat_with(view, m, 1, indexing)?;
    let m2 = m_stat_with(view, m, 2, indexing)?;
    if m2 <= 0.0 {
        return Err(TailixError::DegenerateTail(
            "vanishing second log-ratio moment".into(),
        ));
    }
    let ratio = m1 * m1 / m2;
    if ratio == 1.0 {
        return Err(TailixError::DegenerateTail(
            "singular correction term: (M1)^2 equals M2".into(),
        ));
    }
    let inv = m1 + 1.0 - 0.5 / (1.0 - ratio);
    if !inv.is_finite() || inv <= 0.0 {
        return Err(TailixError::DegenerateTail(format!(
            "nonpositive reciprocal moment combination {inv}"
        )));
    }
    Ok(1.0 / inv)
}

/// Moment estimator under the display indexing.
pub fn moment(view: &OrderStatView, m: TailFraction) -> Result<f64> {
    moment_with(view, m, MomentIndexing::ExcludeMax)
}

/// t-Hill estimator: with X_(i,n) the i-th largest observation,
/// the reciprocal of ((1/m) sum_{i=1..m} X_(m+1,n)/X_(i,n))^(-1) - 1.
pub fn t_hill(view: &OrderStatView, m: TailFraction) -> Result<f64> {
    let n = view.len();
    let m = m.checked_against(n)?;
    let pivot = view.largest(m + 1);
    require_positive_threshold(pivot, "X_(m+1,n)")?;
    let mean_ratio: f64 = (1..=m).map(|i| pivot / view.largest(i)).sum::<f64>() / m as f64;
    if mean_ratio >= 1.0 {
        return Err(TailixError::DegenerateTail(
            "top order statistics are all equal; t-Hill estimate is infinite".into(),
        ));
    }
    // 1/(1/r - 1) = r/(1 - r)
    Ok(mean_ratio / (1.0 - mean_ratio))
}

/// t-lgHill estimator: reciprocal of the variance-to-mean ratio of the
/// log-excesses, (M^(2) - (M^(1))^2)/M^(1).
pub fn t_lg_hill(view: &OrderStatView, m: TailFraction) -> Result<f64> {
    let m1 = m_stat(view, m, 1)?;
    let m2 = m_stat(view, m, 2)?;
    if m1 <= 0.0 {
        return Err(TailixError::invalid(
            "m_stat",
            "first log-ratio moment must be positive",
        ));
    }
    let var = m2 - m1 * m1;
    if var <= 0.0 {
        return Err(TailixError::DegenerateTail(
            "constant log-excesses; t-lgHill estimate is infinite".into(),
        ));
    }
    Ok(m1 / var)
}
