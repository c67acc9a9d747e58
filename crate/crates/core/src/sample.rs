//! Immutable observation batches with a cached sorted view.

use std::sync::OnceLock;

use crate::error::{Result, TailixError};

/// An immutable batch of nonnegative observations.
///
/// The sorted view is computed once on first use and shared afterwards;
/// both the truncated-moment estimators (raw order) and the
/// order-statistics baselines (sorted order) draw from the same batch.
#[derive(Debug)]
pub struct Sample {
    values: Vec<f64>,
    sorted: OnceLock<Vec<f64>>,
}

impl Sample {
    /// Wraps a vector of observations. Every value must be finite and
    /// nonnegative, and the batch must be nonempty.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(TailixError::EmptySample);
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(TailixError::invalid(
                    "values",
                    format!("observation {i} is not finite: {v}"),
                ));
            }
            if v < 0.0 {
                return Err(TailixError::invalid(
                    "values",
                    format!("observation {i} is negative: {v}"),
                ));
            }
        }
        Ok(Self {
            values,
            sorted: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in insertion order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observations sorted ascending; computed once and cached.
    pub fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut s = self.values.clone();
            s.sort_by(|a, b| a.partial_cmp(b).expect("observations are finite"));
            s
        })
    }

    /// A new sample holding the first `n` observations.
    pub fn head(&self, n: usize) -> Result<Sample> {
        if n == 0 || n > self.values.len() {
            return Err(TailixError::InsufficientData {
                required: n.max(1),
                got: self.values.len(),
            });
        }
        Sample::new(self.values[..n].to_vec())
    }
}

impl Clone for Sample {
    fn clone(&self) -> Self {
        Sample {
            values: self.values.clone(),
            sorted: OnceLock::new(),
        }
    }
}
