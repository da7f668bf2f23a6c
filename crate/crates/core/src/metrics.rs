//! Accuracy and speedup metrics.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no records to aggregate")]
    Empty,
    #[error("reference for {label} must be positive, got {value}")]
    NonPositiveReference { label: String, value: f64 },
    #[error("times must be positive, got {0} and {1}")]
    NonPositiveTime(f64, f64),
    #[error("reference speedup must be positive, got {0}")]
    NonPositiveSpeedup(f64),
}

/// A simulated time paired with its measured reference, both in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub label: String,
    pub predicted: f64,
    pub reference: f64,
}

impl ComparisonRecord {
    pub fn new(label: impl Into<String>, predicted: f64, reference: f64) -> Self {
        Self {
            label: label.into(),
            predicted,
            reference,
        }
    }

    /// |predicted − reference| / reference × 100.
    pub fn ape(&self) -> Result<f64, MetricsError> {
        if self.reference.is_nan() || self.reference <= 0.0 {
            return Err(MetricsError::NonPositiveReference {
                label: self.label.clone(),
                value: self.reference,
            });
        }
        Ok((self.predicted - self.reference).abs() / self.reference * 100.0)
    }
}

/// Mean absolute percentage error.
pub fn mape(records: &[ComparisonRecord]) -> Result<f64, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let total = records.iter().map(ComparisonRecord::ape).sum::<Result<f64, _>>()?;
    Ok(total / records.len() as f64)
}

/// `t_prev / t_next`.
pub fn speedup(t_prev: f64, t_next: f64) -> Result<f64, MetricsError> {
    if !(t_prev > 0.0 && t_next > 0.0) {
        return Err(MetricsError::NonPositiveTime(t_prev, t_next));
    }
    Ok(t_prev / t_next)
}

/// Signed relative speedup error in percent: `(s_ref − s_sim) / s_ref × 100`.
/// Negative when the simulation overestimates the speedup.
pub fn speedup_error(s_ref: f64, s_sim: f64) -> Result<f64, MetricsError> {
    if s_ref.is_nan() || s_ref <= 0.0 {
        return Err(MetricsError::NonPositiveSpeedup(s_ref));
    }
    Ok((s_ref - s_sim) / s_ref * 100.0)
}

/// Mean of absolute values.
pub fn mean_absolute(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64)
}
