//! Machine-readable train and evaluation reports.

use std::path::Path;

use anfis_core::{EvalReport, ParamBounds, StopReason};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Forecast quality over a set of examples. Correlation-derived fields are
/// `None` when either series is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub r_pct: Option<f64>,
    pub r2: Option<f64>,
    pub regression_slope: Option<f64>,
    pub regression_intercept: Option<f64>,
}

impl Metrics {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        match EvalReport::compute(actual, predicted) {
            Ok(r) => Ok(Self {
                n: r.n,
                mse: r.mse,
                mae: r.mae,
                r_pct: Some(r.r_pct),
                r2: Some(r.r2),
                regression_slope: Some(r.regression_slope),
                regression_intercept: Some(r.regression_intercept),
            }),
            Err(anfis_core::Error::UndefinedCorrelation(which)) => {
                log::warn!("correlation undefined: {which} series is constant");
                let errors = anfis_core::error_series(actual, predicted)?;
                Ok(Self {
                    n: actual.len(),
                    mse: anfis_core::mse(&errors)?,
                    mae: anfis_core::mae(actual, predicted)?,
                    r_pct: None,
                    r2: None,
                    regression_slope: None,
                    regression_intercept: None,
                })
            }
            Err(e) => Err(e.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEcho {
    pub lags: usize,
    pub delta: usize,
    pub horizon: usize,
    pub horizon_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfigEcho {
    pub epochs: usize,
    pub tolerance: f64,
    pub learning_rate: f64,
    pub step_decay: f64,
    pub param_bounds: ParamBounds,
    pub mf_family: String,
    pub mf_count: usize,
    pub train_fraction: f64,
    pub embedding: EmbeddingEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleCounts {
    pub total: usize,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRunReport {
    pub config: TrainConfigEcho,
    pub examples: ExampleCounts,
    pub mse_per_epoch: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub stop_reason: StopReason,
    pub epochs_run: usize,
    pub final_mse: f64,
    pub wall_time_secs: f64,
    pub train: Metrics,
    pub test: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRunReport {
    pub horizon_label: String,
    pub horizon: usize,
    pub subset: String,
    pub epochs_run: usize,
    pub metrics: Metrics,
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serializing report: {e}")))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CliError::io(path, e))
}

fn fmt_mse(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

/// One line in the layout `16h  r=81.118  epochs=6  mse=1.633`.
pub fn summary_line(label: &str, r_pct: Option<f64>, epochs: usize, mse: f64) -> String {
    let r = r_pct.map_or_else(|| "undefined".to_string(), |r| format!("{r:.3}"));
    format!("{label}  r={r}  epochs={epochs}  mse={}", fmt_mse(mse))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        assert_eq!(
            summary_line("16h", Some(81.1184), 6, 1.6331),
            "16h  r=81.118  epochs=6  mse=1.633"
        );
        assert_eq!(
            summary_line("48h", None, 2, 0.0),
            "48h  r=undefined  epochs=2  mse=0.000"
        );
        assert_eq!(
            summary_line("24h", Some(100.0), 1, 2.5e-11),
            "24h  r=100.000  epochs=1  mse=2.500e-11"
        );
    }

    #[test]
    fn perfect_forecast() {
        let a = [1.0, 2.0, 4.0, 3.0];
        let m = Metrics::compute(&a, &a).unwrap();
        assert_eq!((m.mse, m.mae), (0.0, 0.0));
        assert!((m.r_pct.unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn constant_actuals_leave_correlation_empty() {
        let m = Metrics::compute(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.r_pct, None);
        assert!((m.mse - 2.0 / 3.0).abs() < 1e-15);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"r_pct\":null"));
    }
}
