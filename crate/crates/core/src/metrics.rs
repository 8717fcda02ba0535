//! Forecast error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::invalid("metric needs at least one value"));
    }
    Ok(())
}

/// `e_t = y_t - F_t`
pub fn error_series(actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    check_pair(actual, predicted)?;
    Ok(actual.iter().zip(predicted).map(|(y, f)| y - f).collect())
}

/// Mean of squared errors.
pub fn mse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::invalid("mse of an empty error series"));
    }
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(y, f)| (y - f).abs())
        .sum::<f64>()
        / actual.len() as f64)
}

struct Moments {
    mean_a: f64,
    mean_p: f64,
    saa: f64,
    spp: f64,
    sap: f64,
}

fn moments(actual: &[f64], predicted: &[f64]) -> Result<Moments> {
    check_pair(actual, predicted)?;
    if actual.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: actual.len(),
        });
    }
    let n = actual.len() as f64;
    let mean_a = actual.iter().sum::<f64>() / n;
    let mean_p = predicted.iter().sum::<f64>() / n;
    let (mut saa, mut spp, mut sap) = (0.0, 0.0, 0.0);
    for (a, p) in actual.iter().zip(predicted) {
        let da = a - mean_a;
        let dp = p - mean_p;
        saa += da * da;
        spp += dp * dp;
        sap += da * dp;
    }
    if !(saa.is_finite() && spp.is_finite() && sap.is_finite()) {
        return Err(Error::NonFinite("correlation inputs"));
    }
    if saa == 0.0 {
        return Err(Error::UndefinedCorrelation("actual"));
    }
    if spp == 0.0 {
        return Err(Error::UndefinedCorrelation("predicted"));
    }
    Ok(Moments {
        mean_a,
        mean_p,
        saa,
        spp,
        sap,
    })
}

/// Pearson correlation between actual and predicted, times 100.
pub fn correlation_pct(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let m = moments(actual, predicted)?;
    let r = m.sap / (m.saa.sqrt() * m.spp.sqrt());
    Ok(100.0 * r.clamp(-1.0, 1.0))
}

/// Least-squares line `actual ~= slope * predicted + intercept`.
pub fn regression_line(actual: &[f64], predicted: &[f64]) -> Result<(f64, f64)> {
    let m = moments(actual, predicted)?;
    let slope = m.sap / m.spp;
    Ok((slope, m.mean_a - slope * m.mean_p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub r_pct: f64,
    /// `(r_pct / 100)^2`, the coefficient of determination of the regression line.
    pub r2: f64,
    pub regression_slope: f64,
    pub regression_intercept: f64,
}

impl EvalReport {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        let errors = error_series(actual, predicted)?;
        let r_pct = correlation_pct(actual, predicted)?;
        let (slope, intercept) = regression_line(actual, predicted)?;
        Ok(Self {
            n: actual.len(),
            mse: mse(&errors)?,
            mae: mae(actual, predicted)?,
            r_pct,
            r2: (r_pct / 100.0).powi(2),
            regression_slope: slope,
            regression_intercept: intercept,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn error_series_sign_convention() {
        assert_eq!(
            error_series(&[5.0, 3.0], &[5.0, 3.0]).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(error_series(&[4.0], &[1.0]).unwrap(), vec![3.0]);
        assert_eq!(
            error_series(&[2.0, 0.0, -1.0], &[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, -1.0, -2.0]
        );
        assert!(error_series(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, -1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mse(&[1.5]).unwrap(), 2.25);
        assert!(mse(&[]).is_err());
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, -1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(mae(&[], &[]).is_err());
        assert!(mae(&[1.0], &[]).is_err());
    }

    #[test]
    fn correlation_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(correlation_pct(&a, &a).unwrap(), 100.0, epsilon = 1e-12);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert_relative_eq!(correlation_pct(&a, &neg).unwrap(), -100.0, epsilon = 1e-12);
        // Hand calculation: mean(p) = 2.5, deviations a: -1.5 -.5 .5 1.5,
        // p: -1.4 -.6 .7 1.3; sum(da*dp) = 4.7, sum(dp^2) = 4.5, sum(da^2) = 5
        // r = 4.7 / sqrt(22.5) = 0.990846...
        let p = [1.1, 1.9, 3.2, 3.8];
        assert_relative_eq!(
            correlation_pct(&a, &p).unwrap(),
            100.0 * 4.7 / 22.5f64.sqrt(),
            epsilon = 1e-10
        );
        assert!(matches!(
            correlation_pct(&a, &[2.0; 4]),
            Err(Error::UndefinedCorrelation("predicted"))
        ));
        assert!(correlation_pct(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn regression_examples() {
        let a = [1.0, 4.0, 2.0, 8.0];
        let (s, i) = regression_line(&a, &a).unwrap();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        assert_relative_eq!(i, 0.0, epsilon = 1e-12);
        let shifted: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
        let (s, i) = regression_line(&a, &shifted).unwrap();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        assert_relative_eq!(i, -5.0, epsilon = 1e-12);
    }

    #[test]
    fn regression_residuals_are_orthogonal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let p: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..10.0)).collect();
        let a: Vec<f64> = p
            .iter()
            .map(|v| 0.7 * v + rng.random_range(-2.0..2.0))
            .collect();
        let (s, i) = regression_line(&a, &p).unwrap();
        let resid: Vec<f64> = a.iter().zip(&p).map(|(y, x)| y - (s * x + i)).collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-9);
        assert!(resid.iter().zip(&p).map(|(r, x)| r * x).sum::<f64>().abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn mae_bounded_by_rmse(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40)) {
            let (a, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let e = error_series(&a, &p).unwrap();
            prop_assert!(mae(&a, &p).unwrap() <= mse(&e).unwrap().sqrt() + 1e-12);
        }

        #[test]
        fn correlation_in_range(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40)) {
            let (a, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            if let Ok(r) = correlation_pct(&a, &p) {
                prop_assert!((-100.0..=100.0).contains(&r));
            }
        }
    }
}
