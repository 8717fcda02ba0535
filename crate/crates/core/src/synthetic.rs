//! Deterministic synthetic meteorological series for tests, benches and demos.

use std::f64::consts::TAU;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::timeseries::{encode_date, MeteoRecord, MeteoSeries};

const STEPS_PER_DAY: f64 = 144.0;

pub fn default_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2010, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

/// Daily wind cycle plus slow seasonal drift plus AR(1) noise, at 10-minute cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalConfig {
    pub samples: usize,
    pub start: NaiveDateTime,
    pub seed: u64,
    pub base_wind: f64,
    pub diurnal_amplitude: f64,
    pub seasonal_amplitude: f64,
    /// Period of the seasonal drift in days.
    pub seasonal_period_days: f64,
    /// AR(1) coefficient per 10-minute step.
    pub ar_coeff: f64,
    /// Stationary standard deviation of the AR(1) component.
    pub ar_std: f64,
}

impl Default for SeasonalConfig {
    fn default() -> Self {
        Self {
            samples: 17_000,
            start: default_start(),
            seed: 42,
            base_wind: 8.0,
            diurnal_amplitude: 1.5,
            seasonal_amplitude: 1.5,
            seasonal_period_days: 60.0,
            ar_coeff: 0.995,
            ar_std: 2.0,
        }
    }
}

fn normal(std: f64) -> Normal<f64> {
    Normal::new(0.0, std).expect("finite std")
}

pub fn seasonal_series(cfg: &SeasonalConfig) -> Result<MeteoSeries> {
    if cfg.ar_coeff.is_nan() || cfg.ar_coeff.abs() >= 1.0 {
        return Err(Error::invalid("AR coefficient must lie in (-1, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let innov = normal(cfg.ar_std * (1.0 - cfg.ar_coeff * cfg.ar_coeff).sqrt());
    let small = normal(0.2);
    let mut ar = normal(cfg.ar_std).sample(&mut rng);
    let mut recs = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let t = i as f64;
        let day_phase = TAU * t / STEPS_PER_DAY;
        let season = TAU * t / (STEPS_PER_DAY * cfg.seasonal_period_days);
        if i > 0 {
            ar = cfg.ar_coeff * ar + innov.sample(&mut rng);
        }
        let wind = cfg.base_wind
            + cfg.diurnal_amplitude * day_phase.sin()
            + cfg.seasonal_amplitude * season.sin()
            + ar;
        let temperature =
            26.0 - 4.0 * day_phase.cos() - 1.5 * season.sin() + small.sample(&mut rng);
        let pressure =
            1010.0 + 2.0 * (TAU * t / (STEPS_PER_DAY * 7.0)).sin() + 1.2 * day_phase.sin()
                - 0.3 * ar
                + small.sample(&mut rng);
        recs.push(MeteoRecord {
            timestamp: cfg.start + TimeDelta::minutes(10 * i as i64),
            wind_speed: wind.max(0.0),
            temperature,
            pressure,
        });
    }
    MeteoSeries::new(recs, TimeDelta::minutes(10))
}

/// Coefficients of the linear law `wind(t + P) = c . [date, pressure, temperature, wind, 1]`.
pub const PLANTED_COEFFS: [f64; 5] = [0.01, -0.05, 0.1, 0.6, 51.5];

/// 10-minute series whose wind obeys an exact first-order Sugeno law with a single
/// linear consequent `horizon` steps ahead. Any grid model reproduces it exactly.
pub fn planted_linear_series(samples: usize, horizon: usize, seed: u64) -> Result<MeteoSeries> {
    if horizon == 0 || samples <= horizon {
        return Err(Error::invalid(
            "planted series needs samples > horizon >= 1",
        ));
    }
    let start = default_start();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = normal(0.3);
    let c = PLANTED_COEFFS;
    let mut recs: Vec<MeteoRecord> = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64;
        let ts = start + TimeDelta::minutes(10 * i as i64);
        let temperature = 26.0 - 4.0 * (TAU * t / STEPS_PER_DAY).cos() + noise.sample(&mut rng);
        let pressure =
            1010.0 + 3.0 * (TAU * t / (STEPS_PER_DAY * 5.0)).sin() + noise.sample(&mut rng);
        let wind = if i < horizon {
            8.0 + 2.0 * noise.sample(&mut rng)
        } else {
            let o = &recs[i - horizon];
            c[0] * encode_date(o.timestamp)
                + c[1] * o.pressure
                + c[2] * o.temperature
                + c[3] * o.wind_speed
                + c[4]
        };
        recs.push(MeteoRecord {
            timestamp: ts,
            wind_speed: wind,
            temperature,
            pressure,
        });
    }
    MeteoSeries::new(recs, TimeDelta::minutes(10))
}

/// Expands a 10-minute series into ten 1-minute readings per record whose mean
/// is the original value. With `jitter > 0` the readings scatter around it.
pub fn expand_to_minutes(series: &MeteoSeries, jitter: f64, seed: u64) -> Result<MeteoSeries> {
    if series.cadence() != TimeDelta::minutes(10) {
        return Err(Error::invalid("expansion expects a 10-minute series"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = normal(jitter.max(0.0));
    let mut out = Vec::with_capacity(series.len() * 10);
    for r in series.records() {
        let mut offsets = [0.0f64; 10];
        if jitter > 0.0 {
            offsets.iter_mut().for_each(|o| *o = dist.sample(&mut rng));
            let mean = offsets.iter().sum::<f64>() / 10.0;
            // keep every reading non-negative
            let floor = offsets.iter().map(|o| o - mean).fold(0.0f64, f64::min);
            let shrink = if r.wind_speed + floor < 0.0 {
                r.wind_speed / -floor
            } else {
                1.0
            };
            offsets.iter_mut().for_each(|o| *o = (*o - mean) * shrink);
        }
        for (k, o) in offsets.iter().enumerate() {
            out.push(MeteoRecord {
                timestamp: r.timestamp + TimeDelta::minutes(k as i64),
                wind_speed: (r.wind_speed + o).max(0.0),
                temperature: r.temperature + o * 0.1,
                pressure: r.pressure,
            });
        }
    }
    MeteoSeries::new(out, TimeDelta::minutes(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::resample_10min;

    #[test]
    fn seasonal_is_deterministic() {
        let cfg = SeasonalConfig {
            samples: 500,
            ..SeasonalConfig::default()
        };
        let a = seasonal_series(&cfg).unwrap();
        let b = seasonal_series(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.gaps().is_empty());
        let other = seasonal_series(&SeasonalConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn planted_law_holds() {
        let s = planted_linear_series(400, 20, 1).unwrap();
        let r = s.records();
        let c = PLANTED_COEFFS;
        for i in 20..400 {
            let o = &r[i - 20];
            let expect = c[0] * encode_date(o.timestamp)
                + c[1] * o.pressure
                + c[2] * o.temperature
                + c[3] * o.wind_speed
                + c[4];
            assert_eq!(r[i].wind_speed, expect);
            assert!(expect > 0.0);
        }
    }

    #[test]
    fn expansion_resamples_back() {
        let s = seasonal_series(&SeasonalConfig {
            samples: 50,
            ..SeasonalConfig::default()
        })
        .unwrap();
        let raw = expand_to_minutes(&s, 0.5, 3).unwrap();
        assert_eq!(raw.len(), 500);
        let (back, _) = resample_10min(&raw, 5).unwrap();
        for (a, b) in back.records().iter().zip(s.records()) {
            assert_eq!(a.timestamp, b.timestamp);
            assert!((a.wind_speed - b.wind_speed).abs() < 1e-12);
            assert!((a.temperature - b.temperature).abs() < 1e-12);
        }
    }
}
