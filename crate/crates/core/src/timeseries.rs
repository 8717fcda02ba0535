//! Fixed-cadence meteorological series: averaging, time-delay embedding and
//! chronological splitting.

use chrono::{Datelike, NaiveDateTime, TimeDelta, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteoRecord {
    pub timestamp: NaiveDateTime,
    /// m/s
    pub wind_speed: f64,
    /// degrees C
    pub temperature: f64,
    /// mb
    pub pressure: f64,
}

impl MeteoRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.wind_speed.is_finite()
            && self.temperature.is_finite()
            && self.pressure.is_finite())
        {
            return Err(Error::NonFinite("meteorological record"));
        }
        if self.wind_speed < 0.0 {
            return Err(Error::invalid(format!(
                "negative wind speed {}",
                self.wind_speed
            )));
        }
        if self.pressure <= 0.0 {
            return Err(Error::invalid(format!(
                "non-positive pressure {}",
                self.pressure
            )));
        }
        Ok(())
    }
}

/// Records at a fixed cadence. Any step between consecutive records other than
/// exactly one cadence is a gap.
#[derive(Debug, Clone, PartialEq)]
pub struct MeteoSeries {
    records: Vec<MeteoRecord>,
    cadence: TimeDelta,
    /// `i` in this list means there is a gap between records `i` and `i + 1`.
    gaps: Vec<usize>,
}

impl MeteoSeries {
    pub fn new(records: Vec<MeteoRecord>, cadence: TimeDelta) -> Result<Self> {
        if cadence <= TimeDelta::zero() {
            return Err(Error::invalid("cadence must be positive"));
        }
        for r in &records {
            r.validate()?;
        }
        let mut gaps = Vec::new();
        for (i, pair) in records.windows(2).enumerate() {
            let step = pair[1].timestamp - pair[0].timestamp;
            if step <= TimeDelta::zero() {
                return Err(Error::invalid(format!(
                    "timestamps not strictly increasing at {}",
                    pair[1].timestamp
                )));
            }
            if step != cadence {
                gaps.push(i);
            }
        }
        Ok(Self {
            records,
            cadence,
            gaps,
        })
    }

    pub fn records(&self) -> &[MeteoRecord] {
        &self.records
    }

    pub fn cadence(&self) -> TimeDelta {
        self.cadence
    }

    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Index ranges of the gap-free stretches, in order.
    pub fn segments(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut start = 0;
        for &g in &self.gaps {
            out.push(start..g + 1);
            start = g + 1;
        }
        if start < self.records.len() {
            out.push(start..self.records.len());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResampleStats {
    /// Buckets that held at least one raw record.
    pub buckets_seen: usize,
    pub buckets_emitted: usize,
    /// Buckets dropped for holding fewer than the minimum count.
    pub buckets_sparse: usize,
    /// Gaps in the output series.
    pub gaps: usize,
}

pub const DEFAULT_MIN_BUCKET_COUNT: usize = 5;

fn bucket_start(ts: NaiveDateTime, minutes: u32) -> NaiveDateTime {
    let m = ts.minute() - ts.minute() % minutes;
    ts.with_minute(m)
        .and_then(|t| t.with_second(0))
        .and_then(|t| t.with_nanosecond(0))
        .expect("minute within hour")
}

/// Averages a 1-minute series into aligned 10-minute buckets (:00, :10, ..).
/// Buckets with fewer than `min_count` records are dropped and show up as gaps.
pub fn resample_10min(raw: &MeteoSeries, min_count: usize) -> Result<(MeteoSeries, ResampleStats)> {
    if raw.cadence() != TimeDelta::minutes(1) {
        return Err(Error::invalid(format!(
            "resampling expects a 1-minute series, got {} s cadence",
            raw.cadence().num_seconds()
        )));
    }
    if min_count == 0 || min_count > 10 {
        return Err(Error::invalid("minimum bucket count must lie in 1..=10"));
    }
    if raw
        .records()
        .windows(2)
        .any(|w| w[1].timestamp <= w[0].timestamp)
    {
        return Err(Error::invalid("raw series is not sorted"));
    }

    let mut out = Vec::new();
    let mut stats = ResampleStats {
        buckets_seen: 0,
        buckets_emitted: 0,
        buckets_sparse: 0,
        gaps: 0,
    };
    let recs = raw.records();
    let mut i = 0;
    while i < recs.len() {
        let key = bucket_start(recs[i].timestamp, 10);
        let mut j = i;
        while j < recs.len() && bucket_start(recs[j].timestamp, 10) == key {
            j += 1;
        }
        let bucket = &recs[i..j];
        stats.buckets_seen += 1;
        if bucket.len() >= min_count {
            let n = bucket.len() as f64;
            out.push(MeteoRecord {
                timestamp: key,
                wind_speed: bucket.iter().map(|r| r.wind_speed).sum::<f64>() / n,
                temperature: bucket.iter().map(|r| r.temperature).sum::<f64>() / n,
                pressure: bucket.iter().map(|r| r.pressure).sum::<f64>() / n,
            });
            stats.buckets_emitted += 1;
        } else {
            stats.buckets_sparse += 1;
        }
        i = j;
    }
    let series = MeteoSeries::new(out, TimeDelta::minutes(10))?;
    stats.gaps = series.gaps().len();
    Ok((series, stats))
}

/// Day of year plus the fraction of the day elapsed: Jan 1 00:00 is 1.0.
pub fn encode_date(ts: NaiveDateTime) -> f64 {
    let secs = ts.num_seconds_from_midnight() as f64;
    ts.ordinal() as f64 + secs / 86_400.0
}

/// Time-delay embedding parameters, all in cadence steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    /// Number of lagged wind samples (D).
    pub lags: usize,
    /// Spacing between lags (delta).
    pub delta: usize,
    /// Forecast horizon (P).
    pub horizon: usize,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self {
            lags: 1,
            delta: 1,
            horizon: 100,
        }
    }
}

impl EmbeddingSpec {
    pub fn new(lags: usize, delta: usize, horizon: usize) -> Result<Self> {
        let s = Self {
            lags,
            delta,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lags < 1 || self.delta < 1 || self.horizon < 1 {
            return Err(Error::invalid(format!(
                "embedding parameters must be >= 1, got D={} delta={} P={}",
                self.lags, self.delta, self.horizon
            )));
        }
        Ok(())
    }

    /// Steps of history a feature row reaches back from `t`.
    pub fn history(&self) -> usize {
        (self.lags - 1) * self.delta
    }

    /// Shortest gap-free stretch that yields one example.
    pub fn required_len(&self) -> usize {
        self.history() + self.horizon + 1
    }

    pub fn n_features(&self) -> usize {
        3 + self.lags
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = vec!["date".to_string(), "pressure".into(), "temperature".into()];
        for k in (0..self.lags).rev() {
            let back = k * self.delta;
            names.push(if back == 0 {
                "wind(t)".to_string()
            } else {
                format!("wind(t-{back})")
            });
        }
        names
    }

    fn features(&self, recs: &[MeteoRecord], t: usize) -> Vec<f64> {
        let r = &recs[t];
        let mut row = Vec::with_capacity(self.n_features());
        row.extend([encode_date(r.timestamp), r.pressure, r.temperature]);
        for k in (0..self.lags).rev() {
            row.push(recs[t - k * self.delta].wind_speed);
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    /// Columns: date, pressure, temperature, then wind lags oldest to newest.
    pub inputs: Matrix,
    /// Wind speed `horizon` steps after each row's origin.
    pub targets: Vec<f64>,
    pub spec: EmbeddingSpec,
    pub feature_names: Vec<String>,
    /// Timestamp `t` of each row.
    pub origin_times: Vec<NaiveDateTime>,
    /// Timestamp `t + P` of each target.
    pub target_times: Vec<NaiveDateTime>,
}

impl EmbeddedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            inputs: self.inputs.slice_rows(range.clone()),
            targets: self.targets[range.clone()].to_vec(),
            spec: self.spec,
            feature_names: self.feature_names.clone(),
            origin_times: self.origin_times[range.clone()].to_vec(),
            target_times: self.target_times[range].to_vec(),
        }
    }
}

/// Builds supervised examples from every admissible origin `t`; no example
/// straddles a gap.
pub fn embed(series: &MeteoSeries, spec: EmbeddingSpec) -> Result<EmbeddedDataset> {
    spec.validate()?;
    let recs = series.records();
    let mut rows: Vec<f64> = Vec::new();
    let mut targets = Vec::new();
    let mut origin_times = Vec::new();
    let mut target_times = Vec::new();
    let mut longest = 0;
    for seg in series.segments() {
        longest = longest.max(seg.len());
        if seg.len() < spec.required_len() {
            continue;
        }
        for t in seg.start + spec.history()..seg.end - spec.horizon {
            rows.extend(spec.features(recs, t));
            targets.push(recs[t + spec.horizon].wind_speed);
            origin_times.push(recs[t].timestamp);
            target_times.push(recs[t + spec.horizon].timestamp);
        }
    }
    if targets.is_empty() {
        return Err(Error::InsufficientData {
            required: spec.required_len(),
            available: longest,
        });
    }
    Ok(EmbeddedDataset {
        inputs: Matrix::from_vec(targets.len(), spec.n_features(), rows)?,
        targets,
        spec,
        feature_names: spec.feature_names(),
        origin_times,
        target_times,
    })
}

/// Feature rows whose target lies past the end of the series: origins in the
/// final stretch with full history but fewer than `horizon` steps of future.
/// Returns the rows and their (projected) target timestamps.
pub fn embed_forecast_tail(
    series: &MeteoSeries,
    spec: EmbeddingSpec,
) -> Result<(Matrix, Vec<NaiveDateTime>)> {
    spec.validate()?;
    let recs = series.records();
    let mut rows = Vec::new();
    let mut times = Vec::new();
    if let Some(seg) = series.segments().pop() {
        let first = (seg.start + spec.history()).max(seg.end.saturating_sub(spec.horizon));
        for t in first..seg.end {
            rows.extend(spec.features(recs, t));
            times.push(recs[t].timestamp + series.cadence() * spec.horizon as i32);
        }
    }
    Ok((
        Matrix::from_vec(times.len(), spec.n_features(), rows)?,
        times,
    ))
}

/// Cadence steps for a forecast horizon in hours. At 10-minute cadence the
/// 16/24/48 h presets map to 100/144/288 steps; anything else is rounded.
pub fn horizon_to_steps(hours: f64, cadence: TimeDelta) -> Result<usize> {
    if !(hours > 0.0 && hours.is_finite()) {
        return Err(Error::invalid(format!(
            "horizon must be positive, got {hours} h"
        )));
    }
    let cadence_min = cadence.num_seconds() as f64 / 60.0;
    if cadence_min <= 0.0 {
        return Err(Error::invalid("cadence must be positive"));
    }
    if cadence == TimeDelta::minutes(10) {
        for (h, p) in HORIZON_PRESETS {
            if hours == h {
                return Ok(p);
            }
        }
    }
    let steps = (hours * 60.0 / cadence_min).round() as usize;
    if steps == 0 {
        return Err(Error::invalid(format!(
            "horizon {hours} h is shorter than one step"
        )));
    }
    Ok(steps)
}

/// `(hours, steps)` at 10-minute cadence.
pub const HORIZON_PRESETS: [(f64, usize); 3] = [(16.0, 100), (24.0, 144), (48.0, 288)];

/// First `floor(fraction * n)` examples for training, the rest for testing.
pub fn split_chronological(
    ds: &EmbeddedDataset,
    train_fraction: f64,
) -> Result<(EmbeddedDataset, EmbeddedDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = ds.len();
    let cut = (train_fraction * n as f64).floor() as usize;
    if cut == 0 || cut == n {
        return Err(Error::InsufficientData {
            required: 2,
            available: n,
        });
    }
    Ok((ds.slice(0..cut), ds.slice(cut..n)))
}
