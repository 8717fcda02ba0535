//! Meteorological CSV ingestion and output.
//!
//! Schema: `timestamp,wind_speed,temperature,pressure` with ISO-8601 minute
//! timestamps, m/s, degrees C and mb. Extra columns are ignored. Rows that fail
//! to parse or violate record invariants go to the rejects list.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use anfis_core::{MeteoRecord, MeteoSeries};
use chrono::{NaiveDateTime, TimeDelta};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 4] = ["timestamp", "wind_speed", "temperature", "pressure"];

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%d %H:%M:%S",
];

pub const TIMESTAMP_OUT: &str = "%Y-%m-%dT%H:%M";

/// Share of rejected rows above which ingestion fails outright.
pub const MAX_REJECT_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// 1-based line number in the file (header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ParsedCsv {
    pub series: MeteoSeries,
    pub rejects: Vec<Reject>,
    pub total_rows: usize,
    pub ignored_columns: Vec<String>,
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format(TIMESTAMP_OUT).to_string()
}

pub fn parse_csv(path: impl AsRef<Path>) -> Result<ParsedCsv> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_csv_reader(file).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Most frequent positive step between consecutive timestamps.
fn infer_cadence(records: &[MeteoRecord]) -> TimeDelta {
    let mut counts: BTreeMap<TimeDelta, usize> = BTreeMap::new();
    for w in records.windows(2) {
        let step = w[1].timestamp - w[0].timestamp;
        if step > TimeDelta::zero() {
            *counts.entry(step).or_default() += 1;
        }
    }
    // ties go to the shorter step
    counts
        .into_iter()
        .fold(
            None,
            |best: Option<(TimeDelta, usize)>, (step, n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((step, n)),
            },
        )
        .map(|(s, _)| s)
        .unwrap_or_else(|| TimeDelta::minutes(1))
}

pub fn parse_csv_reader<R: Read>(reader: R) -> Result<ParsedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("unreadable header: {e}")))?
        .clone();
    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        index.entry(h.to_ascii_lowercase()).or_insert(i);
    }
    let mut cols = [0usize; 4];
    for (slot, name) in cols.iter_mut().zip(HEADER) {
        *slot = *index
            .get(name)
            .ok_or_else(|| CliError::Data(format!("missing required column `{name}`")))?;
    }
    let ignored_columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !cols.contains(i))
        .map(|(_, h)| h.to_string())
        .collect();
    if !ignored_columns.is_empty() {
        log::info!("ignoring extra columns: {}", ignored_columns.join(", "));
    }

    let mut accepted: Vec<(u64, MeteoRecord)> = Vec::new();
    let mut rejects = Vec::new();
    let mut total_rows = 0usize;
    for (i, row) in rdr.records().enumerate() {
        total_rows += 1;
        let line = i as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejects.push(Reject {
                    line,
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        };
        match parse_row(&row, &cols) {
            Ok(rec) => accepted.push((line, rec)),
            Err(reason) => rejects.push(Reject { line, reason }),
        }
    }

    // stable sort keeps file order among duplicates; the first one wins
    accepted.sort_by_key(|(_, r)| r.timestamp);
    let mut records: Vec<MeteoRecord> = Vec::with_capacity(accepted.len());
    for (line, rec) in accepted {
        if records.last().is_some_and(|p| p.timestamp == rec.timestamp) {
            rejects.push(Reject {
                line,
                reason: format!("duplicate timestamp {}", format_timestamp(rec.timestamp)),
            });
            continue;
        }
        records.push(rec);
    }
    rejects.sort_by_key(|r| r.line);

    if total_rows == 0 {
        return Err(CliError::Data("no data rows".into()));
    }
    let frac = rejects.len() as f64 / total_rows as f64;
    if frac > MAX_REJECT_FRACTION {
        let first = rejects
            .first()
            .map(|r| format!(" (first: line {}: {})", r.line, r.reason))
            .unwrap_or_default();
        return Err(CliError::Data(format!(
            "{} of {} rows rejected, above the {:.0}% limit{first}",
            rejects.len(),
            total_rows,
            MAX_REJECT_FRACTION * 100.0
        )));
    }
    for r in rejects.iter().take(20) {
        log::warn!("rejected line {}: {}", r.line, r.reason);
    }
    if rejects.len() > 20 {
        log::warn!("... {} more rejected rows", rejects.len() - 20);
    }

    let cadence = infer_cadence(&records);
    let series = MeteoSeries::new(records, cadence)?;
    Ok(ParsedCsv {
        series,
        rejects,
        total_rows,
        ignored_columns,
    })
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &[usize; 4],
) -> std::result::Result<MeteoRecord, String> {
    let field = |k: usize| {
        row.get(cols[k])
            .ok_or_else(|| format!("missing `{}`", HEADER[k]))
    };
    let ts_raw = field(0)?;
    let timestamp = parse_timestamp(ts_raw).ok_or_else(|| format!("bad timestamp `{ts_raw}`"))?;
    let num = |k: usize| -> std::result::Result<f64, String> {
        let raw = field(k)?;
        raw.parse::<f64>()
            .map_err(|_| format!("bad {} `{raw}`", HEADER[k]))
    };
    let rec = MeteoRecord {
        timestamp,
        wind_speed: num(1)?,
        temperature: num(2)?,
        pressure: num(3)?,
    };
    rec.validate().map_err(|e| e.to_string())?;
    Ok(rec)
}

pub fn write_series<W: Write>(series: &MeteoSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| CliError::Data(format!("writing csv: {e}"));
    w.write_record(HEADER).map_err(wrap)?;
    for r in series.records() {
        w.write_record([
            format_timestamp(r.timestamp),
            r.wind_speed.to_string(),
            r.temperature.to_string(),
            r.pressure.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush()
        .map_err(|e| CliError::Data(format!("writing csv: {e}")))?;
    Ok(())
}

pub fn write_series_file(series: &MeteoSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_series(series, std::io::BufWriter::new(file))
}
