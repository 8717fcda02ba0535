use std::io::Write;
use std::path::Path;

use anfis_core::synthetic::{
    expand_to_minutes, planted_linear_series, seasonal_series, SeasonalConfig,
};
use anfis_core::{
    embed, embed_forecast_tail, horizon_to_steps, resample_10min, split_chronological, AnfisModel,
    EmbeddedDataset, EmbeddingSpec, InputSpec, MeteoSeries, MfFamily, StopReason, TrainConfig,
};
use chrono::TimeDelta;

use crate::args::{
    Cli, Command, EvaluateArgs, FamilyArg, PredictArgs, ResampleArgs, Subset, SynthArgs, SynthKind,
    TrainArgs,
};
use crate::csv_io::{format_timestamp, parse_csv, write_series_file};
use crate::error::{CliError, Result};
use crate::model_file::{data_fingerprint, ModelFile, TrainingMeta};
use crate::report::{
    summary_line, write_json, EmbeddingEcho, EvalRunReport, ExampleCounts, Metrics,
    TrainConfigEcho, TrainRunReport,
};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Resample(a) => cmd_resample(&a, out),
        Command::Train(a) => cmd_train(&a, out).map(|_| ()),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out).map(|_| ()),
        Command::Synth(a) => cmd_synth(&a, out),
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::io("<stdout>", e))
}

pub fn cmd_resample(a: &ResampleArgs, out: &mut dyn Write) -> Result<()> {
    if !(1..=10).contains(&a.min_count) {
        return Err(CliError::Usage("--min-count must lie in 1..=10".into()));
    }
    let parsed = parse_csv(&a.input)?;
    let (series, stats) = resample_10min(&parsed.series, a.min_count)?;
    if series.is_empty() {
        return Err(CliError::Data(format!(
            "no 10-minute bucket reached {} readings",
            a.min_count
        )));
    }
    write_series_file(&series, &a.output)?;
    say(
        out,
        format!(
            "read {} rows ({} rejected); buckets: {} seen, {} emitted, {} sparse; gaps: {}",
            parsed.total_rows,
            parsed.rejects.len(),
            stats.buckets_seen,
            stats.buckets_emitted,
            stats.buckets_sparse,
            stats.gaps
        ),
    )
}

/// Horizon in steps and its display label.
pub fn resolve_horizon(arg: &str, cadence: TimeDelta) -> Result<(usize, String)> {
    let arg = arg.trim();
    if let Some(h) = arg.strip_suffix(['h', 'H']) {
        let hours: f64 = h
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad horizon `{arg}`")))?;
        let steps = horizon_to_steps(hours, cadence).map_err(|e| CliError::Usage(e.to_string()))?;
        return Ok((steps, format!("{hours}h")));
    }
    let steps: usize = arg
        .parse()
        .map_err(|_| CliError::Usage(format!("bad horizon `{arg}`, expected e.g. 16h or 100")))?;
    if steps == 0 {
        return Err(CliError::Usage("horizon must be at least one step".into()));
    }
    let minutes = cadence.num_minutes() * steps as i64;
    let label = if minutes > 0 && minutes % 60 == 0 {
        format!("{}h", minutes / 60)
    } else {
        format!("{steps} steps")
    };
    Ok((steps, label))
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let cfg = TrainConfig {
        epochs: a.epochs,
        tolerance: a.tolerance,
        learning_rate: a.learning_rate,
        step_decay: a.step_decay,
        ..TrainConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if !(a.train_fraction > 0.0 && a.train_fraction < 1.0) {
        return Err(CliError::Usage(format!(
            "--train-fraction must lie in (0, 1), got {}",
            a.train_fraction
        )));
    }
    if a.mf_count < 2 {
        return Err(CliError::Usage("--mf-count must be at least 2".into()));
    }
    if a.lags < 1 || a.delta < 1 {
        return Err(CliError::Usage(
            "--lags and --delta must be at least 1".into(),
        ));
    }
    Ok(cfg)
}

fn family(f: FamilyArg) -> MfFamily {
    match f {
        FamilyArg::Gaussian => MfFamily::Gaussian,
        FamilyArg::Bell => MfFamily::Bell,
    }
}

fn check_cadence(series: &MeteoSeries) {
    if series.cadence() != TimeDelta::minutes(10) {
        log::warn!(
            "series cadence is {} min, not 10; run `resample` first for 1-minute data",
            series.cadence().num_minutes()
        );
    }
}

pub struct TrainOutcome {
    pub model: ModelFile,
    pub report: TrainRunReport,
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<TrainOutcome> {
    let cfg = train_config(a)?;
    let series = parse_csv(&a.data)?.series;
    check_cadence(&series);
    let (steps, label) = resolve_horizon(&a.horizon, series.cadence())?;
    let spec =
        EmbeddingSpec::new(a.lags, a.delta, steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let ds = embed(&series, spec)?;
    let (train_ds, test_ds) = split_chronological(&ds, a.train_fraction)?;
    log::info!(
        "{} examples ({} train, {} test), horizon {label} = {steps} steps",
        ds.len(),
        train_ds.len(),
        test_ds.len()
    );

    let inputs = (0..spec.n_features())
        .map(|j| {
            InputSpec::from_values(
                ds.feature_names[j].clone(),
                &train_ds.inputs.column(j),
                a.mf_count,
            )
        })
        .collect::<anfis_core::Result<Vec<_>>>()?;
    let initial = AnfisModel::build_grid(inputs, family(a.family))?;
    let (model, tr) = anfis_core::train(initial, &train_ds.inputs, &train_ds.targets, &cfg)?;
    if tr.stop_reason == StopReason::DegenerateData {
        log::warn!("training data is degenerate; the model is a least-squares fit only");
    }

    let train_metrics =
        Metrics::compute(&train_ds.targets, &model.evaluate_batch(&train_ds.inputs)?)?;
    let test_metrics = Metrics::compute(&test_ds.targets, &model.evaluate_batch(&test_ds.inputs)?)?;

    let model_file = ModelFile {
        model,
        embedding: spec,
        horizon_label: label.clone(),
        cadence: series.cadence(),
        training: TrainingMeta {
            epochs_run: tr.epochs_run(),
            final_mse: tr.final_mse,
            stop_reason: tr.stop_reason,
            train_fraction: a.train_fraction,
            train_examples: train_ds.len(),
            data_fingerprint: data_fingerprint(&train_ds.inputs, &train_ds.targets),
        },
    };
    model_file.save(&a.model_out)?;

    let report = TrainRunReport {
        config: TrainConfigEcho {
            epochs: cfg.epochs,
            tolerance: cfg.tolerance,
            learning_rate: cfg.learning_rate,
            step_decay: cfg.step_decay,
            param_bounds: cfg.param_bounds,
            mf_family: family(a.family).to_string(),
            mf_count: a.mf_count,
            train_fraction: a.train_fraction,
            embedding: EmbeddingEcho {
                lags: spec.lags,
                delta: spec.delta,
                horizon: spec.horizon,
                horizon_label: label.clone(),
            },
        },
        examples: ExampleCounts {
            total: ds.len(),
            train: train_ds.len(),
            test: test_ds.len(),
        },
        mse_per_epoch: tr.mse_per_epoch.clone(),
        learning_rates: tr.learning_rates.clone(),
        stop_reason: tr.stop_reason,
        epochs_run: tr.epochs_run(),
        final_mse: tr.final_mse,
        wall_time_secs: tr.wall_time.as_secs_f64(),
        train: train_metrics,
        test: test_metrics,
    };
    if let Some(path) = &a.report_out {
        write_json(&report, path)?;
    }

    say(
        out,
        format!(
            "trained {} rules on {} examples: {} after {} epochs ({:.2}s)",
            model_file.model.rules().len(),
            train_ds.len(),
            tr.stop_reason,
            tr.epochs_run(),
            tr.wall_time.as_secs_f64()
        ),
    )?;
    say(
        out,
        format!(
            "train  {}",
            summary_line(
                &label,
                report.train.r_pct,
                tr.epochs_run(),
                report.train.mse
            )
        ),
    )?;
    say(
        out,
        format!(
            "test   {}",
            summary_line(&label, report.test.r_pct, tr.epochs_run(), report.test.mse)
        ),
    )?;
    Ok(TrainOutcome {
        model: model_file,
        report,
    })
}

fn load_matching(model_path: &Path, data_path: &Path) -> Result<(ModelFile, MeteoSeries)> {
    let mf = ModelFile::load(model_path)?;
    let series = parse_csv(data_path)?.series;
    if series.len() > 1 && series.cadence() != mf.cadence {
        return Err(CliError::Data(format!(
            "data cadence is {} min but the model was trained at {} min",
            series.cadence().num_minutes(),
            mf.cadence.num_minutes()
        )));
    }
    Ok((mf, series))
}

fn check_width(mf: &ModelFile, ds_cols: usize) -> Result<()> {
    if ds_cols != mf.model.n_inputs() {
        return Err(CliError::Data(format!(
            "model expects {} features ({}), data provides {}",
            mf.model.n_inputs(),
            mf.embedding.feature_names().join(", "),
            ds_cols
        )));
    }
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let (mf, series) = load_matching(&a.model, &a.data)?;
    let examples = match embed(&series, mf.embedding) {
        Ok(ds) => Some(ds),
        Err(anfis_core::Error::InsufficientData { .. }) if a.forecast_tail => None,
        Err(e) => return Err(e.into()),
    };

    let mut records: Vec<[String; 3]> = Vec::new();
    if let Some(ds) = &examples {
        check_width(&mf, ds.inputs.cols())?;
        let pred = mf.model.evaluate_batch(&ds.inputs)?;
        for ((t, y), p) in ds.target_times.iter().zip(&ds.targets).zip(&pred) {
            records.push([format_timestamp(*t), y.to_string(), p.to_string()]);
        }
    }
    let rows = records.len();
    if a.forecast_tail {
        let (x, times) = embed_forecast_tail(&series, mf.embedding)?;
        if !x.is_empty() {
            check_width(&mf, x.cols())?;
            let pred = mf.model.evaluate_batch(&x)?;
            for (t, p) in times.iter().zip(&pred) {
                records.push([format_timestamp(*t), String::new(), p.to_string()]);
            }
        }
        if records.is_empty() {
            return Err(CliError::Data(format!(
                "no admissible window: need {} consecutive records",
                mf.embedding.history() + 1
            )));
        }
    }

    let path = &a.out;
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let wrap = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    w.write_record(["timestamp", "actual", "predicted"])
        .map_err(wrap)?;
    for r in &records {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    say(
        out,
        format!(
            "wrote {rows} predictions and {} forecasts to {}",
            records.len() - rows,
            path.display()
        ),
    )
}

fn select_subset(mf: &ModelFile, ds: EmbeddedDataset, subset: Subset) -> Result<EmbeddedDataset> {
    match subset {
        Subset::All => Ok(ds),
        Subset::Train | Subset::Test => {
            let (tr, te) = split_chronological(&ds, mf.training.train_fraction)?;
            Ok(if subset == Subset::Train { tr } else { te })
        }
    }
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<EvalRunReport> {
    let (mf, series) = load_matching(&a.model, &a.data)?;
    let ds = select_subset(&mf, embed(&series, mf.embedding)?, a.subset)?;
    check_width(&mf, ds.inputs.cols())?;
    let pred = mf.model.evaluate_batch(&ds.inputs)?;
    let metrics = Metrics::compute(&ds.targets, &pred)?;
    let report = EvalRunReport {
        horizon_label: mf.horizon_label.clone(),
        horizon: mf.embedding.horizon,
        subset: a.subset.as_str().to_string(),
        epochs_run: mf.training.epochs_run,
        metrics,
    };
    if let Some(path) = &a.report_out {
        write_json(&report, path)?;
    }
    say(
        out,
        summary_line(
            &report.horizon_label,
            report.metrics.r_pct,
            report.epochs_run,
            report.metrics.mse,
        ),
    )?;
    Ok(report)
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    if a.jitter < 0.0 || !a.jitter.is_finite() {
        return Err(CliError::Usage(
            "--jitter must be a non-negative number".into(),
        ));
    }
    let series = match a.kind {
        SynthKind::Seasonal => seasonal_series(&SeasonalConfig {
            samples: a.samples,
            seed: a.seed,
            ..SeasonalConfig::default()
        }),
        SynthKind::Planted => planted_linear_series(a.samples, a.horizon_steps, a.seed),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let series = if a.raw {
        expand_to_minutes(&series, a.jitter, a.seed)?
    } else {
        series
    };
    write_series_file(&series, &a.out)?;
    say(
        out,
        format!("wrote {} records to {}", series.len(), a.out.display()),
    )
}
