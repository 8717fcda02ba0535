//! Hybrid learning: least-squares identification of the rule consequents in the
//! forward pass, gradient descent on the membership parameters in the backward pass.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anfis::{AnfisModel, STRENGTH_EPS};
use crate::error::{Error, Result};
use crate::fuzzy::ParamBounds;
use crate::linalg::{lstsq, LstsqSolution, Matrix};

pub use crate::metrics::{error_series, mse};

/// Rows per reduction block. Fixed so gradient sums do not depend on the thread count.
const GRAD_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Training stops once the epoch-to-epoch MSE change falls below this.
    pub tolerance: f64,
    pub learning_rate: f64,
    /// Multiplies the learning rate whenever the epoch MSE goes up.
    pub step_decay: f64,
    pub param_bounds: ParamBounds,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 6,
            tolerance: 1e-5,
            learning_rate: 0.01,
            step_decay: 0.9,
            param_bounds: ParamBounds::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return Err(Error::invalid("step decay must lie in (0, 1]"));
        }
        self.param_bounds.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochsExhausted,
    ToleranceReached,
    DegenerateData,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::EpochsExhausted => "epochs_exhausted",
            StopReason::ToleranceReached => "tolerance_reached",
            StopReason::DegenerateData => "degenerate_data",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mse_per_epoch: Vec<f64>,
    /// Learning rate in effect at each epoch.
    pub learning_rates: Vec<f64>,
    pub stop_reason: StopReason,
    pub wall_time: Duration,
    pub final_mse: f64,
}

impl TrainReport {
    pub fn epochs_run(&self) -> usize {
        self.mse_per_epoch.len()
    }
}

fn check_data(model: &AnfisModel, x: &Matrix, targets: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("training data is empty"));
    }
    if x.cols() != model.n_inputs() {
        return Err(Error::DimensionMismatch {
            expected: model.n_inputs(),
            found: x.cols(),
        });
    }
    if targets.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: targets.len(),
        });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    Ok(())
}

/// One row per sample; for each rule `i` the block `[wn_i * x_1, .., wn_i * x_n, wn_i]`,
/// so that `row . stacked_consequents` is the model output.
pub fn build_design_matrix(model: &AnfisModel, x: &Matrix) -> Result<Matrix> {
    if x.is_empty() {
        return Err(Error::invalid("design matrix needs at least one sample"));
    }
    let width = model.consequent_width();
    let cols = model.rules().len() * width;
    let mut design = Matrix::zeros(x.rows(), cols);
    design
        .as_mut_slice()
        .par_chunks_mut(cols)
        .enumerate()
        .try_for_each(|(i, out)| -> Result<()> {
            let xi = x.row(i);
            let (_, trace) = model.evaluate(xi).map_err(|e| Error::Row {
                row: i,
                source: Box::new(e),
            })?;
            for (block, &wn) in out.chunks_exact_mut(width).zip(&trace.w_norm) {
                let (coef, bias) = block.split_at_mut(xi.len());
                for (c, &v) in coef.iter_mut().zip(xi) {
                    *c = wn * v;
                }
                bias[0] = wn;
            }
            Ok(())
        })?;
    Ok(design)
}

/// Minimum-norm least-squares consequents for a design matrix.
pub fn solve_consequents_lse(design: &Matrix, targets: &[f64]) -> Result<LstsqSolution> {
    lstsq(design, targets)
}

/// Gradient of the dataset MSE with respect to every premise parameter, ordered as
/// [`AnfisModel::premise_params`].
pub fn premise_gradient(model: &AnfisModel, x: &Matrix, targets: &[f64]) -> Result<Vec<f64>> {
    check_data(model, x, targets)?;
    let n_rows = x.rows();
    let plen = model.premise_len();
    let pc = model.family().param_count();
    let offsets: Vec<usize> = model
        .mf_grid()
        .iter()
        .scan(0usize, |acc, mfs| {
            let o = *acc;
            *acc += mfs.len();
            Some(o)
        })
        .collect();

    let partials: Vec<Result<Vec<f64>>> = (0..n_rows.div_ceil(GRAD_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut g = vec![0.0; plen];
            let mut dmu = vec![0.0; pc];
            let end = ((b + 1) * GRAD_BLOCK).min(n_rows);
            for (i, &target) in targets.iter().enumerate().take(end).skip(b * GRAD_BLOCK) {
                let xi = x.row(i);
                model.check_input(xi).map_err(|e| Error::Row {
                    row: i,
                    source: Box::new(e),
                })?;
                accumulate_sample(model, xi, target, &offsets, &mut dmu, &mut g);
            }
            Ok(g)
        })
        .collect();

    let mut grad = vec![0.0; plen];
    for part in partials {
        for (acc, v) in grad.iter_mut().zip(part?) {
            *acc += v;
        }
    }
    let scale = -2.0 / n_rows as f64;
    grad.iter_mut().for_each(|v| *v *= scale);
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("premise gradient"));
    }
    Ok(grad)
}

/// Adds `e * d y / d theta` for one sample into `g`.
fn accumulate_sample(
    model: &AnfisModel,
    xi: &[f64],
    target: f64,
    offsets: &[usize],
    dmu: &mut [f64],
    g: &mut [f64],
) {
    let mu = model.memberships(xi);
    let w = model.strengths_from(&mu);
    let s: f64 = w.iter().sum();
    if s < STRENGTH_EPS {
        // uniform fallback region: output is locally independent of the premises
        return;
    }
    let f: Vec<f64> = model.rules().iter().map(|r| r.output(xi)).collect();
    // same operation order as AnfisModel::evaluate, so an exact fit gives e == 0
    let y: f64 = w.iter().zip(&f).map(|(a, b)| (a / s) * b).sum();
    let e = target - y;
    if e == 0.0 {
        return;
    }

    // d y / d mu[j][m], accumulated over the rules that use mu[j][m]
    let mut dy_dmu: Vec<Vec<f64>> = mu.iter().map(|m| vec![0.0; m.len()]).collect();
    for (rule, fi) in model.rules().iter().zip(&f) {
        let coef = (fi - y) / s;
        for (j, &m) in rule.antecedent.iter().enumerate() {
            let others: f64 = rule
                .antecedent
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(k, &mk)| mu[k][mk])
                .product();
            dy_dmu[j][m] += coef * others;
        }
    }

    let pc = dmu.len();
    for (j, mfs) in model.mf_grid().iter().enumerate() {
        for (m, mf) in mfs.iter().enumerate() {
            let d = dy_dmu[j][m];
            if d == 0.0 {
                continue;
            }
            mf.grad_into(xi[j], dmu);
            let base = (offsets[j] + m) * pc;
            for (k, &dk) in dmu.iter().enumerate() {
                g[base + k] += e * d * dk;
            }
        }
    }
}

/// Training-set MSE of the model as it stands.
pub fn dataset_mse(model: &AnfisModel, x: &Matrix, targets: &[f64]) -> Result<f64> {
    let pred = model.evaluate_batch(x)?;
    mse(&error_series(targets, &pred)?)
}

/// One gradient step in range-normalized coordinates, followed by projection into bounds.
fn premise_step(model: &mut AnfisModel, grad: &[f64], lr: f64, bounds: &ParamBounds) -> Result<()> {
    let scales = model.premise_scales();
    let ranges: Vec<f64> = model.inputs().iter().map(|s| s.range()).collect();
    let mut idx = 0;
    for (j, mfs) in model.mf_grid_mut().iter_mut().enumerate() {
        let b = bounds.for_range(ranges[j]);
        for mf in mfs.iter_mut() {
            let mut p = mf.params();
            for v in p.iter_mut() {
                let s = scales[idx];
                *v -= lr * s * s * grad[idx];
                idx += 1;
            }
            let next = mf.with_params(&p)?.clamp_params(&b);
            next.validate()?;
            *mf = next;
        }
    }
    debug_assert_eq!(idx, grad.len());
    Ok(())
}

/// Runs hybrid training and returns the trained model with its report.
///
/// Each epoch solves the consequents by least squares, records the training MSE,
/// then (unless training is about to stop) takes one premise gradient step using
/// that epoch's residuals.
pub fn train(
    mut model: AnfisModel,
    x: &Matrix,
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<(AnfisModel, TrainReport)> {
    cfg.validate()?;
    check_data(&model, x, targets)?;
    let started = Instant::now();
    let constant_targets = targets.iter().all(|t| *t == targets[0]);

    let mut lr = cfg.learning_rate;
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.epochs);
    let mut rates: Vec<f64> = Vec::with_capacity(cfg.epochs);
    let mut stop = StopReason::EpochsExhausted;

    for epoch in 1..=cfg.epochs {
        let design = build_design_matrix(&model, x)?;
        let sol = solve_consequents_lse(&design, targets)?;
        drop(design);
        model.set_stacked_consequents(&sol.x)?;
        let epoch_mse = dataset_mse(&model, x, targets)?;
        if !epoch_mse.is_finite() {
            return Err(Error::NonFinite("training mse"));
        }

        if let Some(&prev) = trace.last() {
            if epoch_mse > prev {
                lr *= cfg.step_decay;
            }
        }
        trace.push(epoch_mse);
        rates.push(lr);

        if sol.rank == 0 || constant_targets {
            stop = StopReason::DegenerateData;
            break;
        }
        if epoch > 1 && (epoch_mse - trace[trace.len() - 2]).abs() < cfg.tolerance {
            stop = StopReason::ToleranceReached;
            break;
        }
        if epoch == cfg.epochs {
            break;
        }

        let grad = premise_gradient(&model, x, targets)?;
        premise_step(&mut model, &grad, lr, &cfg.param_bounds)?;
    }

    let final_mse = *trace.last().expect("at least one epoch runs");
    Ok((
        model,
        TrainReport {
            mse_per_epoch: trace,
            learning_rates: rates,
            stop_reason: stop,
            wall_time: started.elapsed(),
            final_mse,
        },
    ))
}
