//! Adaptive neuro-fuzzy inference (first-order Takagi-Sugeno) with hybrid
//! least-squares / gradient-descent training, plus the time-series plumbing
//! for multi-step wind speed forecasting.

pub mod anfis;
pub mod error;
pub mod fuzzy;
pub mod linalg;
pub mod metrics;
pub mod synthetic;
pub mod timeseries;
pub mod trainer;

pub use anfis::{normalize_strengths, AnfisModel, FiringTrace, InputSpec, Rule, STRENGTH_EPS};
pub use error::{Error, Result};
pub use fuzzy::{BellMf, GaussianMf, MembershipFunction, MfBounds, MfFamily, ParamBounds};
pub use linalg::{lstsq, LstsqSolution, Matrix};
pub use metrics::{correlation_pct, error_series, mae, mse, regression_line, EvalReport};
pub use timeseries::{
    embed, embed_forecast_tail, encode_date, horizon_to_steps, resample_10min, split_chronological,
    EmbeddedDataset, EmbeddingSpec, MeteoRecord, MeteoSeries, ResampleStats,
    DEFAULT_MIN_BUCKET_COUNT, HORIZON_PRESETS,
};
pub use trainer::{
    build_design_matrix, dataset_mse, premise_gradient, solve_consequents_lse, train, StopReason,
    TrainConfig, TrainReport,
};
