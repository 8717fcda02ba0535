//! Shared fixtures for the benchmarks.

use anfis_core::synthetic::{seasonal_series, SeasonalConfig};
use anfis_core::{
    embed, AnfisModel, EmbeddedDataset, EmbeddingSpec, InputSpec, MeteoSeries, MfFamily,
};

pub fn series(samples: usize) -> MeteoSeries {
    seasonal_series(&SeasonalConfig {
        samples,
        ..SeasonalConfig::default()
    })
    .expect("valid config")
}

/// 16 h examples from a seasonal series of `samples` records.
pub fn dataset(samples: usize) -> EmbeddedDataset {
    embed(&series(samples), EmbeddingSpec::default()).expect("enough samples")
}

/// Untrained grid model spanning the ranges of `ds`.
pub fn grid_model(ds: &EmbeddedDataset, mf_count: usize, family: MfFamily) -> AnfisModel {
    let inputs = (0..ds.inputs.cols())
        .map(|j| {
            InputSpec::from_values(ds.feature_names[j].clone(), &ds.inputs.column(j), mf_count)
        })
        .collect::<anfis_core::Result<Vec<_>>>()
        .expect("finite inputs");
    AnfisModel::build_grid(inputs, family).expect("valid grid")
}
