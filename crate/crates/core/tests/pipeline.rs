use anfis_core::synthetic::{expand_to_minutes, planted_linear_series};
use anfis_core::{
    dataset_mse, embed, error_series, mse, resample_10min, split_chronological, train, AnfisModel,
    EmbeddingSpec, InputSpec, MfFamily, TrainConfig, DEFAULT_MIN_BUCKET_COUNT,
};

fn fit(family: MfFamily) -> (f64, f64, usize) {
    let planted = planted_linear_series(1500, 100, 3).unwrap();
    let raw = expand_to_minutes(&planted, 0.2, 9).unwrap();
    let (series, stats) = resample_10min(&raw, DEFAULT_MIN_BUCKET_COUNT).unwrap();
    assert_eq!(series.len(), planted.len(), "{stats:?}");

    let spec = EmbeddingSpec::new(1, 1, 100).unwrap();
    let ds = embed(&series, spec).unwrap();
    let (tr, te) = split_chronological(&ds, 0.8).unwrap();
    let inputs = (0..spec.n_features())
        .map(|j| {
            InputSpec::from_values(ds.feature_names[j].clone(), &tr.inputs.column(j), 3).unwrap()
        })
        .collect();
    let model = AnfisModel::build_grid(inputs, family).unwrap();
    let (model, report) = train(model, &tr.inputs, &tr.targets, &TrainConfig::default()).unwrap();

    let train_mse = dataset_mse(&model, &tr.inputs, &tr.targets).unwrap();
    assert_eq!(train_mse, report.final_mse);
    let pred = model.evaluate_batch(&te.inputs).unwrap();
    let test_mse = mse(&error_series(&te.targets, &pred).unwrap()).unwrap();
    (train_mse, test_mse, report.epochs_run())
}

#[test]
fn minute_data_through_resample_recovers_planted_law() {
    for family in [MfFamily::Gaussian, MfFamily::Bell] {
        let (train_mse, test_mse, epochs) = fit(family);
        assert!(epochs >= 1 && epochs <= TrainConfig::default().epochs);
        assert!(train_mse < 1e-8, "{family:?} train mse {train_mse}");
        assert!(test_mse < 1e-3, "{family:?} test mse {test_mse}");
    }
}

#[test]
fn training_is_deterministic() {
    let a = fit(MfFamily::Gaussian);
    let b = fit(MfFamily::Gaussian);
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert_eq!(a.1.to_bits(), b.1.to_bits());
    assert_eq!(a.2, b.2);
}
