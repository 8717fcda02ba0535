//! Self-describing JSON model documents.
//!
//! Reals are written in scientific notation with 17 significant digits, so a
//! saved file reloads to the same bits and re-saves byte-for-byte.

use std::path::Path;

use anfis_core::{
    AnfisModel, BellMf, EmbeddingSpec, GaussianMf, InputSpec, Matrix, MembershipFunction, MfFamily,
    Rule, StopReason,
};
use chrono::TimeDelta;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `f64` rendered as `{:.16e}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!(
                "non-finite value {}",
                self.0
            )));
        }
        let raw =
            RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !v.is_finite() {
            return Err(D::Error::custom("non-finite value"));
        }
        Ok(Real(v))
    }
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

fn floats(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum MfDoc {
    Gaussian { sigma: Real, center: Real },
    Bell { a: Real, b: Real, center: Real },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InputDoc {
    name: String,
    lo: Real,
    hi: Real,
    mf_count: usize,
    mfs: Vec<MfDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RuleDoc {
    antecedent: Vec<usize>,
    consequent: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingDoc {
    lags: usize,
    delta: usize,
    horizon: usize,
    horizon_label: String,
    cadence_minutes: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrainingDoc {
    epochs_run: usize,
    final_mse: Real,
    stop_reason: StopReason,
    train_fraction: Real,
    train_examples: usize,
    data_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    mf_family: MfFamily,
    embedding: EmbeddingDoc,
    inputs: Vec<InputDoc>,
    rules: Vec<RuleDoc>,
    training: TrainingDoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_mse: f64,
    pub stop_reason: StopReason,
    pub train_fraction: f64,
    pub train_examples: usize,
    /// Hex SHA-256 over the training inputs and targets.
    pub data_fingerprint: String,
}

/// A trained model together with the embedding it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: AnfisModel,
    pub embedding: EmbeddingSpec,
    /// Display label for the horizon, e.g. `16h`.
    pub horizon_label: String,
    pub cadence: TimeDelta,
    pub training: TrainingMeta,
}

/// SHA-256 of the little-endian bit patterns of `inputs` (row-major) then `targets`.
pub fn data_fingerprint(inputs: &Matrix, targets: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update((inputs.rows() as u64).to_le_bytes());
    h.update((inputs.cols() as u64).to_le_bytes());
    for v in inputs.as_slice().iter().chain(targets) {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl ModelFile {
    fn to_doc(&self) -> ModelDoc {
        let m = &self.model;
        let inputs = m
            .inputs()
            .iter()
            .zip(m.mf_grid())
            .map(|(spec, mfs)| InputDoc {
                name: spec.name.clone(),
                lo: Real(spec.lo),
                hi: Real(spec.hi),
                mf_count: spec.mf_count,
                mfs: mfs
                    .iter()
                    .map(|mf| match *mf {
                        MembershipFunction::Gaussian(g) => MfDoc::Gaussian {
                            sigma: Real(g.sigma),
                            center: Real(g.center),
                        },
                        MembershipFunction::Bell(b) => MfDoc::Bell {
                            a: Real(b.a),
                            b: Real(b.b),
                            center: Real(b.center),
                        },
                    })
                    .collect(),
            })
            .collect();
        let rules = m
            .rules()
            .iter()
            .map(|r| RuleDoc {
                antecedent: r.antecedent.clone(),
                consequent: reals(&r.consequent),
            })
            .collect();
        let t = &self.training;
        ModelDoc {
            schema_version: SCHEMA_VERSION,
            mf_family: m.family(),
            embedding: EmbeddingDoc {
                lags: self.embedding.lags,
                delta: self.embedding.delta,
                horizon: self.embedding.horizon,
                horizon_label: self.horizon_label.clone(),
                cadence_minutes: self.cadence.num_minutes(),
            },
            inputs,
            rules,
            training: TrainingDoc {
                epochs_run: t.epochs_run,
                final_mse: Real(t.final_mse),
                stop_reason: t.stop_reason,
                train_fraction: Real(t.train_fraction),
                train_examples: t.train_examples,
                data_fingerprint: t.data_fingerprint.clone(),
            },
        }
    }

    fn from_doc(doc: ModelDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "unsupported model schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let e = &doc.embedding;
        let embedding = EmbeddingSpec::new(e.lags, e.delta, e.horizon)?;
        if e.cadence_minutes < 1 {
            return Err(CliError::Data(
                "model cadence_minutes must be positive".into(),
            ));
        }
        let expected = embedding.feature_names();
        if doc.inputs.len() != expected.len() {
            return Err(CliError::Data(format!(
                "model has {} inputs but its embedding expects {} features ({})",
                doc.inputs.len(),
                expected.len(),
                expected.join(", ")
            )));
        }
        let mut inputs = Vec::with_capacity(doc.inputs.len());
        let mut grid = Vec::with_capacity(doc.inputs.len());
        for (inp, want) in doc.inputs.into_iter().zip(&expected) {
            if &inp.name != want {
                return Err(CliError::Data(format!(
                    "model input `{}` where `{want}` was expected (features: {})",
                    inp.name,
                    expected.join(", ")
                )));
            }
            let mfs = inp
                .mfs
                .iter()
                .map(|mf| match (doc.mf_family, mf) {
                    (MfFamily::Gaussian, MfDoc::Gaussian { sigma, center }) => Ok(
                        MembershipFunction::Gaussian(GaussianMf::new(sigma.0, center.0)?),
                    ),
                    (MfFamily::Bell, MfDoc::Bell { a, b, center }) => {
                        Ok(MembershipFunction::Bell(BellMf::new(a.0, b.0, center.0)?))
                    }
                    _ => Err(CliError::Data(format!(
                        "input `{}` has a membership function outside family {}",
                        inp.name, doc.mf_family
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            inputs.push(InputSpec::new(inp.name, inp.lo.0, inp.hi.0, inp.mf_count)?);
            grid.push(mfs);
        }
        let rules = doc
            .rules
            .into_iter()
            .map(|r| Rule {
                antecedent: r.antecedent,
                consequent: floats(&r.consequent),
            })
            .collect();
        let model = AnfisModel::from_parts(inputs, grid, rules, doc.mf_family)?;
        let t = doc.training;
        Ok(Self {
            model,
            embedding,
            horizon_label: e.horizon_label.clone(),
            cadence: TimeDelta::minutes(e.cadence_minutes),
            training: TrainingMeta {
                epochs_run: t.epochs_run,
                final_mse: t.final_mse.0,
                stop_reason: t.stop_reason,
                train_fraction: t.train_fraction.0,
                train_examples: t.train_examples,
                data_fingerprint: t.data_fingerprint,
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_doc())
            .map_err(|e| CliError::Numeric(format!("serializing model: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(s)
            .map_err(|e| CliError::Data(format!("invalid model file: {e}")))?;
        Self::from_doc(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&s).map_err(|e| match e {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(family: MfFamily, seed: u64) -> ModelFile {
        let embedding = EmbeddingSpec::new(2, 3, 144).unwrap();
        let inputs = embedding
            .feature_names()
            .into_iter()
            .enumerate()
            .map(|(i, n)| InputSpec::new(n, -1.0 - i as f64, 2.5 + i as f64 / 3.0, 3).unwrap())
            .collect();
        let mut model = AnfisModel::build_grid(inputs, family).unwrap();
        let theta: Vec<f64> = (0..model.stacked_consequents().len())
            .map(|k| ((k as f64 + seed as f64) * 0.7311).sin() * 10f64.powi((k % 7) as i32 - 3))
            .collect();
        model.set_stacked_consequents(&theta).unwrap();
        ModelFile {
            model,
            embedding,
            horizon_label: "24h".into(),
            cadence: TimeDelta::minutes(10),
            training: TrainingMeta {
                epochs_run: 6,
                final_mse: 1.0 / 3.0,
                stop_reason: StopReason::EpochsExhausted,
                train_fraction: 0.8,
                train_examples: 1234,
                data_fingerprint: "ab".repeat(32),
            },
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for family in [MfFamily::Gaussian, MfFamily::Bell] {
            let mf = sample(family, 1);
            let s1 = mf.to_json().unwrap();
            let back = ModelFile::from_json(&s1).unwrap();
            assert_eq!(back, mf);
            assert_eq!(back.to_json().unwrap(), s1);
        }
    }

    #[test]
    fn reals_use_seventeen_digits() {
        let s = serde_json::to_string(&Real(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        assert!(serde_json::to_string(&Real(f64::NAN)).is_err());
    }

    #[test]
    fn horizon_recorded() {
        let s = sample(MfFamily::Gaussian, 0).to_json().unwrap();
        assert!(s.contains("\"horizon\": 144"));
        assert!(s.contains("\"horizon_label\": \"24h\""));
    }

    #[test]
    fn wrong_feature_count_names_the_features() {
        let mut doc = sample(MfFamily::Gaussian, 0).to_doc();
        doc.inputs.pop();
        let e = ModelFile::from_doc(doc).unwrap_err().to_string();
        assert!(e.contains("expects 5 features"), "{e}");
        assert!(
            e.contains("date, pressure, temperature, wind(t-3), wind(t)"),
            "{e}"
        );
    }

    #[test]
    fn family_mismatch_rejected() {
        let mut doc = sample(MfFamily::Gaussian, 0).to_doc();
        doc.mf_family = MfFamily::Bell;
        assert!(matches!(ModelFile::from_doc(doc), Err(CliError::Data(_))));
    }

    #[test]
    fn future_schema_rejected() {
        let mut doc = sample(MfFamily::Gaussian, 0).to_doc();
        doc.schema_version = 2;
        assert!(ModelFile::from_doc(doc).is_err());
    }

    #[test]
    fn fingerprint_sensitive_to_every_bit() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]], 2).unwrap();
        let a = data_fingerprint(&x, &[5.0, 6.0]);
        assert_eq!(a.len(), 64);
        assert_eq!(a, data_fingerprint(&x, &[5.0, 6.0]));
        assert_ne!(
            a,
            data_fingerprint(&x, &[5.0, f64::from_bits(6.0f64.to_bits() + 1)])
        );
        let xt = Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0]], 4).unwrap();
        assert_ne!(a, data_fingerprint(&xt, &[5.0, 6.0]));
    }

    proptest! {
        #[test]
        fn real_round_trips_bits(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = serde_json::to_string(&Real(v)).unwrap();
            let back: Real = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.0.to_bits(), v.to_bits());
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), s);
        }
    }
}
