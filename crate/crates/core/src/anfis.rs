//! First-order Takagi-Sugeno inference network.
//!
//! Layers: membership degrees, rule firing strengths (product T-norm),
//! normalization, linear rule consequents, weighted sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{MembershipFunction, MfFamily};
use crate::linalg::Matrix;

/// Floor on the sum of firing strengths; below it normalization falls back to uniform weights.
pub const STRENGTH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub mf_count: usize,
}

impl InputSpec {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, mf_count: usize) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            lo,
            hi,
            mf_count,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Input covering the observed range of `values`. A constant column is
    /// widened to `[v - 0.5, v + 0.5]` so the grid stays well defined.
    pub fn from_values(name: impl Into<String>, values: &[f64], mf_count: usize) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::invalid(format!("input `{name}` has no values")));
        }
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let spread = hi - lo > 1e-9 * lo.abs().max(hi.abs()).max(1.0);
        if !spread {
            let mid = 0.5 * (lo + hi);
            lo = mid - 0.5;
            hi = mid + 0.5;
        }
        Self::new(name, lo, hi, mf_count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(format!(
                "input `{}` needs finite lo < hi, got [{}, {}]",
                self.name, self.lo, self.hi
            )));
        }
        if self.mf_count < 2 {
            return Err(Error::invalid(format!(
                "input `{}` needs at least 2 membership functions, got {}",
                self.name, self.mf_count
            )));
        }
        Ok(())
    }

    pub fn range(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    /// One membership-function index per input.
    pub antecedent: Vec<usize>,
    /// Linear coefficients, one per input, followed by the bias.
    pub consequent: Vec<f64>,
}

impl Rule {
    /// `consequent . [x, 1]`
    #[inline]
    pub fn output(&self, x: &[f64]) -> f64 {
        let (coef, bias) = self.consequent.split_at(x.len());
        coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + bias[0]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FiringTrace {
    pub w: Vec<f64>,
    pub w_norm: Vec<f64>,
    pub per_rule_output: Vec<f64>,
    /// Set when the strengths summed below [`STRENGTH_EPS`] and uniform weights were used.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnfisModel {
    inputs: Vec<InputSpec>,
    mf_grid: Vec<Vec<MembershipFunction>>,
    rules: Vec<Rule>,
    family: MfFamily,
}

/// Evenly spaced centers with neighbours crossing at membership 1/2.
fn grid_for_input(spec: &InputSpec, family: MfFamily) -> Result<Vec<MembershipFunction>> {
    let steps = (spec.mf_count - 1) as f64;
    let spacing = spec.range() / steps;
    (0..spec.mf_count)
        .map(|k| {
            let center = if k + 1 == spec.mf_count {
                spec.hi
            } else {
                spec.lo + spacing * k as f64
            };
            match family {
                MfFamily::Gaussian => {
                    let sigma =
                        spec.range() / (steps * 2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
                    MembershipFunction::gaussian(sigma, center)
                }
                MfFamily::Bell => MembershipFunction::bell(spacing / 2.0, 2.0, center),
            }
        })
        .collect()
}

/// Full cross product of index ranges, last input varying fastest.
fn cross_product(counts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; counts.len()];
    for _ in 0..total {
        out.push(idx.clone());
        for d in (0..counts.len()).rev() {
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

impl AnfisModel {
    /// Grid-partitioned model: one rule per combination of membership functions,
    /// consequents initialized to zero.
    pub fn build_grid(inputs: Vec<InputSpec>, family: MfFamily) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::invalid("model needs at least one input"));
        }
        for spec in &inputs {
            spec.validate()?;
        }
        let mf_grid = inputs
            .iter()
            .map(|s| grid_for_input(s, family))
            .collect::<Result<Vec<_>>>()?;
        let counts: Vec<usize> = inputs.iter().map(|s| s.mf_count).collect();
        let n = inputs.len();
        let rules = cross_product(&counts)
            .into_iter()
            .map(|antecedent| Rule {
                antecedent,
                consequent: vec![0.0; n + 1],
            })
            .collect();
        Ok(Self {
            inputs,
            mf_grid,
            rules,
            family,
        })
    }

    /// Assembles a model from explicit parts, checking every structural invariant.
    pub fn from_parts(
        inputs: Vec<InputSpec>,
        mf_grid: Vec<Vec<MembershipFunction>>,
        rules: Vec<Rule>,
        family: MfFamily,
    ) -> Result<Self> {
        let model = Self {
            inputs,
            mf_grid,
            rules,
            family,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.inputs.len();
        if n == 0 {
            return Err(Error::invalid("model needs at least one input"));
        }
        if self.mf_grid.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.mf_grid.len(),
            });
        }
        for (spec, mfs) in self.inputs.iter().zip(&self.mf_grid) {
            spec.validate()?;
            if mfs.len() != spec.mf_count {
                return Err(Error::invalid(format!(
                    "input `{}` declares {} membership functions but has {}",
                    spec.name,
                    spec.mf_count,
                    mfs.len()
                )));
            }
            for mf in mfs {
                mf.validate()?;
                if mf.family() != self.family {
                    return Err(Error::invalid(format!(
                        "input `{}` mixes membership families",
                        spec.name
                    )));
                }
            }
        }
        if self.rules.is_empty() {
            return Err(Error::invalid("model has no rules"));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.antecedent.len() != n || rule.consequent.len() != n + 1 {
                return Err(Error::invalid(format!("rule {i} has wrong arity")));
            }
            for (j, &m) in rule.antecedent.iter().enumerate() {
                if m >= self.inputs[j].mf_count {
                    return Err(Error::invalid(format!(
                        "rule {i} references membership function {m} of input {j}"
                    )));
                }
            }
            if rule.consequent.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("rule consequent"));
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> &[InputSpec] {
        &self.inputs
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn mf_grid(&self) -> &[Vec<MembershipFunction>] {
        &self.mf_grid
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn family(&self) -> MfFamily {
        self.family
    }

    /// Length of one rule's consequent block (`n_inputs + 1`).
    pub fn consequent_width(&self) -> usize {
        self.inputs.len() + 1
    }

    /// All consequents concatenated in rule order, bias last within each block.
    pub fn stacked_consequents(&self) -> Vec<f64> {
        self.rules
            .iter()
            .flat_map(|r| r.consequent.iter().copied())
            .collect()
    }

    pub fn set_stacked_consequents(&mut self, theta: &[f64]) -> Result<()> {
        let w = self.consequent_width();
        if theta.len() != self.rules.len() * w {
            return Err(Error::DimensionMismatch {
                expected: self.rules.len() * w,
                found: theta.len(),
            });
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("consequent parameters"));
        }
        for (rule, chunk) in self.rules.iter_mut().zip(theta.chunks_exact(w)) {
            rule.consequent.copy_from_slice(chunk);
        }
        Ok(())
    }

    /// Number of premise (membership shape) parameters.
    pub fn premise_len(&self) -> usize {
        self.mf_grid.iter().map(|m| m.len()).sum::<usize>() * self.family.param_count()
    }

    /// Premise parameters: input by input, function by function, each in declared order.
    pub fn premise_params(&self) -> Vec<f64> {
        self.mf_grid
            .iter()
            .flat_map(|mfs| mfs.iter().flat_map(|mf| mf.params()))
            .collect()
    }

    /// Replaces premise parameters. Values are validated before the model is touched.
    pub fn set_premise_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.premise_len() {
            return Err(Error::DimensionMismatch {
                expected: self.premise_len(),
                found: params.len(),
            });
        }
        let k = self.family.param_count();
        let mut grid = self.mf_grid.clone();
        let mut chunks = params.chunks_exact(k);
        for mfs in grid.iter_mut() {
            for mf in mfs.iter_mut() {
                let next = mf.with_params(chunks.next().expect("length checked"))?;
                next.validate()?;
                *mf = next;
            }
        }
        self.mf_grid = grid;
        Ok(())
    }

    /// Natural length scale of each premise parameter (input range for widths and
    /// centers, 1 for the dimensionless Bell exponent).
    pub fn premise_scales(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.premise_len());
        for (spec, mfs) in self.inputs.iter().zip(&self.mf_grid) {
            for _ in mfs {
                match self.family {
                    MfFamily::Gaussian => out.extend([spec.range(), spec.range()]),
                    MfFamily::Bell => out.extend([spec.range(), 1.0, spec.range()]),
                }
            }
        }
        out
    }

    pub(crate) fn mf_grid_mut(&mut self) -> &mut [Vec<MembershipFunction>] {
        &mut self.mf_grid
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.inputs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs.len(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model input"));
        }
        Ok(())
    }

    /// Membership degrees for every input and function: `mu[j][m]`.
    pub(crate) fn memberships(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.mf_grid
            .iter()
            .zip(x)
            .map(|(mfs, &xj)| mfs.iter().map(|mf| mf.value_unchecked(xj)).collect())
            .collect()
    }

    pub(crate) fn strengths_from(&self, mu: &[Vec<f64>]) -> Vec<f64> {
        self.rules
            .iter()
            .map(|r| {
                r.antecedent
                    .iter()
                    .enumerate()
                    .map(|(j, &m)| mu[j][m])
                    .product()
            })
            .collect()
    }

    /// Raw firing strengths, product T-norm over each rule's antecedent.
    pub fn firing_strengths(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.strengths_from(&self.memberships(x)))
    }

    /// Output and full trace for one input vector.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, FiringTrace)> {
        let w = self.firing_strengths(x)?;
        let (w_norm, degenerate) = normalize_with_flag(&w)?;
        let per_rule_output: Vec<f64> = self.rules.iter().map(|r| r.output(x)).collect();
        let y = w_norm
            .iter()
            .zip(&per_rule_output)
            .map(|(a, f)| a * f)
            .sum();
        Ok((
            y,
            FiringTrace {
                w,
                w_norm,
                per_rule_output,
                degenerate,
            },
        ))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.evaluate(x).map(|(y, _)| y)
    }

    /// Row-wise [`predict`](Self::predict). Errors name the first failing row.
    pub fn evaluate_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Ok(Vec::new());
        }
        (0..x.rows())
            .into_par_iter()
            .map(|i| {
                self.predict(x.row(i)).map_err(|e| Error::Row {
                    row: i,
                    source: Box::new(e),
                })
            })
            .collect()
    }
}

fn normalize_with_flag(w: &[f64]) -> Result<(Vec<f64>, bool)> {
    if w.is_empty() {
        return Err(Error::invalid("cannot normalize an empty strength vector"));
    }
    if w.iter().any(|v| v.is_nan() || *v < 0.0 || v.is_infinite()) {
        return Err(Error::invalid(
            "firing strengths must be finite and non-negative",
        ));
    }
    let total: f64 = w.iter().sum();
    if total < STRENGTH_EPS {
        let u = 1.0 / w.len() as f64;
        return Ok((vec![u; w.len()], true));
    }
    Ok((w.iter().map(|v| v / total).collect(), false))
}

/// `w_i / sum(w)`, or uniform weights when the sum is below [`STRENGTH_EPS`].
pub fn normalize_strengths(w: &[f64]) -> Result<Vec<f64>> {
    normalize_with_flag(w).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn spec(lo: f64, hi: f64, n: usize) -> InputSpec {
        InputSpec::new("x", lo, hi, n).unwrap()
    }

    #[test]
    fn four_by_three_grid_has_81_rules() {
        let inputs = (0..4).map(|_| spec(0.0, 1.0, 3)).collect();
        let model = AnfisModel::build_grid(inputs, MfFamily::Gaussian).unwrap();
        assert_eq!(model.rules().len(), 81);
        assert!(model.rules().iter().all(|r| r.consequent == vec![0.0; 5]));
    }

    #[test]
    fn smallest_grid() {
        let model = AnfisModel::build_grid(vec![spec(-2.0, 3.0, 2)], MfFamily::Gaussian).unwrap();
        assert_eq!(model.rules().len(), 2);
        let centers: Vec<f64> = model.mf_grid()[0].iter().map(|m| m.center()).collect();
        assert_eq!(centers, vec![-2.0, 3.0]);
    }

    #[test]
    fn cross_product_is_a_bijection() {
        let model =
            AnfisModel::build_grid(vec![spec(0.0, 1.0, 3), spec(0.0, 1.0, 4)], MfFamily::Bell)
                .unwrap();
        assert_eq!(model.rules().len(), 12);
        let seen: HashSet<Vec<usize>> =
            model.rules().iter().map(|r| r.antecedent.clone()).collect();
        assert_eq!(seen.len(), 12);
        for a in 0..3 {
            for b in 0..4 {
                assert!(seen.contains(&vec![a, b]));
            }
        }
    }

    #[test]
    fn neighbours_cross_at_one_half() {
        for family in [MfFamily::Gaussian, MfFamily::Bell] {
            let model = AnfisModel::build_grid(vec![spec(0.0, 10.0, 3)], family).unwrap();
            let mid = model.mf_grid()[0][0].value(2.5).unwrap();
            assert_relative_eq!(mid, 0.5, epsilon = 1e-12);
            assert_relative_eq!(
                model.mf_grid()[0][1].value(2.5).unwrap(),
                0.5,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(InputSpec::new("x", 1.0, 1.0, 3).is_err());
        assert!(InputSpec::new("x", 0.0, 1.0, 1).is_err());
        assert!(AnfisModel::build_grid(vec![], MfFamily::Gaussian).is_err());
        let s = InputSpec::from_values("c", &[4.0, 4.0], 3).unwrap();
        assert_eq!((s.lo, s.hi), (3.5, 4.5));
    }

    #[test]
    fn firing_strengths_examples() {
        let m0 = MembershipFunction::gaussian(1.0, 0.0).unwrap();
        let m2 = MembershipFunction::gaussian(1.0, 2.0).unwrap();
        let model = AnfisModel::from_parts(
            vec![spec(0.0, 2.0, 2)],
            vec![vec![m0, m2]],
            vec![
                Rule {
                    antecedent: vec![0],
                    consequent: vec![0.0, 0.0],
                },
                Rule {
                    antecedent: vec![1],
                    consequent: vec![0.0, 0.0],
                },
            ],
            MfFamily::Gaussian,
        )
        .unwrap();
        let w = model.firing_strengths(&[1.0]).unwrap();
        let e = (-0.5f64).exp();
        assert_relative_eq!(w[0], e, epsilon = 1e-15);
        assert_relative_eq!(w[1], e, epsilon = 1e-15);
        assert_eq!(model.firing_strengths(&[0.0]).unwrap()[0], 1.0);
        assert!(matches!(
            model.firing_strengths(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_strengths(&[0.5, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize_strengths(&[3.0, 1.0]).unwrap(), vec![0.75, 0.25]);
        assert!(normalize_strengths(&[]).is_err());
        let (u, flag) = normalize_with_flag(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(flag);
        assert_eq!(u, vec![0.25; 4]);
    }

    #[test]
    fn equal_strengths_average_rule_outputs() {
        let m = MembershipFunction::gaussian(1.0, 0.0).unwrap();
        let model = AnfisModel::from_parts(
            vec![spec(0.0, 1.0, 2)],
            vec![vec![m, m]],
            vec![
                Rule {
                    antecedent: vec![0],
                    consequent: vec![0.0, 2.0],
                },
                Rule {
                    antecedent: vec![1],
                    consequent: vec![0.0, 4.0],
                },
            ],
            MfFamily::Gaussian,
        )
        .unwrap();
        assert_relative_eq!(model.predict(&[0.3]).unwrap(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn single_rule_is_its_consequent() {
        let m = MembershipFunction::bell(1.0, 2.0, 0.0).unwrap();
        let model = AnfisModel::from_parts(
            vec![spec(0.0, 1.0, 2), spec(0.0, 1.0, 2)],
            vec![vec![m, m], vec![m, m]],
            vec![Rule {
                antecedent: vec![0, 1],
                consequent: vec![2.0, -1.0, 0.5],
            }],
            MfFamily::Bell,
        )
        .unwrap();
        let (y, trace) = model.evaluate(&[1.5, 4.0]).unwrap();
        assert_eq!(trace.w_norm, vec![1.0]);
        assert_relative_eq!(y, 2.0 * 1.5 - 4.0 + 0.5, epsilon = 1e-15);
    }

    #[test]
    fn two_input_hand_walkthrough() {
        // Rule 1: x is A1 (gauss s=1 c=0) and y is B1 (gauss s=2 c=1) -> f1 = 1x + 2y + 3
        // Rule 2: x is A2 (gauss s=1 c=2) and y is B2 (gauss s=2 c=-1) -> f2 = -1x + 0.5y + 0
        let a1 = MembershipFunction::gaussian(1.0, 0.0).unwrap();
        let a2 = MembershipFunction::gaussian(1.0, 2.0).unwrap();
        let b1 = MembershipFunction::gaussian(2.0, 1.0).unwrap();
        let b2 = MembershipFunction::gaussian(2.0, -1.0).unwrap();
        let model = AnfisModel::from_parts(
            vec![spec(0.0, 2.0, 2), spec(-1.0, 1.0, 2)],
            vec![vec![a1, a2], vec![b1, b2]],
            vec![
                Rule {
                    antecedent: vec![0, 0],
                    consequent: vec![1.0, 2.0, 3.0],
                },
                Rule {
                    antecedent: vec![1, 1],
                    consequent: vec![-1.0, 0.5, 0.0],
                },
            ],
            MfFamily::Gaussian,
        )
        .unwrap();
        // x = 1, y = 0: mu_A1 = e^-0.5, mu_B1 = e^-0.125, mu_A2 = e^-0.5, mu_B2 = e^-0.125
        // w1 = w2, f1 = 4, f2 = -1, so f = 1.5
        let (out, trace) = model.evaluate(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(trace.w[0], (-0.625f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(out, 1.5, epsilon = 1e-12);
        // x = 0.5, y = 1: mu_A1 = e^-0.125, mu_B1 = 1, mu_A2 = e^-1.125, mu_B2 = e^-0.5
        // w1 = e^-0.125, w2 = e^-1.625; f1 = 5.5, f2 = 0
        let w1 = (-0.125f64).exp();
        let w2 = (-1.625f64).exp();
        let expected = (w1 * 5.5 + w2 * 0.0) / (w1 + w2);
        assert_relative_eq!(
            model.predict(&[0.5, 1.0]).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn batch_edge_cases() {
        let model = AnfisModel::build_grid(vec![spec(0.0, 1.0, 2)], MfFamily::Gaussian).unwrap();
        assert!(model
            .evaluate_batch(&Matrix::zeros(0, 1))
            .unwrap()
            .is_empty());
        let x = Matrix::from_rows(&[[0.4]], 1).unwrap();
        assert_eq!(
            model.evaluate_batch(&x).unwrap(),
            vec![model.predict(&[0.4]).unwrap()]
        );
        let bad = Matrix::from_rows(&[[0.1], [f64::NAN], [0.2]], 1).unwrap();
        match model.evaluate_batch(&bad) {
            Err(Error::Row { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn premise_params_round_trip() {
        let mut model =
            AnfisModel::build_grid(vec![spec(0.0, 1.0, 2), spec(0.0, 3.0, 3)], MfFamily::Bell)
                .unwrap();
        let p = model.premise_params();
        assert_eq!(p.len(), 5 * 3);
        assert_eq!(model.premise_scales().len(), p.len());
        let shifted: Vec<f64> = p.iter().map(|v| v + 0.01).collect();
        model.set_premise_params(&shifted).unwrap();
        assert_eq!(model.premise_params(), shifted);
        let mut bad = shifted.clone();
        bad[0] = -1.0;
        assert!(model.set_premise_params(&bad).is_err());
        assert_eq!(model.premise_params(), shifted);
    }

    fn random_model(seed: u64, family: MfFamily) -> AnfisModel {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=3);
        let inputs: Vec<InputSpec> = (0..n)
            .map(|_| spec(-2.0, 2.0, rng.random_range(2..=3)))
            .collect();
        let mut model = AnfisModel::build_grid(inputs, family).unwrap();
        let theta: Vec<f64> = (0..model.rules().len() * (n + 1))
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        model.set_stacked_consequents(&theta).unwrap();
        model
    }

    proptest! {
        #[test]
        fn normalized_strengths_sum_to_one(w in prop::collection::vec(0.0f64..10.0, 1..50)) {
            let s: f64 = normalize_strengths(&w).unwrap().iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn two_phase_equals_ratio_form(seed in 0u64..10_000, x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let model = random_model(seed, MfFamily::Gaussian);
            let x = &x[..model.n_inputs()];
            let (y, trace) = model.evaluate(x).unwrap();
            let sw: f64 = trace.w.iter().sum();
            prop_assume!(sw >= 1e-9);
            let ratio = trace.w.iter().zip(&trace.per_rule_output).map(|(w, f)| w * f).sum::<f64>() / sw;
            prop_assert!((y - ratio).abs() <= 1e-10 * ratio.abs().max(1.0));
            prop_assert!(trace.w.iter().all(|&w| w > 0.0));
        }

        #[test]
        fn output_is_affine_in_consequents(seed in 0u64..10_000, x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let base = random_model(seed, MfFamily::Bell);
            let x = &x[..base.n_inputs()];
            let t1 = base.stacked_consequents();
            let t2: Vec<f64> = t1.iter().map(|v| 0.5 - v * 1.5).collect();
            let sum: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a + b).collect();
            let eval = |t: &[f64]| {
                let mut m = base.clone();
                m.set_stacked_consequents(t).unwrap();
                m.predict(x).unwrap()
            };
            let zero = vec![0.0; t1.len()];
            let lhs = eval(&sum);
            let rhs = eval(&t1) + eval(&t2) - eval(&zero);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn rule_order_does_not_matter(seed in 0u64..10_000, x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let model = random_model(seed, MfFamily::Gaussian);
            let x = &x[..model.n_inputs()];
            let mut rules = model.rules().to_vec();
            rules.reverse();
            let k = seed as usize % rules.len();
            rules.rotate_left(k);
            let shuffled = AnfisModel::from_parts(
                model.inputs().to_vec(), model.mf_grid().to_vec(), rules, model.family()).unwrap();
            let a = model.predict(x).unwrap();
            let b = shuffled.predict(x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
