//! Membership functions and their derivatives with respect to shape parameters.
//!
//! Two families are supported, both smooth and strictly positive everywhere:
//!
//! - Gaussian: `exp(-(x - c)^2 / (2 sigma^2))`, parameters `[sigma, center]`
//! - generalized Bell: `1 / (1 + |(x - c) / a|^(2b))`, parameters `[a, b, center]`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMf {
    pub sigma: f64,
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellMf {
    pub a: f64,
    pub b: f64,
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfFamily {
    Gaussian,
    Bell,
}

impl MfFamily {
    pub fn param_count(self) -> usize {
        match self {
            MfFamily::Gaussian => 2,
            MfFamily::Bell => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MfFamily::Gaussian => "gaussian",
            MfFamily::Bell => "bell",
        }
    }
}

impl std::str::FromStr for MfFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(MfFamily::Gaussian),
            "bell" | "gbell" => Ok(MfFamily::Bell),
            other => Err(Error::invalid(format!(
                "unknown membership family `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for MfFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parameterized fuzzy set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MembershipFunction {
    Gaussian(GaussianMf),
    Bell(BellMf),
}

/// Absolute parameter bounds for one membership function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfBounds {
    pub sigma_min: f64,
    pub a_min: f64,
    pub b_min: f64,
    pub b_max: f64,
}

/// Parameter bounds expressed relative to an input's data range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    /// Minimum width (sigma or a) as a fraction of the input range.
    pub min_width_fraction: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            min_width_fraction: 1e-4,
            b_min: 0.1,
            b_max: 20.0,
        }
    }
}

impl ParamBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_width_fraction > 0.0 && self.min_width_fraction.is_finite()) {
            return Err(Error::invalid("min_width_fraction must be positive"));
        }
        if !(self.b_min > 0.0 && self.b_min <= self.b_max && self.b_max.is_finite()) {
            return Err(Error::invalid("b bounds must satisfy 0 < b_min <= b_max"));
        }
        Ok(())
    }

    pub fn for_range(&self, range: f64) -> MfBounds {
        let width = self.min_width_fraction * range;
        MfBounds {
            sigma_min: width,
            a_min: width,
            b_min: self.b_min,
            b_max: self.b_max,
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("membership input"))
    }
}

impl GaussianMf {
    pub fn new(sigma: f64, center: f64) -> Result<Self> {
        let mf = Self { sigma, center };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) || !self.center.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian requires sigma > 0 and finite center, got sigma={} center={}",
                self.sigma, self.center
            )));
        }
        Ok(())
    }

    #[inline]
    fn value_unchecked(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.sigma;
        (-0.5 * d * d).exp()
    }

    /// `[d/d sigma, d/d center]`
    #[inline]
    fn grad_unchecked(&self, x: f64) -> [f64; 2] {
        let v = self.value_unchecked(x);
        let d = x - self.center;
        let s2 = self.sigma * self.sigma;
        [v * d * d / (s2 * self.sigma), v * d / s2]
    }
}

impl BellMf {
    pub fn new(a: f64, b: f64, center: f64) -> Result<Self> {
        let mf = Self { a, b, center };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.a.is_finite()
            && self.b > 0.0
            && self.b.is_finite()
            && self.center.is_finite();
        if !ok {
            return Err(Error::invalid(format!(
                "bell requires a > 0, b > 0 and finite center, got a={} b={} center={}",
                self.a, self.b, self.center
            )));
        }
        Ok(())
    }

    /// `|(x - c) / a|^(2b)`, zero when x == c.
    #[inline]
    fn power_term(&self, x: f64) -> f64 {
        let u = ((x - self.center) / self.a).abs();
        if u == 0.0 {
            0.0
        } else {
            (2.0 * self.b * u.ln()).exp()
        }
    }

    #[inline]
    fn value_unchecked(&self, x: f64) -> f64 {
        1.0 / (1.0 + self.power_term(x))
    }

    /// `[d/da, d/db, d/d center]`.
    ///
    /// At x == c every component takes its limit 0. For b <= 1/2 the center
    /// derivative has a cusp there and 0 is the symmetric subgradient.
    #[inline]
    fn grad_unchecked(&self, x: f64) -> [f64; 3] {
        let d = x - self.center;
        if d == 0.0 {
            return [0.0; 3];
        }
        let p = self.power_term(x);
        if !p.is_finite() {
            // value underflowed to 0, so do all the derivatives
            return [0.0; 3];
        }
        let y = 1.0 / (1.0 + p);
        let y2p = y * y * p;
        let ln_u = (d / self.a).abs().ln();
        [
            y2p * 2.0 * self.b / self.a,
            -y2p * 2.0 * ln_u,
            y2p * 2.0 * self.b / d,
        ]
    }
}

impl MembershipFunction {
    pub fn gaussian(sigma: f64, center: f64) -> Result<Self> {
        GaussianMf::new(sigma, center).map(Self::Gaussian)
    }

    pub fn bell(a: f64, b: f64, center: f64) -> Result<Self> {
        BellMf::new(a, b, center).map(Self::Bell)
    }

    pub fn family(&self) -> MfFamily {
        match self {
            Self::Gaussian(_) => MfFamily::Gaussian,
            Self::Bell(_) => MfFamily::Bell,
        }
    }

    pub fn center(&self) -> f64 {
        match self {
            Self::Gaussian(g) => g.center,
            Self::Bell(b) => b.center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian(g) => g.validate(),
            Self::Bell(b) => b.validate(),
        }
    }

    /// Membership degree in (0, 1].
    pub fn value(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        self.validate()?;
        Ok(self.value_unchecked(x))
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        match self {
            Self::Gaussian(g) => g.value_unchecked(x),
            Self::Bell(b) => b.value_unchecked(x),
        }
    }

    /// Partial derivatives of [`value`](Self::value) in parameter order:
    /// Gaussian `[sigma, center]`, Bell `[a, b, center]`.
    pub fn grad(&self, x: f64) -> Result<Vec<f64>> {
        check_x(x)?;
        self.validate()?;
        let mut out = vec![0.0; self.family().param_count()];
        self.grad_into(x, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn grad_into(&self, x: f64, out: &mut [f64]) {
        match self {
            Self::Gaussian(g) => out.copy_from_slice(&g.grad_unchecked(x)),
            Self::Bell(b) => out.copy_from_slice(&b.grad_unchecked(x)),
        }
    }

    /// Shape parameters in declared order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Gaussian(g) => vec![g.sigma, g.center],
            Self::Bell(b) => vec![b.a, b.b, b.center],
        }
    }

    /// Replaces parameters from a slice in declared order. The result is not validated.
    pub fn with_params(&self, p: &[f64]) -> Result<Self> {
        if p.len() != self.family().param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.family().param_count(),
                found: p.len(),
            });
        }
        Ok(match self {
            Self::Gaussian(_) => Self::Gaussian(GaussianMf {
                sigma: p[0],
                center: p[1],
            }),
            Self::Bell(_) => Self::Bell(BellMf {
                a: p[0],
                b: p[1],
                center: p[2],
            }),
        })
    }

    /// Projects every parameter into its bound interval. Idempotent.
    pub fn clamp_params(&self, bounds: &MfBounds) -> Self {
        fn lower(v: f64, min: f64) -> f64 {
            // NaN compares false, so it is replaced as well
            if v >= min {
                v
            } else {
                min
            }
        }
        match *self {
            Self::Gaussian(g) => Self::Gaussian(GaussianMf {
                sigma: lower(g.sigma, bounds.sigma_min),
                center: g.center,
            }),
            Self::Bell(b) => Self::Bell(BellMf {
                a: lower(b.a, bounds.a_min),
                b: lower(b.b, bounds.b_min).min(bounds.b_max),
                center: b.center,
            }),
        }
    }
}
