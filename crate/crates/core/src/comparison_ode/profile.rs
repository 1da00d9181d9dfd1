use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The comparison curvature function `G`.
///
/// Evaluation only ever looks at `|t|` (or `t²`), so every profile is even by
/// construction. Tabulated data is given on `[0, t_last]` and interpolated
/// with a monotone cubic whose slope at the origin is pinned to zero, which
/// keeps the even extension C¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDescriptor", into = "ProfileDescriptor")]
pub enum CurvatureProfile {
    Constant(f64),
    /// Coefficients of `1, t², t⁴, …`.
    EvenPolynomial(Vec<f64>),
    TabulatedEven(EvenTable),
}

impl CurvatureProfile {
    pub fn constant(value: f64) -> Self {
        CurvatureProfile::Constant(value)
    }

    /// `G(t)`. Returns NaN outside the domain of a tabulated profile; callers
    /// that integrate turn non-finite values into [`Error::ProfileDomain`].
    pub fn value(&self, t: f64) -> f64 {
        match self {
            CurvatureProfile::Constant(c) => *c,
            CurvatureProfile::EvenPolynomial(coeffs) => {
                let s = t * t;
                coeffs.iter().rev().fold(0.0, |acc, &a| acc * s + a)
            }
            CurvatureProfile::TabulatedEven(table) => table.eval(t.abs()),
        }
    }

    pub fn try_value(&self, t: f64) -> Result<f64> {
        let v = self.value(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ProfileDomain {
                t,
                reason: match self {
                    CurvatureProfile::TabulatedEven(table) => {
                        format!("table covers [0, {}]", table.t_max())
                    }
                    _ => "non-finite value".into(),
                },
            })
        }
    }

    /// Constant value, if the profile is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            CurvatureProfile::Constant(c) => Some(*c),
            CurvatureProfile::EvenPolynomial(coeffs) if coeffs.iter().skip(1).all(|&a| a == 0.0) => {
                Some(coeffs.first().copied().unwrap_or(0.0))
            }
            _ => None,
        }
    }

    /// Extremes of `G` over `[a, b]`, sampled on 257 points (exact for
    /// constants).
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        if let Some(c) = self.as_constant() {
            return (c, c);
        }
        let m = 256;
        (0..=m)
            .map(|i| self.value(a + (b - a) * i as f64 / m as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn describe(&self) -> String {
        match self {
            CurvatureProfile::Constant(c) => format!("G={c}"),
            CurvatureProfile::EvenPolynomial(coeffs) => format!("G=even-poly{coeffs:?}"),
            CurvatureProfile::TabulatedEven(t) => format!("G=table[{} pts]", t.t.len()),
        }
    }
}

/// Even curvature data sampled on `0 = t₀ < t₁ < … < t_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenTable {
    t: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl EvenTable {
    pub fn new(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if t.len() != values.len() || t.len() < 2 {
            return Err(Error::Config("tabulated profile needs at least two (t, value) pairs".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::Evenness("tabulated profile must start at t = 0 (data is mirrored to t < 0)".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("tabulated abscissae must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated values must be finite".into()));
        }
        let slopes = fritsch_carlson_slopes(&t, &values);
        Ok(EvenTable { t, values, slopes })
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn eval(&self, t: f64) -> f64 {
        if !(0.0..=self.t_max()).contains(&t) {
            return f64::NAN;
        }
        let i = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= self.t.len() => self.t.len() - 2,
            k => k - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        hermite(s, h, self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1])
    }
}

/// Monotone cubic slopes; the slope at the origin is zero so that the even
/// extension has a continuous derivative.
fn fritsch_carlson_slopes(t: &[f64], y: &[f64]) -> Vec<f64> {
    let m = t.len();
    let delta: Vec<f64> = (0..m - 1).map(|i| (y[i + 1] - y[i]) / (t[i + 1] - t[i])).collect();
    let mut d = vec![0.0; m];
    d[m - 1] = delta[m - 2];
    for i in 1..m - 1 {
        d[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            let w1 = 2.0 * (t[i + 1] - t[i]) + (t[i] - t[i - 1]);
            let w2 = (t[i + 1] - t[i]) + 2.0 * (t[i] - t[i - 1]);
            (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])
        };
    }
    d
}

fn hermite(s: f64, h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

/// Wire form of a profile: `{"kind": "constant", "value": -1}`,
/// `{"kind": "even-polynomial", "coeffs": [...]}` (powers of t²),
/// `{"kind": "polynomial", "coeffs": [...]}` (powers of t; odd terms must
/// vanish) or `{"kind": "tabulated-even", "t": [...], "values": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl TryFrom<ProfileDescriptor> for CurvatureProfile {
    type Error = Error;

    fn try_from(d: ProfileDescriptor) -> Result<Self> {
        let missing = |field: &str| Error::Config(format!("profile kind '{}' needs '{field}'", d.kind));
        match d.kind.as_str() {
            "constant" => {
                let v = d.value.ok_or_else(|| missing("value"))?;
                if !v.is_finite() {
                    return Err(Error::Config("constant profile must be finite".into()));
                }
                Ok(CurvatureProfile::Constant(v))
            }
            "even-polynomial" => {
                Ok(CurvatureProfile::EvenPolynomial(d.coeffs.clone().ok_or_else(|| missing("coeffs"))?))
            }
            "polynomial" => {
                let coeffs = d.coeffs.clone().ok_or_else(|| missing("coeffs"))?;
                if let Some((i, a)) = coeffs.iter().enumerate().find(|(i, a)| i % 2 == 1 && **a != 0.0) {
                    return Err(Error::Evenness(format!("coefficient of t^{i} is {a}; G must be an even function")));
                }
                Ok(CurvatureProfile::EvenPolynomial(coeffs.into_iter().step_by(2).collect()))
            }
            "tabulated-even" => {
                let t = d.t.clone().ok_or_else(|| missing("t"))?;
                let values = d.values.clone().ok_or_else(|| missing("values"))?;
                Ok(CurvatureProfile::TabulatedEven(EvenTable::new(t, values)?))
            }
            other => Err(Error::Config(format!("unknown profile kind '{other}'"))),
        }
    }
}

impl From<CurvatureProfile> for ProfileDescriptor {
    fn from(p: CurvatureProfile) -> Self {
        let empty = ProfileDescriptor { kind: String::new(), value: None, coeffs: None, t: None, values: None };
        match p {
            CurvatureProfile::Constant(v) => ProfileDescriptor { kind: "constant".into(), value: Some(v), ..empty },
            CurvatureProfile::EvenPolynomial(c) => {
                ProfileDescriptor { kind: "even-polynomial".into(), coeffs: Some(c), ..empty }
            }
            CurvatureProfile::TabulatedEven(table) => ProfileDescriptor {
                kind: "tabulated-even".into(),
                t: Some(table.t),
                values: Some(table.values),
                ..empty
            },
        }
    }
}
