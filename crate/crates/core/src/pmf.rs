//! Finite probability mass functions, exact or floating.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, to_decimal_string, to_f64, ExactRational};

/// Tolerance on `|sum - 1 + deficit|` for floating PMFs.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Probs {
    Exact(Vec<ExactRational>),
    Float(Vec<f64>),
}

/// A number that is exact when its inputs were.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(ExactRational),
    Float(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => to_f64(r),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }
}

/// Probabilities on a strictly increasing integer support.
///
/// Exact PMFs sum to exactly one. Floating PMFs sum to `1 - deficit` within
/// [`FLOAT_NORMALIZATION_TOL`], where `deficit` is the mass a truncated
/// support leaves out (zero unless declared).
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    label: String,
    support: Vec<u64>,
    probs: Probs,
    deficit: Option<f64>,
}

fn check_support(support: &[u64], len: usize) -> Result<()> {
    if support.is_empty() {
        return Err(Error::domain("a PMF needs a nonempty support"));
    }
    if support.len() != len {
        return Err(Error::domain(format!(
            "support has {} points but {} probabilities were given",
            support.len(),
            len
        )));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("support must be strictly increasing"));
    }
    Ok(())
}

impl Pmf {
    pub fn exact(
        label: impl Into<String>,
        support: Vec<u64>,
        probs: Vec<ExactRational>,
    ) -> Result<Self> {
        check_support(&support, probs.len())?;
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::domain("probabilities must be nonnegative"));
        }
        let total: ExactRational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::domain(format!(
                "exact probabilities sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(Pmf {
            label: label.into(),
            support,
            probs: Probs::Exact(probs),
            deficit: None,
        })
    }

    /// A floating PMF whose support is complete (no truncation).
    pub fn float(label: impl Into<String>, support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        Self::float_truncated(label, support, probs, None)
    }

    /// A floating PMF on a truncated support; `deficit` is the declared missing
    /// mass `1 - sum`.
    pub fn float_truncated(
        label: impl Into<String>,
        support: Vec<u64>,
        probs: Vec<f64>,
        deficit: Option<f64>,
    ) -> Result<Self> {
        check_support(&support, probs.len())?;
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::domain(
                "probabilities must be finite and nonnegative",
            ));
        }
        let total: f64 = probs.iter().sum();
        let missing = deficit.unwrap_or(0.0);
        if (total + missing - 1.0).abs() > FLOAT_NORMALIZATION_TOL {
            return Err(Error::domain(format!(
                "floating probabilities sum to {total} with declared deficit {missing}"
            )));
        }
        Ok(Pmf {
            label: label.into(),
            support,
            probs: Probs::Float(probs),
            deficit,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &Probs {
        &self.probs
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.probs, Probs::Exact(_))
    }

    pub fn deficit(&self) -> Option<f64> {
        self.deficit
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn exact_probs(&self) -> Option<&[ExactRational]> {
        match &self.probs {
            Probs::Exact(v) => Some(v),
            Probs::Float(_) => None,
        }
    }

    pub fn index_of(&self, a: u64) -> Option<usize> {
        self.support.binary_search(&a).ok()
    }

    /// Probability at support index `i`.
    pub fn prob_at(&self, i: usize) -> Scalar {
        match &self.probs {
            Probs::Exact(v) => Scalar::Exact(v[i].clone()),
            Probs::Float(v) => Scalar::Float(v[i]),
        }
    }

    pub fn prob_f64_at(&self, i: usize) -> f64 {
        match &self.probs {
            Probs::Exact(v) => to_f64(&v[i]),
            Probs::Float(v) => v[i],
        }
    }

    /// `P(a)`, zero off the support.
    pub fn get(&self, a: u64) -> Scalar {
        match self.index_of(a) {
            Some(i) => self.prob_at(i),
            None if self.is_exact() => Scalar::Exact(ExactRational::zero()),
            None => Scalar::Float(0.0),
        }
    }

    pub fn get_f64(&self, a: u64) -> f64 {
        self.index_of(a).map_or(0.0, |i| self.prob_f64_at(i))
    }

    pub(crate) fn cmp_at(&self, i: usize, j: usize) -> Ordering {
        match &self.probs {
            Probs::Exact(v) => v[i].cmp(&v[j]),
            Probs::Float(v) => v[i].total_cmp(&v[j]),
        }
    }

    pub(crate) fn is_positive_at(&self, i: usize) -> bool {
        match &self.probs {
            Probs::Exact(v) => v[i].is_positive(),
            Probs::Float(v) => v[i] > 0.0,
        }
    }

    /// Support point with the largest mass, ties to the smallest.
    pub fn mode(&self) -> u64 {
        let mut best = 0;
        for i in 1..self.len() {
            if self.cmp_at(i, best) == Ordering::Greater {
                best = i;
            }
        }
        self.support[best]
    }

    /// `{"label", "exact", "support", "probs", "deficit"?}` with exact
    /// probabilities as `"num/den"` strings.
    pub fn to_json(&self) -> Value {
        let probs: Vec<Value> = match &self.probs {
            Probs::Exact(v) => v.iter().map(|r| Value::from(format_rational(r))).collect(),
            Probs::Float(v) => v.iter().map(|&x| Value::from(x)).collect(),
        };
        let mut doc = json!({
            "label": self.label,
            "exact": self.is_exact(),
            "support": self.support,
            "probs": probs,
        });
        if let Some(d) = self.deficit {
            doc["deficit"] = Value::from(d);
        }
        doc
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let bad = |what: &str| Error::domain(format!("PMF JSON: {what}"));
        let label = doc["label"].as_str().ok_or_else(|| bad("missing label"))?;
        let exact = doc["exact"]
            .as_bool()
            .ok_or_else(|| bad("missing exact flag"))?;
        let support = doc["support"]
            .as_array()
            .ok_or_else(|| bad("missing support"))?
            .iter()
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| bad("support entries must be integers"))
            })
            .collect::<Result<Vec<_>>>()?;
        let raw = doc["probs"]
            .as_array()
            .ok_or_else(|| bad("missing probs"))?;
        if exact {
            let probs = raw
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| bad("exact probs must be num/den strings"))
                        .and_then(parse_rational)
                })
                .collect::<Result<Vec<_>>>()?;
            Pmf::exact(label, support, probs)
        } else {
            let probs = raw
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| bad("float probs must be numbers")))
                .collect::<Result<Vec<_>>>()?;
            Pmf::float_truncated(label, support, probs, doc["deficit"].as_f64())
        }
    }

    /// `a,prob` rows with a header; exact values rendered with `digits`
    /// significant digits, LF line endings.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("a,prob\n");
        for (i, a) in self.support.iter().enumerate() {
            let cell = match &self.probs {
                Probs::Exact(v) => to_decimal_string(&v[i], digits),
                Probs::Float(v) => format!("{}", v[i]),
            };
            writeln!(out, "{a},{cell}").expect("writing to a String");
        }
        out
    }
}

/// `sum a * P(a)`, exact for exact PMFs.
pub fn pmf_mean(pmf: &Pmf) -> Scalar {
    match pmf.probs() {
        Probs::Exact(v) => Scalar::Exact(
            pmf.support()
                .iter()
                .zip(v)
                .map(|(&a, p)| p * ExactRational::from_integer(a.into()))
                .sum(),
        ),
        Probs::Float(v) => Scalar::Float(
            pmf.support()
                .iter()
                .zip(v)
                .map(|(&a, p)| a as f64 * p)
                .sum(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn exact_pmf_must_sum_to_one() {
        assert!(Pmf::exact("x", vec![0, 1], vec![ratio(1, 2), ratio(1, 2)]).is_ok());
        assert!(Pmf::exact("x", vec![0, 1], vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Pmf::exact("x", vec![0, 1], vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(Pmf::exact("x", vec![1, 0], vec![ratio(1, 2), ratio(1, 2)]).is_err());
        assert!(Pmf::exact("x", vec![0], vec![ratio(1, 2), ratio(1, 2)]).is_err());
    }

    #[test]
    fn float_pmf_honors_declared_deficit() {
        assert!(Pmf::float("x", vec![0, 1, 2], vec![0.2, 0.5, 0.3]).is_ok());
        assert!(Pmf::float("x", vec![0, 1], vec![0.5, 0.4]).is_err());
        assert!(Pmf::float_truncated("x", vec![0, 1], vec![0.5, 0.4], Some(0.1)).is_ok());
        assert!(Pmf::float("x", vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn mean_of_point_mass() {
        let pm = Pmf::exact("pt", vec![3], vec![ratio(1, 1)]).unwrap();
        assert_eq!(pmf_mean(&pm), Scalar::Exact(ratio(3, 1)));
        let fl = Pmf::float("pt", vec![3], vec![1.0]).unwrap();
        assert_eq!(pmf_mean(&fl), Scalar::Float(3.0));
    }

    #[test]
    fn lookup_off_support_is_zero() {
        let pm = Pmf::exact("x", vec![2, 5], vec![ratio(1, 4), ratio(3, 4)]).unwrap();
        assert_eq!(pm.get(5), Scalar::Exact(ratio(3, 4)));
        assert_eq!(pm.get(3), Scalar::Exact(ratio(0, 1)));
        assert_eq!(pm.get_f64(7), 0.0);
        assert_eq!(pm.mode(), 5);
    }

    #[test]
    fn json_shape_and_parse_back() {
        let pm = Pmf::exact(
            "avalanche",
            vec![0, 1, 2],
            vec![ratio(9, 16), ratio(4, 16), ratio(3, 16)],
        )
        .unwrap();
        let doc = pm.to_json();
        assert_eq!(
            doc,
            json!({
                "label": "avalanche",
                "exact": true,
                "support": [0, 1, 2],
                "probs": ["9/16", "1/4", "3/16"],
            })
        );
        assert_eq!(Pmf::from_json(&doc).unwrap(), pm);

        let fl = Pmf::float_truncated("limit", vec![0, 1], vec![0.5, 0.25], Some(0.25)).unwrap();
        let doc = fl.to_json();
        assert_eq!(doc["deficit"], json!(0.25));
        assert_eq!(Pmf::from_json(&doc).unwrap(), fl);
    }

    #[test]
    fn csv_rendering() {
        let pm = Pmf::exact("x", vec![0, 1], vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(pm.to_csv(4), "a,prob\n0,3.333e-1\n1,6.667e-1\n");
        let fl = Pmf::float("x", vec![0, 1], vec![0.75, 0.25]).unwrap();
        assert_eq!(fl.to_csv(17), "a,prob\n0,0.75\n1,0.25\n");
    }
}
