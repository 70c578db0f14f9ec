//! Generalized power series `Σ b (x - a)^α` with all exponents on one lattice.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gamma::{as_integer, integer_tolerance};

/// Coefficients below this magnitude are dropped.
pub const COEF_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("basepoint mismatch: {0} vs {1}")]
    BasepointMismatch(f64, f64),
    #[error("exponents {0} and {1} lie on different lattices")]
    MixedLattice(f64, f64),
    #[error("non-finite value in series term (exp {exp}, coef {coef})")]
    NonFinite { exp: f64, coef: f64 },
    #[error("cannot evaluate (x - {basepoint})^{exp} at x = {x}")]
    Domain { basepoint: f64, exp: f64, x: f64 },
    #[error("invalid series JSON: {0}")]
    Json(String),
}

/// One term `coef · (x - a)^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exp: f64,
    pub coef: f64,
}

impl Term {
    pub fn new(exp: f64, coef: f64) -> Self {
        Term { exp, coef }
    }
}

/// Fractional part of `x` in `[0, 1)`, snapped to 0 near integers.
pub fn lattice_phase(x: f64) -> f64 {
    if as_integer(x).is_some() {
        return 0.0;
    }
    let p = x - x.floor();
    if p >= 1.0 {
        0.0
    } else {
        p
    }
}

/// True when `a - b` is an integer within the shared tolerance.
pub fn same_lattice(a: f64, b: f64) -> bool {
    as_integer(a - b).is_some()
}

fn same_exponent(a: f64, b: f64) -> bool {
    (a - b).abs() <= integer_tolerance()
}

/// A truncated generalized power series about `basepoint`.
///
/// Terms are sorted by strictly increasing exponent, coefficients are nonzero
/// and every exponent lies on one lattice `φ + ℤ`. Exponents above
/// `truncation_order` are an unrepresented remainder; exact series (finite
/// sums) carry `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSeries {
    basepoint: f64,
    terms: Vec<Term>,
    truncation_order: f64,
}

impl GenSeries {
    /// Builds a normalized series: sorts, merges equal exponents, drops
    /// negligible coefficients and terms above the truncation order.
    pub fn new(
        basepoint: f64,
        terms: impl IntoIterator<Item = Term>,
        truncation_order: f64,
    ) -> Result<Self, SeriesError> {
        if !basepoint.is_finite() {
            return Err(SeriesError::NonFinite {
                exp: f64::NAN,
                coef: basepoint,
            });
        }
        let mut raw: Vec<Term> = Vec::new();
        for t in terms {
            if !t.exp.is_finite() || !t.coef.is_finite() {
                return Err(SeriesError::NonFinite {
                    exp: t.exp,
                    coef: t.coef,
                });
            }
            raw.push(t);
        }
        raw.sort_by(|a, b| a.exp.total_cmp(&b.exp));

        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.last_mut() {
                Some(last) if same_exponent(last.exp, t.exp) => last.coef += t.coef,
                _ => terms.push(t),
            }
        }
        let tol = integer_tolerance();
        terms.retain(|t| t.coef.abs() >= COEF_FLOOR && t.exp <= truncation_order + tol);
        if let Some(first) = terms.first() {
            if let Some(bad) = terms.iter().find(|t| !same_lattice(t.exp, first.exp)) {
                return Err(SeriesError::MixedLattice(first.exp, bad.exp));
            }
        }
        Ok(GenSeries {
            basepoint,
            terms,
            truncation_order,
        })
    }

    pub fn zero(basepoint: f64) -> Self {
        GenSeries {
            basepoint,
            terms: Vec::new(),
            truncation_order: f64::INFINITY,
        }
    }

    /// The single exact term `coef · (x - basepoint)^exp`.
    pub fn monomial(basepoint: f64, coef: f64, exp: f64) -> Result<Self, SeriesError> {
        Self::new(basepoint, [Term::new(exp, coef)], f64::INFINITY)
    }

    /// A Taylor jet `Σ coeffs[i] (x - a)^i`, truncated after the last entry.
    pub fn taylor(basepoint: f64, coeffs: &[f64]) -> Result<Self, SeriesError> {
        let order = coeffs.len() as f64 - 1.0;
        Self::new(
            basepoint,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| Term::new(i as f64, c)),
            order,
        )
    }

    /// An exact polynomial `Σ coeffs[i] (x - a)^i`.
    pub fn polynomial(basepoint: f64, coeffs: &[f64]) -> Result<Self, SeriesError> {
        Self::taylor(basepoint, coeffs).map(|s| s.with_truncation(f64::INFINITY))
    }

    pub fn basepoint(&self) -> f64 {
        self.basepoint
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn truncation_order(&self) -> f64 {
        self.truncation_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the term at `exp`, or 0.
    pub fn coef(&self, exp: f64) -> f64 {
        self.terms
            .iter()
            .find(|t| same_exponent(t.exp, exp))
            .map_or(0.0, |t| t.coef)
    }

    /// Lattice phase φ ∈ [0,1) shared by all exponents; `None` for the zero series.
    pub fn lattice(&self) -> Option<f64> {
        self.terms.first().map(|t| lattice_phase(t.exp))
    }

    /// Every exponent is a nonnegative integer.
    pub fn is_analytic_jet(&self) -> bool {
        self.terms
            .iter()
            .all(|t| matches!(as_integer(t.exp), Some(n) if n >= 0.0))
    }

    pub fn with_truncation(mut self, order: f64) -> Self {
        self.truncation_order = order;
        let tol = integer_tolerance();
        self.terms.retain(|t| t.exp <= order + tol);
        self
    }

    /// Drops every term with exponent above `order`.
    pub fn truncate(&self, order: f64) -> Self {
        self.clone()
            .with_truncation(order.min(self.truncation_order))
    }

    pub fn add(&self, other: &GenSeries) -> Result<GenSeries, SeriesError> {
        if self.basepoint != other.basepoint {
            return Err(SeriesError::BasepointMismatch(
                self.basepoint,
                other.basepoint,
            ));
        }
        GenSeries::new(
            self.basepoint,
            self.terms.iter().chain(other.terms.iter()).copied(),
            self.truncation_order.min(other.truncation_order),
        )
    }

    pub fn scale(&self, c: f64) -> GenSeries {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.exp, c * t.coef))
            .filter(|t| t.coef.abs() >= COEF_FLOOR)
            .collect();
        GenSeries {
            basepoint: self.basepoint,
            terms,
            truncation_order: self.truncation_order,
        }
    }

    pub fn sub(&self, other: &GenSeries) -> Result<GenSeries, SeriesError> {
        self.add(&other.scale(-1.0))
    }

    /// Evaluates the represented terms at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, SeriesError> {
        let h = x - self.basepoint;
        let mut sum = 0.0;
        for t in &self.terms {
            let v = match as_integer(t.exp) {
                Some(n) if n >= 0.0 => h.powi(n as i32),
                Some(n) => {
                    if h == 0.0 {
                        return Err(self.domain(t.exp, x));
                    }
                    h.powi(n as i32)
                }
                None => {
                    if h <= 0.0 {
                        return Err(self.domain(t.exp, x));
                    }
                    h.powf(t.exp)
                }
            };
            sum += t.coef * v;
        }
        Ok(sum)
    }

    fn domain(&self, exp: f64, x: f64) -> SeriesError {
        SeriesError::Domain {
            basepoint: self.basepoint,
            exp,
            x,
        }
    }

    /// Largest term-for-term relative discrepancy between two series.
    ///
    /// Terms are matched by exponent; a term present on one side only counts
    /// as a discrepancy of 1. Differing basepoints give `f64::INFINITY`.
    pub fn max_relative_diff(&self, other: &GenSeries) -> f64 {
        if self.basepoint != other.basepoint {
            return f64::INFINITY;
        }
        let (mut i, mut j) = (0, 0);
        let mut worst: f64 = 0.0;
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if same_exponent(x.exp, y.exp) => {
                    let scale = x.coef.abs().max(y.coef.abs());
                    worst = worst.max((x.coef - y.coef).abs() / scale);
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.exp < y.exp => {
                    worst = worst.max(1.0);
                    i += 1;
                }
                (Some(_), None) => {
                    worst = worst.max(1.0);
                    i += 1;
                }
                _ => {
                    worst = worst.max(1.0);
                    j += 1;
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesFile::from(self)).expect("series serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&SeriesFile::from(self)).expect("series serializes")
    }

    /// Parses the canonical series JSON. The result is exact (infinite
    /// truncation order) unless the optional `truncation_order` key is present.
    pub fn from_json(text: &str) -> Result<GenSeries, SeriesError> {
        let file: SeriesFile =
            serde_json::from_str(text).map_err(|e| SeriesError::Json(e.to_string()))?;
        GenSeries::new(
            file.basepoint,
            file.terms.into_iter().map(|t| Term::new(t.exp, t.coef)),
            file.truncation_order.unwrap_or(f64::INFINITY),
        )
    }
}

/// On-disk form: `{"basepoint": a, "terms": [{"exp": α, "coef": b}, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub basepoint: f64,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing)]
    pub truncation_order: Option<f64>,
}

impl From<&GenSeries> for SeriesFile {
    fn from(s: &GenSeries) -> Self {
        SeriesFile {
            basepoint: s.basepoint,
            terms: s.terms.clone(),
            truncation_order: None,
        }
    }
}

impl fmt::Display for GenSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let var = if self.basepoint == 0.0 {
            "x".to_string()
        } else if self.basepoint < 0.0 {
            format!("(x + {})", -self.basepoint)
        } else {
            format!("(x - {})", self.basepoint)
        };
        for (i, t) in self.terms.iter().enumerate() {
            let c = if i == 0 {
                t.coef
            } else if t.coef < 0.0 {
                write!(f, " - ")?;
                -t.coef
            } else {
                write!(f, " + ")?;
                t.coef
            };
            if t.exp == 0.0 {
                write!(f, "{c}")?;
            } else if t.exp == 1.0 {
                write!(f, "{c}*{var}")?;
            } else {
                write!(f, "{c}*{var}^{}", t.exp)?;
            }
        }
        if self.truncation_order.is_finite() {
            write!(f, " + O({var}^{})", self.truncation_order)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_merges_and_sorts() {
        let s = GenSeries::new(
            0.0,
            [Term::new(2.0, 1.0), Term::new(0.0, 3.0), Term::new(2.0, -1.0)],
            f64::INFINITY,
        )
        .unwrap();
        assert_eq!(s.terms(), &[Term::new(0.0, 3.0)]);
    }

    #[test]
    fn mixed_lattice_rejected() {
        let r = GenSeries::new(
            0.0,
            [Term::new(0.5, 1.0), Term::new(0.25, 1.0)],
            f64::INFINITY,
        );
        assert!(matches!(r, Err(SeriesError::MixedLattice(_, _))));
        // -0.5 and 1.5 share a lattice
        assert!(GenSeries::new(
            0.0,
            [Term::new(-0.5, 1.0), Term::new(1.5, 1.0)],
            f64::INFINITY
        )
        .is_ok());
    }

    #[test]
    fn eval_exp_jet() {
        let mut c = vec![1.0];
        for i in 1..=12 {
            let prev = c[i - 1];
            c.push(prev / i as f64);
        }
        let s = GenSeries::taylor(0.0, &c).unwrap();
        // remainder bounded by e/13! < 1e-9
        assert!((s.eval(1.0).unwrap() - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn eval_domain() {
        let s = GenSeries::monomial(0.0, 1.0, 0.5).unwrap();
        assert_eq!(s.eval(4.0).unwrap(), 2.0);
        assert!(matches!(s.eval(-1.0), Err(SeriesError::Domain { .. })));
        let s = GenSeries::monomial(0.0, 1.0, -0.5).unwrap();
        assert!(matches!(s.eval(0.0), Err(SeriesError::Domain { .. })));
        let s = GenSeries::monomial(1.0, 1.0, -2.0).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn json_shape() {
        let s = GenSeries::new(
            1.0,
            [Term::new(1.0, -2.5), Term::new(0.0, 1.0)],
            f64::INFINITY,
        )
        .unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"basepoint":1.0,"terms":[{"exp":0.0,"coef":1.0},{"exp":1.0,"coef":-2.5}]}"#
        );
        assert_eq!(GenSeries::from_json(&s.to_json()).unwrap(), s);
        assert!(GenSeries::from_json(r#"{"basepoint":0,"terms":[],"x":1}"#).is_err());
        assert!(GenSeries::from_json(
            r#"{"basepoint":0,"terms":[{"exp":0.5,"coef":1},{"exp":0.25,"coef":1}]}"#
        )
        .is_err());
    }

    #[test]
    fn relative_diff_counts_unmatched_terms() {
        let a = GenSeries::polynomial(0.0, &[1.0, 2.0]).unwrap();
        let b = GenSeries::polynomial(0.0, &[1.0, 2.0 + 2e-12]).unwrap();
        assert!(a.max_relative_diff(&b) < 1.1e-12);
        let c = GenSeries::polynomial(0.0, &[1.0]).unwrap();
        assert_eq!(a.max_relative_diff(&c), 1.0);
        assert_eq!(a.max_relative_diff(&a), 0.0);
    }

    #[test]
    fn display() {
        let s = GenSeries::polynomial(0.0, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(s.to_string(), "1 - 2*x + 0.5*x^2");
        assert_eq!(GenSeries::zero(0.0).to_string(), "0");
    }
}
