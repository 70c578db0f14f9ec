//! The lifted space: coefficient sequences carried on a shifted lattice.
//!
//! A [`LiftedSeq`] stores values `v(j)` at integer slots together with a real
//! offset; it represents the function `ρ` with `ρ(j - offset) = v(j)` and
//! `ρ ≡ 0` off that lattice. The order-`k` operator only moves the offset, so
//! it is commutative and additive in `k` by construction. The offset is kept
//! as an exact rational sum of the applied orders, so `shift(a)` followed by
//! `shift(b)` and the reverse produce identical values.
//!
//! Projection divides the value at exponent `t = j - offset` by `Γ(t+1)`;
//! slots that sit on a pole of Γ are hidden, not destroyed, and reappear after
//! a further shift.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffseq::CoeffSeq;
use crate::gamma::{self, as_integer, recip_gamma};
use crate::series::{GenSeries, SeriesError, Term, COEF_FLOOR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("term at exponent {0} lies on a gamma pole and has no preimage under projection")]
    NoPreimage(f64),
    #[error("basepoint mismatch: {0} vs {1}")]
    BasepointMismatch(f64, f64),
    #[error("offsets {0} and {1} are on different lattices")]
    OffsetMismatch(f64, f64),
    #[error("shift order {0} is not finite")]
    NonFinite(f64),
    #[error("lifted value at exponent {0} overflows")]
    Overflow(f64),
    #[error("invalid lifted-sequence JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// An element of the lifted space with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSeq {
    basepoint: f64,
    offset: BigRational,
    values: BTreeMap<i64, f64>,
    /// Last slot index carried (`f64::INFINITY` when exact).
    truncation: f64,
}

impl LiftedSeq {
    pub fn zero(basepoint: f64) -> Self {
        LiftedSeq {
            basepoint,
            offset: BigRational::zero(),
            values: BTreeMap::new(),
            truncation: f64::INFINITY,
        }
    }

    pub fn from_parts(
        basepoint: f64,
        offset: f64,
        values: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self, LiftError> {
        if !offset.is_finite() {
            return Err(LiftError::NonFinite(offset));
        }
        let mut out = LiftedSeq {
            basepoint,
            offset: exact(offset),
            values: BTreeMap::new(),
            truncation: f64::INFINITY,
        };
        for (j, v) in values {
            *out.values.entry(j).or_insert(0.0) += v;
        }
        out.normalize();
        Ok(out)
    }

    fn normalize(&mut self) {
        self.values.retain(|_, v| v.abs() >= COEF_FLOOR);
    }

    /// The embedding `ι`: offset zero, values copied from `σ`.
    pub fn embed(seq: &CoeffSeq) -> LiftedSeq {
        LiftedSeq {
            basepoint: seq.basepoint(),
            offset: BigRational::zero(),
            values: seq.entries().collect(),
            truncation: seq.truncation(),
        }
    }

    pub fn basepoint(&self) -> f64 {
        self.basepoint
    }

    /// Accumulated order, rounded to the nearest double.
    pub fn offset(&self) -> f64 {
        to_f64(&self.offset)
    }

    pub fn exact_offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn values(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().map(|(&j, &v)| (j, v))
    }

    pub fn value(&self, j: i64) -> f64 {
        self.values.get(&j).copied().unwrap_or(0.0)
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// The order-`k` operator: adds `k` to the offset, values untouched.
    pub fn shift(&self, k: f64) -> LiftedSeq {
        assert!(k.is_finite(), "shift order must be finite");
        LiftedSeq {
            basepoint: self.basepoint,
            offset: &self.offset + exact(k),
            values: self.values.clone(),
            truncation: self.truncation,
        }
    }

    /// Exponent `j - offset` of slot `j`, rounded once.
    pub fn exponent(&self, j: i64) -> f64 {
        to_f64(&(BigRational::from_integer(BigInt::from(j)) - &self.offset))
    }

    /// The extended projection `R`: slot `j` becomes
    /// `v(j)/Γ(t+1) · (x-a)^t` with `t = j - offset`.
    pub fn project(&self) -> GenSeries {
        let terms = self.values.iter().map(|(&j, &v)| {
            let t = self.exponent(j);
            Term::new(t, v * recip_gamma(t + 1.0))
        });
        let trunc = if self.truncation.is_finite() {
            self.truncation - self.offset()
        } else {
            f64::INFINITY
        };
        GenSeries::new(self.basepoint, terms, trunc)
            .expect("slots of one lifted sequence share a lattice")
    }

    /// Preimage of `f` under [`project`](Self::project).
    ///
    /// The offset is the distance from the first exponent up to the next
    /// integer, so slot indices are `ceil`-aligned and `project` recovers the
    /// exponents. Terms at negative-integer exponents are rejected.
    pub fn from_series(f: &GenSeries) -> Result<LiftedSeq, LiftError> {
        let Some(first) = f.terms().first() else {
            return Ok(LiftedSeq::zero(f.basepoint()).with_truncation(f.truncation_order()));
        };
        let anchor = match as_integer(first.exp) {
            Some(n) => n,
            None => first.exp.ceil(),
        };
        let offset = exact(anchor) - exact(first.exp);
        let offset_f = to_f64(&offset);
        let mut values = BTreeMap::new();
        for t in f.terms() {
            if gamma::is_pole(t.exp + 1.0) {
                return Err(LiftError::NoPreimage(t.exp));
            }
            let j = (t.exp + offset_f).round() as i64;
            let g = gamma::gamma(t.exp + 1.0).map_err(|_| LiftError::Overflow(t.exp))?;
            values.insert(j, t.coef * g);
        }
        let trunc = if f.truncation_order().is_finite() {
            f.truncation_order() + offset_f
        } else {
            f64::INFINITY
        };
        let mut out = LiftedSeq {
            basepoint: f.basepoint(),
            offset,
            values,
            truncation: trunc,
        };
        out.normalize();
        Ok(out)
    }

    fn with_truncation(mut self, order: f64) -> Self {
        self.truncation = order;
        self
    }

    /// `ρ|_ℤ` as a coefficient sequence. Zero unless the offset is an integer.
    pub fn restrict_to_integers(&self) -> CoeffSeq {
        match as_integer(self.offset()) {
            Some(m) => {
                let m = m as i64;
                CoeffSeq::from_entries(self.basepoint, self.values.iter().map(|(&j, &v)| (j - m, v)))
                    .with_truncation(self.truncation - m as f64)
            }
            None => CoeffSeq::zero(self.basepoint),
        }
    }

    pub fn add(&self, other: &LiftedSeq) -> Result<LiftedSeq, LiftError> {
        if self.basepoint != other.basepoint {
            return Err(LiftError::BasepointMismatch(self.basepoint, other.basepoint));
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        // other's slot j sits at exponent j - o2 = (j + m) - o1
        let m = if self.offset == other.offset {
            0
        } else {
            match as_integer(self.offset() - other.offset()) {
                Some(m) => m as i64,
                None => return Err(LiftError::OffsetMismatch(self.offset(), other.offset())),
            }
        };
        let mut out = self.clone();
        for (&j, &v) in &other.values {
            *out.values.entry(j + m).or_insert(0.0) += v;
        }
        out.truncation = self.truncation.min(other.truncation + m as f64);
        out.normalize();
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> LiftedSeq {
        let mut out = self.clone();
        for v in out.values.values_mut() {
            *v *= c;
        }
        out.normalize();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LiftedFile::from(self)).expect("lifted sequence serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&LiftedFile::from(self)).expect("lifted sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<LiftedSeq, LiftError> {
        let file: LiftedFile =
            serde_json::from_str(text).map_err(|e| LiftError::Json(e.to_string()))?;
        if !file.basepoint.is_finite() {
            return Err(LiftError::NonFinite(file.basepoint));
        }
        if let Some(bad) = file.values.iter().find(|s| !s.value.is_finite()) {
            return Err(LiftError::NonFinite(bad.value));
        }
        LiftedSeq::from_parts(
            file.basepoint,
            file.offset,
            file.values.into_iter().map(|s| (s.index, s.value)),
        )
    }
}

/// On-disk form: `{"basepoint": a, "offset": k, "values": [{"index": j, "value": v}, …]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftedFile {
    pub basepoint: f64,
    pub offset: f64,
    pub values: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Slot {
    pub index: i64,
    pub value: f64,
}

impl From<&LiftedSeq> for LiftedFile {
    fn from(s: &LiftedSeq) -> Self {
        LiftedFile {
            basepoint: s.basepoint,
            offset: s.offset(),
            values: s.values().map(|(index, value)| Slot { index, value }).collect(),
        }
    }
}
