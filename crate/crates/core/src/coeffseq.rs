//! Integer-indexed derivative-value sequences and the maps between them and
//! series.
//!
//! A [`CoeffSeq`] `σ` about `a` stands for the series `Σ σ(i)/Γ(i+1) (x-a)^i`
//! summed over all integers. Because `1/Γ(i+1)` vanishes for `i < 0`, entries
//! at negative indices are invisible after projection; they form the kernel
//! of [`CoeffSeq::to_series`].

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gamma::{self, as_integer, recip_gamma};
use crate::series::{GenSeries, SeriesError, Term, COEF_FLOOR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffSeqError {
    #[error("basepoint mismatch: {0} vs {1}")]
    BasepointMismatch(f64, f64),
    #[error("exponent {0} is not a nonnegative integer; the series is not an analytic jet")]
    NotAnalyticJet(f64),
    #[error("coefficient at index {0} overflows")]
    Overflow(i64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `σ ∈ ℤ_ω(a)` restricted to a finite support.
///
/// `truncation` is the last index carried when `σ` is a truncated jet
/// (`f64::INFINITY` for exact finite sequences).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    basepoint: f64,
    entries: BTreeMap<i64, f64>,
    truncation: f64,
}

impl CoeffSeq {
    pub fn zero(basepoint: f64) -> Self {
        CoeffSeq {
            basepoint,
            entries: BTreeMap::new(),
            truncation: f64::INFINITY,
        }
    }

    pub fn from_entries(basepoint: f64, entries: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let mut seq = Self::zero(basepoint);
        for (i, v) in entries {
            *seq.entries.entry(i).or_insert(0.0) += v;
        }
        seq.normalize();
        seq
    }

    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self.entries.retain(|&i, _| (i as f64) <= truncation);
        self
    }

    fn normalize(&mut self) {
        self.entries.retain(|_, v| v.abs() >= COEF_FLOOR);
    }

    pub fn basepoint(&self) -> f64 {
        self.basepoint
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn get(&self, i: i64) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &CoeffSeq) -> Result<CoeffSeq, CoeffSeqError> {
        if self.basepoint != other.basepoint {
            return Err(CoeffSeqError::BasepointMismatch(
                self.basepoint,
                other.basepoint,
            ));
        }
        let mut sum = self.clone();
        for (&i, &v) in &other.entries {
            *sum.entries.entry(i).or_insert(0.0) += v;
        }
        sum.truncation = self.truncation.min(other.truncation);
        sum.normalize();
        let t = sum.truncation;
        Ok(sum.with_truncation(t))
    }

    pub fn scale(&self, c: f64) -> CoeffSeq {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= c;
        }
        out.normalize();
        out
    }

    /// Integer shift `(D^k σ)(i) = σ(i + k)`.
    pub fn shift(&self, k: i64) -> CoeffSeq {
        CoeffSeq {
            basepoint: self.basepoint,
            entries: self.entries.iter().map(|(&i, &v)| (i - k, v)).collect(),
            truncation: self.truncation - k as f64,
        }
    }

    /// Keeps the entries at `i ≥ 0`.
    pub fn nonnegative_part(&self) -> CoeffSeq {
        CoeffSeq {
            basepoint: self.basepoint,
            entries: self.entries.range(0..).map(|(&i, &v)| (i, v)).collect(),
            truncation: self.truncation,
        }
    }

    /// The projection `R σ = Σ σ(i)/Γ(i+1) (x-a)^i`.
    ///
    /// Negative-index entries land on poles of Γ and vanish.
    pub fn to_series(&self) -> GenSeries {
        let terms = self
            .entries
            .iter()
            .map(|(&i, &v)| Term::new(i as f64, v * recip_gamma(i as f64 + 1.0)));
        GenSeries::new(self.basepoint, terms, self.truncation)
            .expect("integer exponents share a lattice")
    }

    /// The lift `R⁻¹ f`: `σ(i) = i! · [coefficient of (x-a)^i]` for `i ≥ 0`, zero below.
    pub fn from_jet(f: &GenSeries) -> Result<CoeffSeq, CoeffSeqError> {
        let mut entries = BTreeMap::new();
        for t in f.terms() {
            let n = match as_integer(t.exp) {
                Some(n) if n >= 0.0 => n,
                _ => return Err(CoeffSeqError::NotAnalyticJet(t.exp)),
            };
            let fact = gamma::gamma(n + 1.0).map_err(|_| CoeffSeqError::Overflow(n as i64))?;
            entries.insert(n as i64, t.coef * fact);
        }
        let mut seq = CoeffSeq {
            basepoint: f.basepoint(),
            entries,
            truncation: f.truncation_order(),
        };
        seq.normalize();
        Ok(seq)
    }

    /// Largest entrywise relative discrepancy (support mismatches count as 1).
    pub fn max_relative_diff(&self, other: &CoeffSeq) -> f64 {
        if self.basepoint != other.basepoint {
            return f64::INFINITY;
        }
        let mut keys: Vec<i64> = self.entries.keys().chain(other.entries.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|i| {
                let (a, b) = (self.get(i), other.get(i));
                (a - b).abs() / a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    }
}
