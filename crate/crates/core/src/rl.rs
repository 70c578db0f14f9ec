//! Riemann-Liouville differintegral of generalized power series, term by term:
//!
//! ```text
//! D^k  b (x-a)^α  =  b · Γ(α+1)/Γ(α+1-k) · (x-a)^(α-k)
//! ```
//!
//! A term is annihilated when `α+1-k` is a pole of Γ while `α+1` is not.

use thiserror::Error;

use crate::gamma::{self, gamma_ratio, is_pole, GammaError};
use crate::series::{GenSeries, SeriesError, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RlError {
    #[error("order {k} applied to (x-a)^{alpha}: gamma(alpha+1) has a pole and the power rule is undefined")]
    NumeratorPole { alpha: f64, k: f64 },
    #[error("order {0} is not finite")]
    NonFinite(f64),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// True when `D^k (x-a)^α = 0`: `α+1-k` is a nonpositive integer and `α+1` is not.
pub fn is_annihilated(alpha: f64, k: f64) -> bool {
    is_pole(alpha + 1.0 - k) && !is_pole(alpha + 1.0)
}

/// Applies order `k` to the single term `b (x-a)^α`.
///
/// Returns `None` when the term is annihilated. When `α` is a negative
/// integer only integer `k` is accepted, using the limit of the Γ ratio.
pub fn power_term(b: f64, alpha: f64, k: f64) -> Result<Option<Term>, RlError> {
    if !k.is_finite() {
        return Err(RlError::NonFinite(k));
    }
    if is_annihilated(alpha, k) {
        return Ok(None);
    }
    let ratio = gamma_ratio(alpha + 1.0, alpha + 1.0 - k).map_err(|e| match e {
        GammaError::NumeratorPole(..) => RlError::NumeratorPole { alpha, k },
        other => RlError::Gamma(other),
    })?;
    Ok(Some(Term::new(alpha - k, b * ratio)))
}

/// Applies order `k` termwise. Annihilated terms are dropped; a truncated
/// input of order `N` yields order `N - k`.
pub fn differintegrate(f: &GenSeries, k: f64) -> Result<GenSeries, RlError> {
    let mut terms = Vec::with_capacity(f.len());
    for t in f.terms() {
        if let Some(term) = power_term(t.coef, t.exp, k)? {
            terms.push(term);
        }
    }
    let order = f.truncation_order() - k;
    Ok(GenSeries::new(f.basepoint(), terms, order)?)
}

/// Indices of the terms of `f` that order `k` annihilates.
pub fn annihilated_terms(f: &GenSeries, k: f64) -> Vec<usize> {
    f.terms()
        .iter()
        .enumerate()
        .filter(|(_, t)| is_annihilated(t.exp, k))
        .map(|(i, _)| i)
        .collect()
}

/// `α + 1 - k`, snapped to the integer it is within tolerance of.
pub fn kernel_index(alpha: f64, k: f64) -> f64 {
    let v = alpha + 1.0 - k;
    gamma::as_integer(v).unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(c: f64, e: f64) -> GenSeries {
        GenSeries::monomial(0.0, c, e).unwrap()
    }

    #[test]
    fn half_derivative_of_x() {
        let t = power_term(1.0, 1.0, 0.5).unwrap().unwrap();
        assert_eq!(t.exp, 0.5);
        assert!((t.coef - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn kernel_terms() {
        assert_eq!(power_term(1.0, -0.5, 0.5).unwrap(), None);
        assert!(is_annihilated(-0.5, 0.5));
        assert!(!is_annihilated(1.0, 0.5));
        assert!(is_annihilated(0.5, 2.5));
        // constants die under integer derivatives
        assert!(is_annihilated(0.0, 1.0));
        assert!(!is_annihilated(0.0, 0.5));
        // x^{-1}: alpha+1 is itself a pole, so this is the limit case, not the kernel
        assert!(!is_annihilated(-1.0, 1.0));
    }

    #[test]
    fn negative_integer_powers_use_the_limit() {
        assert_eq!(power_term(1.0, -1.0, 1.0).unwrap(), Some(Term::new(-2.0, -1.0)));
        assert_eq!(power_term(1.0, -2.0, 2.0).unwrap(), Some(Term::new(-4.0, 6.0)));
        assert_eq!(
            power_term(1.0, -1.0, 0.5),
            Err(RlError::NumeratorPole { alpha: -1.0, k: 0.5 })
        );
    }

    #[test]
    fn identity_and_classical_derivative() {
        assert_eq!(power_term(1.0, 2.0, 0.0).unwrap(), Some(Term::new(2.0, 1.0)));
        assert_eq!(differintegrate(&mono(1.0, 2.0), 1.0).unwrap(), mono(2.0, 1.0));
        let p = GenSeries::polynomial(0.0, &[5.0, -1.0, 3.0, 2.0]).unwrap();
        let dp = GenSeries::polynomial(0.0, &[-1.0, 6.0, 6.0]).unwrap();
        assert_eq!(differintegrate(&p, 1.0).unwrap(), dp);
    }

    #[test]
    fn semigroup_failure_witness() {
        let f = mono(1.0, -0.5);
        let once = differintegrate(&f, 0.5).unwrap();
        assert!(once.is_zero());
        assert!(differintegrate(&once, 0.5).unwrap().is_zero());
        let direct = differintegrate(&f, 1.0).unwrap();
        assert_eq!(direct.len(), 1);
        assert_eq!(direct.terms()[0].exp, -1.5);
        assert!((direct.terms()[0].coef + 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncation_order_shifts() {
        let f = GenSeries::taylor(0.0, &[1.0, 1.0, 0.5]).unwrap();
        assert_eq!(differintegrate(&f, 0.5).unwrap().truncation_order(), 1.5);
    }
}
