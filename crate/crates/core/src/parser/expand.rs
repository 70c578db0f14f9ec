//! Expansion of an [`Expr`] into a truncated [`GenSeries`] about a basepoint.

use thiserror::Error;

use super::{Expr, Func};
use crate::gamma::{as_integer, integer_tolerance};
use crate::series::{GenSeries, SeriesError, Term};

/// Largest working order the expansion will carry.
pub const MAX_WORKING_ORDER: f64 = 4096.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpandError {
    #[error("power of (x - {center}) cannot be expanded about {basepoint}")]
    CenterMismatch { center: f64, basepoint: f64 },
    #[error("not analytic at the basepoint: {0}")]
    NonAnalytic(String),
    #[error("working order {0} exceeds the limit of {MAX_WORKING_ORDER}")]
    OrderTooLarge(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Expands `e` about `basepoint`, keeping exponents up to `order`.
///
/// Pure powers `(x - basepoint)^p` pass through as single terms; exact
/// results (polynomials, isolated powers) keep an infinite truncation order.
pub fn to_series(e: &Expr, basepoint: f64, order: usize) -> Result<GenSeries, ExpandError> {
    let order = order as f64;
    let working = order + negativity(e).ceil();
    if !(working <= MAX_WORKING_ORDER) {
        return Err(ExpandError::OrderTooLarge(working));
    }
    let s = Expander { a: basepoint, w: working }.expand(e)?;
    Ok(cap(s, order))
}

/// How far below zero products can push exponents: an upper bound on the
/// total negative power contributed by the factors of any product.
fn negativity(e: &Expr) -> f64 {
    match e {
        Expr::Num(_) | Expr::Var | Expr::Call(..) => 0.0,
        Expr::Neg(e) => negativity(e),
        Expr::Add(l, r) | Expr::Sub(l, r) => negativity(l).max(negativity(r)),
        Expr::Mul(l, r) => negativity(l) + negativity(r),
        Expr::Div(l, _) => negativity(l),
        Expr::Pow(b, p) => {
            let p = p.constant_value().unwrap_or(0.0);
            if b.shifted_var_center().is_some() {
                (-p).max(0.0)
            } else {
                p.max(0.0) * negativity(b)
            }
        }
    }
}

/// Truncates at `order` only when a represented term lies above it, so
/// exact results stay exact.
fn cap(s: GenSeries, order: f64) -> GenSeries {
    let tol = integer_tolerance();
    let exact = s.truncation_order() == f64::INFINITY;
    if exact && s.terms().iter().all(|t| t.exp <= order + tol) {
        s
    } else {
        s.truncate(order)
    }
}

struct Expander {
    a: f64,
    w: f64,
}

impl Expander {
    fn expand(&self, e: &Expr) -> Result<GenSeries, ExpandError> {
        if let Some(c) = e.constant_value() {
            return self.constant(c);
        }
        let s = match e {
            Expr::Num(_) => unreachable!("constants handled above"),
            Expr::Var => GenSeries::polynomial(self.a, &[self.a, 1.0])?,
            Expr::Neg(e) => self.expand(e)?.scale(-1.0),
            Expr::Add(l, r) => self.expand(l)?.add(&self.expand(r)?)?,
            Expr::Sub(l, r) => self.expand(l)?.sub(&self.expand(r)?)?,
            Expr::Mul(l, r) => self.mul(&self.expand(l)?, &self.expand(r)?)?,
            Expr::Div(l, r) => {
                let c = r
                    .constant_value()
                    .filter(|c| *c != 0.0 && c.is_finite())
                    .ok_or_else(|| ExpandError::NonAnalytic(format!("division by {r}")))?;
                self.expand(l)?.scale(1.0 / c)
            }
            Expr::Pow(b, p) => self.pow(b, p)?,
            Expr::Call(f, arg) => self.call(*f, &self.expand(arg)?)?,
        };
        Ok(cap(s, self.w))
    }

    fn constant(&self, c: f64) -> Result<GenSeries, ExpandError> {
        if !c.is_finite() {
            return Err(SeriesError::NonFinite { exp: 0.0, coef: c }.into());
        }
        Ok(GenSeries::monomial(self.a, c, 0.0)?)
    }

    fn pow(&self, base: &Expr, p: &Expr) -> Result<GenSeries, ExpandError> {
        let p = p
            .constant_value()
            .ok_or_else(|| ExpandError::NonAnalytic(format!("non-constant exponent {p}")))?;
        if !p.is_finite() {
            return Err(ExpandError::NonAnalytic(format!("exponent {p}")));
        }
        if let Some(center) = base.shifted_var_center() {
            if center == self.a {
                return Ok(GenSeries::monomial(self.a, 1.0, p)?);
            }
        }
        match as_integer(p) {
            Some(n) if n >= 0.0 && n < 2f64.powi(53) => {
                self.powi(&self.expand(base)?, n as u64)
            }
            _ => match base.shifted_var_center() {
                Some(center) => Err(ExpandError::CenterMismatch {
                    center,
                    basepoint: self.a,
                }),
                None => Err(ExpandError::NonAnalytic(format!("({base})^{p}"))),
            },
        }
    }

    fn powi(&self, base: &GenSeries, mut n: u64) -> Result<GenSeries, ExpandError> {
        let mut acc = GenSeries::monomial(self.a, 1.0, 0.0)?;
        let mut sq = base.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &sq)?;
            }
            n >>= 1;
            if n > 0 {
                sq = self.mul(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    /// Truncated Cauchy product.
    fn mul(&self, l: &GenSeries, r: &GenSeries) -> Result<GenSeries, ExpandError> {
        let low = |s: &GenSeries| s.terms().first().map_or(s.truncation_order(), |t| t.exp);
        let trunc = (l.truncation_order() + low(r))
            .min(r.truncation_order() + low(l))
            .min(f64::INFINITY);
        let limit = trunc.min(self.w + MAX_WORKING_ORDER) + integer_tolerance();
        let mut terms = Vec::new();
        for x in l.terms() {
            for y in r.terms() {
                let exp = x.exp + y.exp;
                if exp <= limit {
                    terms.push(Term::new(exp, x.coef * y.coef));
                }
            }
        }
        // NaN arises from ∞ + (−∞) when an exact zero meets a truncated series.
        let trunc = if trunc.is_nan() { f64::INFINITY } else { trunc };
        Ok(cap(GenSeries::new(self.a, terms, trunc)?, self.w))
    }

    fn call(&self, f: Func, arg: &GenSeries) -> Result<GenSeries, ExpandError> {
        if !arg.is_analytic_jet() {
            return Err(ExpandError::NonAnalytic(format!(
                "{}() of a series with non-integer or negative exponents",
                f.name()
            )));
        }
        let n = arg.truncation_order().min(self.w).max(0.0).floor() as usize;
        let mut h = vec![0.0; n + 1];
        for t in arg.terms() {
            let i = t.exp.round() as usize;
            if i <= n {
                h[i] = t.coef;
            }
        }
        let h0 = h[0];
        let coeffs = match f {
            Func::Exp => {
                let e = exp_jet(&h);
                let s = h0.exp();
                e.into_iter().map(|c| s * c).collect::<Vec<_>>()
            }
            Func::Sin | Func::Cos => {
                let (s, c) = sin_cos_jet(&h);
                let (s0, c0) = h0.sin_cos();
                s.iter()
                    .zip(&c)
                    .map(|(&sn, &cn)| match f {
                        Func::Sin => s0 * cn + c0 * sn,
                        _ => c0 * cn - s0 * sn,
                    })
                    .collect()
            }
        };
        let trunc = if arg.truncation_order().is_infinite() {
            self.w.floor()
        } else {
            n as f64
        };
        let terms = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| Term::new(i as f64, c));
        Ok(GenSeries::new(self.a, terms, trunc)?)
    }
}

/// Taylor coefficients of `exp(g)` where `g = h - h[0]`.
fn exp_jet(h: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; h.len()];
    e[0] = 1.0;
    for n in 1..h.len() {
        let s: f64 = (1..=n).map(|k| k as f64 * h[k] * e[n - k]).sum();
        e[n] = s / n as f64;
    }
    e
}

/// Taylor coefficients of `sin(g)` and `cos(g)` where `g = h - h[0]`.
fn sin_cos_jet(h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut s = vec![0.0; h.len()];
    let mut c = vec![0.0; h.len()];
    c[0] = 1.0;
    for n in 1..h.len() {
        let (mut sn, mut cn) = (0.0, 0.0);
        for k in 1..=n {
            sn += k as f64 * h[k] * c[n - k];
            cn -= k as f64 * h[k] * s[n - k];
        }
        s[n] = sn / n as f64;
        c[n] = cn / n as f64;
    }
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn expand(text: &str, a: f64, order: usize) -> Result<GenSeries, ExpandError> {
        to_series(&parse(text).unwrap(), a, order)
    }

    fn fact(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn exp_maclaurin() {
        let s = expand("exp(x)", 0.0, 4).unwrap();
        let want: Vec<f64> = (0..=4).map(|i| 1.0 / fact(i)).collect();
        assert_eq!(s.truncation_order(), 4.0);
        assert!(s.max_relative_diff(&GenSeries::taylor(0.0, &want).unwrap()) < 1e-15);
    }

    #[test]
    fn centered_power_passes_through() {
        for order in [0, 3, 16] {
            let s = expand("(x-1)^(-0.5)", 1.0, order).unwrap();
            assert_eq!(s, GenSeries::monomial(1.0, 1.0, -0.5).unwrap());
        }
        assert_eq!(
            expand("2*(x-1)^0.5", 1.0, 4).unwrap(),
            GenSeries::monomial(1.0, 2.0, 0.5).unwrap()
        );
    }

    #[test]
    fn product_with_sine() {
        let s = expand("sin(x)*x", 0.0, 5).unwrap();
        assert_eq!(s.truncation_order(), 5.0);
        assert_eq!(s.len(), 2);
        assert_eq!(s.coef(2.0), 1.0);
        assert!((s.coef(4.0) + 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn polynomials_stay_exact() {
        let s = expand("x^2 + 3*x", 0.0, 16).unwrap();
        assert_eq!(s, GenSeries::polynomial(0.0, &[0.0, 3.0, 1.0]).unwrap());
        // re-centred at 1: (1+h)^2 + 3(1+h) = 4 + 5h + h^2
        let s = expand("x^2 + 3*x", 1.0, 16).unwrap();
        assert_eq!(s, GenSeries::polynomial(1.0, &[4.0, 5.0, 1.0]).unwrap());
        let s = expand("(x-2)^3", 0.0, 2).unwrap();
        assert_eq!(s.truncation_order(), 2.0);
        assert_eq!(s, GenSeries::taylor(0.0, &[-8.0, 12.0, -6.0]).unwrap());
    }

    #[test]
    fn recentred_intrinsics() {
        let s = expand("exp(x)", 1.0, 6).unwrap();
        let e = std::f64::consts::E;
        for i in 0..=6 {
            assert!((s.coef(i as f64) - e / fact(i)).abs() < 1e-15);
        }
        let s = expand("cos(x)", 0.5, 6).unwrap();
        for i in 0..=6u32 {
            let d = match i % 4 {
                0 => 0.5f64.cos(),
                1 => -0.5f64.sin(),
                2 => -0.5f64.cos(),
                _ => 0.5f64.sin(),
            };
            assert!((s.coef(i as f64) - d / fact(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn composed_intrinsics_match_pointwise() {
        let s = expand("exp(sin(x)) - cos(2*x)", 0.0, 24).unwrap();
        for x in [0.1f64, 0.3] {
            let want = x.sin().exp() - (2.0 * x).cos();
            assert!((s.eval(x).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn negative_powers_widen_the_working_order() {
        // x^{-2} exp(x) through order 2 needs exp through order 4
        let s = expand("x^(-2)*exp(x)", 0.0, 2).unwrap();
        assert_eq!(s.truncation_order(), 2.0);
        assert_eq!(s.len(), 5);
        assert_eq!(s.coef(-2.0), 1.0);
        assert!((s.coef(2.0) - 1.0 / 24.0).abs() < 1e-17);
    }

    #[test]
    fn product_matches_convolution() {
        let l = expand("exp(x)", 0.0, 8).unwrap();
        let r = expand("sin(x) + 2", 0.0, 8).unwrap();
        let p = expand("exp(x)*(sin(x) + 2)", 0.0, 8).unwrap();
        for n in 0..=8 {
            let conv: f64 = (0..=n)
                .map(|i| l.coef(i as f64) * r.coef((n - i) as f64))
                .sum();
            assert!((p.coef(n as f64) - conv).abs() <= 1e-14 * conv.abs());
        }
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            expand("x^0.5 + x^0.25", 0.0, 4),
            Err(ExpandError::Series(SeriesError::MixedLattice(..)))
        ));
        assert_eq!(
            expand("(x-1)^0.5", 0.0, 4),
            Err(ExpandError::CenterMismatch {
                center: 1.0,
                basepoint: 0.0
            })
        );
        assert!(matches!(
            expand("exp(x^0.5)", 0.0, 4),
            Err(ExpandError::NonAnalytic(_))
        ));
        assert!(matches!(
            expand("x^-1e9", 0.0, 4),
            Err(ExpandError::OrderTooLarge(_))
        ));
    }

    #[test]
    fn constants() {
        assert_eq!(
            expand("2^3 - 1", 5.0, 3).unwrap(),
            GenSeries::monomial(5.0, 7.0, 0.0).unwrap()
        );
        assert!(expand("0*x", 0.0, 3).unwrap().is_zero());
    }
}
