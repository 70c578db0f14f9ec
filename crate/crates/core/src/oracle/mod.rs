//! Numerical Riemann-Liouville differintegral from the integral definition.
//!
//! This is the independent check on the termwise Γ-ratio rule: it only ever
//! evaluates `f` pointwise.
//!
//! For order `k < 0` the fractional integral of order `ν = -k`
//!
//! ```text
//! J^ν f(x) = 1/Γ(ν) ∫_a^x f(t) (x-t)^(ν-1) dt
//! ```
//!
//! is integrated directly. When `ν < 1` the substitution `u = (x-t)^ν`
//! removes the endpoint singularity, giving
//! `(x-a)^ν/Γ(ν+1) ∫_0^1 f(x - (x-a) w^(1/ν)) dw`.
//!
//! For `k ≥ 0`, `n = ⌈k⌉` central differences with Richardson extrapolation
//! are applied to `J^(n-k) f`. The quadrature panels are fixed at the centre
//! point and reused across the stencil so the differenced values vary smoothly.

pub mod quadrature;

use std::fmt::Write as _;

use thiserror::Error;

use crate::gamma::{self, as_integer};
use crate::rl::{self, RlError};
use crate::series::{GenSeries, SeriesError};

use quadrature::{adapt, integrate_on, Panel};

const RICHARDSON_LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("evaluation point {x} must lie to the right of the basepoint {a}")]
    Domain { x: f64, a: f64 },
    #[error("order {k} exceeds the oracle's maximum order {max}")]
    OrderTooHigh { k: f64, max: f64 },
    #[error("quadrature did not converge: error estimate {error:e} above target {target:e}")]
    NonConvergence { error: f64, target: f64 },
    #[error("integrand is not finite near t = {0}")]
    NonFinite(f64),
    #[error("series truncation too coarse at x = {x}: last term {last:e}")]
    TruncationTooCoarse { x: f64, last: f64 },
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Largest finite-difference step; halved at each Richardson level.
    pub fd_step: f64,
    pub max_order: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 200,
            fd_step: 1e-3,
            max_order: 3.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(OracleError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 16 {
            return Err(OracleError::InvalidConfig(
                "max_subdivisions must be at least 16".into(),
            ));
        }
        if !positive(self.fd_step) {
            return Err(OracleError::InvalidConfig(
                "fd_step must be positive".into(),
            ));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// A value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub error: f64,
}

/// Order-`ν` fractional integral on `[a, x]` mapped to the unit interval.
struct FractionalIntegral<'f> {
    f: &'f (dyn Fn(f64) -> f64 + Sync),
    a: f64,
    nu: f64,
}

impl FractionalIntegral<'_> {
    fn integrand(&self, x: f64, w: f64) -> f64 {
        let h = x - self.a;
        if self.nu < 1.0 {
            let p = w.powf(1.0 / self.nu);
            let t = if p < 0.5 {
                x - h * p
            } else {
                self.a + h * -(w.ln() / self.nu).exp_m1()
            };
            (self.f)(t)
        } else {
            (self.f)(self.a + h * w) * (1.0 - w).powf(self.nu - 1.0)
        }
    }

    fn prefactor(&self, x: f64) -> f64 {
        let h = x - self.a;
        let g = if self.nu < 1.0 {
            gamma::recip_gamma(self.nu + 1.0)
        } else {
            gamma::recip_gamma(self.nu)
        };
        h.powf(self.nu) * g
    }

    fn adapt(&self, x: f64, abs_tol: f64, rel_tol: f64, max: usize) -> Result<(OracleValue, Vec<Panel>, bool), OracleError> {
        let pre = self.prefactor(x);
        let r = adapt(&|w| self.integrand(x, w), 0.0, 1.0, abs_tol / pre, rel_tol, max)
            .ok_or(OracleError::NonFinite(x))?;
        Ok((
            OracleValue {
                value: pre * r.value,
                error: pre * r.error,
            },
            r.panels,
            r.converged,
        ))
    }

    fn on_panels(&self, x: f64, panels: &[Panel]) -> Result<OracleValue, OracleError> {
        let pre = self.prefactor(x);
        let (v, e) =
            integrate_on(&|w| self.integrand(x, w), panels).ok_or(OracleError::NonFinite(x))?;
        Ok(OracleValue {
            value: pre * v,
            error: pre * e,
        })
    }
}

fn binomial(n: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Riemann-Liouville differintegral of order `k` with base point `a`,
/// evaluated at `x` from pointwise values of `f`.
pub fn rl_numeric(
    f: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    k: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<OracleValue, OracleError> {
    cfg.validate()?;
    if !(x > a) {
        return Err(OracleError::Domain { x, a });
    }
    if !k.is_finite() || k > cfg.max_order {
        return Err(OracleError::OrderTooHigh {
            k,
            max: cfg.max_order,
        });
    }

    if k < 0.0 && as_integer(k).is_none_or(|n| n < 0.0) {
        let integral = FractionalIntegral { f, a, nu: -k };
        let (v, _, converged) = integral.adapt(x, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
        if !converged && v.error > cfg.target(v.value) {
            return Err(OracleError::NonConvergence {
                error: v.error,
                target: cfg.target(v.value),
            });
        }
        return Ok(v);
    }

    let n = match as_integer(k) {
        Some(m) => m.max(0.0),
        None => k.ceil(),
    };
    let nu = n - k;
    let n = n as usize;

    // g(y) = J^ν f(y), or f itself when k is an integer
    let integral = FractionalIntegral { f, a, nu };
    let (panels, centre) = if as_integer(nu).is_some() {
        let v = f(x);
        if !v.is_finite() {
            return Err(OracleError::NonFinite(x));
        }
        (None, OracleValue { value: v, error: 0.0 })
    } else {
        let (v, p, _) = integral.adapt(
            x,
            cfg.abs_tol * 1e-6,
            1e-15,
            cfg.max_subdivisions,
        )?;
        (Some(p), v)
    };
    if n == 0 {
        return Ok(centre);
    }
    let g = |y: f64| -> Result<OracleValue, OracleError> {
        match &panels {
            Some(p) => integral.on_panels(y, p),
            None => {
                let v = f(y);
                if v.is_finite() {
                    Ok(OracleValue { value: v, error: 0.0 })
                } else {
                    Err(OracleError::NonFinite(y))
                }
            }
        }
    };

    // stencil reaches n/2 · h0 to either side
    let h0 = (cfg.fd_step * 10f64.powi(n as i32 - 1)).min((x - a) / (n as f64 + 1.0));
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(RICHARDSON_LEVELS);
    let mut noise: f64 = 0.0;
    for level in 0..RICHARDSON_LEVELS {
        let h = h0 / f64::powi(2.0, level as i32);
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let mut quad_err = 0.0;
        for m in 0..=n {
            let y = x + (n as f64 / 2.0 - m as f64) * h;
            let gv = g(y)?;
            let c = binomial(n, m) * if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += c * gv.value;
            abs_sum += c.abs() * gv.value.abs();
            quad_err += c.abs() * gv.error;
        }
        let hn = h.powi(n as i32);
        let d = sum / hn;
        // quadrature error is smooth in y on frozen panels; only rounding is amplified
        noise = noise.max((8.0 * f64::EPSILON * abs_sum + 1e-3 * quad_err) / hn);
        let mut row = vec![d];
        for j in 1..=level {
            let factor = 4f64.powi(j as i32);
            let prev = &tableau[level - 1];
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        tableau.push(row);
    }
    let last = &tableau[RICHARDSON_LEVELS - 1];
    let value = last[RICHARDSON_LEVELS - 1];
    let truncation = (value - last[RICHARDSON_LEVELS - 2]).abs();
    let error = truncation + 2.0 * noise;
    if !value.is_finite() {
        return Err(OracleError::NonFinite(x));
    }
    Ok(OracleValue { value, error })
}

/// One row of a termwise-versus-oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub x: f64,
    pub termwise: f64,
    pub oracle: f64,
    pub abs_diff: f64,
}

/// Samples of the termwise and numerical differintegral.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalTable {
    pub rows: Vec<EvalRow>,
}

/// 17 significant digits.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

impl EvalTable {
    /// CSV with header `x,termwise,oracle,abs_diff`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,termwise,oracle,abs_diff\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_sig17(r.x),
                fmt_sig17(r.termwise),
                fmt_sig17(r.oracle),
                fmt_sig17(r.abs_diff)
            );
        }
        out
    }

    pub fn max_abs_diff(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max)
    }
}

/// Evaluates `D^k f` at each `x` through the termwise power rule and through
/// [`rl_numeric`] applied to `f`'s pointwise values.
///
/// Points are evaluated on separate threads; row order follows `xs`.
pub fn compare(
    f: &GenSeries,
    k: f64,
    xs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<EvalTable, OracleError> {
    let pointwise = |t: f64| f.eval(t).unwrap_or(f64::NAN);
    compare_with(f, &pointwise, k, xs, cfg)
}

/// Like [`compare`], but the oracle integrates `pointwise` (for instance
/// the closed form `f` was expanded from) instead of the series itself.
pub fn compare_with(
    f: &GenSeries,
    pointwise: &(dyn Fn(f64) -> f64 + Sync),
    k: f64,
    xs: &[f64],
    cfg: &QuadratureConfig,
) -> Result<EvalTable, OracleError> {
    cfg.validate()?;
    let a = f.basepoint();
    if let Some(&x) = xs.iter().find(|&&x| !(x > a)) {
        return Err(OracleError::Domain { x, a });
    }
    let derived = rl::differintegrate(f, k)?;

    let rows: Vec<Result<EvalRow, OracleError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = xs
            .iter()
            .map(|&x| {
                let derived = &derived;
                scope.spawn(move || {
                    let termwise = derived.eval(x)?;
                    if derived.truncation_order().is_finite() {
                        if let Some(last) = derived.terms().last() {
                            let lv = GenSeries::new(a, [*last], f64::INFINITY)?.eval(x)?;
                            if lv.abs() > cfg.rel_tol * termwise.abs().max(1.0) {
                                return Err(OracleError::TruncationTooCoarse { x, last: lv });
                            }
                        }
                    }
                    let oracle = rl_numeric(pointwise, a, k, x, cfg)?.value;
                    Ok(EvalRow {
                        x,
                        termwise,
                        oracle,
                        abs_diff: (termwise - oracle).abs(),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("oracle worker panicked"))
            .collect()
    });
    Ok(EvalTable {
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn half_derivative_of_identity() {
        let v = rl_numeric(&|t| t, 0.0, 0.5, 1.0, &cfg()).unwrap();
        assert!((v.value - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn antiderivative_of_constant() {
        for x in [0.3, 1.0, 2.5] {
            let v = rl_numeric(&|_| 1.0, 0.0, -1.0, x, &cfg()).unwrap();
            assert!((v.value - x).abs() < 1e-12);
        }
    }

    #[test]
    fn first_derivative_of_square() {
        let v = rl_numeric(&|t| t * t, 0.0, 1.0, 0.7, &cfg()).unwrap();
        assert!((v.value - 1.4).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            rl_numeric(&|t| t, 1.0, 0.5, 1.0, &cfg()),
            Err(OracleError::Domain { .. })
        ));
        assert!(matches!(
            rl_numeric(&|t| t, 0.0, 3.5, 1.0, &cfg()),
            Err(OracleError::OrderTooHigh { .. })
        ));
        let bad = QuadratureConfig {
            max_subdivisions: 4,
            ..cfg()
        };
        assert!(matches!(
            rl_numeric(&|t| t, 0.0, 0.5, 1.0, &bad),
            Err(OracleError::InvalidConfig(_))
        ));
        assert!(matches!(
            rl_numeric(&|_| f64::NAN, 0.0, -0.5, 1.0, &cfg()),
            Err(OracleError::NonFinite(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let t = EvalTable {
            rows: vec![EvalRow {
                x: 1.0,
                termwise: 2.0,
                oracle: 2.0,
                abs_diff: 0.0,
            }],
        };
        assert_eq!(
            t.to_csv(),
            "x,termwise,oracle,abs_diff\n1.0000000000000000e0,2.0000000000000000e0,2.0000000000000000e0,0.0000000000000000e0\n"
        );
    }
}
