//! Gamma function kernel with explicit pole semantics.
//!
//! Γ is evaluated with a rational Lanczos sum (g ≈ 6.0247, 13 terms) on the
//! positive half-line and the reflection formula below 1/2. Poles at the
//! nonpositive integers are reported rather than turned into infinities:
//! [`gamma`] errors, [`recip_gamma`] returns an exact zero, and
//! [`gamma_ratio`] resolves the pole cases by their analytic limits.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

const LANCZOS_G: f64 = 6.024_680_040_776_729_583_740_234_375;
const LANCZOS_G_MINUS_HALF: f64 = 5.524_680_040_776_729_583_740_234_375;

#[allow(clippy::excessive_precision)]
const LANCZOS_NUM: [f64; 13] = [
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408,
];

// Coefficients of x(x+1)...(x+11).
const LANCZOS_DEN: [f64; 13] = [
    0.0,
    39916800.0,
    120543840.0,
    150917976.0,
    105258076.0,
    45995730.0,
    13339535.0,
    2637558.0,
    357423.0,
    32670.0,
    1925.0,
    66.0,
    1.0,
];

/// Largest argument for which Γ(x) is finite in double precision.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// Default tolerance for deciding that a float is an integer.
pub const DEFAULT_INTEGER_TOLERANCE: f64 = 1e-9;

static INTEGER_TOLERANCE: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9
static RATIO_PERTURBATION: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GammaError {
    #[error("gamma has a pole at {0}")]
    Pole(f64),
    #[error("gamma({0}) overflows double precision")]
    Overflow(f64),
    #[error("gamma ratio undefined: numerator argument {0} is a pole and the denominator {1} is not")]
    NumeratorPole(f64, f64),
    #[error("gamma of non-finite argument {0}")]
    NotFinite(f64),
}

/// `log|Γ(x)|` together with the sign of Γ(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogGamma {
    pub log_abs: f64,
    pub sign: f64,
    pub is_pole: bool,
}

impl SignedLogGamma {
    /// Reconstructs Γ(x). Poles map to NaN.
    pub fn value(&self) -> f64 {
        if self.is_pole {
            f64::NAN
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// Current tolerance used to recognise integers (pole detection, lattice checks).
pub fn integer_tolerance() -> f64 {
    f64::from_bits(INTEGER_TOLERANCE.load(Ordering::Relaxed))
}

/// Overrides the process-wide integer-detection tolerance.
///
/// Non-finite or negative values are ignored.
pub fn set_integer_tolerance(tol: f64) {
    if tol.is_finite() && tol >= 0.0 {
        INTEGER_TOLERANCE.store(tol.to_bits(), Ordering::Relaxed);
    }
}

/// Test hook: every nonzero [`gamma_ratio`] result is multiplied by `1 + rel`.
#[doc(hidden)]
pub fn set_ratio_perturbation(rel: f64) {
    RATIO_PERTURBATION.store(rel.to_bits(), Ordering::Relaxed);
}

fn ratio_perturbation() -> f64 {
    f64::from_bits(RATIO_PERTURBATION.load(Ordering::Relaxed))
}

/// Returns `round(x)` when `x` lies within the integer tolerance of an integer.
pub fn as_integer(x: f64) -> Option<f64> {
    let r = x.round();
    if (x - r).abs() <= integer_tolerance() {
        Some(r)
    } else {
        None
    }
}

/// True when `x` is a nonpositive integer (within tolerance), i.e. a pole of Γ.
pub fn is_pole(x: f64) -> bool {
    matches!(as_integer(x), Some(r) if r <= 0.0)
}

/// sin(πx) with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // r in [-1, 1]
    let r = x - 2.0 * (0.5 * x).round();
    let s = if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    };
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

fn lanczos_sum(x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    if x < 5.0 {
        for i in (0..13).rev() {
            num = num * x + LANCZOS_NUM[i];
            den = den * x + LANCZOS_DEN[i];
        }
    } else {
        for i in 0..13 {
            num = num / x + LANCZOS_NUM[i];
            den = den / x + LANCZOS_DEN[i];
        }
    }
    num / den
}

fn factorial_table(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Γ(x). Errors at poles and on overflow.
pub fn gamma(x: f64) -> Result<f64, GammaError> {
    if !x.is_finite() {
        return Err(GammaError::NotFinite(x));
    }
    if is_pole(x) {
        return Err(GammaError::Pole(x));
    }
    if x > GAMMA_MAX_ARG {
        return Err(GammaError::Overflow(x));
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return Ok(factorial_table(x as usize - 1));
    }
    let absx = x.abs();
    if absx < 1e-20 {
        return Ok(1.0 / x);
    }
    if x < -180.0 {
        // |Γ(x)| underflows
        return Ok(ln_gamma(x).sign * 0.0);
    }

    let y = absx + LANCZOS_G_MINUS_HALF;
    // Rounding error in y, folded back into the result.
    let z = if absx > LANCZOS_G_MINUS_HALF {
        let q = y - absx;
        q - LANCZOS_G_MINUS_HALF
    } else {
        let q = y - LANCZOS_G_MINUS_HALF;
        q - absx
    };
    let z = z * LANCZOS_G / y;

    let r = if x < 0.0 {
        let mut r = -PI / sin_pi(absx) / absx * y.exp() / lanczos_sum(absx);
        r -= z * r;
        if absx < 140.0 {
            r / y.powf(absx - 0.5)
        } else {
            let sqrtpow = y.powf(absx / 2.0 - 0.25);
            r / sqrtpow / sqrtpow
        }
    } else {
        let mut r = lanczos_sum(absx) / y.exp();
        r += z * r;
        if absx < 140.0 {
            r * y.powf(absx - 0.5)
        } else {
            let sqrtpow = y.powf(absx / 2.0 - 0.25);
            r * sqrtpow * sqrtpow
        }
    };
    if r.is_infinite() {
        return Err(GammaError::Overflow(x));
    }
    Ok(r)
}

/// `log|Γ(x)|` with sign; never overflows.
pub fn ln_gamma(x: f64) -> SignedLogGamma {
    if !x.is_finite() || is_pole(x) {
        return SignedLogGamma {
            log_abs: f64::INFINITY,
            sign: 1.0,
            is_pole: true,
        };
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return SignedLogGamma {
            log_abs: factorial_table(x as usize - 1).ln(),
            sign: 1.0,
            is_pole: false,
        };
    }
    let absx = x.abs();
    if absx < 1e-20 {
        return SignedLogGamma {
            log_abs: -absx.ln(),
            sign: x.signum(),
            is_pole: false,
        };
    }
    let mut r = lanczos_sum(absx).ln() - LANCZOS_G;
    r += (absx - 0.5) * ((absx + LANCZOS_G - 0.5).ln() - 1.0);
    let mut sign = 1.0;
    if x < 0.0 {
        let s = sin_pi(absx);
        r = PI.ln() - s.abs().ln() - absx.ln() - r;
        // Γ(x) = -π / (x' sin(πx') Γ(x')) with x' = |x|
        sign = -s.signum();
    }
    SignedLogGamma {
        log_abs: r,
        sign,
        is_pole: false,
    }
}

/// 1/Γ(x), the entire extension: exactly zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if !x.is_finite() {
        return if x == f64::INFINITY { 0.0 } else { f64::NAN };
    }
    if is_pole(x) {
        return 0.0;
    }
    match gamma(x) {
        Ok(g) if g != 0.0 => 1.0 / g,
        _ => {
            let lg = ln_gamma(x);
            lg.sign * (-lg.log_abs).exp()
        }
    }
}

/// n!/m! for nonnegative integers, via log space when large.
fn factorial_ratio(n: f64, m: f64) -> f64 {
    if n <= 170.0 && m <= 170.0 {
        factorial_table(n as usize) / factorial_table(m as usize)
    } else {
        (ln_gamma(n + 1.0).log_abs - ln_gamma(m + 1.0).log_abs).exp()
    }
}

/// Γ(p)/Γ(q) with pole semantics.
///
/// * neither argument a pole: the ordinary ratio, computed in log space when
///   the individual values would overflow;
/// * only `q` a pole: exactly zero;
/// * both poles, `p = -m`, `q = -n`: the limit `(-1)^(n-m) n!/m!`;
/// * only `p` a pole: [`GammaError::NumeratorPole`].
pub fn gamma_ratio(p: f64, q: f64) -> Result<f64, GammaError> {
    let value = gamma_ratio_unperturbed(p, q)?;
    let eps = ratio_perturbation();
    Ok(if eps != 0.0 { value * (1.0 + eps) } else { value })
}

fn gamma_ratio_unperturbed(p: f64, q: f64) -> Result<f64, GammaError> {
    if !p.is_finite() {
        return Err(GammaError::NotFinite(p));
    }
    if !q.is_finite() {
        return Err(GammaError::NotFinite(q));
    }
    match (is_pole(p), is_pole(q)) {
        (false, true) => Ok(0.0),
        (true, false) => Err(GammaError::NumeratorPole(p, q)),
        (true, true) => {
            let m = -p.round();
            let n = -q.round();
            let sign = if (n - m).rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
            Ok(sign * factorial_ratio(n, m))
        }
        (false, false) => {
            if p.abs() < 140.0 && q.abs() < 140.0 {
                let gp = gamma(p)?;
                return Ok(gp * recip_gamma(q));
            }
            let lp = ln_gamma(p);
            let lq = ln_gamma(q);
            Ok(lp.sign * lq.sign * (lp.log_abs - lq.log_abs).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn integer_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(rel(gamma(31.0).unwrap(), 2.652_528_598_121_910_6e32) < 1e-14);
    }

    #[test]
    fn half_integer_values() {
        assert!(rel(gamma(0.5).unwrap(), SQRT_PI) < 1e-14);
        assert!(rel(gamma(1.5).unwrap(), SQRT_PI / 2.0) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -2.0 * SQRT_PI) < 1e-14);
        assert!(rel(gamma(-1.5).unwrap(), 4.0 * SQRT_PI / 3.0) < 1e-14);
    }

    #[test]
    fn poles_and_overflow() {
        assert_eq!(gamma(0.0), Err(GammaError::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(GammaError::Pole(-3.0)));
        assert!(matches!(gamma(-2.0 + 1e-12), Err(GammaError::Pole(_))));
        assert!(matches!(gamma(172.0), Err(GammaError::Overflow(_))));
        assert!(gamma(171.5).unwrap().is_finite());
    }

    #[test]
    fn recip_gamma_values() {
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert_eq!(recip_gamma(1.0), 1.0);
        assert!(rel(recip_gamma(0.5), 0.564_189_583_547_756_3) < 1e-14);
        assert_eq!(recip_gamma(f64::INFINITY), 0.0);
        assert!(recip_gamma(300.0) == 0.0 || recip_gamma(300.0) < 1e-300);
    }

    #[test]
    fn ratio_cases() {
        assert!(rel(gamma_ratio(2.0, 1.5).unwrap(), std::f64::consts::FRAC_2_SQRT_PI) < 1e-14);
        // Γ(3/2) = √π/2, Γ(-1/2) = -2√π
        assert!(rel(gamma_ratio(1.5, -0.5).unwrap(), -0.25) < 1e-14);
        assert_eq!(gamma_ratio(3.0, 0.0).unwrap(), 0.0);
        assert_eq!(gamma_ratio(0.0, -1.0).unwrap(), -1.0);
        assert_eq!(gamma_ratio(-1.0, -3.0).unwrap(), 6.0);
        assert_eq!(gamma_ratio(-2.0, -2.0).unwrap(), 1.0);
        assert!(matches!(
            gamma_ratio(-1.0, 0.5),
            Err(GammaError::NumeratorPole(_, _))
        ));
    }

    #[test]
    fn ratio_of_huge_values_stays_finite() {
        // Γ(300.5)/Γ(300) ~ sqrt(300)
        let r = gamma_ratio(300.5, 300.0).unwrap();
        assert!((r / 300f64.sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_gamma_sign() {
        let l = ln_gamma(-0.5);
        assert_eq!(l.sign, -1.0);
        assert!(rel(l.value(), -2.0 * SQRT_PI) < 1e-13);
        let l = ln_gamma(-1.5);
        assert_eq!(l.sign, 1.0);
        assert!(ln_gamma(-4.0).is_pole);
        let l = ln_gamma(200.0);
        // log(199!) from Stirling with correction terms
        let n: f64 = 199.0;
        let stirling = n * n.ln() - n + 0.5 * (2.0 * PI * n).ln() + 1.0 / (12.0 * n)
            - 1.0 / (360.0 * n.powi(3));
        assert!(rel(l.log_abs, stirling) < 1e-14);
    }

    #[test]
    fn sin_pi_exact_at_integers() {
        for k in -50..=50 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-29.5) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn pole_tolerance_is_configurable() {
        assert!(is_pole(-1.0 + 5e-10));
        assert!(!is_pole(-1.0 + 5e-9));
        assert!(!is_pole(1.0));
    }
}
