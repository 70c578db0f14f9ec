//! Adaptive 15-point Gauss-Kronrod quadrature with reusable partitions.
//!
//! [`adapt`] bisects the worst panel until the error target is met and
//! returns the panel set it settled on. [`integrate_on`] applies a fixed panel
//! set to another integrand; finite differences of integrals that depend
//! smoothly on a parameter stay smooth when the nodes do not move.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub error: f64,
    /// ∫|f| over the panel, for the roundoff floor.
    pub abs_value: f64,
}

#[derive(Debug, Clone)]
pub struct Adapted {
    pub value: f64,
    pub error: f64,
    pub panels: Vec<Panel>,
    pub converged: bool,
}

/// One Gauss-Kronrod panel. Returns `None` if the integrand is not finite.
pub fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Option<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return None;
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return None;
        }
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Some(Panel {
        lo,
        hi,
        value,
        error,
        abs_value,
    })
}

/// Adaptive integration of `f` over `[lo, hi]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`,
/// when it has reached the roundoff floor, or after `max_panels` panels.
/// Returns `None` if `f` produced a non-finite value.
pub fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Option<Adapted> {
    let mut panels = vec![kronrod15(f, lo, hi)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs_value: f64 = panels.iter().map(|p| p.abs_value).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        let floor = 100.0 * f64::EPSILON * abs_value;
        if error <= target || error <= floor {
            return Some(Adapted {
                value,
                error,
                panels,
                converged: true,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one panel");
        let p = panels[worst];
        let mid = 0.5 * (p.lo + p.hi);
        let too_narrow = mid <= p.lo || mid >= p.hi || (p.hi - p.lo) < 1e-14 * (hi - lo).abs();
        if panels.len() >= max_panels || too_narrow {
            return Some(Adapted {
                value,
                error,
                panels,
                converged: false,
            });
        }
        let left = kronrod15(f, p.lo, mid)?;
        let right = kronrod15(f, mid, p.hi)?;
        panels[worst] = left;
        panels.push(right);
    }
}

/// Re-evaluates `f` on a fixed panel set; returns `(value, error)`.
pub fn integrate_on<F: Fn(f64) -> f64>(f: &F, panels: &[Panel]) -> Option<(f64, f64)> {
    let mut value = 0.0;
    let mut error = 0.0;
    for p in panels {
        let q = kronrod15(f, p.lo, p.hi)?;
        value += q.value;
        error += q.error;
    }
    Some((value, error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = adapt(&|x: f64| x.powi(6) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14, 50).unwrap();
        assert!(r.converged);
        assert!((r.value - (128.0 / 7.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint() {
        // ∫_0^1 sqrt(x) dx = 2/3
        let r = adapt(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 200).unwrap();
        assert!(r.converged);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_panels_reuse() {
        let r = adapt(&|x: f64| x.exp(), 0.0, 1.0, 1e-14, 1e-14, 50).unwrap();
        let (v, _) = integrate_on(&|x: f64| 2.0 * x.exp(), &r.panels).unwrap();
        assert!((v - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn nan_integrand() {
        assert!(adapt(&|_x: f64| f64::NAN, 0.0, 1.0, 1e-10, 1e-10, 50).is_none());
    }
}
