use fraclift::oracle::{compare, rl_numeric, QuadratureConfig};
use fraclift::parser::{parse, to_series};
use fraclift::rl::power_term;
use fraclift::series::GenSeries;

const ALPHAS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.5];
const ORDERS: [f64; 5] = [-1.0, -0.5, 0.5, 1.0, 1.5];
const POINTS: [f64; 3] = [0.5, 1.0, 2.0];

fn termwise(alpha: f64, k: f64, x: f64) -> f64 {
    match power_term(1.0, alpha, k).unwrap() {
        Some(t) => t.coef * x.powf(t.exp),
        None => 0.0,
    }
}

#[test]
fn monomial_grid_agrees_with_power_rule() {
    let cfg = QuadratureConfig::default();
    for alpha in ALPHAS {
        for k in ORDERS {
            for x in POINTS {
                let want = termwise(alpha, k, x);
                let got = rl_numeric(&|t: f64| t.powf(alpha), 0.0, k, x, &cfg).unwrap();
                assert!(
                    (got.value - want).abs() <= 1e-5 * want.abs().max(1.0),
                    "alpha={alpha} k={k} x={x}: {} vs {want}",
                    got.value
                );
            }
        }
    }
}

#[test]
fn refinement_stays_within_reported_error() {
    let base = QuadratureConfig::default();
    let fine = QuadratureConfig {
        fd_step: base.fd_step / 2.0,
        max_subdivisions: base.max_subdivisions * 2,
        ..base
    };
    for alpha in ALPHAS {
        for k in ORDERS {
            for x in POINTS {
                let f = |t: f64| t.powf(alpha);
                let a = rl_numeric(&f, 0.0, k, x, &base).unwrap();
                let b = rl_numeric(&f, 0.0, k, x, &fine).unwrap();
                let bound = a.error.max(b.error);
                assert!(
                    (a.value - b.value).abs() <= bound,
                    "alpha={alpha} k={k} x={x}: {} vs {} (error {bound:e})",
                    a.value,
                    b.value
                );
            }
        }
    }
}

#[test]
fn worked_examples() {
    let cfg = QuadratureConfig::default();
    let v = rl_numeric(&|t| t * t, 0.0, 1.0, 0.7, &cfg).unwrap();
    assert!((v.value - 1.4).abs() < 1e-6);

    let x = GenSeries::monomial(0.0, 1.0, 1.0).unwrap();
    let table = compare(&x, 0.5, &[0.25, 1.0, 2.25], &cfg).unwrap();
    for row in &table.rows {
        let want = 2.0 * (row.x / std::f64::consts::PI).sqrt();
        assert!((row.termwise - want).abs() < 1e-12);
        assert!(row.abs_diff <= 1e-6, "{row:?}");
    }

    let sq = GenSeries::monomial(0.0, 1.0, 2.0).unwrap();
    let t = compare(&sq, 1.0, &[1.0], &cfg).unwrap();
    assert!((t.rows[0].termwise - 2.0).abs() < 1e-15);
    assert!(t.rows[0].abs_diff <= 1e-6);

    let exp = to_series(&parse("exp(x)").unwrap(), 0.0, 24).unwrap();
    let t = compare(&exp, 0.5, &[0.5], &cfg).unwrap();
    assert!(t.rows[0].abs_diff <= 1e-5, "{:?}", t.rows[0]);
}

#[test]
fn csv_is_deterministic() {
    let cfg = QuadratureConfig::default();
    let f = to_series(&parse("sin(x) + x^2").unwrap(), 0.0, 24).unwrap();
    let xs = [0.3, 0.6, 0.9, 1.2];
    let a = compare(&f, 0.5, &xs, &cfg).unwrap().to_csv();
    let b = compare(&f, 0.5, &xs, &cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("x,termwise,oracle,abs_diff\n"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn rejects_points_at_or_below_the_basepoint() {
    let f = GenSeries::monomial(1.0, 1.0, 1.0).unwrap();
    assert!(compare(&f, 0.5, &[1.0], &QuadratureConfig::default()).is_err());
    assert!(compare(&f, 0.5, &[0.5], &QuadratureConfig::default()).is_err());
}
