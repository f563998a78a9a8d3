#![allow(clippy::excessive_precision)]

use approx::assert_relative_eq;
use cpcurve::quadrature::{integrate, QuadratureOptions};
use cpcurve::special::EULER_GAMMA;
use cpcurve::{e1, paper_ei};
use proptest::prelude::*;

/// E1 at 40 significant digits (mpmath), rounded to 20.
const E1_TABLE: &[(f64, f64)] = &[
    (1e-08, 17.843465089050832587),
    (1e-06, 13.238295893062491244),
    (3e-05, 9.8371275111755873681),
    (0.001, 6.331539364136149332),
    (0.01, 4.0379295765381138318),
    (0.05, 2.4678984885099743696),
    (0.1, 1.8229239584193906661),
    (0.3, 0.90567665167584671243),
    (0.5, 0.55977359477616081175),
    (0.9, 0.2601839393259996405),
    (0.999, 0.21975218202294454081),
    (1.0, 0.21938393439552027368),
    (1.001, 0.21901642252746885568),
    (1.5, 0.1000195824066326519),
    (2.0, 0.048900510708061119567),
    (3.7, 0.0054478246567704635743),
    (5.0, 0.0011482955912753257973),
    (10.0, 4.1569689296853242774e-6),
    (25.0, 5.3488997553402166403e-13),
    (50.0, 3.7832640295504590187e-24),
    (100.0, 3.6835977616820321802e-46),
    (250.0, 1.0634391439504554373e-111),
    (500.0, 1.4220767822536384221e-220),
    (700.0, 1.4065187662340329228e-307),
];

#[test]
fn matches_high_precision_table() {
    for &(x, want) in E1_TABLE {
        assert_relative_eq!(e1(x).unwrap(), want, max_relative = 1e-12, epsilon = 0.0);
    }
}

#[test]
fn documented_values() {
    assert_relative_eq!(
        e1(1.0).unwrap(),
        0.21938393439552,
        max_relative = 1e-13,
        epsilon = 0.0
    );
    assert_relative_eq!(
        e1(0.5).unwrap(),
        0.55977359477616,
        max_relative = 1e-13,
        epsilon = 0.0
    );
    assert_relative_eq!(
        e1(10.0).unwrap(),
        4.15696892968532e-6,
        max_relative = 1e-13,
        epsilon = 0.0
    );
    assert_relative_eq!(
        paper_ei(2.0).unwrap(),
        -0.04890051070806,
        max_relative = 1e-12,
        epsilon = 0.0
    );
}

/// `E1(x) = ∫₀^∞ exp(-x eˢ) ds`, a smooth doubly exponential integrand.
fn e1_by_quadrature(x: f64) -> f64 {
    let upper = (750.0 / x).ln();
    let opts = QuadratureOptions {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        max_intervals: 2000,
    };
    integrate(|s| (-x * s.exp()).exp(), 0.0, upper, opts)
        .unwrap()
        .value[0]
}

#[test]
fn matches_quadrature_on_log_grid() {
    let n = 97;
    for i in 0..n {
        let x = 1e-6 * (1e8f64).powf(i as f64 / (n - 1) as f64);
        let oracle = e1_by_quadrature(x);
        assert_relative_eq!(e1(x).unwrap(), oracle, max_relative = 1e-12, epsilon = 0.0);
    }
}

#[test]
fn underflow_clamp_is_exact_zero_beyond_range() {
    assert_eq!(paper_ei(710.0).unwrap(), 0.0);
    assert_eq!(e1(1e6).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn paper_ei_is_negative(x in 1e-10f64..700.0) {
        prop_assert!(paper_ei(x).unwrap() < 0.0);
    }

    #[test]
    fn decreasing(x in 1e-8f64..600.0, step in 1e-3f64..1.0) {
        prop_assert!(e1(x + step).unwrap() < e1(x).unwrap());
    }

    #[test]
    fn small_argument_limit(x in 1e-6f64..0.1) {
        prop_assert!((e1(x).unwrap() + x.ln() + EULER_GAMMA).abs() < x);
    }

    #[test]
    fn continued_fraction_bounds(x in 1e-6f64..650.0) {
        let scaled = x * x.exp() * e1(x).unwrap();
        prop_assert!(scaled > x / (x + 1.0) && scaled < 1.0);
    }
}
