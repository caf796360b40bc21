use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use shiftconv_core::special::{
    bessel_k, bessel_k_complex, bessel_k_imag_order, bessel_k_imag_order_mellin_barnes, digamma, gamma_c,
    hurwitz_zeta, kuznetsov_geometric_integral, l_chi4, l_chi4_star, whittaker_w, zeta_c, zeta_star, CATALAN,
    EULER_GAMMA,
};
use shiftconv_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// I_nu(z) by its power series.
fn bessel_i_series(nu: Complex64, z: Complex64) -> Complex64 {
    let half = z / 2.0;
    let mut term = (nu * half.ln()).exp() / gamma_c(nu + 1.0).unwrap().value;
    let mut sum = term;
    for k in 1..200 {
        term *= half * half / (k as f64 * (nu + k as f64));
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// K_nu(z) = pi / (2 sin(nu pi)) (I_{-nu}(z) - I_nu(z)), non-integer nu.
fn bessel_k_series(nu: Complex64, z: Complex64) -> Complex64 {
    (bessel_i_series(-nu, z) - bessel_i_series(nu, z)) * PI / ((nu * PI).sin() * 2.0)
}

/// i int_{-pi/2}^{pi/2} K_{2iT}(beta e^{i phi}) e^{-i phi} d phi integrated
/// term by term from the power series of K.
fn kuznetsov_series(t: f64, beta: f64) -> Complex64 {
    let nu = c(0.0, 2.0 * t);
    let pref = PI / ((nu * PI).sin() * 2.0);
    let mut total = c(0.0, 0.0);
    for (sign, order) in [(1.0, -nu), (-1.0, nu)] {
        let g = gamma_c(order + 1.0).unwrap().value;
        for k in 0..120 {
            let kk = k as f64;
            // (beta/2)^{2k+order} / (k! Gamma(k+order+1))
            let mut coef = ((order + 2.0 * kk) * (beta / 2.0).ln()).exp() / g;
            for j in 1..=k {
                coef /= j as f64 * (order + j as f64);
            }
            let e = order + 2.0 * kk - 1.0;
            let angular = (e * (PI / 2.0)).sin() * 2.0 / e;
            total += coef * angular * sign;
        }
    }
    c(0.0, 1.0) * pref * total
}

#[test]
fn zeta_known_values() {
    let z2 = zeta_c(c(2.0, 0.0)).unwrap();
    assert!((z2.value.re - PI * PI / 6.0).abs() <= z2.abs_error_estimate.max(4e-16));
    let z4 = zeta_c(c(4.0, 0.0)).unwrap();
    assert!((z4.value.re - PI.powi(4) / 90.0).abs() < 1e-15);
    let zm3 = zeta_c(c(-3.0, 0.0)).unwrap();
    assert!((zm3.value.re - 1.0 / 120.0).abs() < 1e-15);
    let l1 = l_chi4(c(1.0, 0.0)).unwrap();
    assert!((l1.value.re - PI / 4.0).abs() < 1e-15);
    let l2 = l_chi4(c(2.0, 0.0)).unwrap();
    assert!((l2.value.re - CATALAN).abs() < 1e-15);
    assert!(matches!(zeta_c(c(1.0, 0.0)), Err(Error::Pole { .. })));
    assert!(matches!(zeta_star(c(0.0, 0.0)), Err(Error::Pole { .. })));
}

#[test]
fn digamma_at_one_is_minus_euler_gamma() {
    let d = digamma(c(1.0, 0.0)).unwrap().value;
    assert!((d.re + EULER_GAMMA).abs() < 1e-15);
}

#[test]
fn k_bessel_matches_power_series() {
    for (nu, z) in [
        (c(0.3, 0.0), c(0.5, 0.0)),
        (c(0.25, 1.0), c(1.2, 0.0)),
        (c(0.0, 3.0), c(0.8, 0.3)),
        (c(1.7, -0.5), c(2.0, -1.0)),
        (c(0.1, 6.0), c(1.0, 0.0)),
    ] {
        let a = bessel_k_complex(nu, z).unwrap();
        let b = bessel_k_series(nu, z);
        let err = (a.value - b).norm();
        assert!(err <= 1e-10 * b.norm(), "K_{nu}({z}) = {} vs {b}", a.value);
    }
}

#[test]
fn imaginary_order_routes_agree_with_series() {
    for (t, z) in [(0.5, c(0.3, 0.0)), (3.0, c(1.0, 0.5)), (7.5, c(1.5, -1.0)), (2.0, c(0.2, 0.1))] {
        let a = bessel_k_imag_order(t, z).unwrap().value;
        let b = bessel_k_series(c(0.0, 2.0 * t), z);
        assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-12), "T={t} z={z}: {a} vs {b}");
        let mb = bessel_k_imag_order_mellin_barnes(t, z).unwrap().value;
        assert!((mb - b).norm() <= 1e-9 * b.norm().max(1e-12), "MB T={t} z={z}: {mb} vs {b}");
    }
    assert!(matches!(bessel_k_imag_order(11.0, c(1.0, 0.0)), Err(Error::Contract(_))));
}

#[test]
fn kuznetsov_integral_matches_term_by_term_series() {
    for (t, beta) in [(3.0, 0.01), (3.0, 0.1), (3.0, 0.5), (1.0, 1.0), (0.5, 0.3)] {
        let a = kuznetsov_geometric_integral(t, beta).unwrap();
        let b = kuznetsov_series(t, beta);
        let err = (a.value - b).norm();
        assert!(err <= 1e-8, "T={t} beta={beta}: {} vs {b}", a.value);
        assert!(err <= a.abs_error_estimate.max(1e-10) * 100.0);
    }
}

#[test]
fn error_estimates_cover_observed_deviation() {
    for x in [0.2, 1.0, 5.0, 40.0] {
        let k = bessel_k(c(0.5, 0.0), x).unwrap();
        let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
        assert!((k.value.re - exact).abs() <= k.abs_error_estimate + 4.0 * f64::EPSILON * exact);
    }
    let z = zeta_c(c(2.0, 0.0)).unwrap();
    assert!((z.value.re - PI * PI / 6.0).abs() <= z.abs_error_estimate + 4.0 * f64::EPSILON);
}

#[test]
fn whittaker_restricted_indices() {
    assert!(matches!(whittaker_w(0.25, c(0.5, 0.0), 1.0), Err(Error::Unsupported(_))));
    // W_{kappa, kappa - 1/2}(x) = x^kappa e^{-x/2}.
    for kappa in [-0.5, 0.0, 0.5] {
        for x in [0.3, 2.0, 11.0] {
            let w = whittaker_w(kappa, c(kappa - 0.5, 0.0), x).unwrap().value;
            let e = x.powf(kappa) * (-x / 2.0).exp();
            assert!((w.re - e).abs() <= 1e-12 * e, "kappa={kappa} x={x}: {w} vs {e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_recurrence(re in -6.0f64..20.0, im in -15.0f64..15.0) {
        let s = c(re, im);
        prop_assume!((s - s.re.round()).norm() > 1e-3 || s.re > 0.5);
        let a = gamma_c(s + 1.0).unwrap().value;
        let b = gamma_c(s).unwrap().value * s;
        prop_assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn gamma_reflection(re in 0.05f64..0.95, im in -5.0f64..5.0) {
        let s = c(re, im);
        let lhs = gamma_c(s).unwrap().value * gamma_c(1.0 - s).unwrap().value;
        let rhs = PI / (s * PI).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn completed_functions_are_symmetric(re in 0.01f64..0.99, im in -10.0f64..10.0) {
        let s = c(re, im);
        let z = (zeta_star(s).unwrap().value - zeta_star(1.0 - s).unwrap().value).norm();
        let l = (l_chi4_star(s).unwrap().value - l_chi4_star(1.0 - s).unwrap().value).norm();
        prop_assert!(z <= 1e-10 && l <= 1e-10, "z {z} l {l}");
    }

    #[test]
    fn hurwitz_reduces_to_riemann(re in 1.1f64..6.0, im in -20.0f64..20.0) {
        let s = c(re, im);
        let z = zeta_c(s).unwrap().value;
        let h1 = hurwitz_zeta(s, 1.0).unwrap().value;
        let h2 = hurwitz_zeta(s, 0.5).unwrap().value;
        let two_s = (s * 2f64.ln()).exp();
        prop_assert!((h1 - z).norm() <= 1e-12 * z.norm());
        prop_assert!((h2 - (two_s - 1.0) * z).norm() <= 1e-12 * h2.norm());
    }

    #[test]
    fn k_bessel_order_symmetry_and_recurrence(
        re in -2.0f64..2.0, im in -4.0f64..4.0, x in 0.1f64..30.0
    ) {
        let nu = c(re, im);
        let k = bessel_k(nu, x).unwrap().value;
        let km = bessel_k(-nu, x).unwrap().value;
        prop_assert!((k - km).norm() <= 1e-10 * k.norm());
        let kp1 = bessel_k(nu + 1.0, x).unwrap().value;
        let km1 = bessel_k(nu - 1.0, x).unwrap().value;
        let rhs = km1 + k * nu * (2.0 / x);
        prop_assert!((kp1 - rhs).norm() <= 1e-9 * kp1.norm().max(rhs.norm()));
    }

    #[test]
    fn whittaker_bessel_bridge(re in 0.0f64..1.5, im in -3.0f64..3.0, x in 0.2f64..15.0) {
        let mu = c(re, im);
        let w = whittaker_w(0.0, mu, 2.0 * x).unwrap().value;
        let k = bessel_k(mu, x).unwrap().value * (2.0 * x / PI).sqrt();
        prop_assert!((w - k).norm() <= 1e-9 * k.norm());
        let wm = whittaker_w(0.0, -mu, 2.0 * x).unwrap().value;
        prop_assert!((w - wm).norm() <= 1e-12 * w.norm());
    }
}
