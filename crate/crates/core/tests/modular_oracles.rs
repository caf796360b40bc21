use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use shiftconv_core::arith::gcd;
use shiftconv_core::modular::{
    coset_tail_bound, decomposition_curve, eisenstein, eisenstein_level1_cosets, eisenstein_level1_fourier,
    eisenstein_level4_cosets, enumerate_bottom_rows, fourier_cutoff_for, theta, theta_tail_bound, Cusp,
    EisensteinSpec, HalfPlanePoint, Level, Mat2, TruncationBudget,
};
use shiftconv_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pt(x: f64, y: f64) -> HalfPlanePoint {
    HalfPlanePoint::new(x, y).unwrap()
}

fn fourier(z: HalfPlanePoint, w: Complex64) -> Complex64 {
    let m = fourier_cutoff_for(z, w, 1e-14).unwrap();
    eisenstein_level1_fourier(z, w, TruncationBudget::unchecked(m)).unwrap().value
}

fn th(z: HalfPlanePoint) -> Complex64 {
    theta(z, TruncationBudget::unchecked(80)).unwrap().value
}

/// (1/2) sum over coprime (c, d) with max(|c|, |d|) <= r of y^w / |cz + d|^{2w},
/// with `level4` restricting to 4 | c: a plain double loop.
fn lattice_sum(z: HalfPlanePoint, w: Complex64, r: i64, level4: bool) -> Complex64 {
    let mut s = c(0.0, 0.0);
    for cc in -r..=r {
        if level4 && cc % 4 != 0 {
            continue;
        }
        for d in -r..=r {
            if (cc, d) == (0, 0) || gcd(cc.unsigned_abs(), d.unsigned_abs()) != 1 {
                continue;
            }
            let q = (z.z() * cc as f64 + d as f64).norm_sqr();
            s += (w * (z.y() / q).ln()).exp() * 0.5;
        }
    }
    s
}

#[test]
fn coset_sums_match_double_loop() {
    let z = pt(0.27, 0.93);
    let w = c(2.3, 0.8);
    let b = TruncationBudget::unchecked(60);
    let one = eisenstein_level1_cosets(z, w, b).unwrap().value;
    assert!((one - lattice_sum(z, w, 60, false)).norm() < 1e-12);
    let four = eisenstein_level4_cosets(Cusp::Infinity, z, w, b).unwrap().value;
    assert!((four - lattice_sum(z, w, 60, true)).norm() < 1e-12);
}

#[test]
fn bottom_rows_are_coprime_and_level_four() {
    let rows = enumerate_bottom_rows(Level::Four, 200).unwrap();
    assert!(rows.contains(&(0, 1)) && rows.contains(&(0, -1)));
    for (cc, d) in rows {
        assert_eq!(cc % 4, 0);
        assert_eq!(gcd(cc.unsigned_abs(), d.unsigned_abs()), 1);
        assert!(cc.abs().max(d.abs()) <= 200);
    }
}

#[test]
fn coprime_density() {
    let r = 2000u64;
    let n = enumerate_bottom_rows(Level::One, r).unwrap().len() as f64;
    let expected = (2.0 * r as f64).powi(2) * 6.0 / (PI * PI);
    assert!((n / expected - 1.0).abs() < 0.05, "{n} vs {expected}");
}

#[test]
fn level_four_leading_term_at_large_height() {
    let w = c(2.5, 0.0);
    let y: f64 = 100.0;
    let e = eisenstein_level4_cosets(Cusp::Infinity, pt(0.0, y), w, TruncationBudget::unchecked(50)).unwrap();
    assert!((e.value.re / y.powf(2.5) - 1.0).abs() < 1e-3);
}

#[test]
fn level_four_invariance() {
    let z = pt(0.3, 0.9);
    let w = c(2.5, 0.0);
    let b = TruncationBudget::unchecked(1500);
    let g = Mat2::new(1, 0, 4, 1);
    assert!(g.in_gamma0(4));
    let a = eisenstein_level4_cosets(Cusp::Infinity, z, w, b).unwrap();
    let bz = eisenstein_level4_cosets(Cusp::Infinity, z.act(&g), w, b).unwrap();
    assert!((a.value - bz.value).norm() <= a.tail_bound + bz.tail_bound);
}

#[test]
fn coset_route_requires_convergence() {
    let r = eisenstein_level1_cosets(pt(0.0, 1.0), c(1.0, 0.0), TruncationBudget::unchecked(10));
    assert!(matches!(r, Err(Error::Divergence { .. })));
}

#[test]
fn fourier_route_rejects_poles() {
    for w in [c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)] {
        assert!(eisenstein_level1_fourier(pt(0.0, 1.0), w, TruncationBudget::unchecked(10)).is_err());
    }
}

#[test]
fn completed_series_is_scaled() {
    let z = pt(0.1, 1.3);
    let w = c(0.3, 2.0);
    let b = TruncationBudget::unchecked(fourier_cutoff_for(z, w, 1e-14).unwrap());
    let plain = eisenstein(&EisensteinSpec::level_one(w, false), z, b).unwrap().value;
    let done = eisenstein(&EisensteinSpec::level_one(w, true), z, b).unwrap().value;
    let zs = shiftconv_core::special::zeta_star(w * 2.0).unwrap().value;
    assert!((done - plain * zs).norm() < 1e-14 * done.norm());
}

#[test]
fn theta_truncation_respects_tail_bound() {
    for y in [0.15, 0.4, 1.0] {
        let z = pt(0.37, y);
        let reference = th(z);
        for m in [1u64, 2, 3, 5] {
            let v = theta(z, TruncationBudget::unchecked(m)).unwrap();
            assert!((v.value - reference).norm() <= theta_tail_bound(y, m) + 1e-15);
        }
    }
}

#[test]
fn decomposition_residual_halves_when_radius_doubles() {
    let curve = decomposition_curve(pt(0.0, 1.0), c(2.5, 0.0), &[300, 600, 1200]).unwrap();
    for pair in curve.windows(2) {
        assert!(pair[1].residual_fourier <= 0.5 * pair[0].residual_fourier);
    }
    for p in &curve {
        assert!(p.residual_fourier <= p.tail_bound);
        assert!(coset_tail_bound(pt(0.0, 1.0), 2.5, p.radius) <= p.tail_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn theta_involution_and_half_shift(x in -1.0f64..1.0, y in 0.4f64..3.0) {
        let z = pt(x, y);
        let inv = th(z.act(&Mat2::new(0, -1, 4, 0)));
        let rhs = (c(0.0, -2.0) * z.z()).sqrt() * th(z);
        prop_assert!((inv - rhs).norm() < 1e-12);
        let half = th(z.translate(0.5)) - (th(pt(4.0 * x, 4.0 * y)) * 2.0 - th(z));
        prop_assert!(half.norm() < 1e-12);
    }

    #[test]
    fn level_one_is_modular(x in -0.5f64..0.5, y in 0.6f64..2.0, re in -2.0f64..3.0, im in -3.0f64..3.0) {
        let w = c(re, im);
        prop_assume!((w - 0.5).norm() > 0.05 && w.norm() > 0.05 && (w - 1.0).norm() > 0.05);
        let z = pt(x, y);
        let a = fourier(z, w);
        let b = fourier(z.act(&Mat2::new(0, -1, 1, 0)), w);
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
        // x + 1 is itself rounded, so periodicity holds to rounding only.
        prop_assert!((a - fourier(z.translate(1.0), w)).norm() <= 1e-13 * a.norm().max(1.0));
    }
}
