use num_complex::Complex64;
use proptest::prelude::*;
use shiftconv_core::arith::Sieve;
use shiftconv_core::series::{
    d0_closed_form, d0_truncated, dh_truncated, double_pole_principal_part, main_term, main_term_parts,
    residue_consistency, residue_formulas, series_tail_bound, MainTermInputs, SpectralPoint,
};
use shiftconv_core::special::QuadratureBudget;
use shiftconv_core::sums::{
    extract_phi, fit_main_terms, kernel_eval, log_grid, mellin_u, partial_sum_sharp, partial_sum_smoothed,
    KernelSign, PartialSumSeries, SmoothingKernel, SumMode, SumTables, PHI_ONE,
};
use shiftconv_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sigma_brute(n: u64, nu: Complex64) -> Complex64 {
    let mut s = c(0.0, 0.0);
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += (nu * (d as f64).ln()).exp();
            if d * d != n {
                s += (nu * ((n / d) as f64).ln()).exp();
            }
        }
        d += 1;
    }
    s
}

/// D_h(s, w) truncated at a^2 + b^2 <= n: a double loop over the lattice.
fn dh_double_loop(s: Complex64, w: Complex64, h: u64, n: i64) -> Complex64 {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut acc = c(0.0, 0.0);
    for a in -r..=r {
        for b in -r..=r {
            let m = a * a + b * b;
            if m > n {
                continue;
            }
            let k = (m as u64 + h) as f64;
            acc += sigma_brute(m as u64 + h, 1.0 - w * 2.0) * (-(s + 0.5 - w) * k.ln()).exp();
        }
    }
    acc
}

/// Sharp sum by a double loop over the lattice, any complex w.
fn sharp_double_loop(x: u64, w: Complex64, h: u64) -> Complex64 {
    let r = (x as f64).sqrt() as i64 + 1;
    let mut acc = c(0.0, 0.0);
    for a in -r..=r {
        for b in -r..=r {
            let m = (a * a + b * b) as u64;
            if m + h <= x {
                acc += sigma_brute(m + h, 1.0 - w * 2.0);
            }
        }
    }
    acc
}

#[test]
fn dh_matches_lattice_double_loop() {
    for (s, w, h) in [(c(2.0, 1.0), c(0.3, 0.0), 1u64), (c(2.5, -3.0), c(0.5, 0.4), 4), (c(3.0, 0.0), c(0.7, -0.2), 9)] {
        let a = dh_truncated(SpectralPoint::new(s, w), h, 3000).unwrap();
        let b = dh_double_loop(s, w, h, 3000);
        assert!((a.value - b).norm() <= 1e-12 * b.norm(), "{} vs {b}", a.value);
    }
}

#[test]
fn dh_outside_convergence_region_is_rejected() {
    let r = dh_truncated(SpectralPoint::new(c(1.2, 0.0), c(0.2, 0.0)), 1, 100);
    assert!(matches!(r, Err(Error::Region(_))));
}

#[test]
fn d0_closed_form_rejects_poles() {
    let w = c(0.7, 0.0);
    assert!(matches!(d0_closed_form(w + 0.5, w), Err(Error::Pole { .. })));
    assert!(matches!(d0_closed_form(1.5 - w, w), Err(Error::Pole { .. })));
}

#[test]
fn d0_matches_truncated_series() {
    let (s, w) = (c(3.0, 1.0), c(0.3, 0.1));
    let closed = d0_closed_form(s, w).unwrap();
    let trunc = d0_truncated(s, w, 200_000).unwrap();
    assert!((closed.value - trunc.value).norm() <= trunc.tail_bound + closed.abs_error_estimate);
}

#[test]
fn residue_formulas_scale_with_h_and_reflect() {
    let w = c(0.7, 0.0);
    let one = c(1.0, 0.0);
    let (r1, _) = residue_formulas(w, 1, one, one).unwrap();
    let (r4, _) = residue_formulas(w, 4, one, one).unwrap();
    assert!((r4 / r1 - 4f64.powf(0.5 - 0.7)).norm() < 1e-14);
    let (p, q) = (c(1.3, 0.2), c(0.6, -0.1));
    let (a, b) = residue_formulas(w, 3, p, q).unwrap();
    let (ra, rb) = residue_formulas(1.0 - w, 3, q, p).unwrap();
    assert!((a - rb).norm() < 1e-13 && (b - ra).norm() < 1e-13);
    assert!(matches!(residue_formulas(c(0.5, 0.0), 1, one, one), Err(Error::Contract(_))));
}

#[test]
fn double_pole_main_term_shape() {
    let (phi, dphi) = (c(0.7, 0.0), c(-0.2, 0.0));
    let (a, b) = double_pole_principal_part(2, phi, dphi).unwrap();
    let inputs = MainTermInputs {
        h: 2,
        w: c(0.5, 0.0),
        phi_at: phi,
        phi_at_reflected: None,
        phi_prime: Some(dphi),
    };
    let x: f64 = 1e6;
    let [p, q] = main_term_parts(x, &inputs).unwrap();
    assert!((p - a * x * x.ln()).norm() < 1e-9 * p.norm());
    assert!((q - (b - a) * x).norm() < 1e-9 * q.norm());
    assert!((main_term(x, &inputs).unwrap() - p - q).norm() < 1e-6);
}

#[test]
fn partial_sum_examples() {
    let half = c(0.5, 0.0);
    // X = h: only m = 0, contributing sigma_0(h) = d(h).
    assert_eq!(partial_sum_sharp(6.0, half, 6).unwrap(), c(4.0, 0.0));
    // X = h + 1, h = 1: d(1) + 4 d(2) = 9.
    assert_eq!(partial_sum_sharp(2.0, half, 1).unwrap(), c(9.0, 0.0));
    assert_eq!(partial_sum_sharp(0.5, half, 1).unwrap(), c(0.0, 0.0));
}

#[test]
fn complex_w_sums_match_double_loop() {
    for (w, h) in [(c(0.3, 0.7), 1u64), (c(0.8, -2.0), 3)] {
        let tables = SumTables::new(&Sieve::default(), w, h, 3000).unwrap();
        for x in [1u64, 10, 257, 3000] {
            let a = tables.sharp(x as f64).unwrap();
            let b = sharp_double_loop(x, w, h);
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "X={x}: {a} vs {b}");
        }
    }
}

#[test]
fn smoothed_sum_approaches_sharp_sum() {
    let half = c(0.5, 0.0);
    let x = 50_000.0;
    let y = 1e6;
    let tables = SumTables::new(&Sieve::default(), half, 1, 60_000).unwrap();
    let sharp = tables.sharp(x).unwrap();
    for sign in [KernelSign::Plus, KernelSign::Minus] {
        let k = SmoothingKernel::new(sign, y).unwrap();
        let s = tables.smoothed(x, &k).unwrap();
        // Total mass of the transition window [x(1-1/y), x(1+1/y)].
        let mass = (tables.sharp(x * (1.0 + 1.0 / y)).unwrap() - tables.sharp(x * (1.0 - 1.0 / y) - 1.0).unwrap()).norm();
        assert!((s - sharp).norm() <= mass);
    }
    let free = partial_sum_smoothed(x, &SmoothingKernel::new(KernelSign::Plus, 100.0).unwrap(), half, 1).unwrap();
    let k = SmoothingKernel::new(KernelSign::Plus, 100.0).unwrap();
    let tabled = SumTables::new(&Sieve::default(), half, 1, 60_000).unwrap().smoothed(x, &k).unwrap();
    assert!((free - tabled).norm() <= 1e-9 * free.norm());
}

#[test]
fn smoothed_plus_decreases_with_y() {
    let tables = SumTables::new(&Sieve::default(), c(0.7, 0.0), 2, 40_000).unwrap();
    let x = 30_000.0;
    let mut last = f64::INFINITY;
    for y in [5.0, 20.0, 100.0, 1000.0] {
        let k = SmoothingKernel::new(KernelSign::Plus, y).unwrap();
        let v = tables.smoothed(x, &k).unwrap().re;
        assert!(v <= last);
        last = v;
    }
}

#[test]
fn kernel_examples_and_contracts() {
    let minus = SmoothingKernel::new(KernelSign::Minus, 10.0).unwrap();
    assert_eq!(kernel_eval(&minus, 0.5), 1.0);
    assert_eq!(kernel_eval(&minus, 1.0), 0.0);
    assert!(SmoothingKernel::new(KernelSign::Plus, 1.0).is_err());
    assert!(matches!(mellin_u(&minus, c(0.0, 0.0), QuadratureBudget::default()), Err(Error::Contract(_))));
}

#[test]
fn mellin_transform_first_order_and_decay() {
    let s = c(2.0, 3.0);
    let y = 100.0;
    for sign in [KernelSign::Plus, KernelSign::Minus] {
        let k = SmoothingKernel::new(sign, y).unwrap();
        let u = mellin_u(&k, s, QuadratureBudget::default()).unwrap().value;
        assert!((s * u - 1.0).norm() * y <= 10.0);
        // Decay: |U(2+50i)| / (y^{-1} ((1+|s|)/y)^{-3}) stays bounded.
        let s2 = c(2.0, 50.0);
        let k50 = SmoothingKernel::new(sign, 50.0).unwrap();
        let u2 = mellin_u(&k50, s2, QuadratureBudget::default()).unwrap().value.norm();
        let scale = (1.0 / 50.0) * ((1.0 + s2.norm()) / 50.0).powi(-3);
        assert!(u2 / scale < 100.0, "ratio {}", u2 / scale);
    }
}

#[test]
fn fit_on_sieved_data_recovers_phi_consistently_across_windows() {
    let half = c(0.5, 0.0);
    let tables = SumTables::new(&Sieve::default(), half, 1, 3_000_000).unwrap();
    let full = tables.sharp_series(&log_grid(1e3, 3e6, 16).unwrap()).unwrap();
    let report = fit_main_terms(&full).unwrap();
    assert!(report.coefficients[0].re > 0.0);
    let phi_full = extract_phi(&report, half, 1).unwrap().get(PHI_ONE).unwrap().value;
    // Disjoint halves of the grid, each spanning more than 1.5 decades.
    let g = full.grid();
    let mid = g.len() / 2;
    let mut est = Vec::new();
    for (lo, hi) in [(0, mid), (mid, g.len())] {
        let part = PartialSumSeries::new(1, half, g[lo..hi].to_vec(), full.values()[lo..hi].to_vec(), SumMode::Sharp, None);
        let part = part.unwrap();
        if let Ok(r) = fit_main_terms(&part) {
            est.push(extract_phi(&r, half, 1).unwrap().get(PHI_ONE).unwrap().value);
        }
    }
    assert_eq!(est.len(), 2);
    assert!((est[0] - est[1]).norm() <= report.stability.max(1e-3) * phi_full.norm() * 3.0);
    // |S - fit| / X is smaller on average over the top decade than the bottom one.
    let avg = |a: f64, b: f64| {
        let v: Vec<f64> = g
            .iter()
            .zip(full.values())
            .filter(|(x, _)| **x >= a && **x <= b)
            .map(|(x, v)| (v - report.main_terms(*x)).norm() / x)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(avg(3e5, 3e6) < avg(1e3, 1e4));
}

#[test]
fn grid_and_series_contracts() {
    let g = log_grid(1e3, 1e5, 16).unwrap();
    assert_eq!(g.first(), Some(&1e3));
    assert_eq!(g.last(), Some(&1e5));
    assert!(g.windows(2).all(|p| p[0] < p[1]));
    assert!(log_grid(10.0, 5.0, 4).is_err());
    let bad = PartialSumSeries::new(1, c(0.5, 0.0), vec![2.0, 1.0], vec![c(0.0, 0.0); 2], SumMode::Sharp, None);
    assert!(bad.is_err());
    let s = PartialSumSeries::new(1, c(0.5, 0.0), vec![10.0], vec![c(1.5, -2.0)], SumMode::Sharp, None).unwrap();
    assert_eq!(s.to_csv().lines().next(), Some("X,re,im"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_monotone_bounded(y in 1.01f64..1e4, t in 0.0f64..3.0, dt in 0.0f64..0.5, plus in any::<bool>()) {
        let sign = if plus { KernelSign::Plus } else { KernelSign::Minus };
        let k = SmoothingKernel::new(sign, y).unwrap();
        let (a, b) = (k.eval(t), k.eval(t + dt));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
        if t <= k.transition_start() { prop_assert_eq!(a, 1.0); }
        if t >= k.support_end() { prop_assert_eq!(a, 0.0); }
    }

    #[test]
    fn sandwich_holds(x in 10.0f64..20_000.0, w in 0.05f64..0.95, h in 1u64..6, y in 2.0f64..500.0) {
        let tables = SumTables::new(&Sieve::default(), c(w, 0.0), h, 21_000).unwrap();
        let s = tables.sharp(x).unwrap().re;
        let sp = tables.smoothed(x, &SmoothingKernel::new(KernelSign::Plus, y).unwrap()).unwrap().re;
        let sm = tables.smoothed(x, &SmoothingKernel::new(KernelSign::Minus, y).unwrap()).unwrap().re;
        prop_assert!(sm <= s && s <= sp, "{sm} {s} {sp}");
    }

    #[test]
    fn exact_sums_are_cumulative(x in 1u64..5000, h in 1u64..10) {
        let tables = SumTables::new(&Sieve::default(), c(0.5, 0.0), h, 5000).unwrap();
        let grid: Vec<f64> = (1..=x).map(|v| v as f64).collect();
        let series = tables.sharp_series(&grid).unwrap();
        prop_assert_eq!(series.values()[grid.len() - 1].re, tables.sharp_exact(x as f64).unwrap() as f64);
    }

    #[test]
    fn dh_doubling_within_tail(re_s in 2.0f64..4.0, im_s in -10.0f64..10.0, re_w in 0.1f64..0.9, h in 1u64..20) {
        let p = SpectralPoint::new(c(re_s, im_s), c(re_w, 0.0));
        let a = dh_truncated(p, h, 2000).unwrap();
        let b = dh_truncated(p, h, 4000).unwrap();
        prop_assert!((a.value - b.value).norm() <= a.tail_bound);
        prop_assert!(b.tail_bound <= a.tail_bound);
        prop_assert!(series_tail_bound(re_s, re_w, 10_000) <= b.tail_bound);
    }

    #[test]
    fn residues_match_main_term(re in 0.05f64..0.95, im in -3.0f64..3.0, h in 1u64..50) {
        let w = c(re, im);
        prop_assume!((w - 0.5).norm() > 1e-3);
        let inputs = MainTermInputs { h, w, phi_at: c(0.9, 0.1), phi_at_reflected: Some(c(1.1, -0.3)), phi_prime: None };
        prop_assert!(residue_consistency(&inputs).unwrap() <= 1e-12);
    }

    #[test]
    fn d0_symmetric_in_w(re_s in 2.0f64..4.0, im_s in -10.0f64..10.0, re_w in 0.05f64..0.95, im_w in -2.0f64..2.0) {
        let (s, w) = (c(re_s, im_s), c(re_w, im_w));
        let a = d0_closed_form(s, w).unwrap().value;
        let b = d0_closed_form(s, 1.0 - w).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }
}
