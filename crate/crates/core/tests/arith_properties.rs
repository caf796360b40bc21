use num_complex::Complex64;
use proptest::prelude::*;
use shiftconv_core::arith::{
    chi4, gcd, kloosterman, mod_inverse, sieve_divisor_count, sieve_r2, sieve_sigma, weil_bound, KloostermanSpec,
    Sieve, TableKind,
};
use shiftconv_core::Error;

/// r2(n) by counting lattice points directly.
fn r2_brute(n: i64) -> u32 {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut count = 0;
    for a in -r..=r {
        for b in -r..=r {
            if a * a + b * b == n {
                count += 1;
            }
        }
    }
    count
}

fn sigma_brute(n: u64, nu: Complex64) -> Complex64 {
    (1..=n).filter(|d| n % d == 0).map(|d| (nu * (d as f64).ln()).exp()).sum()
}

/// Kloosterman sum from the definition with a brute-force inverse search.
fn kloosterman_brute(m: i64, n: i64, c: i64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for d in 0..c {
        if gcd(d as u64, c as u64) != 1 {
            continue;
        }
        let dbar = (0..c).find(|x| (x * d) % c == 1 % c).unwrap();
        let phase = 2.0 * std::f64::consts::PI * ((m * d + n * dbar).rem_euclid(c)) as f64 / c as f64;
        s += Complex64::from_polar(1.0, phase);
    }
    s
}

#[test]
fn r2_table_matches_lattice_count() {
    let t = sieve_r2(2000).unwrap();
    assert_eq!(t.kind(), TableKind::R2);
    let v = t.as_integers().unwrap();
    for n in 0..=2000 {
        assert_eq!(v[n], r2_brute(n as i64), "n = {n}");
    }
}

#[test]
fn sigma_table_matches_divisor_sum() {
    let nu = Complex64::new(-0.4, 1.3);
    let t = sieve_sigma(500, nu).unwrap();
    assert_eq!(t.nu(), Some(nu));
    for n in 1..=500u64 {
        let b = sigma_brute(n, nu);
        assert!((t.get(n as usize) - b).norm() <= 1e-12 * b.norm().max(1.0), "n = {n}");
    }
    assert_eq!(t.get(0), Complex64::new(0.0, 0.0));
}

#[test]
fn kloosterman_matches_definition() {
    for c in 1..=40i64 {
        for (m, n) in [(1, 1), (2, 5), (-3, 7), (0, 4), (6, 6)] {
            let a = kloosterman(KloostermanSpec::new(m, n, c as u64)).unwrap();
            let b = kloosterman_brute(m, n, c);
            assert!((a - b).norm() < 1e-10, "S({m},{n};{c}) = {a} vs {b}");
        }
    }
}

#[test]
fn ramanujan_sum_special_case() {
    // S(m, 0; c) is the Ramanujan sum; c_p(1) = -1 for prime p.
    for p in [3u64, 5, 7, 11, 13] {
        let s = kloosterman(KloostermanSpec::new(1, 0, p)).unwrap();
        assert!((s + 1.0).norm() < 1e-12);
    }
}

#[test]
fn twisted_sum_needs_level_four() {
    assert!(matches!(kloosterman(KloostermanSpec::twisted(1, 1, 6)), Err(Error::Contract(_))));
    assert!(kloosterman(KloostermanSpec::twisted(1, 1, 8)).is_ok());
}

#[test]
fn memory_budget_is_enforced() {
    let tiny = Sieve::new(1000, 1);
    assert!(matches!(tiny.r2(10_000), Err(Error::Budget { .. })));
}

#[test]
fn csv_export_has_header_and_rows() {
    let csv = sieve_r2(10).unwrap().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[2], "1,4");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn r2_is_four_times_character_sum(n in 1i64..50_000) {
        let t = sieve_r2(n as usize).unwrap();
        let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| chi4(d) as i64).sum();
        prop_assert_eq!(t.as_integers().unwrap()[n as usize] as i64, 4 * s);
    }

    #[test]
    fn sigma_reflection(n in 1usize..3000, re in -1.0f64..1.0, im in -5.0f64..5.0) {
        let nu = Complex64::new(re, im);
        let a = sieve_sigma(n, nu).unwrap().get(n);
        let b = sieve_sigma(n, -nu).unwrap().get(n) * (nu * (n as f64).ln()).exp();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn sieves_agree_with_worker_split(n in 1usize..5000, workers in 1usize..5) {
        let s = Sieve::new(1 << 30, workers);
        let (a, b) = (s.r2(n).unwrap(), sieve_r2(n).unwrap());
        prop_assert_eq!(a.values(), b.values());
        let (a, b) = (s.divisor_count(n).unwrap(), sieve_divisor_count(n).unwrap());
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn kloosterman_symmetric_real_and_bounded(m in -30i64..30, n in -30i64..30, c in 1u64..400) {
        let a = kloosterman(KloostermanSpec::new(m, n, c)).unwrap();
        let b = kloosterman(KloostermanSpec::new(n, m, c)).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
        prop_assert!(a.im.abs() < 1e-9);
        if m != 0 && n != 0 {
            prop_assert!(a.norm() <= weil_bound(m, n, c) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn mod_inverse_inverts(a in -10_000i64..10_000, m in 2i64..10_000) {
        match mod_inverse(a, m) {
            Some(x) => prop_assert_eq!((a * x).rem_euclid(m), 1),
            None => prop_assert!(gcd(a.unsigned_abs(), m as u64) != 1),
        }
    }
}
