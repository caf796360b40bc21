//! The identity suite: every numerical identity the library certifies, each
//! with a stable identifier, a measured residual and a tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{
    chi4, kloosterman, sieve_divisor_count, sieve_r2, sieve_sigma, weil_sweep, KloostermanSpec, Sieve,
};
use crate::error::Result;
use crate::modular::{
    decomposition_curve, eisenstein, eisenstein_level1_cosets, eisenstein_level1_fourier, fourier_cutoff_for,
    theta, verify_coset_representatives, EisensteinSpec, HalfPlanePoint, Mat2, TruncationBudget,
};
use crate::series::{d0_closed_form, d0_truncated_with, dh_truncated_with, residue_consistency, MainTermInputs, SpectralPoint};
use crate::special::{
    bessel_k, bessel_k_imag_order, gamma_c, kuznetsov_geometric_integral, kuznetsov_geometric_integral_nodes,
    l_chi4_star, whittaker_w, zeta_star, QuadratureBudget,
};
use crate::sums::{
    fit_main_terms, log_grid, mellin_u, KernelSign, PartialSumSeries, SmoothingKernel, SumMode, SumTables,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    /// Small sizes; a few seconds in total.
    Quick,
    /// The sizes of the acceptance suite.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Arith,
    Special,
    Modular,
    Series,
    Sums,
}

impl Module {
    pub const ALL: [Module; 5] = [Module::Arith, Module::Special, Module::Modular, Module::Series, Module::Sums];
}

/// One verified identity: `pass` is `residual <= tolerance`. An evaluation
/// error fails the record and is kept in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub identity_id: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub level: VerifyLevel,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub failing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<IdentityRecord>,
    pub summary: VerifySummary,
}

impl VerificationReport {
    pub fn from_records(level: VerifyLevel, records: Vec<IdentityRecord>) -> Self {
        let failing: Vec<String> = records.iter().filter(|r| !r.pass).map(|r| r.identity_id.clone()).collect();
        let summary = VerifySummary {
            level,
            total: records.len(),
            passed: records.len() - failing.len(),
            failed: failing.len(),
            failing,
        };
        Self { records, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

fn record(id: &str, anchor: &str, tolerance: f64, residual: Result<f64>) -> IdentityRecord {
    match residual {
        Ok(r) => IdentityRecord {
            identity_id: id.into(),
            anchor: anchor.into(),
            residual: r,
            tolerance,
            pass: r <= tolerance,
            error: None,
        },
        Err(e) => IdentityRecord {
            identity_id: id.into(),
            anchor: anchor.into(),
            residual: f64::INFINITY,
            tolerance,
            pass: false,
            error: Some(e.to_string()),
        },
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pt(x: f64, y: f64) -> HalfPlanePoint {
    HalfPlanePoint::new(x, y).expect("positive height")
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Least-squares slope of (x, y) pairs.
pub fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Deterministic sample of `count` indices in `1..=n` (a fixed
/// multiplicative walk), so reports are reproducible without an RNG.
fn sample_indices(n: usize, count: usize) -> Vec<usize> {
    let mut x: u64 = 0x9e37_79b9;
    (0..count)
        .map(|_| {
            x = x.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            1 + ((x >> 17) % n as u64) as usize
        })
        .collect()
}

/// Run the checks of one module.
pub fn verify_module(module: Module, level: VerifyLevel) -> Vec<IdentityRecord> {
    match module {
        Module::Arith => arith_checks(level),
        Module::Special => special_checks(level),
        Module::Modular => modular_checks(level),
        Module::Series => series_checks(level),
        Module::Sums => sums_checks(level),
    }
}

/// Run every check.
pub fn verify_all(level: VerifyLevel) -> VerificationReport {
    let records = Module::ALL.iter().flat_map(|&m| verify_module(m, level)).collect();
    VerificationReport::from_records(level, records)
}

// ------------------------------------------------------------ arith

/// Mismatch counts for r2(n) = 4 sum_{d|n} chi4(d), r2(2n) = r2(n),
/// r2(4n) = r2(n) over n <= `n_max`.
pub fn r2_identity_mismatches(n_max: usize) -> Result<[u64; 3]> {
    let r2 = sieve_r2(n_max)?;
    let r2 = r2.as_integers().expect("integer table");
    let mut chi_sum = vec![0i64; n_max + 1];
    for d in 1..=n_max {
        let x = chi4(d as i64) as i64;
        if x != 0 {
            for m in (d..=n_max).step_by(d) {
                chi_sum[m] += x;
            }
        }
    }
    let mut bad = [0u64; 3];
    for k in 1..=n_max {
        bad[0] += (r2[k] as i64 != 4 * chi_sum[k]) as u64;
        if 2 * k <= n_max {
            bad[1] += (r2[2 * k] != r2[k]) as u64;
        }
        if 4 * k <= n_max {
            bad[2] += (r2[4 * k] != r2[k]) as u64;
        }
    }
    Ok(bad)
}

fn trial_division_d(n: usize) -> u32 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

fn arith_checks(level: VerifyLevel) -> Vec<IdentityRecord> {
    let quick = level == VerifyLevel::Quick;
    let n_max = if quick { 100_000 } else { 1_000_000 };
    let mut out = Vec::new();
    match r2_identity_mismatches(n_max) {
        Ok(bad) => {
            let ids = [
                ("arith.r2_character_sum", "r2(n) = 4 sum_{d|n} chi4(d)"),
                ("arith.r2_doubling", "r2(2n) = r2(n)"),
                ("arith.r2_quadrupling", "r2(4n) = r2(n)"),
            ];
            for ((id, anchor), b) in ids.iter().zip(bad) {
                out.push(record(id, &format!("{anchor}, n <= {n_max}, mismatch count"), 0.0, Ok(b as f64)));
            }
        }
        Err(e) => {
            for id in ["arith.r2_character_sum", "arith.r2_doubling", "arith.r2_quadrupling"] {
                out.push(record(id, "r2 identities", 0.0, Err(e.clone())));
            }
        }
    }
    out.push(record(
        "arith.sigma_reflection",
        "sigma_nu(n) = n^nu sigma_{-nu}(n), relative",
        1e-12,
        (|| {
            let n = 20_000;
            let mut worst = 0.0f64;
            for nu in [c(0.3, 2.0), c(-0.7, 0.5), c(0.0, 1.5), c(0.6, 0.0)] {
                let a = sieve_sigma(n, nu)?;
                let b = sieve_sigma(n, -nu)?;
                for k in sample_indices(n, 200) {
                    let lhs = a.get(k);
                    let rhs = (nu * (k as f64).ln()).exp() * b.get(k);
                    worst = worst.max(rel(lhs, rhs));
                }
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "arith.divisor_trial_division",
        "sieved d(n) equals trial division on 1000 indices, mismatch count",
        0.0,
        (|| {
            let t = sieve_divisor_count(n_max)?;
            let d = t.as_integers().expect("integer table");
            Ok(sample_indices(n_max, 1000).into_iter().filter(|&k| d[k] != trial_division_d(k)).count() as f64)
        })(),
    ));
    let (mn, cmax) = if quick { (10, 500) } else { (20, 10_000) };
    let weil = weil_sweep(mn, cmax);
    let mut rec = record(
        "arith.weil_bound",
        &format!("|S(m,n;c)| <= d(c) gcd(m,n,c)^(1/2) c^(1/2), m,n <= {mn}, c <= {cmax}; max ratio"),
        1.0 + 1e-9,
        Ok(weil.max_ratio),
    );
    rec.pass &= weil.first_violation.is_none();
    out.push(rec);
    out.push(record(
        "arith.kloosterman_symmetry",
        "S(m,n;c) = S(n,m;c) and Im S(m,n;c) = 0 for untwisted sums",
        1e-9,
        (|| {
            let mut worst = 0.0f64;
            for cc in 1..=60u64 {
                for m in 1..=8i64 {
                    for n in 1..=8i64 {
                        let a = kloosterman(KloostermanSpec::new(m, n, cc))?;
                        let b = kloosterman(KloostermanSpec::new(n, m, cc))?;
                        worst = worst.max((a - b).norm()).max(a.im.abs());
                    }
                }
            }
            Ok(worst)
        })(),
    ));
    out
}

// ---------------------------------------------------------- special

/// 20 points in 0 < Re s < 1, |Im s| <= 10.
pub fn strip_grid() -> Vec<Complex64> {
    let mut g = Vec::new();
    for (i, re) in [0.1, 0.3, 0.5, 0.7].iter().enumerate() {
        for (j, im) in [-10.0, -3.5, 0.0, 4.0, 9.0].iter().enumerate() {
            g.push(c(re + 0.05 * j as f64, im + 0.25 * i as f64));
        }
    }
    g
}

fn special_checks(level: VerifyLevel) -> Vec<IdentityRecord> {
    let mut out = Vec::new();
    out.push(record(
        "special.zeta_functional_equation",
        "zeta*(s) = zeta*(1-s) on 20 strip points",
        1e-10,
        (|| {
            let mut worst = 0.0f64;
            for s in strip_grid() {
                let a = zeta_star(s)?.value;
                let b = zeta_star(1.0 - s)?.value;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "special.l_chi4_functional_equation",
        "L*(s,chi4) = L*(1-s,chi4) on 20 strip points",
        1e-10,
        (|| {
            let mut worst = 0.0f64;
            for s in strip_grid() {
                let a = l_chi4_star(s)?.value;
                let b = l_chi4_star(1.0 - s)?.value;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "special.gamma_recurrence",
        "Gamma(s+1) = s Gamma(s), relative",
        1e-12,
        (|| {
            let mut worst = 0.0f64;
            for s in [c(0.3, 0.0), c(2.5, 1.0), c(-1.7, 0.4), c(0.1, -7.0), c(12.0, 3.0), c(-4.5, -0.2)] {
                let a = gamma_c(s + 1.0)?.value;
                let b = gamma_c(s)?.value * s;
                worst = worst.max(rel(a, b));
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "special.bessel_half_integer",
        "K_{1/2}, K_{3/2} closed forms, relative",
        1e-10,
        (|| {
            let mut worst = 0.0f64;
            for x in [0.05, 0.7, 3.0, 25.0, 200.0] {
                let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
                worst = worst.max(rel(bessel_k(c(0.5, 0.0), x)?.value, c(k12, 0.0)));
                worst = worst.max(rel(bessel_k(c(1.5, 0.0), x)?.value, c(k12 * (1.0 + 1.0 / x), 0.0)));
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "special.whittaker_bessel_bridge",
        "W_{0,mu}(2x) = (2x/pi)^(1/2) K_mu(x) on 10 points, relative",
        1e-9,
        (|| {
            let mut worst = 0.0f64;
            let pts = [
                (c(0.0, 0.0), 0.5),
                (c(0.3, 0.0), 1.0),
                (c(0.25, 1.0), 2.0),
                (c(0.0, 3.0), 1.5),
                (c(0.7, -0.4), 4.0),
                (c(1.2, 0.0), 0.8),
                (c(0.1, 2.0), 6.0),
                (c(0.45, 0.0), 10.0),
                (c(0.0, 0.5), 0.3),
                (c(0.9, 1.5), 3.0),
            ];
            for (mu, x) in pts {
                let wv = whittaker_w(0.0, mu, 2.0 * x)?.value;
                let kv = bessel_k(mu, x)?.value * (2.0 * x / PI).sqrt();
                worst = worst.max(rel(wv, kv));
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "special.imag_order_at_zero",
        "K_{2iT}(x) at T = 0 equals K_0(x) on 5 points, relative",
        1e-8,
        (|| {
            let mut worst = 0.0f64;
            for x in [0.1, 0.5, 1.0, 4.0, 15.0] {
                let a = bessel_k_imag_order(0.0, c(x, 0.0))?.value;
                let b = bessel_k(c(0.0, 0.0), x)?.value;
                worst = worst.max(rel(a, b));
            }
            Ok(worst)
        })(),
    ));
    if level == VerifyLevel::Full {
        let (slope, consistency) = match kuznetsov_profile(3.0) {
            Ok((s, q)) => (Ok(s), Ok(q)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        out.push(record(
            "special.kuznetsov_decay",
            "log-log slope of |I_T(beta)| over beta in [1e-2, 1e2], T = 3 (pass if <= tolerance)",
            -0.35,
            slope,
        ));
        out.push(record(
            "special.kuznetsov_quadrature_consistency",
            "|I_T(beta)| adaptive vs 2048-node rule, largest difference",
            1e-6,
            consistency,
        ));
    }
    out
}

/// Log-log slope of |I_T(beta)| on nine half-decade points of [1e-2, 1e2],
/// and the largest disagreement between the adaptive rule and a fixed
/// 2048-node rule on the same points.
pub fn kuznetsov_profile(t: f64) -> Result<(f64, f64)> {
    let mut pts = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..=8 {
        let beta = 10f64.powf(-2.0 + 0.5 * k as f64);
        let a = kuznetsov_geometric_integral(t, beta)?.value;
        let b = kuznetsov_geometric_integral_nodes(t, beta, 2048)?.value;
        worst = worst.max((a - b).norm());
        pts.push((beta.ln(), a.norm().ln()));
    }
    Ok((ols_slope(&pts), worst))
}

// ---------------------------------------------------------- modular

/// Five points with y >= 0.4 used by the theta and level-one checks.
pub fn modular_points() -> [HalfPlanePoint; 5] {
    [pt(0.0, 1.0), pt(0.1, 0.8), pt(-0.3, 0.6), pt(0.45, 1.7), pt(0.2, 0.5)]
}

fn theta_value(z: HalfPlanePoint) -> Result<Complex64> {
    // Height >= 0.1 always meets 1e-16 within a few dozen terms.
    Ok(theta(z, TruncationBudget::unchecked(64))?.value)
}

fn level1(z: HalfPlanePoint, w: Complex64, completed: bool) -> Result<Complex64> {
    let m = fourier_cutoff_for(z, w, 1e-13)?;
    Ok(eisenstein(&EisensteinSpec::level_one(w, completed), z, TruncationBudget::new(m, 1e-13)?)?.value)
}

fn modular_checks(level: VerifyLevel) -> Vec<IdentityRecord> {
    let quick = level == VerifyLevel::Quick;
    let mut out = Vec::new();
    let points = modular_points();
    out.push(record(
        "modular.theta_involution",
        "theta(-1/(4z)) = (-2iz)^(1/2) theta(z)",
        1e-12,
        (|| {
            let mut worst = 0.0f64;
            for z in points {
                let lhs = theta_value(z.act(&Mat2::new(0, -1, 4, 0)))?;
                let rhs = (c(0.0, -2.0) * z.z()).sqrt() * theta_value(z)?;
                worst = worst.max((lhs - rhs).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "modular.theta_half_shift",
        "theta(z + 1/2) = 2 theta(4z) - theta(z)",
        1e-12,
        (|| {
            let mut worst = 0.0f64;
            for z in points {
                let lhs = theta_value(z.translate(0.5))?;
                let rhs = theta_value(pt(4.0 * z.x(), 4.0 * z.y()))? * 2.0 - theta_value(z)?;
                worst = worst.max((lhs - rhs).norm());
            }
            Ok(worst)
        })(),
    ));
    let weights = [c(0.7, 0.0), c(0.3, 0.5), c(2.5, 0.0), c(-1.2, 1.0), c(1.5, -2.5)];
    out.push(record(
        "modular.level1_translation",
        "E(z+1,w) = E(z,w) on the Fourier route",
        1e-13,
        (|| {
            let mut worst = 0.0f64;
            for (z, w) in points.iter().zip(weights) {
                let a = level1(*z, w, false)?;
                let b = level1(z.translate(1.0), w, false)?;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "modular.level1_inversion",
        "E(-1/z,w) = E(z,w)",
        1e-8,
        (|| {
            let mut worst = 0.0f64;
            for (z, w) in points.iter().zip(weights) {
                let a = level1(*z, w, false)?;
                let b = level1(z.act(&Mat2::new(0, -1, 1, 0)), w, false)?;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "modular.level1_functional_equation",
        "E*(z,w) = E*(z,1-w)",
        1e-8,
        (|| {
            let mut worst = 0.0f64;
            for (z, w) in points.iter().zip(weights) {
                let a = level1(*z, w, true)?;
                let b = level1(*z, 1.0 - w, true)?;
                worst = worst.max((a - b).norm());
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "modular.level1_routes_agree",
        "Fourier and coset routes for E(z,w), Re w >= 2; residual / combined budget",
        1.0,
        (|| {
            let mut worst = 0.0f64;
            let radius = if quick { 200 } else { 800 };
            for (z, w) in [(pt(0.1, 1.2), c(2.2, 0.0)), (pt(-0.4, 0.9), c(2.5, 1.0)), (pt(0.0, 1.0), c(3.0, 0.0))] {
                let m = fourier_cutoff_for(z, w, 1e-13)?;
                let f = eisenstein_level1_fourier(z, w, TruncationBudget::new(m, 1e-13)?)?;
                let k = eisenstein_level1_cosets(z, w, TruncationBudget::unchecked(radius))?;
                worst = worst.max((f.value - k.value).norm() / (f.error_bound() + k.error_bound()));
            }
            Ok(worst)
        })(),
    ));
    let check = verify_coset_representatives();
    out.push(record(
        "modular.coset_inequivalence",
        "six coset matrices have determinant 1 and are pairwise Gamma_0(4)-inequivalent; equivalent pair count",
        0.0,
        Ok(check.equivalent_pairs.len() as f64 + if check.all_determinant_one { 0.0 } else { 1.0 }),
    ));
    let r = if quick { 500 } else { 3000 };
    for (id, z, w, tol) in [
        ("modular.decomposition_w2_5", pt(0.0, 1.0), c(2.5, 0.0), 1e-3),
        ("modular.decomposition_w3", pt(0.3, 0.7), c(3.0, 0.0), 1e-4),
    ] {
        out.push(record(
            id,
            &format!("E = E_inf + 4^w E_0 + E_1/2 at z = {}, w = {}, R = {r}; larger of the two residuals", z.z(), w),
            tol,
            decomposition_curve(z, w, &[r]).map(|p| p[0].residual_fourier.max(p[0].residual_cosets)),
        ));
    }
    let radii: &[u64] = if quick { &[250, 500, 1000] } else { &[1000, 2000, 4000] };
    out.push(record(
        "modular.decomposition_slope",
        &format!("|log-log slope of residual in R - (2 - 2 Re w)| at z = i, w = 2.5, R in {radii:?}"),
        0.1,
        decomposition_slope(pt(0.0, 1.0), c(2.5, 0.0), radii),
    ));
    out
}

/// |slope - (2 - 2 Re w)| of the Fourier-route decomposition residual.
pub fn decomposition_slope(z: HalfPlanePoint, w: Complex64, radii: &[u64]) -> Result<f64> {
    let curve = decomposition_curve(z, w, radii)?;
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| ((p.radius as f64).ln(), p.residual_fourier.ln()))
        .collect();
    Ok((ols_slope(&pts) - (2.0 - 2.0 * w.re)).abs())
}

// ----------------------------------------------------------- series

/// The ten (s, w) points of the D_0 comparison: Re s in [2, 4],
/// Re w in {0.3, 0.5, 0.7}, four of them at Re s = 3.
pub fn d0_grid() -> Vec<(Complex64, Complex64)> {
    vec![
        (c(2.0, 0.0), c(0.5, 0.0)),
        (c(2.0, 1.0), c(0.3, 0.0)),
        (c(2.5, -2.0), c(0.7, 0.0)),
        (c(2.5, 0.5), c(0.5, 1.0)),
        (c(3.0, 0.0), c(0.7, 0.0)),
        (c(3.0, 5.0), c(0.3, 0.0)),
        (c(3.0, -1.0), c(0.5, 0.0)),
        (c(3.0, 2.0), c(0.3, -0.5)),
        (c(3.5, 10.0), c(0.7, 0.2)),
        (c(4.0, 0.0), c(0.5, 0.0)),
    ]
}

/// For each grid point: (s, w, |closed - truncated|, certified tail).
pub fn d0_comparison(cutoff: u64) -> Result<Vec<(Complex64, Complex64, f64, f64)>> {
    let n = cutoff as usize;
    let r2 = sieve_r2(n)?;
    let mut out = Vec::new();
    let mut cache: Vec<(Complex64, crate::arith::ArithmeticTable)> = Vec::new();
    for (s, w) in d0_grid() {
        if !cache.iter().any(|(cw, _)| *cw == w) {
            cache.push((w, sieve_sigma(n, 1.0 - w * 2.0)?));
        }
        let sigma = &cache.iter().find(|(cw, _)| *cw == w).expect("cached").1;
        let closed = d0_closed_form(s, w)?;
        let trunc = d0_truncated_with(s, w, cutoff, &r2, sigma)?;
        let diff = (closed.value - trunc.value).norm();
        out.push((s, w, diff, trunc.tail_bound + closed.abs_error_estimate));
    }
    Ok(out)
}

fn series_checks(level: VerifyLevel) -> Vec<IdentityRecord> {
    let quick = level == VerifyLevel::Quick;
    let cutoff = if quick { 100_000 } else { 1_000_000 };
    let mut out = Vec::new();
    match d0_comparison(cutoff) {
        Ok(rows) => {
            let ratio = rows.iter().map(|r| r.2 / r.3).fold(0.0, f64::max);
            out.push(record(
                "series.d0_closed_vs_truncated",
                &format!("D_0 closed form vs series at N = {cutoff}; largest |diff| / certified tail"),
                1.0,
                Ok(ratio),
            ));
            let at3 = rows.iter().filter(|r| r.0.re == 3.0).map(|r| r.2).fold(0.0, f64::max);
            out.push(record(
                "series.d0_absolute_at_re_s_3",
                &format!("D_0 closed form vs series at Re s = 3, N = {cutoff}; largest |diff|"),
                if quick { 1e-3 } else { 1e-4 },
                Ok(at3),
            ));
        }
        Err(e) => {
            out.push(record("series.d0_closed_vs_truncated", "D_0 comparison", 1.0, Err(e.clone())));
            out.push(record("series.d0_absolute_at_re_s_3", "D_0 comparison", 1e-4, Err(e)));
        }
    }
    out.push(record(
        "series.d0_symmetry",
        "D_0(s,w) = D_0(s,1-w), relative",
        1e-10,
        (|| {
            let mut worst = 0.0f64;
            for (s, w) in d0_grid() {
                worst = worst.max(rel(d0_closed_form(s, w)?.value, d0_closed_form(s, 1.0 - w)?.value));
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "series.dh_doubling",
        "|D_h(N) - D_h(2N)| / tail bound at N",
        1.0,
        (|| {
            let n = if quick { 20_000u64 } else { 200_000 };
            let mut worst = 0.0f64;
            let r2 = sieve_r2(2 * n as usize)?;
            for (s, w, h) in [(c(2.0, 0.0), c(0.5, 0.0), 1u64), (c(2.5, 3.0), c(0.3, 0.2), 2), (c(3.0, -1.0), c(0.7, 0.0), 5)] {
                let sigma = sieve_sigma((2 * n + h) as usize, 1.0 - w * 2.0)?;
                let p = SpectralPoint::new(s, w);
                let a = dh_truncated_with(p, h, n, &r2, &sigma)?;
                let b = dh_truncated_with(p, h, 2 * n, &r2, &sigma)?;
                worst = worst.max((a.value - b.value).norm() / a.tail_bound);
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "series.residue_consistency",
        "main-term coefficients equal the residues of D_h",
        1e-12,
        (|| {
            let mut worst = 0.0f64;
            for (w, h, p1, p2) in [
                (c(0.7, 0.0), 1u64, c(1.0, 0.0), c(1.0, 0.0)),
                (c(0.3, 0.4), 3, c(0.8, -0.2), c(1.3, 0.1)),
                (c(0.6, -1.0), 10, c(-0.5, 2.0), c(0.25, 0.0)),
            ] {
                let inputs = MainTermInputs {
                    h,
                    w,
                    phi_at: p1,
                    phi_at_reflected: Some(p2),
                    phi_prime: None,
                };
                worst = worst.max(residue_consistency(&inputs)? / (p1.norm() + p2.norm()));
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "series.pole_probe",
        "max(1e3 / min |D_0| at distance 1e-4 from the poles, max |D_0| at distance 0.1 / 1e2)",
        1.0,
        (|| {
            let w = c(0.7, 0.0);
            let mut near = f64::INFINITY;
            let mut far = 0.0f64;
            for pole in [w + 0.5, 1.5 - w] {
                for d in [c(1e-4, 0.0), c(-1e-4, 0.0), c(0.0, 1e-4)] {
                    near = near.min(d0_closed_form(pole + d, w)?.value.norm());
                }
                for d in [c(0.0, 0.1), c(0.0, -0.1), c(0.0, 0.5)] {
                    far = far.max(d0_closed_form(pole + d, w)?.value.norm());
                }
            }
            Ok((1e3 / near).max(far / 1e2))
        })(),
    ));
    out
}

// ------------------------------------------------------------- sums

/// Brute-force lattice oracle: for every integer X <= `x_max`,
/// sum over (a, b) with a^2 + b^2 + h <= X of d(a^2 + b^2 + h), with d by
/// trial division.
pub fn lattice_oracle(x_max: u64, h: u64) -> Vec<u64> {
    let x = x_max as usize;
    let mut bucket = vec![0u64; x + 1];
    let r = (x_max as f64).sqrt() as i64 + 1;
    for a in -r..=r {
        for b in -r..=r {
            let n = (a * a + b * b) as u64 + h;
            if n <= x_max {
                bucket[n as usize] += trial_division_d(n as usize) as u64;
            }
        }
    }
    let mut acc = 0;
    bucket
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Sandwich S_- <= S <= S_+ at real w: largest violation relative to |S|.
pub fn sandwich_violation(x_values: &[f64], w: f64, h: u64, ys: &[f64]) -> Result<f64> {
    let top = x_values.iter().cloned().fold(0.0, f64::max);
    let y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let tables = SumTables::new(&Sieve::default(), c(w, 0.0), h, (top * (1.0 + 1.0 / y_min)).ceil() as u64 + 1)?;
    let mut worst = 0.0f64;
    for &y in ys {
        let plus = SmoothingKernel::new(KernelSign::Plus, y)?;
        let minus = SmoothingKernel::new(KernelSign::Minus, y)?;
        for &x in x_values {
            let s = tables.sharp(x)?.re;
            let sp = tables.smoothed(x, &plus)?.re;
            let sm = tables.smoothed(x, &minus)?.re;
            worst = worst.max((sm - s).max(0.0) / s.abs().max(1.0));
            worst = worst.max((s - sp).max(0.0) / s.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// The 6-point s grid of the Mellin check. The first-order constant grows
/// like |s|/2, so the grid stays within |s| <= 10.
pub fn mellin_grid() -> [Complex64; 6] {
    [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 3.0), c(1.5, -6.0), c(3.0, 0.0), c(0.75, 8.0)]
}

/// Measured C(y) = y max_s |s U_y(s) - 1| for each kernel sign.
pub fn mellin_constants(y: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for sign in [KernelSign::Plus, KernelSign::Minus] {
        let k = SmoothingKernel::new(sign, y)?;
        for s in mellin_grid() {
            let u = mellin_u(&k, s, QuadratureBudget::default())?.value;
            worst = worst.max(y * (s * u - 1.0).norm());
        }
    }
    Ok(worst)
}

fn sums_checks(level: VerifyLevel) -> Vec<IdentityRecord> {
    let quick = level == VerifyLevel::Quick;
    let mut out = Vec::new();
    let x_max: u64 = if quick { 2_000 } else { 10_000 };
    out.push(record(
        "sums.lattice_oracle",
        &format!("sharp sums at w = 1/2 equal the lattice triple loop for every integer X <= {x_max}, h in 1..=3; mismatch count"),
        0.0,
        (|| {
            let mut bad = 0u64;
            let grid: Vec<f64> = (1..=x_max).map(|x| x as f64).collect();
            for h in 1..=3 {
                let oracle = lattice_oracle(x_max, h);
                let tables = SumTables::new(&Sieve::default(), c(0.5, 0.0), h, x_max)?;
                let series = tables.sharp_series(&grid)?;
                for (x, v) in grid.iter().zip(series.values()) {
                    bad += (v.re != oracle[*x as usize] as f64 || v.im != 0.0) as u64;
                }
            }
            Ok(bad as f64)
        })(),
    ));
    let xs: Vec<f64> = if quick {
        vec![1e3, 7_777.0, 3e4]
    } else {
        vec![1e3, 7_777.0, 3e4, 1e5, 4.5e5]
    };
    out.push(record(
        "sums.sandwich",
        "S_-y(X) <= S(X) <= S_+y(X) for w in {0.3, 0.5, 0.7}, y in {10, 100}; largest relative violation",
        0.0,
        (|| {
            let mut worst = 0.0f64;
            for w in [0.3, 0.5, 0.7] {
                worst = worst.max(sandwich_violation(&xs, w, 1, &[10.0, 100.0])?);
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "sums.mellin_first_order",
        "y |s U_y(s) - 1| over a 6-point s grid, y in {10, 100, 1000}; largest measured C",
        10.0,
        (|| {
            let mut worst = 0.0f64;
            for y in [10.0, 100.0, 1000.0] {
                worst = worst.max(mellin_constants(y)?);
            }
            Ok(worst)
        })(),
    ));
    out.push(record(
        "sums.mellin_constant_stability",
        "max C(y) / min C(y) over y in {10, 100, 1000}",
        2.0,
        (|| {
            let cs = [mellin_constants(10.0)?, mellin_constants(100.0)?, mellin_constants(1000.0)?];
            let hi = cs.iter().cloned().fold(0.0, f64::max);
            let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(hi / lo)
        })(),
    ));
    out.push(record(
        "sums.fit_self_recovery",
        "fit of 3 X log X + 5 X recovers (3, 5)",
        1e-8,
        (|| {
            let grid = log_grid(1e5, 1e7, 16)?;
            let values = grid.iter().map(|&x| c(3.0 * x * x.ln() + 5.0 * x, 0.0)).collect();
            let s = PartialSumSeries::new(1, c(0.5, 0.0), grid, values, SumMode::Sharp, None)?;
            let r = fit_main_terms(&s)?;
            Ok((r.coefficients[0] - 3.0).norm().max((r.coefficients[1] - 5.0).norm()))
        })(),
    ));
    if !quick {
        let fit = (|| {
            let grid = log_grid(1e5, 1e7, 16)?;
            let tables = SumTables::new(&Sieve::default(), c(0.5, 0.0), 1, 10_000_000)?;
            fit_main_terms(&tables.sharp_series(&grid)?)
        })();
        let (stab, expo) = match fit {
            Ok(r) => (Ok(r.stability), r.residual_exponent.ok_or(crate::Error::NoConvergence("residual exponent"))),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        out.push(record(
            "sums.fit_stability_h1",
            "h = 1, w = 1/2, X in [1e5, 1e7]: window stability of (c_h, c_h')",
            0.05,
            stab,
        ));
        out.push(record(
            "sums.fit_residual_exponent_h1",
            "h = 1, w = 1/2, X in [1e5, 1e7]: residual exponent",
            0.95,
            expo,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let report = verify_all(VerifyLevel::Quick);
        for r in &report.records {
            assert!(r.pass, "{r:?}");
        }
        let mut ids: Vec<&str> = report.records.iter().map(|r| r.identity_id.as_str()).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n, "identity ids must be unique");
    }

    #[test]
    fn lattice_oracle_small_values() {
        // X = 2, h = 1: (0,0) gives d(1) = 1, the four unit vectors give d(2) = 2 each.
        assert_eq!(lattice_oracle(2, 1), vec![0, 1, 9]);
    }
}
