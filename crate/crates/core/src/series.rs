//! Truncated evaluation of the shifted-convolution Dirichlet series
//! D_h(s, w) = sum_{n >= 0} r2(n) sigma_{1-2w}(n+h) (n+h)^{-(s + 1/2 - w)},
//! the closed form of its h = 0 analogue, and the main-term and residue
//! formulas built from the injected constants phi_h.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{sieve_r2, sieve_sigma, ArithmeticTable, TableKind};
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;
use crate::special::{l_chi4, zeta_c, zeta_star, SpecialValue, EULER_GAMMA};

/// A point (s, w) with its region flags, always derived from (s, w).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    s: Complex64,
    w: Complex64,
    converges_dh: bool,
    w_in_strip: bool,
    w_is_half: bool,
}

impl SpectralPoint {
    pub fn new(s: Complex64, w: Complex64) -> Self {
        Self {
            s,
            w,
            converges_dh: s.re > 1.0 + (w.re - 0.5).abs(),
            w_in_strip: w.re > 0.0 && w.re < 1.0,
            w_is_half: w == Complex64::new(0.5, 0.0),
        }
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    /// Re s > 1 + |Re w - 1/2|.
    pub fn converges_dh(&self) -> bool {
        self.converges_dh
    }

    pub fn w_in_strip(&self) -> bool {
        self.w_in_strip
    }

    pub fn w_is_half(&self) -> bool {
        self.w_is_half
    }
}

/// A truncated series value and a certified bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub cutoff: u64,
}

/// C_delta = prod_{p < 2^{1/delta}} max_k (k+1) p^{-k delta}, so that
/// d(n) <= C_delta n^delta for all n >= 1.
pub fn divisor_bound_constant(delta: f64) -> f64 {
    assert!(delta > 0.0 && delta <= 1.0);
    let limit = 2f64.powf(1.0 / delta).ceil() as usize;
    let mut composite = vec![false; limit + 1];
    let mut c = 1.0f64;
    for p in 2..limit {
        if composite[p] {
            continue;
        }
        for m in (p * p..=limit).step_by(p) {
            composite[m] = true;
        }
        if (p as f64) >= 2f64.powf(1.0 / delta) {
            continue;
        }
        let mut best = 1.0f64;
        let mut k = 1u32;
        loop {
            let v = (k as f64 + 1.0) * (p as f64).powf(-(k as f64) * delta);
            if v > best {
                best = v;
            } else if v < best {
                break;
            }
            k += 1;
        }
        c *= best;
    }
    // Guard against round-off in the product.
    c * (1.0 + 1e-12)
}

/// Tail bound for sum_{m > M} 4 C^2 m^{-(Re s - a - 2 delta)}, with
/// a = |Re w - 1/2| and M = N + h, minimized over delta on a fixed grid.
///
/// Uses r2(n) <= 4 d(n) <= 4 C n^delta with n <= m,
/// |sigma_{1-2w}(m)| <= d(m) max(1, m^{1 - 2 Re w}), and the integral
/// comparison sum_{m > M} m^{-p} <= M^{1-p} / (p - 1).
pub fn series_tail_bound(re_s: f64, re_w: f64, last_index: u64) -> f64 {
    let a = (re_w - 0.5).abs();
    let m = (last_index.max(1)) as f64;
    let mut best = f64::INFINITY;
    for j in 6..=30 {
        let delta = j as f64 / 60.0;
        let p = re_s - a - 2.0 * delta;
        if p <= 1.0 {
            continue;
        }
        let c = divisor_bound_constant(delta);
        let b = 4.0 * c * c * m.powf(1.0 - p) / (p - 1.0);
        if b < best {
            best = b;
        }
    }
    best
}

fn check_tables(r2: &ArithmeticTable, sigma: &ArithmeticTable, w: Complex64, r2_max: usize, sigma_max: usize) -> Result<()> {
    if r2.kind() != TableKind::R2 || r2.max_index() < r2_max {
        return Err(Error::Contract(format!("need an r2 table up to {r2_max}")));
    }
    let nu = Complex64::new(1.0, 0.0) - w * 2.0;
    if sigma.kind() != TableKind::SigmaNu || sigma.nu() != Some(nu) || sigma.max_index() < sigma_max {
        return Err(Error::Contract(format!("need a sigma_(1-2w) table with nu = {nu} up to {sigma_max}")));
    }
    Ok(())
}

fn accumulate(r2: &ArithmeticTable, sigma: &ArithmeticTable, start: usize, n: usize, h: usize, e: Complex64) -> Complex64 {
    let r2v = r2.as_integers().expect("r2 table is integer valued");
    let sv = sigma.as_complex().expect("sigma table is complex valued");
    let mut sum = CompensatedSum::new();
    for k in start..=n {
        let r = r2v[k];
        if r == 0 {
            continue;
        }
        let m = k + h;
        let term = sv[m] * (-e * (m as f64).ln()).exp() * r as f64;
        sum.add(term);
    }
    sum.value()
}

/// D_h(s, w) truncated at 0 <= n <= `cutoff`, using caller-supplied tables
/// (r2 to `cutoff`, sigma_{1-2w} to `cutoff + h`).
pub fn dh_truncated_with(
    point: SpectralPoint,
    h: u64,
    cutoff: u64,
    r2: &ArithmeticTable,
    sigma: &ArithmeticTable,
) -> Result<SeriesValue> {
    if h == 0 {
        return Err(Error::Contract("shift h must be positive".into()));
    }
    if !point.converges_dh() {
        return Err(Error::Region(format!(
            "D_h needs Re s > 1 + |Re w - 1/2|, got s = {}, w = {}",
            point.s, point.w
        )));
    }
    let (n, hu) = (cutoff as usize, h as usize);
    check_tables(r2, sigma, point.w, n, n + hu)?;
    let e = point.s + 0.5 - point.w;
    let value = accumulate(r2, sigma, 0, n, hu, e);
    Ok(SeriesValue {
        value,
        tail_bound: series_tail_bound(point.s.re, point.w.re, cutoff + h),
        cutoff,
    })
}

/// D_h(s, w) truncated at 0 <= n <= `cutoff`, sieving its own tables.
pub fn dh_truncated(point: SpectralPoint, h: u64, cutoff: u64) -> Result<SeriesValue> {
    let r2 = sieve_r2((cutoff as usize).max(1))?;
    let sigma = sieve_sigma((cutoff + h) as usize, Complex64::new(1.0, 0.0) - point.w * 2.0)?;
    dh_truncated_with(point, h, cutoff, &r2, &sigma)
}

/// D_0(s, w) = sum_{n >= 1} r2(n) sigma_{1-2w}(n) n^{-(s + 1/2 - w)},
/// truncated at n <= `cutoff`, with caller-supplied tables.
pub fn d0_truncated_with(
    s: Complex64,
    w: Complex64,
    cutoff: u64,
    r2: &ArithmeticTable,
    sigma: &ArithmeticTable,
) -> Result<SeriesValue> {
    let point = SpectralPoint::new(s, w);
    if !point.converges_dh() {
        return Err(Error::Region(format!("D_0 needs Re s > 1 + |Re w - 1/2|, got s = {s}, w = {w}")));
    }
    if cutoff == 0 {
        return Err(Error::Contract("D_0 cutoff must be at least 1".into()));
    }
    let n = cutoff as usize;
    check_tables(r2, sigma, w, n, n)?;
    let value = accumulate(r2, sigma, 1, n, 0, s + 0.5 - w);
    Ok(SeriesValue {
        value,
        tail_bound: series_tail_bound(s.re, w.re, cutoff),
        cutoff,
    })
}

pub fn d0_truncated(s: Complex64, w: Complex64, cutoff: u64) -> Result<SeriesValue> {
    let n = (cutoff as usize).max(1);
    let r2 = sieve_r2(n)?;
    let sigma = sieve_sigma(n, Complex64::new(1.0, 0.0) - w * 2.0)?;
    d0_truncated_with(s, w, cutoff, &r2, &sigma)
}

/// Distance below which `d0_closed_form` reports a pole.
pub const POLE_GUARD: f64 = 1e-6;

/// D_0(s, w) = 4 zeta(s+1/2-w) zeta(s-1/2+w) L(s+1/2-w) L(s-1/2+w) / L(2s),
/// with L = L(., chi4).
pub fn d0_closed_form(s: Complex64, w: Complex64) -> Result<SpecialValue> {
    for pole in [w + 0.5, Complex64::new(1.5, 0.0) - w] {
        if (s - pole).norm() < POLE_GUARD {
            return Err(Error::Pole {
                function: "D_0 closed form",
                at: pole,
            });
        }
    }
    let a = s + 0.5 - w;
    let b = s - 0.5 + w;
    let factors = [zeta_c(a)?, zeta_c(b)?, l_chi4(a)?, l_chi4(b)?];
    let denom = l_chi4(s * 2.0)?;
    let mut value = denom.value.inv() * 4.0;
    let mut rel = denom.abs_error_estimate / denom.value.norm();
    for f in &factors {
        value *= f.value;
        rel += f.abs_error_estimate / f.value.norm();
    }
    Ok(SpecialValue::new(
        value,
        value.norm() * (rel + 16.0 * f64::EPSILON),
        crate::special::Method::EulerMaclaurin,
    ))
}

/// Constants entering the main terms: phi_h at the relevant points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainTermInputs {
    pub h: u64,
    pub w: Complex64,
    /// phi_h(1/2 + w); at w = 1/2 this is phi_h(1).
    pub phi_at: Complex64,
    /// phi_h(3/2 - w); needed when w != 1/2.
    pub phi_at_reflected: Option<Complex64>,
    /// phi_h'(1); needed when w = 1/2.
    pub phi_prime: Option<Complex64>,
}

fn sqrt_4pi() -> f64 {
    (4.0 * PI).sqrt()
}

fn is_half(w: Complex64) -> bool {
    w == Complex64::new(0.5, 0.0)
}

fn check_inputs(inputs: &MainTermInputs) -> Result<()> {
    if inputs.h == 0 {
        return Err(Error::Contract("shift h must be positive".into()));
    }
    if !(inputs.w.re > 0.0 && inputs.w.re < 1.0) {
        return Err(Error::Contract(format!("w must lie in 0 < Re w < 1, got {}", inputs.w)));
    }
    if is_half(inputs.w) {
        if inputs.phi_prime.is_none() {
            return Err(Error::Contract("w = 1/2 needs phi_h'(1)".into()));
        }
    } else if inputs.phi_at_reflected.is_none() {
        return Err(Error::Contract("w != 1/2 needs phi_h(3/2 - w)".into()));
    }
    Ok(())
}

/// The two simple-pole residues of D_h(s, w) for w != 1/2:
/// at s = 1/2 + w, (4 pi)^{1/2} zeta*(2w) h^{1/2-w} phi_h(1/2+w), and
/// at s = 3/2 - w, (4 pi)^{1/2} zeta*(2-2w) h^{w-1/2} phi_h(3/2-w).
pub fn residue_formulas(
    w: Complex64,
    h: u64,
    phi_half_plus_w: Complex64,
    phi_three_half_minus_w: Complex64,
) -> Result<(Complex64, Complex64)> {
    if is_half(w) {
        return Err(Error::Contract(
            "w = 1/2 gives a double pole at s = 1; use double_pole_principal_part".into(),
        ));
    }
    if h == 0 {
        return Err(Error::Contract("shift h must be positive".into()));
    }
    let lh = (h as f64).ln();
    let z1 = zeta_star(w * 2.0)?.value;
    let z2 = zeta_star(Complex64::new(2.0, 0.0) - w * 2.0)?.value;
    let r1 = z1 * ((0.5 - w) * lh).exp() * phi_half_plus_w * sqrt_4pi();
    let r2 = z2 * ((w - 0.5) * lh).exp() * phi_three_half_minus_w * sqrt_4pi();
    Ok((r1, r2))
}

/// Principal part of D_h(s, 1/2) at s = 1: the coefficients of (s-1)^{-2}
/// and (s-1)^{-1}, namely (4 pi)^{1/2} phi_h(1) and
/// (4 pi)^{1/2} ((gamma - log(4 pi h)) phi_h(1) + phi_h'(1)).
pub fn double_pole_principal_part(h: u64, phi_1: Complex64, phi_prime_1: Complex64) -> Result<(Complex64, Complex64)> {
    if h == 0 {
        return Err(Error::Contract("shift h must be positive".into()));
    }
    let g = EULER_GAMMA - (4.0 * PI * h as f64).ln();
    Ok((phi_1 * sqrt_4pi(), (phi_1 * g + phi_prime_1) * sqrt_4pi()))
}

/// The two main-term components at X. For w != 1/2 these are
/// Res_{1/2+w} X and Res_{3/2-w} X^{2-2w}/(2-2w); for w = 1/2 they are the
/// X log X and X terms, A X log X and (B - A) X, where A/(s-1)^2 + B/(s-1)
/// is the principal part at s = 1.
pub fn main_term_parts(x: f64, inputs: &MainTermInputs) -> Result<[Complex64; 2]> {
    check_inputs(inputs)?;
    if !(x >= 1.0) {
        return Err(Error::Contract(format!("main term needs X >= 1, got {x}")));
    }
    let w = inputs.w;
    if is_half(w) {
        let (a, b) = double_pole_principal_part(inputs.h, inputs.phi_at, inputs.phi_prime.unwrap_or_default())?;
        Ok([a * x * x.ln(), (b - a) * x])
    } else {
        let (r1, r2) = residue_formulas(w, inputs.h, inputs.phi_at, inputs.phi_at_reflected.unwrap_or_default())?;
        let e = Complex64::new(2.0, 0.0) - w * 2.0;
        Ok([r1 * x, r2 * (e * x.ln()).exp() / e])
    }
}

/// Sum of [`main_term_parts`].
pub fn main_term(x: f64, inputs: &MainTermInputs) -> Result<Complex64> {
    let [a, b] = main_term_parts(x, inputs)?;
    Ok(a + b)
}

/// Largest discrepancy between the main-term coefficients (of X and of
/// X^{2-2w}/(2-2w)) and the residues, for w != 1/2.
pub fn residue_consistency(inputs: &MainTermInputs) -> Result<f64> {
    check_inputs(inputs)?;
    if is_half(inputs.w) {
        return Err(Error::Contract("residue consistency applies to w != 1/2".into()));
    }
    let [a, b] = main_term_parts(1.0, inputs)?;
    let e = Complex64::new(2.0, 0.0) - inputs.w * 2.0;
    let (r1, r2) = residue_formulas(inputs.w, inputs.h, inputs.phi_at, inputs.phi_at_reflected.unwrap_or_default())?;
    Ok((a - r1).norm().max((b * e - r2).norm()))
}
