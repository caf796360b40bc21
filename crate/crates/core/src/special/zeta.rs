use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{gamma_c, BERNOULLI_2K};
use super::{c, Method, SpecialValue};
use crate::error::{Error, Result};

pub const CATALAN: f64 = 0.915_965_594_177_219_015;

/// Number of Euler-Maclaurin correction terms; the remainder is bounded with
/// the next Bernoulli number, B_{2M}.
const EM_TERMS: usize = 14;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Correction terms at the cutoff x = N + a and the remainder bound.
///
/// Returns sum_{j=1}^{M-1} B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1} and
/// |B_{2M}|/(2M)! |(s)_{2M}| x^{-sigma-2M+1}/(sigma+2M-1).
fn em_corrections(s: Complex64, x: f64) -> (Complex64, f64) {
    let lx = x.ln();
    let x_pow = (-s * lx).exp(); // x^{-s}
    let inv_x = 1.0 / x;
    let mut rising = s; // (s)_{2j-1}, starting at j = 1
    let mut xp = x_pow * inv_x; // x^{-s-1}
    let mut sum = c(0.0, 0.0);
    for j in 1..EM_TERMS {
        let b = BERNOULLI_2K[j - 1];
        sum += rising * xp * (b / factorial(2 * j));
        // advance (s)_{2j-1} -> (s)_{2j+1}
        let k = (2 * j - 1) as f64;
        rising = rising * (s + k) * (s + k + 1.0);
        xp *= inv_x * inv_x;
    }
    // (s)_{2M} = (s)_{2M-1} * (s + 2M - 1)
    let m = EM_TERMS;
    let rising_2m = rising * (s + (2 * m - 1) as f64);
    let sigma_eff = s.re + (2 * m - 1) as f64;
    let bound = BERNOULLI_2K[m - 1].abs() / factorial(2 * m) * rising_2m.norm() * x.powf(-sigma_eff) / sigma_eff;
    (sum, bound)
}

fn initial_cutoff(s: Complex64) -> usize {
    (12.0 + 0.6 * (s.norm() + 14.0)).ceil() as usize
}

struct Hurwitz {
    value: Complex64,
    bound: f64,
    mass: f64,
}

fn hurwitz_em(s: Complex64, a: f64, n: usize) -> Hurwitz {
    let mut head = crate::quad::CompensatedSum::new();
    let mut mass = 0.0;
    for k in 0..n {
        let t = (-s * (k as f64 + a).ln()).exp();
        mass += t.norm();
        head.add(t);
    }
    let x = n as f64 + a;
    let lx = x.ln();
    let x_1ms = ((c(1.0, 0.0) - s) * lx).exp();
    let integral = x_1ms / (s - 1.0);
    let half = (-s * lx).exp() * 0.5;
    let (corr, bound) = em_corrections(s, x);
    mass += integral.norm() + half.norm() + corr.norm();
    Hurwitz {
        value: head.value() + integral + half + corr,
        bound,
        mass,
    }
}

fn check_em_region(s: Complex64) -> Result<()> {
    if s.re + (2 * EM_TERMS - 1) as f64 <= 1.0 {
        return Err(Error::Unsupported(format!("Euler-Maclaurin evaluation needs Re s > {}", 2.0 - 2.0 * EM_TERMS as f64)));
    }
    Ok(())
}

/// Hurwitz zeta(s, a) for a > 0, s != 1.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<SpecialValue> {
    if !(a > 0.0) {
        return Err(Error::Contract("Hurwitz parameter must be positive".into()));
    }
    if s == c(1.0, 0.0) {
        return Err(Error::Pole { function: "hurwitz zeta", at: s });
    }
    check_em_region(s)?;
    let mut n = initial_cutoff(s);
    loop {
        let h = hurwitz_em(s, a, n);
        let target = 1e-16 * h.value.norm().max(1e-300);
        if h.bound <= target || n > 20_000 {
            let err = h.bound + 4.0 * f64::EPSILON * h.mass;
            return Ok(SpecialValue::new(h.value, err, Method::EulerMaclaurin));
        }
        n *= 2;
    }
}

/// 1/Gamma(s) = Gamma(1 - s) sin(pi s) / pi, entire.
fn recip_gamma(s: Complex64) -> Result<SpecialValue> {
    if s.re >= 0.5 {
        let g = gamma_c(s)?;
        let n = g.value.norm();
        return Ok(SpecialValue::new(g.value.inv(), g.abs_error_estimate / (n * n), g.method));
    }
    let g = gamma_c(c(1.0, 0.0) - s)?;
    let sin = (s * PI).sin();
    let value = g.value * sin / PI;
    let err = g.abs_error_estimate * sin.norm() / PI + 4.0 * f64::EPSILON * (g.value.norm() * (s * PI).norm());
    Ok(SpecialValue::new(value, err, Method::Reflection))
}

/// Riemann zeta(s) by Euler-Maclaurin summation with a certified remainder;
/// for Re s < 0 through the functional equation of the completed function.
pub fn zeta_c(s: Complex64) -> Result<SpecialValue> {
    if s == c(1.0, 0.0) {
        return Err(Error::Pole { function: "zeta", at: s });
    }
    if s.re < 0.0 {
        // zeta(s) = pi^{s/2} zeta*(1 - s) / Gamma(s/2)
        let zs = zeta_star(c(1.0, 0.0) - s)?;
        let rg = recip_gamma(s * 0.5)?;
        let pre = (s * 0.5 * PI.ln()).exp();
        let value = pre * zs.value * rg.value;
        let err = pre.norm() * (zs.abs_error_estimate * rg.value.norm() + zs.value.norm() * rg.abs_error_estimate)
            + 4.0 * f64::EPSILON * value.norm();
        return Ok(SpecialValue::new(value, err, Method::FunctionalEquation));
    }
    hurwitz_zeta(s, 1.0)
}

/// Completed zeta pi^{-s/2} Gamma(s/2) zeta(s); reflected for Re s < 0.
pub fn zeta_star(s: Complex64) -> Result<SpecialValue> {
    if s == c(0.0, 0.0) || s == c(1.0, 0.0) {
        return Err(Error::Pole { function: "completed zeta", at: s });
    }
    if s.re < 0.0 {
        let v = zeta_star(c(1.0, 0.0) - s)?;
        return Ok(SpecialValue::new(v.value, v.abs_error_estimate, Method::FunctionalEquation));
    }
    let z = zeta_c(s)?;
    let g = gamma_c(s * 0.5)?;
    let pre = (-s * 0.5 * PI.ln()).exp();
    let value = pre * g.value * z.value;
    let err = pre.norm() * (g.value.norm() * z.abs_error_estimate + z.value.norm() * g.abs_error_estimate)
        + 4.0 * f64::EPSILON * value.norm();
    Ok(SpecialValue::new(value, err, Method::EulerMaclaurin))
}

/// (e^u - 1)/u, accurate near 0.
fn expm1_over(u: Complex64) -> Complex64 {
    if u.norm() < 1e-3 {
        c(1.0, 0.0) + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)))
    } else {
        (u.exp() - 1.0) / u
    }
}

/// L(s, chi4) = 4^{-s} (zeta(s, 1/4) - zeta(s, 3/4)), with the two
/// Euler-Maclaurin expansions combined so the pole at s = 1 cancels exactly.
pub fn l_chi4(s: Complex64) -> Result<SpecialValue> {
    if s.re < 0.0 {
        // L(s) = (pi/4)^{s/2} L*(1 - s) / Gamma((s + 1)/2)
        let ls = l_chi4_star(c(1.0, 0.0) - s)?;
        let rg = recip_gamma((s + 1.0) * 0.5)?;
        let pre = (s * 0.5 * (PI / 4.0).ln()).exp();
        let value = pre * ls.value * rg.value;
        let err = pre.norm() * (ls.abs_error_estimate * rg.value.norm() + ls.value.norm() * rg.abs_error_estimate)
            + 4.0 * f64::EPSILON * value.norm();
        return Ok(SpecialValue::new(value, err, Method::FunctionalEquation));
    }
    check_em_region(s)?;
    let mut n = initial_cutoff(s);
    loop {
        let mut head = crate::quad::CompensatedSum::new();
        let mut mass = 0.0;
        for k in 0..n {
            let t1 = (-s * (k as f64 + 0.25).ln()).exp();
            let t2 = (-s * (k as f64 + 0.75).ln()).exp();
            mass += t1.norm() + t2.norm();
            head.add(t1 - t2);
        }
        let x1 = n as f64 + 0.25;
        let x2 = n as f64 + 0.75;
        let ell = (x1 / x2).ln();
        let u = (c(1.0, 0.0) - s) * ell;
        let x2_1ms = ((c(1.0, 0.0) - s) * x2.ln()).exp();
        let integral = -x2_1ms * ell * expm1_over(u);
        let half = ((-s * x1.ln()).exp() - (-s * x2.ln()).exp()) * 0.5;
        let (c1, b1) = em_corrections(s, x1);
        let (c2, b2) = em_corrections(s, x2);
        let inner = head.value() + integral + half + c1 - c2;
        let scale = (-s * 4f64.ln()).exp();
        let value = scale * inner;
        let bound = scale.norm() * (b1 + b2);
        if bound <= 1e-16 * value.norm().max(1e-300) || n > 20_000 {
            let err = bound + 4.0 * f64::EPSILON * scale.norm() * (mass + integral.norm() + c1.norm() + c2.norm());
            return Ok(SpecialValue::new(value, err, Method::HurwitzSplit));
        }
        n *= 2;
    }
}

/// Completed L(s, chi4): (pi/4)^{-s/2} Gamma((s+1)/2) L(s, chi4), entire;
/// reflected for Re s < 0.
pub fn l_chi4_star(s: Complex64) -> Result<SpecialValue> {
    if s.re < 0.0 {
        let v = l_chi4_star(c(1.0, 0.0) - s)?;
        return Ok(SpecialValue::new(v.value, v.abs_error_estimate, Method::FunctionalEquation));
    }
    let l = l_chi4(s)?;
    let g = gamma_c((s + 1.0) * 0.5)?;
    let pre = (-s * 0.5 * (PI / 4.0).ln()).exp();
    let value = pre * g.value * l.value;
    let err = pre.norm() * (g.value.norm() * l.abs_error_estimate + l.value.norm() * g.abs_error_estimate)
        + 4.0 * f64::EPSILON * value.norm();
    Ok(SpecialValue::new(value, err, Method::HurwitzSplit))
}
