use std::f64::consts::PI;

use num_complex::Complex64;

use super::{c, Method, SpecialValue};
use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// B_2, B_4, ..., B_30.
pub(crate) const BERNOULLI_2K: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

const STIRLING_MIN_ABS: f64 = 15.0;
const STIRLING_TERMS: usize = 8;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_nonpositive_integer(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round()
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = c(0.0, 0.0);
    for (k, b) in BERNOULLI_2K.iter().take(STIRLING_TERMS).enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += term * (b / (two_k * (two_k - 1.0)));
        term *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// ln sin(pi z), stable for large |Im z|.
pub(crate) fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z})
    let i = c(0.0, 1.0);
    let e = (i * 2.0 * PI * z).exp();
    c(0.5f64.ln(), PI / 2.0) - i * PI * z + (c(1.0, 0.0) - e).ln()
}

/// A branch of log Gamma(z) (continuous on Re z > 0), with an estimate of
/// the absolute error in the logarithm.
pub(crate) fn ln_gamma_with_error(z: Complex64) -> (Complex64, f64) {
    if z.re < 0.5 {
        let (lg, err) = ln_gamma_with_error(c(1.0, 0.0) - z);
        let val = c(PI.ln(), 0.0) - ln_sin_pi(z) - lg;
        let err = err + 4.0 * f64::EPSILON * (val.norm() + (PI * z).norm() + 1.0);
        return (val, err);
    }
    let mut w = z;
    let mut shift = c(0.0, 0.0);
    let mut steps = 0;
    while w.norm() < STIRLING_MIN_ABS {
        shift += w.ln();
        w += 1.0;
        steps += 1;
    }
    let val = stirling(w) - shift;
    let err = 4.0 * f64::EPSILON * ((w * w.ln()).norm() + steps as f64 * 3.0 + 10.0);
    (val, err)
}

pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { function: "gamma", at: z });
    }
    Ok(ln_gamma_with_error(z).0)
}

/// Gamma(s) for complex s.
pub fn gamma_c(s: Complex64) -> Result<SpecialValue> {
    if is_nonpositive_integer(s) {
        return Err(Error::Pole { function: "gamma", at: s });
    }
    let (lg, err) = ln_gamma_with_error(s);
    let value = lg.exp();
    let method = if s.re < 0.5 { Method::Reflection } else { Method::Stirling };
    Ok(SpecialValue::new(value, value.norm() * (err + 2.0 * f64::EPSILON), method))
}

/// psi(s) = Gamma'(s)/Gamma(s).
pub fn digamma(s: Complex64) -> Result<SpecialValue> {
    if is_nonpositive_integer(s) {
        return Err(Error::Pole { function: "digamma", at: s });
    }
    if s.re < 0.5 {
        let inner = digamma(c(1.0, 0.0) - s)?;
        let pz = s * PI;
        let cot = pz.cos() / pz.sin();
        let value = inner.value - cot * PI;
        let err = inner.abs_error_estimate + 4.0 * f64::EPSILON * (PI * cot.norm() * (1.0 + pz.norm()));
        return Ok(SpecialValue::new(value, err, Method::Reflection));
    }
    let mut w = s;
    let mut acc = c(0.0, 0.0);
    let mut mass = 0.0;
    while w.norm() < STIRLING_MIN_ABS {
        let t = w.inv();
        acc -= t;
        mass += t.norm();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut term = inv2;
    let mut series = c(0.0, 0.0);
    for (k, b) in BERNOULLI_2K.iter().take(STIRLING_TERMS).enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += term * (b / two_k);
        term *= inv2;
    }
    let value = w.ln() - inv * 0.5 - series + acc;
    let err = 4.0 * f64::EPSILON * (w.ln().norm() + mass + 1.0);
    Ok(SpecialValue::new(value, err, Method::Stirling))
}
