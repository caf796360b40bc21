use num_complex::Complex64;

use super::gamma::gamma_c;
use super::{c, Method, SpecialValue};
use crate::error::{Error, Result};
use crate::quad::{trapezoid_ladder, LadderOptions, Line};

/// W_{kappa,mu}(x) for kappa in {-1/2, 0, 1/2}, complex mu and x > 0.
///
/// Uses W = x^kappa e^{-x/2} / Gamma(a) int_0^inf e^{-t} t^{a-1} g(t) dt with
/// a = mu - kappa + 1/2 and g(t) = (1 + t/x)^{mu + kappa - 1/2}, after
/// replacing mu by -mu if needed so that Re mu >= 0. When Re a < 1 the
/// integral is taken after one integration by parts,
/// -1/Gamma(a+1) int_0^inf t^a (e^{-t} g)' dt, which stays valid down to
/// Re a > -1 (and covers a = 0, where W reduces to x^kappa e^{-x/2}).
/// The half line is mapped by t = exp(v - e^{-v}), giving double
/// exponential decay at both ends.
pub fn whittaker_w(kappa: f64, mu: Complex64, x: f64) -> Result<SpecialValue> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Contract(format!("whittaker_w needs x > 0, got {x}")));
    }
    if ![-0.5, 0.0, 0.5].contains(&kappa) {
        return Err(Error::Unsupported(format!(
            "whittaker_w supports kappa in {{-1/2, 0, 1/2}}, got {kappa}"
        )));
    }
    let mu = if mu.re < 0.0 { -mu } else { mu };
    let a = mu - kappa + 0.5;
    let p = mu + kappa - 0.5;
    let by_parts = a.re < 1.0;
    if by_parts && a.re <= -1.0 {
        return Err(Error::Unsupported(format!("whittaker_w outside the integral region at mu = {mu}")));
    }
    let inv_x = 1.0 / x;
    let f = |v: f64| -> Complex64 {
        let lt = v - (-v).exp();
        let t = lt.exp();
        if t == 0.0 || !t.is_finite() {
            return c(0.0, 0.0);
        }
        let jac = 1.0 + (-v).exp();
        let l1 = (t * inv_x).ln_1p();
        let g = (p * l1).exp();
        if by_parts {
            // t^a (g - g') e^{-t}, times dt = t (1 + e^{-v}) dv
            let gp = (p * inv_x) * ((p - 1.0) * l1).exp();
            ((a + 1.0) * lt - t).exp() * (g - gp) * jac
        } else {
            (a * lt - t).exp() * g * jac
        }
    };
    let opts = LadderOptions {
        h0: 0.125,
        ..LadderOptions::default()
    };
    let q = trapezoid_ladder(f, Line::Full, opts)?;
    let gamma = gamma_c(if by_parts { a + 1.0 } else { a })?;
    let pre = x.powf(kappa) * (-0.5 * x).exp();
    let value = q.value * pre / gamma.value;
    let rel_gamma = gamma.abs_error_estimate / gamma.value.norm();
    let err = pre / gamma.value.norm() * (q.abs_error + 4.0 * f64::EPSILON * q.abs_mass) + value.norm() * rel_gamma;
    let method = if by_parts {
        Method::WhittakerIntegralByParts
    } else {
        Method::WhittakerIntegral
    };
    Ok(SpecialValue::new(value, err, method))
}
