use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::gamma::ln_gamma_with_error;
use super::{c, Method, SpecialValue};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, trapezoid_ladder, LadderOptions, Line};

/// Default bound on |T| for K_{2iT}.
pub const DEFAULT_IMAG_ORDER_LIMIT: f64 = 10.0;

/// Abscissa of the Mellin-Barnes line for K_{2iT}: 1/4 - 10^-3.
pub const MELLIN_BARNES_ABSCISSA: f64 = 0.25 - 1e-3;

/// ln of the smallest positive normal double, below which results flush to 0.
const UNDERFLOW_LOG: f64 = -708.0;

/// The Mellin-Barnes path is used only for |z| up to this radius ...
const MB_MAX_ABS: f64 = 2.0;
/// ... and at least this far from the imaginary axis in argument, where the
/// line integrand stops decaying.
const MB_ARG_MARGIN: f64 = 0.3;

/// e^{z} K_nu(z) by the trapezoid rule on
/// int_0^inf e^{-z (cosh t - 1)} cosh(nu t) dt, along the contour
/// t(s) = s - i arg(z) tanh(s), which turns z cosh t real at infinity.
/// The integrand stays even in s, so a half-line rule suffices.
fn k_scaled(nu: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
    let phi = z.arg();
    let r = z.norm();
    let f = |s: f64| {
        let th = s.tanh();
        let t = c(s, -phi * th);
        let dt = c(1.0, -phi * (1.0 - th * th));
        let sh = (t * 0.5).sinh();
        let e = -z * 2.0 * sh * sh;
        (((e + nu * t).exp() + (e - nu * t).exp()) * 0.5) * dt
    };
    let opts = LadderOptions {
        h0: 0.25 * (1.0 / r.sqrt()).min(1.0),
        max_levels: 14,
        ..LadderOptions::default()
    };
    let q = trapezoid_ladder(f, Line::EvenHalf, opts)?;
    Ok((q.value, q.abs_error))
}

fn k_cosh(nu: Complex64, z: Complex64) -> Result<SpecialValue> {
    let (scaled, err) = k_scaled(nu, z)?;
    let log_mag = scaled.norm().ln() - z.re;
    if log_mag < UNDERFLOW_LOG {
        let err_bound = (err.ln() - z.re).exp();
        return Ok(SpecialValue::new(c(0.0, 0.0), (log_mag.exp()).max(err_bound), Method::Underflow));
    }
    let factor = (-z).exp();
    Ok(SpecialValue::new(scaled * factor, err * factor.norm(), Method::CoshIntegral))
}

/// K_nu(x) for complex order and real x > 0.
pub fn bessel_k(nu: Complex64, x: f64) -> Result<SpecialValue> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Contract(format!("bessel_k needs x > 0, got {x}")));
    }
    k_cosh(nu, c(x, 0.0))
}

/// K_nu(z) for complex order and complex z with Re z >= 0, z != 0.
pub fn bessel_k_complex(nu: Complex64, z: Complex64) -> Result<SpecialValue> {
    if z.re < 0.0 || z == c(0.0, 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Contract(format!("bessel_k_complex needs Re z >= 0 and z != 0, got {z}")));
    }
    k_cosh(nu, z)
}

fn check_imag_order_args(t: f64, z: Complex64) -> Result<()> {
    if !(t.abs() <= DEFAULT_IMAG_ORDER_LIMIT) {
        return Err(Error::Contract(format!(
            "imaginary order needs |T| <= {DEFAULT_IMAG_ORDER_LIMIT}, got {t}"
        )));
    }
    if !(z.re > 0.0) || !z.im.is_finite() {
        return Err(Error::Contract(format!("K_(2iT)(z) needs Re z > 0, got {z}")));
    }
    Ok(())
}

/// K_{2iT}(z) from the line integral
/// (1/4 pi) int Gamma(sigma + i(t - T)) Gamma(sigma + i(t + T)) (z/2)^{-2(sigma + i t)} dt
/// on Re u = sigma = [`MELLIN_BARNES_ABSCISSA`].
pub fn bessel_k_imag_order_mellin_barnes(t_ord: f64, z: Complex64) -> Result<SpecialValue> {
    check_imag_order_args(t_ord, z)?;
    let sigma = MELLIN_BARNES_ABSCISSA;
    let lz = (z * 0.5).ln();
    let f = |t: f64| {
        let (g1, _) = ln_gamma_with_error(c(sigma, t - t_ord));
        let (g2, _) = ln_gamma_with_error(c(sigma, t + t_ord));
        (g1 + g2 - c(sigma, t) * 2.0 * lz).exp()
    };
    let opts = LadderOptions {
        h0: 0.125,
        max_levels: 8,
        ..LadderOptions::default()
    };
    let q = trapezoid_ladder(f, Line::Full, opts)?;
    let scale = 1.0 / (4.0 * PI);
    // Each log-Gamma carries about 1e-15 relative error.
    let err = scale * (q.abs_error + 4e-15 * q.abs_mass);
    Ok(SpecialValue::new(q.value * scale, err, Method::MellinBarnes))
}

/// K_{2iT}(z) for Re z > 0 and |T| <= [`DEFAULT_IMAG_ORDER_LIMIT`].
///
/// Small |z| away from the imaginary axis goes through the Mellin-Barnes
/// line integral, which has no cancellation there; elsewhere the cosh
/// integral on a deformed contour is used.
pub fn bessel_k_imag_order(t_ord: f64, z: Complex64) -> Result<SpecialValue> {
    check_imag_order_args(t_ord, z)?;
    if z.norm() <= MB_MAX_ABS && z.arg().abs() <= FRAC_PI_2 - MB_ARG_MARGIN {
        bessel_k_imag_order_mellin_barnes(t_ord, z)
    } else {
        k_cosh(c(0.0, 2.0 * t_ord), z)
    }
}

fn check_kuznetsov_args(t_ord: f64, beta: f64) -> Result<()> {
    if !(t_ord > 0.0 && t_ord <= DEFAULT_IMAG_ORDER_LIMIT) {
        return Err(Error::Contract(format!("arc integral needs 0 < T <= {DEFAULT_IMAG_ORDER_LIMIT}, got {t_ord}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Contract(format!("arc integral needs beta > 0, got {beta}")));
    }
    Ok(())
}

/// Arc integral with a fixed n-point Gauss-Legendre rule in the angle:
/// int K_{2iT}(beta zeta) zeta^{-2} d zeta over the right half of the unit
/// circle, i.e. i int_{-pi/2}^{pi/2} K_{2iT}(beta e^{i phi}) e^{-i phi} d phi.
pub fn kuznetsov_geometric_integral_nodes(t_ord: f64, beta: f64, n: usize) -> Result<SpecialValue> {
    check_kuznetsov_args(t_ord, beta)?;
    if n < 2 {
        return Err(Error::Contract("arc quadrature needs at least 2 nodes".into()));
    }
    let (x, w) = gauss_legendre(n);
    let mut sum = crate::quad::CompensatedSum::new();
    let mut err = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let phi = FRAC_PI_2 * xi;
        let zeta = c(phi.cos(), phi.sin());
        // Keep the sample strictly inside Re z > 0.
        let z = c((beta * zeta.re).max(f64::MIN_POSITIVE), beta * zeta.im);
        let k = bessel_k_imag_order(t_ord, z)?;
        sum.add(k.value * zeta.conj() * *wi);
        err += k.abs_error_estimate * wi;
    }
    let scale = c(0.0, FRAC_PI_2);
    Ok(SpecialValue::new(sum.value() * scale, err * FRAC_PI_2, Method::ArcQuadrature))
}

/// Arc integral I_T(beta), doubling the angular rule until two successive
/// rules agree.
pub fn kuznetsov_geometric_integral(t_ord: f64, beta: f64) -> Result<SpecialValue> {
    check_kuznetsov_args(t_ord, beta)?;
    let mut n = 32;
    let mut prev = kuznetsov_geometric_integral_nodes(t_ord, beta, n)?;
    while n < 2048 {
        n *= 2;
        let next = kuznetsov_geometric_integral_nodes(t_ord, beta, n)?;
        let diff = (next.value - prev.value).norm();
        let floor = 4.0 * (next.abs_error_estimate + prev.abs_error_estimate);
        if diff <= 1e-10 * next.value.norm() || diff <= floor {
            return Ok(SpecialValue::new(next.value, diff + next.abs_error_estimate, Method::ArcQuadrature));
        }
        prev = next;
    }
    Err(Error::NoConvergence("arc quadrature"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_closed_form() {
        let k = bessel_k(c(0.5, 0.0), 1.0).unwrap();
        let exact = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((k.value.re - exact).abs() < 1e-14, "{:?}", k);
        assert!(k.value.im.abs() < 1e-15);
    }

    #[test]
    fn k0_at_one() {
        let k = bessel_k(c(0.0, 0.0), 1.0).unwrap();
        assert!((k.value.re - 0.421_024_438_240_708_3).abs() < 1e-14);
    }

    #[test]
    fn order_symmetry_and_contract() {
        let a = bessel_k(c(0.7, 0.0), 2.0).unwrap().value;
        let b = bessel_k(c(-0.7, 0.0), 2.0).unwrap().value;
        assert!((a - b).norm() < 1e-15);
        assert!(matches!(bessel_k(c(0.0, 0.0), 0.0), Err(Error::Contract(_))));
        assert!(matches!(bessel_k(c(0.0, 0.0), -1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn underflow_is_tagged() {
        let k = bessel_k(c(1.0, 0.0), 800.0).unwrap();
        assert_eq!(k.value, c(0.0, 0.0));
        assert_eq!(k.method, Method::Underflow);
    }

    #[test]
    fn complex_argument_half_integer() {
        // K_{1/2}(z) = sqrt(pi / 2z) e^{-z}
        for z in [c(1.0, 1.0), c(0.3, -2.0), c(0.0, 3.0), c(5.0, 0.5)] {
            let k = bessel_k_complex(c(0.5, 0.0), z).unwrap().value;
            let exact = (c(PI, 0.0) / (z * 2.0)).sqrt() * (-z).exp();
            assert!((k - exact).norm() < 1e-12 * exact.norm(), "{z}: {k} vs {exact}");
        }
    }

    #[test]
    fn mellin_barnes_matches_cosh_integral() {
        for (t, z) in [(0.0, c(1.0, 0.0)), (1.0, c(1.0, 0.0)), (2.5, c(0.5, 0.4)), (0.7, c(1.5, -0.8))] {
            let a = bessel_k_imag_order_mellin_barnes(t, z).unwrap();
            let b = k_cosh(c(0.0, 2.0 * t), z).unwrap();
            assert!((a.value - b.value).norm() < 1e-10, "{t} {z}: {} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn imaginary_order_is_real_on_positive_axis() {
        let k = bessel_k_imag_order(1.0, c(1.0, 0.0)).unwrap();
        assert!(k.value.im.abs() < 1e-12);
        assert!(bessel_k_imag_order(1.0, c(0.0, 1.0)).is_err());
        assert!(bessel_k_imag_order(11.0, c(1.0, 0.0)).is_err());
    }
}
