//! Complex special functions: Gamma, digamma, zeta, L(s, chi4), their
//! completions, K-Bessel (complex order and argument, imaginary order via a
//! Mellin-Barnes line integral), Whittaker W, and the arc integral of
//! K_{2iT} that appears on the geometric side of the Kuznetsov formula.
//!
//! Every evaluator returns a [`SpecialValue`] carrying an absolute error
//! estimate and a tag naming the evaluation path.

mod bessel;
mod gamma;
mod whittaker;
mod zeta;

pub use bessel::{
    bessel_k, bessel_k_complex, bessel_k_imag_order, bessel_k_imag_order_mellin_barnes,
    kuznetsov_geometric_integral, kuznetsov_geometric_integral_nodes, DEFAULT_IMAG_ORDER_LIMIT,
    MELLIN_BARNES_ABSCISSA,
};
pub use gamma::{digamma, gamma_c, ln_gamma, EULER_GAMMA};
pub use whittaker::whittaker_w;
pub use zeta::{hurwitz_zeta, l_chi4, l_chi4_star, zeta_c, zeta_star, CATALAN};

use num_complex::Complex64;
use serde::Serialize;

/// How a value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Stirling,
    Reflection,
    EulerMaclaurin,
    HurwitzSplit,
    /// Functional-equation reflection of a completed function.
    FunctionalEquation,
    /// Trapezoid rule on the cosh integral along a deformed contour.
    CoshIntegral,
    MellinBarnes,
    /// Whittaker integral in its direct form.
    WhittakerIntegral,
    /// Whittaker integral after one integration by parts.
    WhittakerIntegralByParts,
    ArcQuadrature,
    /// Adaptive Gauss-Kronrod quadrature over a finite interval.
    Quadrature,
    /// Result underflowed to zero.
    Underflow,
}

/// A value with its error estimate and evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialValue {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub method: Method,
}

impl SpecialValue {
    pub(crate) fn new(value: Complex64, abs_error_estimate: f64, method: Method) -> Self {
        let abs_error_estimate = if abs_error_estimate.is_finite() {
            abs_error_estimate.max(0.0)
        } else {
            f64::MAX
        };
        Self {
            value,
            abs_error_estimate,
            method,
        }
    }
}

/// Quadrature limits for integral-based evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureBudget {
    pub max_nodes: usize,
    pub target_abs_error: f64,
    /// Abscissa of a Mellin-Barnes line, when one is used.
    pub line_abscissa: Option<f64>,
    /// Height beyond which a Mellin-Barnes line is truncated.
    pub truncation_height: Option<f64>,
}

impl QuadratureBudget {
    pub fn new(max_nodes: usize, target_abs_error: f64) -> crate::Result<Self> {
        if max_nodes < 16 {
            return Err(crate::Error::Contract("quadrature budget needs at least 16 nodes".into()));
        }
        if !(target_abs_error > 0.0) {
            return Err(crate::Error::Contract("quadrature target must be positive".into()));
        }
        Ok(Self {
            max_nodes,
            target_abs_error,
            line_abscissa: None,
            truncation_height: None,
        })
    }
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self {
            max_nodes: 4096,
            target_abs_error: 1e-13,
            line_abscissa: None,
            truncation_height: None,
        }
    }
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
