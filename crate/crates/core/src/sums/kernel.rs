use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::adaptive_gk;
use crate::special::{Method, QuadratureBudget, SpecialValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelSign {
    Plus,
    Minus,
}

/// Smooth non-increasing cutoff u_{+-y}: equal to 1 up to the start of its
/// transition window of width 1/y and 0 after it. The window is [1, 1 + 1/y]
/// for `Plus` and [1 - 1/y, 1] for `Minus`; inside it the profile is
/// 1 - psi((t - start) y) with psi(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingKernel {
    sign: KernelSign,
    y: f64,
}

/// psi(u) = 1 / (1 + exp(1/u - 1/(1-u))) on (0, 1), 0 below and 1 above.
pub fn transition(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let e = 1.0 / u - 1.0 / (1.0 - u);
        if e > 700.0 {
            0.0
        } else {
            1.0 / (1.0 + e.exp())
        }
    }
}

/// psi'(u) on (0, 1).
pub fn transition_derivative(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let e = 1.0 / u - 1.0 / (1.0 - u);
    if e.abs() > 700.0 {
        return 0.0;
    }
    // psi = 1/(1+E), psi' = -E e' / (1+E)^2 with e' = -1/u^2 - 1/(1-u)^2
    let big_e = e.exp();
    let de = -1.0 / (u * u) - 1.0 / ((1.0 - u) * (1.0 - u));
    -big_e * de / ((1.0 + big_e) * (1.0 + big_e))
}

impl SmoothingKernel {
    pub fn new(sign: KernelSign, y: f64) -> Result<Self> {
        if !(y > 1.0) || !y.is_finite() {
            return Err(Error::Contract(format!("smoothing parameter must satisfy y > 1, got {y}")));
        }
        Ok(Self { sign, y })
    }

    pub fn sign(&self) -> KernelSign {
        self.sign
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Start of the transition window.
    pub fn transition_start(&self) -> f64 {
        match self.sign {
            KernelSign::Plus => 1.0,
            KernelSign::Minus => 1.0 - 1.0 / self.y,
        }
    }

    /// End of the support.
    pub fn support_end(&self) -> f64 {
        match self.sign {
            KernelSign::Plus => 1.0 + 1.0 / self.y,
            KernelSign::Minus => 1.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = self.transition_start();
        if t <= a {
            1.0
        } else if t >= self.support_end() {
            0.0
        } else {
            1.0 - transition((t - a) * self.y)
        }
    }
}

pub fn kernel_eval(kernel: &SmoothingKernel, t: f64) -> f64 {
    kernel.eval(t)
}

/// Mellin transform U(s) = int_0^inf u(t) t^{s-1} dt = a^s / s + int_a^b (u(t)) t^{s-1} dt,
/// where [a, b] is the transition window; the first term continues the
/// plateau integral to all s != 0.
pub fn mellin_u(kernel: &SmoothingKernel, s: Complex64, budget: QuadratureBudget) -> Result<SpecialValue> {
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::Contract("Mellin transform of the cutoff has a pole at s = 0".into()));
    }
    let a = kernel.transition_start();
    let b = kernel.support_end();
    let plateau = (s * a.ln()).exp() / s;
    let sm1 = s - 1.0;
    let f = |t: f64| (sm1 * t.ln()).exp() * kernel.eval(t);
    let max_intervals = (budget.max_nodes / 15).max(2);
    let q = adaptive_gk(f, a, b, budget.target_abs_error, 1e-14, max_intervals)?;
    let value = plateau + q.value;
    let err = q.abs_error + 4.0 * f64::EPSILON * (plateau.norm() + q.abs_mass);
    Ok(SpecialValue::new(value, err, Method::Quadrature))
}
