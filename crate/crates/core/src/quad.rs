//! Quadrature rules and compensated summation shared by the evaluators.
//!
//! Everything here works on `Complex64` integrands; real integrands are
//! passed with a zero imaginary part.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Neumaier (improved Kahan) summation for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.comp.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier_step(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Real-valued Neumaier accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSumF64 {
    sum: f64,
    comp: f64,
}

impl CompensatedSumF64 {
    #[inline]
    pub fn add(&mut self, x: f64) {
        self.sum = neumaier_step(self.sum, x, &mut self.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    /// Estimated absolute error (discretisation plus rounding).
    pub abs_error: f64,
    /// Integral of |f| as seen by the rule; scales the rounding error.
    pub abs_mass: f64,
    pub evaluations: usize,
}

/// Which part of the real line a trapezoid ladder covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    /// Integrate over the whole real line.
    Full,
    /// Integrate over [0, inf) for an integrand that is even in t, so the
    /// half-line rule keeps the exponential convergence of the full rule.
    EvenHalf,
}

/// Options for [`trapezoid_ladder`].
#[derive(Debug, Clone, Copy)]
pub struct LadderOptions {
    pub h0: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_levels: usize,
    /// Minimum distance walked from the origin before tails may be cut.
    pub min_extent: f64,
    /// Hard cap on the number of nodes in each direction at the first level.
    pub max_steps: usize,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            h0: 0.25,
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_levels: 10,
            min_extent: 0.0,
            max_steps: 200_000,
        }
    }
}

const TAIL_EPS: f64 = 1e-19;

/// Trapezoid rule on the real line with successive step halving.
///
/// Intended for integrands that decay at least exponentially and are analytic
/// in a strip around the real axis, where the rule converges geometrically in
/// 1/h. The error estimate is the difference between the last two levels.
pub fn trapezoid_ladder<F>(f: F, line: Line, opts: LadderOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    let h0 = opts.h0;
    let mut evaluations = 0usize;

    // Walk outward until the integrand is negligible to fix the extent.
    let f0 = f(0.0);
    evaluations += 1;
    let mut peak = f0.norm();
    let mut sum = match line {
        Line::Full => CompensatedSum::from_iter([f0]),
        Line::EvenHalf => CompensatedSum::from_iter([f0 * 0.5]),
    };
    let mut mass = match line {
        Line::Full => f0.norm(),
        Line::EvenHalf => 0.5 * f0.norm(),
    };

    let walk = |dir: f64,
                sum: &mut CompensatedSum,
                mass: &mut f64,
                peak: &mut f64,
                evaluations: &mut usize|
     -> Result<usize> {
        let mut quiet = 0;
        let mut k = 1usize;
        loop {
            let t = dir * k as f64 * h0;
            let v = f(t);
            *evaluations += 1;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NoConvergence("trapezoid ladder (non-finite integrand)"));
            }
            let a = v.norm();
            sum.add(v);
            *mass += a;
            if a > *peak {
                *peak = a;
            }
            if a <= TAIL_EPS * *peak && t.abs() >= opts.min_extent {
                quiet += 1;
                if quiet >= 4 {
                    return Ok(k);
                }
            } else {
                quiet = 0;
            }
            k += 1;
            if k > opts.max_steps {
                return Err(Error::NoConvergence("trapezoid ladder (tail does not decay)"));
            }
        }
    };

    let k_hi = walk(1.0, &mut sum, &mut mass, &mut peak, &mut evaluations)?;
    let k_lo = match line {
        Line::Full => walk(-1.0, &mut sum, &mut mass, &mut peak, &mut evaluations)?,
        Line::EvenHalf => 0,
    };

    let t_hi = k_hi as f64 * h0;
    let t_lo = -(k_lo as f64) * h0;

    let mut h = h0;
    let mut nodes_sum = sum.value();
    let mut estimate = nodes_sum * h;
    let mut last_err = f64::INFINITY;

    for _ in 0..opts.max_levels {
        let h_new = h / 2.0;
        let mut mid = CompensatedSum::new();
        let mut t = t_lo + h_new;
        while t < t_hi {
            let v = f(t);
            evaluations += 1;
            mass += v.norm();
            mid.add(v);
            t += h;
        }
        let mut combined = CompensatedSum::new();
        combined.add(nodes_sum);
        combined.add(mid.value());
        nodes_sum = combined.value();
        h = h_new;
        let next = nodes_sum * h;
        let err = (next - estimate).norm();
        estimate = next;
        last_err = err;
        let mass_h = mass * h;
        let rounding = 1e-15 * mass_h;
        if err <= opts.abs_tol.max(opts.rel_tol * estimate.norm()).max(rounding) {
            return Ok(Quadrature {
                value: estimate,
                abs_error: err + rounding,
                abs_mass: mass_h,
                evaluations,
            });
        }
    }
    let mass_h = mass * h;
    if last_err <= 1e-6 * estimate.norm().max(mass_h) {
        // Accept with an honest (large) error estimate.
        return Ok(Quadrature {
            value: estimate,
            abs_error: last_err + 1e-15 * mass_h,
            abs_mass: mass_h,
            evaluations,
        });
    }
    Err(Error::NoConvergence("trapezoid ladder"))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `order` nodes.
pub fn gauss_legendre_composite<F>(f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (xi, wi) in x.iter().zip(&w) {
            acc.add(f(mid + half * xi) * (wi * half));
        }
    }
    acc.value()
}

// Kronrod 15-point extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mass = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += (f1 + f2) * WGK[j];
        mass += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let value = kron * hl;
    let err = ((kron - gauss) * hl).norm();
    (value, err, mass * hl.abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b].
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    let mut intervals: Vec<(f64, f64, Complex64, f64, f64)> = Vec::new();
    let (v, e, m) = gk15(&f, a, b);
    intervals.push((a, b, v, e, m));
    let mut evaluations = 15;
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        let mass: f64 = intervals.iter().map(|iv| iv.4).sum();
        let rounding = 1e-15 * mass;
        if err <= abs_tol.max(rel_tol * total.norm()).max(rounding) {
            return Ok(Quadrature {
                value: total,
                abs_error: err + rounding,
                abs_mass: mass,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::NoConvergence("adaptive Gauss-Kronrod"));
        }
        // Bisect the interval with the largest error.
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1, m1) = gk15(&f, lo, mid);
        let (v2, e2, m2) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1, m1));
        intervals.push((mid, hi, v2, e2, m2));
    }
}
