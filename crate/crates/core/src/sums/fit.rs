use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::partial::PartialSumSeries;
use crate::error::{Error, Result};
use crate::special::{zeta_star, EULER_GAMMA};

pub const FIT_REPORT_SCHEMA: &str = "fit_report_v1";

/// Largest acceptable condition number of the column-scaled design.
const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// Basis {X log X, X}, for w = 1/2.
    LogLinear,
    /// Basis {X, X^{2-2w}}, for w != 1/2.
    TwoPower,
}

impl FitModel {
    pub fn for_w(w: Complex64) -> Self {
        if w == Complex64::new(0.5, 0.0) {
            FitModel::LogLinear
        } else {
            FitModel::TwoPower
        }
    }

    fn basis(&self, w: Complex64, x: f64) -> [Complex64; 2] {
        let lx = x.ln();
        match self {
            FitModel::LogLinear => [Complex64::new(x * lx, 0.0), Complex64::new(x, 0.0)],
            FitModel::TwoPower => [
                Complex64::new(x, 0.0),
                ((Complex64::new(2.0, 0.0) - w * 2.0) * lx).exp(),
            ],
        }
    }

    fn basis_names(&self) -> &'static str {
        match self {
            FitModel::LogLinear => "X log X and X",
            FitModel::TwoPower => "X and X^(2-2w)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub x_min: f64,
    pub x_max: f64,
    pub coefficients: Vec<Complex64>,
}

/// How the residual exponent came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualStatus {
    /// Fitted by adding c X^alpha to the model.
    Estimated,
    /// The profile fit found no interior optimum (the residual is not a
    /// clean power); the exponent is the log-log slope of |residual| vs X.
    EnvelopeSlope,
    /// Residuals of the main-term fit are at rounding level: nothing to fit.
    RoundingLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema: String,
    pub model: FitModel,
    pub h: u64,
    pub w: Complex64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Coefficients in basis order (see [`FitModel`]).
    pub coefficients: Vec<Complex64>,
    /// Largest deviation of a window estimate from the full-grid coefficient.
    pub coefficient_errors: Vec<f64>,
    pub window_estimates: Vec<WindowEstimate>,
    /// Per-coefficient relative spread max |c_k - c_l| / |c| across windows.
    pub coefficient_stability: Vec<f64>,
    /// Largest entry of `coefficient_stability`.
    pub stability: f64,
    pub residual_exponent: Option<f64>,
    pub residual_exponent_std_error: Option<f64>,
    pub residual_status: ResidualStatus,
    pub condition_number: f64,
}

impl FitReport {
    /// The fitted main terms at X.
    pub fn main_terms(&self, x: f64) -> Complex64 {
        let b = self.model.basis(self.w, x);
        b[0] * self.coefficients[0] + b[1] * self.coefficients[1]
    }
}

struct LeastSquares {
    coef: Vec<Complex64>,
    ssr: f64,
    condition: f64,
    dof: usize,
    /// (J^T J)^{-1} for the stacked real parameters, in scaled-back units.
    covariance_unit: DMatrix<f64>,
}

/// Weighted complex least squares sum_j c_j b_j(X_i) ~ v_i with weight 1/X_i,
/// solved as a real problem (rows Re/Im, parameters Re c_j, Im c_j) by SVD.
/// Purely real problems keep only the real rows and parameters.
fn solve(columns: &[Vec<Complex64>], rhs: &[Complex64], weights: &[f64]) -> Result<LeastSquares> {
    let n = rhs.len();
    let p = columns.len();
    let real = rhs.iter().all(|v| v.im == 0.0) && columns.iter().flatten().all(|b| b.im == 0.0);
    let (rows, params) = if real { (n, p) } else { (2 * n, 2 * p) };
    let mut a = DMatrix::<f64>::zeros(rows, params);
    let mut b = DVector::<f64>::zeros(rows);
    for i in 0..n {
        let wt = weights[i];
        if real {
            for j in 0..p {
                a[(i, j)] = columns[j][i].re * wt;
            }
            b[i] = rhs[i].re * wt;
        } else {
            for j in 0..p {
                let bj = columns[j][i] * wt;
                a[(2 * i, 2 * j)] = bj.re;
                a[(2 * i, 2 * j + 1)] = -bj.im;
                a[(2 * i + 1, 2 * j)] = bj.im;
                a[(2 * i + 1, 2 * j + 1)] = bj.re;
            }
            b[2 * i] = rhs[i].re * wt;
            b[2 * i + 1] = rhs[i].im * wt;
        }
    }
    // Scale columns to unit norm so the condition number measures collinearity.
    let scales: Vec<f64> = (0..params)
        .map(|j| {
            let nrm = a.column(j).norm();
            if nrm > 0.0 {
                nrm
            } else {
                1.0
            }
        })
        .collect();
    for j in 0..params {
        let s = scales[j];
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Conditioning(format!("condition number {condition:.3e}")));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Conditioning(e.to_string()))?;
    let resid = &b - &a * &x;
    let ssr = resid.norm_squared();
    // (A^T A)^{-1} = V S^{-2} V^T, then undo the column scaling.
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let mut inv_s2 = DMatrix::<f64>::zeros(sv.len(), sv.len());
    for k in 0..sv.len() {
        inv_s2[(k, k)] = 1.0 / (sv[k] * sv[k]);
    }
    let mut cov = v_t.transpose() * inv_s2 * v_t;
    for i in 0..params {
        for j in 0..params {
            cov[(i, j)] /= scales[i] * scales[j];
        }
    }
    let coef: Vec<Complex64> = (0..p)
        .map(|j| {
            if real {
                Complex64::new(x[j] / scales[j], 0.0)
            } else {
                Complex64::new(x[2 * j] / scales[2 * j], x[2 * j + 1] / scales[2 * j + 1])
            }
        })
        .collect();
    Ok(LeastSquares {
        coef,
        ssr,
        condition,
        dof: rows.saturating_sub(params),
        covariance_unit: cov,
    })
}

fn weights(grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|x| 1.0 / x).collect()
}

fn fit_range(model: FitModel, w: Complex64, grid: &[f64], values: &[Complex64]) -> Result<LeastSquares> {
    let mut cols = vec![Vec::with_capacity(grid.len()); 2];
    for &x in grid {
        let b = model.basis(w, x);
        cols[0].push(b[0]);
        cols[1].push(b[1]);
    }
    solve(&cols, values, &weights(grid)).map_err(|e| match e {
        Error::Conditioning(msg) => Error::Conditioning(format!(
            "basis {} nearly collinear on this grid (w = {w}): {msg}",
            model.basis_names()
        )),
        other => other,
    })
}

/// Exponents closer than this to a model exponent are skipped in the scan.
const EXPONENT_GAP: f64 = 0.03;
const ALPHA_MIN: f64 = 0.02;
const ALPHA_MAX: f64 = 0.99;

/// Variable-projection fit of v ~ model + c X^alpha: the profile sum of
/// squares over alpha is scanned, refined by golden section, and the
/// standard error comes from the Gauss-Newton covariance at the optimum.
fn residual_exponent(
    model: FitModel,
    w: Complex64,
    grid: &[f64],
    values: &[Complex64],
    main_ssr: f64,
    main_coef: &[Complex64],
) -> (Option<f64>, Option<f64>, ResidualStatus) {
    // Rounding floor of the weighted residuals.
    let floor: f64 = grid
        .iter()
        .zip(values)
        .map(|(x, v)| {
            let r = 16.0 * f64::EPSILON * v.norm() / x;
            r * r
        })
        .sum();
    if main_ssr <= 100.0 * floor {
        return (None, None, ResidualStatus::RoundingLevel);
    }
    let mut excluded = vec![1.0];
    if model == FitModel::TwoPower {
        excluded.push(2.0 - 2.0 * w.re);
    }
    let base: Vec<Vec<Complex64>> = {
        let mut cols = vec![Vec::new(); 2];
        for &x in grid {
            let b = model.basis(w, x);
            cols[0].push(b[0]);
            cols[1].push(b[1]);
        }
        cols
    };
    let wts = weights(grid);
    let profile = |alpha: f64| -> Option<LeastSquares> {
        let mut cols = base.clone();
        cols.push(grid.iter().map(|x| Complex64::new(x.powf(alpha), 0.0)).collect());
        solve(&cols, values, &wts).ok()
    };
    let allowed = |a: f64| excluded.iter().all(|e| (a - e).abs() >= EXPONENT_GAP);
    let mut best: Option<(f64, f64)> = None;
    let mut a = ALPHA_MIN;
    while a <= ALPHA_MAX + 1e-12 {
        if allowed(a) {
            if let Some(ls) = profile(a) {
                if best.is_none_or(|(_, s)| ls.ssr < s) {
                    best = Some((a, ls.ssr));
                }
            }
        }
        a += 0.01;
    }
    let Some((a0, _)) = best else {
        return (None, None, ResidualStatus::RoundingLevel);
    };
    // Golden-section refinement on [a0 - 0.01, a0 + 0.01] within the range.
    let ssr_at = |a: f64| profile(a).map(|l| l.ssr).unwrap_or(f64::INFINITY);
    let (mut lo, mut hi) = ((a0 - 0.01).max(ALPHA_MIN), (a0 + 0.01).min(ALPHA_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c1, mut c2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (ssr_at(c1), ssr_at(c2));
    for _ in 0..40 {
        if f1 < f2 {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - g * (hi - lo);
            f1 = ssr_at(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + g * (hi - lo);
            f2 = ssr_at(c2);
        }
    }
    let alpha = 0.5 * (lo + hi);
    if alpha - ALPHA_MIN < 0.005 || ALPHA_MAX - alpha < 0.005 {
        return match envelope_slope(model, w, grid, values, main_coef) {
            Some((slope, se)) => (Some(slope), Some(se), ResidualStatus::EnvelopeSlope),
            None => (None, None, ResidualStatus::RoundingLevel),
        };
    }
    // Gauss-Newton standard error with the d/d alpha column c X^alpha log X.
    let se = profile(alpha).and_then(|ls| {
        let c = ls.coef[2];
        let mut cols = base.clone();
        cols.push(grid.iter().map(|x| Complex64::new(x.powf(alpha), 0.0)).collect());
        cols.push(grid.iter().map(|x| c * x.powf(alpha) * x.ln()).collect());
        let full = solve(&cols, values, &wts).ok()?;
        let sigma2 = ls.ssr / full.dof.max(1) as f64;
        // The last real parameter is the alpha direction.
        let k = full.covariance_unit.nrows() - if full.covariance_unit.nrows() == cols.len() { 1 } else { 2 };
        let var = sigma2 * full.covariance_unit[(k, k)];
        (var >= 0.0).then(|| var.sqrt())
    });
    (Some(alpha), se, ResidualStatus::Estimated)
}

/// Ordinary least-squares slope (and its standard error) of log |v - main|
/// against log X, skipping points whose residual is within 10x of the
/// accumulated rounding error.
fn envelope_slope(
    model: FitModel,
    w: Complex64,
    grid: &[f64],
    values: &[Complex64],
    main_coef: &[Complex64],
) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(values)
        .filter_map(|(&x, v)| {
            let b = model.basis(w, x);
            let main = b[0] * main_coef[0] + b[1] * main_coef[1];
            let r = (v - main).norm();
            let rounding = 16.0 * f64::EPSILON * (v.norm() + main.norm());
            (r > 10.0 * rounding).then(|| (x.ln(), r.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Some((slope, (ssr / (n - 2.0) / sxx).sqrt()))
}

fn windows(grid: &[f64]) -> Vec<(usize, usize)> {
    let l0 = grid[0].log10();
    let l1 = grid[grid.len() - 1].log10();
    let span = l1 - l0;
    let len = (span / 2.0).min(1.0);
    let step = len / 2.0;
    let mut out = Vec::new();
    let mut start = l0;
    while start + len <= l1 + 1e-9 {
        let lo = grid.partition_point(|x| x.log10() < start - 1e-12);
        let hi = grid.partition_point(|x| x.log10() <= start + len + 1e-12);
        out.push((lo, hi));
        start += step;
    }
    out
}

/// Fit the main-term model appropriate for the series' w.
pub fn fit_main_terms(series: &PartialSumSeries) -> Result<FitReport> {
    fit_main_terms_with(series, FitModel::for_w(series.w()))
}

/// Weighted least-squares fit of the main terms with windowed stability and
/// a residual-exponent estimate.
pub fn fit_main_terms_with(series: &PartialSumSeries, model: FitModel) -> Result<FitReport> {
    let grid = series.grid();
    let values = series.values();
    if grid.len() < 8 {
        return Err(Error::Contract(format!("fit needs at least 8 grid points, got {}", grid.len())));
    }
    if grid[0] <= 1.0 || (grid[grid.len() - 1] / grid[0]).log10() < 1.5 - 1e-9 {
        return Err(Error::Contract("fit grid must span at least 1.5 decades above X = 1".into()));
    }
    let w = series.w();
    let full = fit_range(model, w, grid, values)?;
    let mut window_estimates = Vec::new();
    for (lo, hi) in windows(grid) {
        if hi - lo < 4 {
            return Err(Error::Contract("fit window holds fewer than 4 points; use a denser grid".into()));
        }
        let ls = fit_range(model, w, &grid[lo..hi], &values[lo..hi])?;
        window_estimates.push(WindowEstimate {
            x_min: grid[lo],
            x_max: grid[hi - 1],
            coefficients: ls.coef,
        });
    }
    let mut coefficient_errors = Vec::new();
    let mut coefficient_stability = Vec::new();
    for j in 0..2 {
        let c = full.coef[j];
        let dev = window_estimates
            .iter()
            .map(|e| (e.coefficients[j] - c).norm())
            .fold(0.0, f64::max);
        let mut spread = 0.0f64;
        for a in &window_estimates {
            for b in &window_estimates {
                spread = spread.max((a.coefficients[j] - b.coefficients[j]).norm());
            }
        }
        coefficient_errors.push(dev);
        coefficient_stability.push(if c.norm() > 0.0 { spread / c.norm() } else { f64::INFINITY });
    }
    let stability = coefficient_stability.iter().cloned().fold(0.0, f64::max);
    let (residual_exponent, residual_exponent_std_error, residual_status) =
        residual_exponent(model, w, grid, values, full.ssr, &full.coef);
    Ok(FitReport {
        schema: FIT_REPORT_SCHEMA.to_string(),
        model,
        h: series.h(),
        w,
        n_points: grid.len(),
        x_min: grid[0],
        x_max: grid[grid.len() - 1],
        coefficients: full.coef,
        coefficient_errors,
        window_estimates,
        coefficient_stability,
        stability,
        residual_exponent,
        residual_exponent_std_error,
        residual_status,
        condition_number: full.condition,
    })
}

/// One recovered value of phi_h (or a derived combination).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub label: String,
    /// Argument u of phi_h(u), when the value is a phi_h value.
    pub at: Option<Complex64>,
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub h: u64,
    pub w: Complex64,
    pub values: Vec<PhiValue>,
}

impl PhiEstimate {
    pub fn get(&self, label: &str) -> Option<&PhiValue> {
        self.values.iter().find(|v| v.label == label)
    }
}

pub const PHI_HALF_PLUS_W: &str = "phi_h(1/2+w)";
pub const PHI_THREE_HALF_MINUS_W: &str = "phi_h(3/2-w)";
pub const PHI_ONE: &str = "phi_h(1)";
pub const PHI_PRIME_ONE: &str = "phi_h'(1)";
pub const X_COEFFICIENT_AGGREGATE: &str = "(gamma-log(4 pi h)-1)phi_h(1)+phi_h'(1)";

/// Invert the main-term formulas for the phi_h values.
///
/// For w != 1/2: phi_h(1/2+w) = c_X h^{w-1/2} / ((4 pi)^{1/2} zeta*(2w)) and
/// phi_h(3/2-w) = c_{X^{2-2w}} (2-2w) h^{1/2-w} / ((4 pi)^{1/2} zeta*(2-2w)).
/// For w = 1/2: phi_h(1) = c_{X log X} / (4 pi)^{1/2}; the X coefficient
/// over (4 pi)^{1/2} is the aggregate (gamma - log(4 pi h) - 1) phi_h(1) + phi_h'(1),
/// from which phi_h'(1) is solved.
pub fn extract_phi(report: &FitReport, w: Complex64, h: u64) -> Result<PhiEstimate> {
    if h == 0 {
        return Err(Error::Contract("shift h must be positive".into()));
    }
    if report.model != FitModel::for_w(w) {
        return Err(Error::Contract(format!("report model {:?} does not match w = {w}", report.model)));
    }
    let root = (4.0 * PI).sqrt();
    let lh = (h as f64).ln();
    let c = &report.coefficients;
    let e = &report.coefficient_errors;
    let mut values = Vec::new();
    if report.model == FitModel::LogLinear {
        let phi1 = c[0] / root;
        let phi1_err = e[0] / root;
        let agg = c[1] / root;
        let agg_err = e[1] / root;
        let k = EULER_GAMMA - (4.0 * PI * h as f64).ln() - 1.0;
        values.push(PhiValue {
            label: PHI_ONE.into(),
            at: Some(Complex64::new(1.0, 0.0)),
            value: phi1,
            error: phi1_err,
        });
        values.push(PhiValue {
            label: X_COEFFICIENT_AGGREGATE.into(),
            at: None,
            value: agg,
            error: agg_err,
        });
        values.push(PhiValue {
            label: PHI_PRIME_ONE.into(),
            at: None,
            value: agg - phi1 * k,
            error: agg_err + k.abs() * phi1_err,
        });
    } else {
        let z1 = zeta_star(w * 2.0)?.value;
        let two_m = Complex64::new(2.0, 0.0) - w * 2.0;
        let z2 = zeta_star(two_m)?.value;
        let f1 = ((w - 0.5) * lh).exp() / (z1 * root);
        let f2 = two_m * ((0.5 - w) * lh).exp() / (z2 * root);
        values.push(PhiValue {
            label: PHI_HALF_PLUS_W.into(),
            at: Some(w + 0.5),
            value: c[0] * f1,
            error: e[0] * f1.norm(),
        });
        values.push(PhiValue {
            label: PHI_THREE_HALF_MINUS_W.into(),
            at: Some(Complex64::new(1.5, 0.0) - w),
            value: c[1] * f2,
            error: e[1] * f2.norm(),
        });
    }
    Ok(PhiEstimate { h, w, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{main_term, MainTermInputs};
    use crate::sums::{log_grid, SumMode};

    fn synthetic(w: Complex64, f: impl Fn(f64) -> Complex64) -> PartialSumSeries {
        let grid = log_grid(1e5, 1e7, 16).unwrap();
        let values = grid.iter().map(|&x| f(x)).collect();
        PartialSumSeries::new(1, w, grid, values, SumMode::Sharp, None).unwrap()
    }

    #[test]
    fn own_model_is_recovered_and_residual_flagged() {
        let half = Complex64::new(0.5, 0.0);
        let s = synthetic(half, |x| Complex64::new(3.0 * x * x.ln() + 5.0 * x, 0.0));
        let r = fit_main_terms(&s).unwrap();
        assert_eq!(r.schema, FIT_REPORT_SCHEMA);
        assert!((r.coefficients[0] - 3.0).norm() < 1e-8);
        assert!((r.coefficients[1] - 5.0).norm() < 1e-8);
        assert_eq!(r.residual_status, ResidualStatus::RoundingLevel);
        assert!(r.residual_exponent.is_none());
        assert!(r.window_estimates.len() >= 3);
        assert!(r.stability >= 0.0 && r.stability < 1e-10);
    }

    #[test]
    fn planted_exponent_is_recovered() {
        let half = Complex64::new(0.5, 0.0);
        let s = synthetic(half, |x| Complex64::new(3.0 * x * x.ln() + 5.0 * x + x.powf(0.75), 0.0));
        let r = fit_main_terms(&s).unwrap();
        assert_eq!(r.residual_status, ResidualStatus::Estimated);
        assert!((r.residual_exponent.unwrap() - 0.75).abs() < 0.05);
        assert!(r.residual_exponent_std_error.is_some());
    }

    #[test]
    fn complex_two_power_model_is_recovered() {
        let w = Complex64::new(0.3, 0.2);
        let c = [Complex64::new(1.5, -0.5), Complex64::new(-2.0, 0.25)];
        let s = synthetic(w, |x| c[0] * x + c[1] * ((2.0 - w * 2.0) * x.ln()).exp());
        let r = fit_main_terms(&s).unwrap();
        assert_eq!(r.model, FitModel::TwoPower);
        assert!((r.coefficients[0] - c[0]).norm() < 1e-8);
        assert!((r.coefficients[1] - c[1]).norm() < 1e-8);
    }

    #[test]
    fn collinear_basis_is_a_conditioning_error() {
        let half = Complex64::new(0.5, 0.0);
        let s = synthetic(half, |x| Complex64::new(x, 0.0));
        match fit_main_terms_with(&s, FitModel::TwoPower) {
            Err(Error::Conditioning(msg)) => assert!(msg.contains("collinear")),
            other => panic!("expected a conditioning error, got {other:?}"),
        }
    }

    #[test]
    fn short_grids_are_rejected() {
        let grid = log_grid(1e5, 1e6, 16).unwrap();
        let values = grid.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let s = PartialSumSeries::new(1, Complex64::new(0.5, 0.0), grid, values, SumMode::Sharp, None).unwrap();
        assert!(matches!(fit_main_terms(&s), Err(Error::Contract(_))));
    }

    #[test]
    fn extracted_phi_rebuilds_the_fitted_main_terms() {
        for (w, c) in [
            (Complex64::new(0.5, 0.0), [Complex64::new(3.0, 0.0), Complex64::new(5.0, 0.0)]),
            (Complex64::new(0.7, 0.0), [Complex64::new(9.0, 0.0), Complex64::new(-6.0, 0.0)]),
        ] {
            for h in [1u64, 3] {
                let model = FitModel::for_w(w);
                let grid = log_grid(1e5, 1e7, 16).unwrap();
                let values = grid
                    .iter()
                    .map(|&x| {
                        let b = model.basis(w, x);
                        b[0] * c[0] + b[1] * c[1]
                    })
                    .collect();
                let s = PartialSumSeries::new(h, w, grid, values, SumMode::Sharp, None).unwrap();
                let r = fit_main_terms(&s).unwrap();
                let phi = extract_phi(&r, w, h).unwrap();
                let inputs = if model == FitModel::LogLinear {
                    MainTermInputs {
                        h,
                        w,
                        phi_at: phi.get(PHI_ONE).unwrap().value,
                        phi_at_reflected: None,
                        phi_prime: Some(phi.get(PHI_PRIME_ONE).unwrap().value),
                    }
                } else {
                    MainTermInputs {
                        h,
                        w,
                        phi_at: phi.get(PHI_HALF_PLUS_W).unwrap().value,
                        phi_at_reflected: Some(phi.get(PHI_THREE_HALF_MINUS_W).unwrap().value),
                        phi_prime: None,
                    }
                };
                for x in [2e5, 3e6] {
                    let rebuilt = main_term(x, &inputs).unwrap();
                    let fitted = r.main_terms(x);
                    assert!((rebuilt - fitted).norm() <= 1e-10 * fitted.norm(), "w={w} h={h} x={x}");
                }
            }
        }
    }
}
