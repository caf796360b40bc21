//! Theta function and weight-0 real-analytic Eisenstein series of level 1
//! and level 4, each computable by more than one route so that the
//! transformation laws and the level-4 decomposition
//! E = E_inf + 4^w E_0 + E_{1/2} can be checked numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, sieve_sigma};
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;
use crate::special::{bessel_k, zeta_star};

/// A point x + iy of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlanePoint {
    x: f64,
    y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Contract(format!("point must lie in the upper half-plane, got {x} + {y}i")));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Moebius action of an integer matrix of positive determinant.
    pub fn act(&self, m: &Mat2) -> Self {
        let z = self.z();
        let num = z * m.a as f64 + m.b as f64;
        let den = z * m.c as f64 + m.d as f64;
        let w = num / den;
        // Im(gz) = det(g) y / |cz + d|^2 exactly; avoid the division round-off.
        Self {
            x: w.re,
            y: m.det() as f64 * self.y / den.norm_sqr(),
        }
    }

    pub fn translate(&self, n: f64) -> Self {
        Self { x: self.x + n, y: self.y }
    }
}

/// Integer 2x2 matrix (a b; c d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn in_gamma0(&self, n: i64) -> bool {
        self.det() == 1 && self.c.rem_euclid(n) == 0
    }
}

/// Scaling matrix for the cusp 0 of Gamma_0(4), acting as z -> -1/(4z).
pub const SIGMA_ZERO: Mat2 = Mat2::new(0, -1, 4, 0);
/// Scaling matrix for the cusp 1/2 of Gamma_0(4).
pub const SIGMA_HALF: Mat2 = Mat2::new(1, 0, 2, 1);

/// Representatives of Gamma_0(4) \ SL_2(Z). Right-multiplying a bottom row
/// (4c, d) by these gives (4c, d), (4c+d, d), (4c+3d, d), (4c+d, -4c),
/// (4c+d, 4c+2d) and (4c+2d, d).
pub const COSET_REPRESENTATIVES: [Mat2; 6] = [
    Mat2::new(1, 0, 0, 1),
    Mat2::new(1, 0, 1, 1),
    Mat2::new(1, 0, 3, 1),
    Mat2::new(1, -1, 1, 0),
    Mat2::new(1, 1, 1, 2),
    Mat2::new(1, 0, 2, 1),
];

/// Result of the exact check on [`COSET_REPRESENTATIVES`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosetCheck {
    pub all_determinant_one: bool,
    /// Pairs (i, j) with g_i g_j^{-1} in Gamma_0(4); empty when the
    /// representatives are pairwise inequivalent.
    pub equivalent_pairs: Vec<(usize, usize)>,
}

impl CosetCheck {
    /// Six inequivalent classes exhaust the index-6 quotient.
    pub fn passed(&self) -> bool {
        self.all_determinant_one && self.equivalent_pairs.is_empty()
    }
}

pub fn verify_coset_representatives() -> CosetCheck {
    check_coset_matrices(&COSET_REPRESENTATIVES)
}

/// Exact pairwise-inequivalence check of candidate representatives of
/// Gamma_0(4) \ SL_2(Z) under left multiplication by Gamma_0(4).
pub fn check_coset_matrices(reps: &[Mat2]) -> CosetCheck {
    let all_determinant_one = reps.iter().all(|g| g.det() == 1);
    let mut equivalent_pairs = Vec::new();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            let q = reps[i].mul(&reps[j].inverse_sl2());
            if q.in_gamma0(4) {
                equivalent_pairs.push((i, j));
            }
        }
    }
    CosetCheck {
        all_determinant_one,
        equivalent_pairs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    One,
    Four,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cusp {
    Infinity,
    Zero,
    Half,
}

impl Cusp {
    pub fn scaling_matrix(&self) -> Mat2 {
        match self {
            Cusp::Infinity => Mat2::new(1, 0, 0, 1),
            Cusp::Zero => SIGMA_ZERO,
            Cusp::Half => SIGMA_HALF,
        }
    }
}

/// Only weight 0 is evaluated numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Weight {
    Zero,
}

/// Which Eisenstein series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EisensteinSpec {
    pub level: Level,
    /// Required for level four, absent for level one.
    pub cusp: Option<Cusp>,
    pub weight: Weight,
    /// Multiply by zeta*(2w).
    pub completed: bool,
    pub w: Complex64,
}

impl EisensteinSpec {
    pub fn level_one(w: Complex64, completed: bool) -> Self {
        Self {
            level: Level::One,
            cusp: None,
            weight: Weight::Zero,
            completed,
            w,
        }
    }

    pub fn level_four(cusp: Cusp, w: Complex64, completed: bool) -> Self {
        Self {
            level: Level::Four,
            cusp: Some(cusp),
            weight: Weight::Zero,
            completed,
            w,
        }
    }
}

/// Truncation request: the cutoff (Fourier terms or coset radius) and the
/// largest acceptable certified tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationBudget {
    pub cutoff: u64,
    pub tail_bound: f64,
}

impl TruncationBudget {
    pub fn new(cutoff: u64, tail_bound: f64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::Contract("truncation cutoff must be positive".into()));
        }
        if !(tail_bound >= 0.0) {
            return Err(Error::Contract("tail bound must be nonnegative".into()));
        }
        Ok(Self { cutoff, tail_bound })
    }

    /// Cutoff only; whatever tail results is reported but not enforced.
    pub fn unchecked(cutoff: u64) -> Self {
        Self {
            cutoff: cutoff.max(1),
            tail_bound: f64::INFINITY,
        }
    }
}

/// A truncated sum with its certified tail bound and an estimate of the
/// accumulated evaluation error of the terms that were kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncated {
    pub value: Complex64,
    pub cutoff: u64,
    pub tail_bound: f64,
    pub eval_error: f64,
}

impl Truncated {
    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.eval_error
    }
}

fn enforce(cutoff: u64, tail: f64, target: f64, suggest: impl Fn() -> u64) -> Result<()> {
    if tail > target {
        return Err(Error::Truncation {
            cutoff,
            tail_bound: tail,
            target,
            suggested: suggest(),
        });
    }
    Ok(())
}

/// Smallest cutoff in 1..=limit whose bound is <= target (bound decreasing).
fn smallest_cutoff(limit: u64, target: f64, bound: impl Fn(u64) -> f64) -> u64 {
    let mut hi = 1u64;
    while hi < limit && !(bound(hi) <= target) {
        hi = (hi * 2).min(limit);
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if bound(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

// ---------------------------------------------------------------- theta

/// 2 sum_{n > m} e^{-2 pi n^2 y} <= 2 e^{-2 pi (m+1)^2 y} / (1 - e^{-2 pi (2m+3) y}).
pub fn theta_tail_bound(y: f64, cutoff: u64) -> f64 {
    let m = cutoff as f64;
    let lead = (-2.0 * PI * (m + 1.0) * (m + 1.0) * y).exp();
    let ratio = (-2.0 * PI * (2.0 * m + 3.0) * y).exp();
    2.0 * lead / (1.0 - ratio)
}

/// theta(z) = sum_n e(n^2 z), truncated at |n| <= cutoff.
pub fn theta(z: HalfPlanePoint, budget: TruncationBudget) -> Result<Truncated> {
    let m = budget.cutoff;
    let tail = theta_tail_bound(z.y, m);
    enforce(m, tail, budget.tail_bound, || {
        smallest_cutoff(1 << 40, budget.tail_bound, |k| theta_tail_bound(z.y, k))
    })?;
    let x = z.x - z.x.floor();
    let mut sum = CompensatedSum::new();
    for n in (1..=m).rev() {
        let n2 = (n * n) as f64;
        let mag = (-2.0 * PI * n2 * z.y).exp();
        if mag == 0.0 {
            continue;
        }
        // n^2 x mod 1 keeps the phase argument small.
        let phase = (n2 * x).fract();
        sum.add(Complex64::from_polar(2.0 * mag, 2.0 * PI * phase));
    }
    sum.add(Complex64::new(1.0, 0.0));
    Ok(Truncated {
        value: sum.value(),
        cutoff: m,
        tail_bound: tail,
        eval_error: 8.0 * f64::EPSILON * (m as f64 + 1.0),
    })
}

// ---------------------------------------------------- level 1, Fourier

fn check_fourier_w(w: Complex64) -> Result<()> {
    for p in [0.0, 0.5, 1.0] {
        if w == Complex64::new(p, 0.0) {
            return Err(Error::Pole {
                function: "level-1 Eisenstein series",
                at: w,
            });
        }
    }
    Ok(())
}

/// Bound on the Fourier tail sum_{|n| > m} of the level-1 expansion, using
/// |sigma_{1-2w}(n)| <= d(n) n^{max(0, 1-2 Re w)}, d(n) <= 2 sqrt(n),
/// |K_nu| <= K_{Re nu}, and the monotonicity of e^x K_mu(x).
fn fourier_tail_bound(y: f64, w: Complex64, zs_abs: f64, cutoff: u64) -> f64 {
    let mu = (w.re - 0.5).abs();
    let x0 = 2.0 * PI * (cutoff as f64 + 1.0) * y;
    let k0 = match bessel_k(Complex64::new(mu, 0.0), x0) {
        Ok(v) => v.value.re.abs() + v.abs_error_estimate,
        Err(_) => return f64::INFINITY,
    };
    let p = w.re.max(1.0 - w.re);
    let m1 = cutoff as f64 + 1.0;
    let r = (-2.0 * PI * y).exp() * (p / m1).exp();
    if r >= 1.0 {
        return f64::INFINITY;
    }
    // 2 (both signs) * 2 sqrt(n) n^{max(0,1-2 Re w)} n^{Re w - 1/2} = 4 n^p
    let series = 4.0 * m1.powf(p) * k0 / (1.0 - r);
    2.0 * y.sqrt() / zs_abs * series
}

/// Smallest Fourier cutoff whose tail bound meets `target` (at most 10^6).
pub fn fourier_cutoff_for(z: HalfPlanePoint, w: Complex64, target: f64) -> Result<u64> {
    check_fourier_w(w)?;
    let zs = zeta_star(w * 2.0)?.value.norm();
    Ok(smallest_cutoff(1_000_000, target, |m| fourier_tail_bound(z.y, w, zs, m)))
}

/// E(z, w) for SL_2(Z) from its Fourier expansion
/// a_0(w, y) + (2 sqrt(y) / zeta*(2w)) sum_{0 < |n| <= M} sigma_{1-2w}(|n|) |n|^{w-1/2} K_{w-1/2}(2 pi |n| y) e(nx),
/// with a_0 = y^w + y^{1-w} zeta*(2w-1)/zeta*(2w).
pub fn eisenstein_level1_fourier(z: HalfPlanePoint, w: Complex64, budget: TruncationBudget) -> Result<Truncated> {
    check_fourier_w(w)?;
    let m = budget.cutoff;
    let zs = zeta_star(w * 2.0)?;
    let zs1 = zeta_star(w * 2.0 - 1.0)?;
    let tail = fourier_tail_bound(z.y, w, zs.value.norm(), m);
    enforce(m, tail, budget.tail_bound, || {
        smallest_cutoff(1_000_000, budget.tail_bound, |k| fourier_tail_bound(z.y, w, zs.value.norm(), k))
    })?;
    let y = z.y;
    let ly = y.ln();
    let yw = (w * ly).exp();
    let y1w = ((1.0 - w) * ly).exp();
    let ratio = zs1.value / zs.value;
    let a0 = yw + y1w * ratio;
    let rel_zs = zs.abs_error_estimate / zs.value.norm();
    let mut err = 4.0 * f64::EPSILON * a0.norm()
        + y1w.norm() * ratio.norm() * (rel_zs + zs1.abs_error_estimate / zs1.value.norm().max(1e-300));

    let sigma = sieve_sigma(m as usize, 1.0 - w * 2.0)?;
    let nu = w - 0.5;
    let x = z.x - z.x.floor();
    let mut sum = CompensatedSum::new();
    let mut abs_sum = 0.0;
    for n in 1..=m {
        let nf = n as f64;
        let k = bessel_k(nu, 2.0 * PI * nf * y)?;
        if k.value == Complex64::new(0.0, 0.0) && k.abs_error_estimate == 0.0 {
            break;
        }
        let coef = sigma.get(n as usize) * (nu * nf.ln()).exp();
        let phase = (nf * x).fract();
        let cosine = 2.0 * (2.0 * PI * phase).cos();
        let term = coef * k.value * cosine;
        abs_sum += term.norm();
        err += coef.norm() * 2.0 * k.abs_error_estimate * 2.0 * y.sqrt() / zs.value.norm();
        sum.add(term);
    }
    let pre = 2.0 * y.sqrt() / zs.value;
    let series = sum.value() * pre;
    err += (abs_sum * pre.norm()) * (8.0 * f64::EPSILON + rel_zs);
    Ok(Truncated {
        value: a0 + series,
        cutoff: m,
        tail_bound: tail,
        eval_error: err,
    })
}

// ------------------------------------------------------ coset sums

/// All bottom rows (c, d) with gcd(c, d) = 1 and 0 < max(|c|, |d|) <= radius,
/// with 4 | c at level four. Both (c, d) and (-c, -d) are emitted; the coset
/// sums carry the compensating factor 1/2.
pub fn bottom_rows(level: Level, radius: u64) -> impl Iterator<Item = (i64, i64)> {
    let r = radius as i64;
    (-r..=r).flat_map(move |c| {
        (-r..=r).filter_map(move |d| {
            if c == 0 && d == 0 {
                return None;
            }
            if level == Level::Four && c.rem_euclid(4) != 0 {
                return None;
            }
            (gcd(c.unsigned_abs(), d.unsigned_abs()) == 1).then_some((c, d))
        })
    })
}

/// Collected form of [`bottom_rows`].
pub fn enumerate_bottom_rows(level: Level, radius: u64) -> Result<Vec<(i64, i64)>> {
    if radius == 0 {
        return Err(Error::Contract("coset radius must be at least 1".into()));
    }
    Ok(bottom_rows(level, radius).collect())
}

/// 2 y^s lambda^{-s} R^{2-2s} / (s - 1): bound for the half-sum of
/// y^s / |cz + d|^{2s} over all pairs with max(|c|, |d|) > R, where lambda is
/// the smaller eigenvalue of the form |cz + d|^2 in (c, d).
pub fn coset_tail_bound(z: HalfPlanePoint, re_w: f64, radius: u64) -> f64 {
    let zz = z.x * z.x + z.y * z.y;
    let half_tr = 0.5 * (zz + 1.0);
    let disc = (0.25 * (zz - 1.0) * (zz - 1.0) + z.x * z.x).sqrt();
    // lambda = det / lambda_max avoids cancellation for tall or short points.
    let lambda = z.y * z.y / (half_tr + disc);
    let r = radius as f64;
    2.0 * (z.y / lambda).powf(re_w) * r.powf(2.0 - 2.0 * re_w) / (re_w - 1.0)
}

/// Sum of y^w / |cz + d|^{2w} over one representative per +-pair on the
/// shell max(|c|, |d|) = k, for k = 1..=radius (entry k-1).
fn coset_shells(level: Level, z: HalfPlanePoint, w: Complex64, radius: u64) -> Vec<(Complex64, f64)> {
    let (x, y) = (z.x, z.y);
    let ly = y.ln();
    let real_w = w.im == 0.0;
    let term = move |c: i64, d: i64| -> Complex64 {
        let cf = c as f64;
        let re = cf * x + d as f64;
        let im = cf * y;
        let q = re * re + im * im;
        if real_w {
            Complex64::new((y / q).powf(w.re), 0.0)
        } else {
            (w * (ly - q.ln())).exp()
        }
    };
    let ok_c = move |c: i64| level == Level::One || c % 4 == 0;
    (1..=radius as i64)
        .into_par_iter()
        .map(|k| {
            let mut s = CompensatedSum::new();
            let mut mass = 0.0;
            let mut push = |v: Complex64| {
                mass += v.norm();
                s.add(v);
            };
            if k == 1 {
                push(term(0, 1));
            }
            // c = k, |d| <= k
            if ok_c(k) {
                for d in -k..=k {
                    if gcd(k as u64, d.unsigned_abs()) == 1 {
                        push(term(k, d));
                    }
                }
            }
            // 0 < c < k, d = +-k
            for c in 1..k {
                if ok_c(c) && gcd(c as u64, k as u64) == 1 {
                    push(term(c, k));
                    push(term(c, -k));
                }
            }
            (s.value(), mass)
        })
        .collect()
}

fn prefix(shells: &[(Complex64, f64)], radius: u64) -> (Complex64, f64) {
    let mut s = CompensatedSum::new();
    let mut mass = 0.0;
    for (v, m) in &shells[..radius as usize] {
        s.add(*v);
        mass += m;
    }
    (s.value(), mass)
}

fn check_coset_w(w: Complex64) -> Result<()> {
    if !(w.re > 1.0) {
        return Err(Error::Divergence { re_w: w.re });
    }
    Ok(())
}

fn coset_sum(level: Level, z: HalfPlanePoint, w: Complex64, budget: TruncationBudget) -> Result<Truncated> {
    check_coset_w(w)?;
    if budget.cutoff > 200_000 {
        return Err(Error::Contract("coset radius above 200000".into()));
    }
    let r = budget.cutoff;
    let tail = coset_tail_bound(z, w.re, r);
    enforce(r, tail, budget.tail_bound, || {
        smallest_cutoff(1 << 40, budget.tail_bound, |k| coset_tail_bound(z, w.re, k))
    })?;
    let shells = coset_shells(level, z, w, r);
    let (value, mass) = prefix(&shells, r);
    Ok(Truncated {
        value,
        cutoff: r,
        tail_bound: tail,
        eval_error: 8.0 * f64::EPSILON * mass,
    })
}

/// Level-1 coset sum (1/2) sum_{gcd(c,d)=1} y^w / |cz + d|^{2w}, Re w > 1.
pub fn eisenstein_level1_cosets(z: HalfPlanePoint, w: Complex64, budget: TruncationBudget) -> Result<Truncated> {
    coset_sum(Level::One, z, w, budget)
}

/// Level-4 Eisenstein series at a cusp, E_a(z, w) = E_inf(sigma_a z, w), by
/// the coset sum over bottom rows with 4 | c. Re w > 1. The tail bound refers
/// to the transformed point.
pub fn eisenstein_level4_cosets(
    cusp: Cusp,
    z: HalfPlanePoint,
    w: Complex64,
    budget: TruncationBudget,
) -> Result<Truncated> {
    coset_sum(Level::Four, z.act(&cusp.scaling_matrix()), w, budget)
}

/// Evaluate any supported weight-0 Eisenstein series. Level one uses the
/// Fourier route; level four the coset route.
pub fn eisenstein(spec: &EisensteinSpec, z: HalfPlanePoint, budget: TruncationBudget) -> Result<Truncated> {
    let mut t = match (spec.level, spec.cusp) {
        (Level::One, None) => eisenstein_level1_fourier(z, spec.w, budget)?,
        (Level::Four, Some(cusp)) => eisenstein_level4_cosets(cusp, z, spec.w, budget)?,
        (Level::One, Some(_)) => return Err(Error::Contract("level one has no cusp parameter".into())),
        (Level::Four, None) => return Err(Error::Contract("level four needs a cusp".into())),
    };
    if spec.completed {
        let zs = zeta_star(spec.w * 2.0)?;
        let f = zs.value;
        t = Truncated {
            value: t.value * f,
            cutoff: t.cutoff,
            tail_bound: t.tail_bound * f.norm(),
            eval_error: t.eval_error * f.norm() + t.value.norm() * zs.abs_error_estimate,
        };
    }
    Ok(t)
}

// ------------------------------------------------- decomposition

/// Residuals of E = E_inf + 4^w E_0 + E_{1/2} at one coset radius, with the
/// left side computed both from the Fourier expansion and from the level-1
/// coset sum at the same radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionPoint {
    pub radius: u64,
    pub level1_fourier: Complex64,
    pub level1_cosets: Complex64,
    pub level4_sum: Complex64,
    pub residual_fourier: f64,
    pub residual_cosets: f64,
    /// Sum of the certified tails of every coset sum involved.
    pub tail_bound: f64,
}

/// Decomposition residuals at several radii, sharing one pass of shell sums.
pub fn decomposition_curve(z: HalfPlanePoint, w: Complex64, radii: &[u64]) -> Result<Vec<DecompositionPoint>> {
    check_coset_w(w)?;
    let r_max = *radii.iter().max().ok_or_else(|| Error::Contract("no radii given".into()))?;
    if radii.contains(&0) {
        return Err(Error::Contract("coset radius must be at least 1".into()));
    }
    let target = 1e-14;
    let m = fourier_cutoff_for(z, w, target)?;
    let fourier = eisenstein_level1_fourier(z, w, TruncationBudget::unchecked(m))?.value;

    let z0 = z.act(&SIGMA_ZERO);
    let zh = z.act(&SIGMA_HALF);
    let four_w = (w * 4f64.ln()).exp();
    let s1 = coset_shells(Level::One, z, w, r_max);
    let s_inf = coset_shells(Level::Four, z, w, r_max);
    let s_zero = coset_shells(Level::Four, z0, w, r_max);
    let s_half = coset_shells(Level::Four, zh, w, r_max);
    Ok(radii
        .iter()
        .map(|&r| {
            let (e1, _) = prefix(&s1, r);
            let (ei, _) = prefix(&s_inf, r);
            let (e0, _) = prefix(&s_zero, r);
            let (eh, _) = prefix(&s_half, r);
            let level4 = ei + four_w * e0 + eh;
            let tail = coset_tail_bound(z, w.re, r)
                + four_w.norm() * coset_tail_bound(z0, w.re, r)
                + coset_tail_bound(zh, w.re, r);
            DecompositionPoint {
                radius: r,
                level1_fourier: fourier,
                level1_cosets: e1,
                level4_sum: level4,
                residual_fourier: (fourier - level4).norm(),
                residual_cosets: (e1 - level4).norm(),
                tail_bound: tail,
            }
        })
        .collect())
}

/// Decomposition residuals at the radius `budget.cutoff`; fails with a
/// truncation error if the combined certified tail exceeds `budget.tail_bound`.
pub fn verify_decomposition(z: HalfPlanePoint, w: Complex64, budget: TruncationBudget) -> Result<DecompositionPoint> {
    check_coset_w(w)?;
    let r = budget.cutoff;
    let combined = |k: u64| {
        coset_tail_bound(z, w.re, k)
            + 4f64.powf(w.re) * coset_tail_bound(z.act(&SIGMA_ZERO), w.re, k)
            + coset_tail_bound(z.act(&SIGMA_HALF), w.re, k)
    };
    enforce(r, combined(r), budget.tail_bound, || {
        smallest_cutoff(1 << 40, budget.tail_bound, combined)
    })?;
    Ok(decomposition_curve(z, w, &[r])?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(x, y).unwrap()
    }

    #[test]
    fn theta_at_large_height_and_involution() {
        let b = TruncationBudget::new(10, 1e-15).unwrap();
        let t = theta(pt(0.0, 50.0), b).unwrap();
        assert!((t.value - 1.0).norm() < 1e-12);
        let a = theta(pt(0.0, 0.25), b).unwrap().value;
        let c = theta(pt(0.0, 1.0), b).unwrap().value;
        assert!((a - c * 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn theta_budget_error_suggests_cutoff() {
        let b = TruncationBudget::new(1, 1e-14).unwrap();
        match theta(pt(0.0, 0.1), b) {
            Err(Error::Truncation { suggested, .. }) => {
                assert!(theta_tail_bound(0.1, suggested) <= 1e-14);
                assert!(theta_tail_bound(0.1, suggested - 1) > 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coset_representatives_are_inequivalent() {
        assert!(verify_coset_representatives().passed());
        // The translation (1 -1; 0 1) lies in Gamma_0(4) and so shares the
        // identity's coset.
        let mut reps = COSET_REPRESENTATIVES;
        reps[3] = Mat2::new(1, -1, 0, 1);
        assert_eq!(check_coset_matrices(&reps).equivalent_pairs, vec![(0, 3)]);
    }

    #[test]
    fn coset_representatives_transform_bottom_rows() {
        let (c, d) = (4 * 3, 7);
        let expect = [(c, d), (c + d, d), (c + 3 * d, d), (c + d, -c), (c + d, c + 2 * d), (c + 2 * d, d)];
        for (g, e) in COSET_REPRESENTATIVES.iter().zip(expect) {
            let row = Mat2::new(1, 0, c, d).mul(g);
            assert_eq!((row.c, row.d), e);
        }
    }

    #[test]
    fn six_translates_sum_to_level_one() {
        let z = pt(0.2, 1.1);
        let w = Complex64::new(2.5, 0.0);
        let b = TruncationBudget::unchecked(600);
        let total: Complex64 = COSET_REPRESENTATIVES
            .iter()
            .map(|g| eisenstein_level4_cosets(Cusp::Infinity, z.act(g), w, b).unwrap().value)
            .sum();
        let e = eisenstein_level1_fourier(z, w, TruncationBudget::unchecked(30)).unwrap().value;
        assert!((total - e).norm() < 1e-6, "{total} vs {e}");
    }

    #[test]
    fn bottom_rows_radius_one() {
        let rows = enumerate_bottom_rows(Level::Four, 1).unwrap();
        assert_eq!(rows, vec![(0, -1), (0, 1)]);
        let rows = enumerate_bottom_rows(Level::One, 1).unwrap();
        assert_eq!(rows.len(), 8);
    }

    #[test]
    fn shells_match_direct_enumeration() {
        let z = pt(0.3, 0.9);
        let w = Complex64::new(2.5, 0.7);
        let shells = coset_shells(Level::Four, z, w, 12);
        let (v, _) = prefix(&shells, 12);
        let mut direct = Complex64::new(0.0, 0.0);
        for (c, d) in bottom_rows(Level::Four, 12) {
            let q = (z.z() * c as f64 + d as f64).norm_sqr();
            direct += (w * (z.y / q).ln()).exp() * 0.5;
        }
        assert!((v - direct).norm() < 1e-13);
    }

    #[test]
    fn level_one_routes_agree() {
        let z = pt(0.1, 1.2);
        let w = Complex64::new(2.2, 0.0);
        let f = eisenstein_level1_fourier(z, w, TruncationBudget::new(20, 1e-13).unwrap()).unwrap();
        let c = eisenstein_level1_cosets(z, w, TruncationBudget::unchecked(400)).unwrap();
        assert!((f.value - c.value).norm() <= f.error_bound() + c.error_bound());
    }

    #[test]
    fn action_of_nonunimodular_matrix() {
        let z = pt(0.3, 0.8);
        let g = z.act(&SIGMA_ZERO);
        let expect = -1.0 / (z.z() * 4.0);
        assert!((g.z() - expect).norm() < 1e-15);
    }

    #[test]
    fn decomposition_residual_decays_like_the_tail() {
        let z = pt(0.0, 1.0);
        let w = Complex64::new(2.5, 0.0);
        let curve = decomposition_curve(z, w, &[200, 400]).unwrap();
        for p in &curve {
            assert!(p.residual_fourier <= p.tail_bound, "{p:?}");
            assert!(p.residual_cosets <= p.tail_bound, "{p:?}");
        }
        let slope = (curve[1].residual_fourier / curve[0].residual_fourier).ln() / 2f64.ln();
        assert!((slope - (2.0 - 2.0 * w.re)).abs() < 0.1, "slope {slope}");
    }
}
