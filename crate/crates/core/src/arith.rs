//! Sieves and exact evaluators for r2, sigma_nu, d and Kloosterman sums.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::CompensatedSum;

/// Default memory ceiling for a single table (2 GiB).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Largest modulus accepted by [`kloosterman`]; the cost is linear in `c`.
pub const DEFAULT_KLOOSTERMAN_CAP: u64 = 1_000_000;

/// The primitive character of conductor 4.
#[inline]
pub fn chi4(n: i64) -> i32 {
    match n.rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

#[inline]
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m))
}

#[inline]
pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TableKind {
    R2,
    SigmaNu,
    DivisorCount,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableValues {
    Integer(Vec<u32>),
    Complex(Vec<Complex64>),
}

/// Where a table came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub method: &'static str,
    pub workers: usize,
}

/// An immutable table of an arithmetic function on `0..=max_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithmeticTable {
    kind: TableKind,
    nu: Option<Complex64>,
    max_index: usize,
    values: TableValues,
    provenance: Provenance,
}

impl ArithmeticTable {
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    /// Exponent of a `SigmaNu` table.
    pub fn nu(&self) -> Option<Complex64> {
        self.nu
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn len(&self) -> usize {
        self.max_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    /// Integer entries; `None` for complex tables.
    pub fn as_integers(&self) -> Option<&[u32]> {
        match &self.values {
            TableValues::Integer(v) => Some(v),
            TableValues::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.values {
            TableValues::Complex(v) => Some(v),
            TableValues::Integer(_) => None,
        }
    }

    /// Entry `n` as a complex number, whatever the storage.
    pub fn get(&self, n: usize) -> Complex64 {
        match &self.values {
            TableValues::Integer(v) => Complex64::new(v[n] as f64, 0.0),
            TableValues::Complex(v) => v[n],
        }
    }

    /// CSV export: `n,value` for integer tables, `n,re,im` for complex ones.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.values {
            TableValues::Integer(v) => {
                out.push_str("n,value\n");
                for (n, x) in v.iter().enumerate() {
                    let _ = writeln!(out, "{n},{x}");
                }
            }
            TableValues::Complex(v) => {
                out.push_str("n,re,im\n");
                for (n, x) in v.iter().enumerate() {
                    let _ = writeln!(out, "{n},{:.16e},{:.16e}", x.re, x.im);
                }
            }
        }
        out
    }
}

/// Sieve configuration: memory ceiling and worker count.
#[derive(Debug, Clone, Copy)]
pub struct Sieve {
    pub memory_budget: u64,
    pub workers: usize,
}

impl Default for Sieve {
    fn default() -> Self {
        Self {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            workers: 1,
        }
    }
}

impl Sieve {
    pub fn new(memory_budget: u64, workers: usize) -> Self {
        Self {
            memory_budget,
            workers: workers.max(1),
        }
    }

    fn check(&self, max_index: usize, bytes_per_entry: u64) -> Result<()> {
        if max_index == 0 {
            return Err(Error::Contract("sieve length must be at least 1".into()));
        }
        let requested = (max_index as u64 + 1).saturating_mul(bytes_per_entry);
        if requested > self.memory_budget {
            return Err(Error::Budget {
                requested,
                limit: self.memory_budget,
            });
        }
        Ok(())
    }

    /// Contiguous blocks, one per worker, covering `0..len`.
    fn blocks(&self, len: usize) -> Vec<(usize, usize)> {
        let k = self.workers.min(len).max(1);
        let size = len.div_ceil(k);
        (0..k)
            .map(|i| (i * size, ((i + 1) * size).min(len)))
            .filter(|(lo, hi)| lo < hi)
            .collect()
    }

    fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> R {
        if self.workers <= 1 {
            return job();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.workers).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        }
    }

    /// r2 on `0..=n` by enumerating lattice points a^2 + b^2 <= n.
    pub fn r2(&self, n: usize) -> Result<ArithmeticTable> {
        self.check(n, 4)?;
        let len = n + 1;
        let mut values = vec![0u32; len];
        let blocks = self.blocks(len);
        self.run(|| {
            split_blocks(&mut values, &blocks)
                .into_par_iter()
                .for_each(|(lo, slice)| r2_block(lo as u64, slice));
        });
        Ok(ArithmeticTable {
            kind: TableKind::R2,
            nu: None,
            max_index: n,
            values: TableValues::Integer(values),
            provenance: Provenance {
                method: "lattice enumeration",
                workers: self.workers,
            },
        })
    }

    /// d(n) on `0..=n` by the divisor loop; entry 0 is 0.
    pub fn divisor_count(&self, n: usize) -> Result<ArithmeticTable> {
        self.check(n, 4)?;
        let len = n + 1;
        let mut values = vec![0u32; len];
        let blocks = self.blocks(len);
        self.run(|| {
            split_blocks(&mut values, &blocks).into_par_iter().for_each(|(lo, slice)| {
                let hi = lo + slice.len();
                for d in 1..hi {
                    let first = lo.div_ceil(d).max(1) * d;
                    for m in (first..hi).step_by(d) {
                        slice[m - lo] += 1;
                    }
                }
            });
        });
        Ok(ArithmeticTable {
            kind: TableKind::DivisorCount,
            nu: None,
            max_index: n,
            values: TableValues::Integer(values),
            provenance: Provenance {
                method: "divisor loop",
                workers: self.workers,
            },
        })
    }

    /// sigma_nu on `0..=n`. Each d^nu is computed once per block and
    /// accumulated over the multiples of d; entry 0 is 0 and is never read.
    pub fn sigma(&self, n: usize, nu: Complex64) -> Result<ArithmeticTable> {
        self.check(n, 16)?;
        let len = n + 1;
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        let blocks = self.blocks(len);
        self.run(|| {
            split_blocks(&mut values, &blocks).into_par_iter().for_each(|(lo, slice)| {
                let hi = lo + slice.len();
                for d in 1..hi {
                    let p = (nu * (d as f64).ln()).exp();
                    let first = lo.div_ceil(d).max(1) * d;
                    for m in (first..hi).step_by(d) {
                        slice[m - lo] += p;
                    }
                }
            });
        });
        Ok(ArithmeticTable {
            kind: TableKind::SigmaNu,
            nu: Some(nu),
            max_index: n,
            values: TableValues::Complex(values),
            provenance: Provenance {
                method: "divisor loop",
                workers: self.workers,
            },
        })
    }
}

fn split_blocks<'a, T>(values: &'a mut [T], blocks: &[(usize, usize)]) -> Vec<(usize, &'a mut [T])> {
    let mut out = Vec::with_capacity(blocks.len());
    let mut rest = values;
    let mut offset = 0;
    for &(lo, hi) in blocks {
        debug_assert_eq!(lo, offset);
        let (head, tail) = rest.split_at_mut(hi - lo);
        out.push((lo, head));
        rest = tail;
        offset = hi;
    }
    out
}

fn r2_block(lo: u64, slice: &mut [u32]) {
    let hi = lo + slice.len() as u64; // exclusive
    let a_max = isqrt(hi - 1);
    for a in 0..=a_max {
        let a2 = a * a;
        let b_min = if lo > a2 {
            let r = isqrt(lo - a2 - 1);
            r + 1
        } else {
            0
        };
        let b_max = isqrt(hi - 1 - a2);
        let wa = if a == 0 { 1 } else { 2 };
        for b in b_min..=b_max {
            let wb = if b == 0 { 1 } else { 2 };
            slice[(a2 + b * b - lo) as usize] += wa * wb;
        }
    }
}

pub fn sieve_r2(n: usize) -> Result<ArithmeticTable> {
    Sieve::default().r2(n)
}

pub fn sieve_sigma(n: usize, nu: Complex64) -> Result<ArithmeticTable> {
    Sieve::default().sigma(n, nu)
}

pub fn sieve_divisor_count(n: usize) -> Result<ArithmeticTable> {
    Sieve::default().divisor_count(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Twist {
    None,
    Chi4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KloostermanSpec {
    pub m: i64,
    pub n: i64,
    pub c: u64,
    pub twist: Twist,
}

impl KloostermanSpec {
    pub fn new(m: i64, n: i64, c: u64) -> Self {
        Self { m, n, c, twist: Twist::None }
    }

    pub fn twisted(m: i64, n: i64, c: u64) -> Self {
        Self { m, n, c, twist: Twist::Chi4 }
    }
}

/// The (optionally chi4-twisted) Kloosterman sum.
///
/// `S(m, n; 1)` is taken to be 1.
pub fn kloosterman(spec: KloostermanSpec) -> Result<Complex64> {
    kloosterman_capped(spec, DEFAULT_KLOOSTERMAN_CAP)
}

pub fn kloosterman_capped(spec: KloostermanSpec, cap: u64) -> Result<Complex64> {
    let c = spec.c;
    if c == 0 {
        return Err(Error::Contract("Kloosterman modulus must be positive".into()));
    }
    if c > cap {
        return Err(Error::Contract(format!("Kloosterman modulus {c} exceeds cap {cap}")));
    }
    if spec.twist == Twist::Chi4 && c % 4 != 0 {
        return Err(Error::Contract(format!("chi4-twisted Kloosterman sum needs 4 | c, got c = {c}")));
    }
    if c == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let ci = c as i64;
    let m = spec.m.rem_euclid(ci) as i128;
    let n = spec.n.rem_euclid(ci) as i128;
    let step = std::f64::consts::TAU / c as f64;
    let mut acc = CompensatedSum::new();
    for d in 1..ci {
        if gcd(d as u64, c) != 1 {
            continue;
        }
        let weight = match spec.twist {
            Twist::None => 1.0,
            Twist::Chi4 => chi4(d) as f64,
        };
        let dbar = mod_inverse(d, ci).expect("unit has an inverse") as i128;
        let phase = ((m * d as i128 + n * dbar) % ci as i128) as f64;
        let (s, co) = (step * phase).sin_cos();
        acc.add(Complex64::new(co * weight, s * weight));
    }
    Ok(acc.value())
}

/// Real parts of `S(m, n; c)` for all `1 <= m <= max_m`, `1 <= n <= max_n`,
/// row-major in `m`. Untwisted sums are real, so this is the full value.
pub fn kloosterman_block(c: u64, max_m: usize, max_n: usize) -> Vec<f64> {
    let mut acc = vec![0.0f64; max_m * max_n];
    if c == 1 {
        acc.iter_mut().for_each(|x| *x = 1.0);
        return acc;
    }
    let cu = c as usize;
    let step = std::f64::consts::TAU / c as f64;
    let (cos_tab, sin_tab): (Vec<f64>, Vec<f64>) = (0..cu)
        .map(|k| {
            let (s, co) = (step * k as f64).sin_cos();
            (co, s)
        })
        .unzip();
    let mut cm = vec![0.0; max_m];
    let mut sm = vec![0.0; max_m];
    let mut cn = vec![0.0; max_n];
    let mut sn = vec![0.0; max_n];
    for d in 1..cu {
        if gcd(d as u64, c) != 1 {
            continue;
        }
        let dbar = mod_inverse(d as i64, c as i64).expect("unit") as usize;
        let mut idx = 0usize;
        for j in 0..max_m {
            idx += d;
            if idx >= cu {
                idx -= cu;
            }
            cm[j] = cos_tab[idx];
            sm[j] = sin_tab[idx];
        }
        idx = 0;
        for j in 0..max_n {
            idx += dbar;
            if idx >= cu {
                idx -= cu;
            }
            cn[j] = cos_tab[idx];
            sn[j] = sin_tab[idx];
        }
        for i in 0..max_m {
            let (a, b) = (cm[i], sm[i]);
            let row = &mut acc[i * max_n..(i + 1) * max_n];
            for j in 0..max_n {
                row[j] += a * cn[j] - b * sn[j];
            }
        }
    }
    acc
}

fn divisor_count_single(n: u64) -> u64 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    count
}

/// Right-hand side of the Weil bound `d(c) gcd(m,n,c)^{1/2} c^{1/2}`.
pub fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    let g = gcd(gcd(m.unsigned_abs(), n.unsigned_abs()), c);
    divisor_count_single(c) as f64 * (g as f64).sqrt() * (c as f64).sqrt()
}

/// Outcome of checking the Weil bound over a box of (m, n, c).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeilReport {
    pub checked: u64,
    /// Largest |S| / bound seen.
    pub max_ratio: f64,
    pub first_violation: Option<(i64, i64, u64)>,
}

/// Checks |S(m,n;c)| <= bound for `1 <= m, n <= max_mn`, `1 <= c <= max_c`.
pub fn weil_sweep(max_mn: usize, max_c: u64) -> WeilReport {
    let per_c: Vec<(u64, f64, Option<(i64, i64, u64)>)> = (1..=max_c)
        .into_par_iter()
        .map(|c| {
            let block = kloosterman_block(c, max_mn, max_mn);
            let dc = divisor_count_single(c) as f64;
            let sc = (c as f64).sqrt();
            let mut max_ratio = 0.0f64;
            let mut violation = None;
            for m in 1..=max_mn {
                for n in 1..=max_mn {
                    let g = gcd(gcd(m as u64, n as u64), c) as f64;
                    let bound = dc * g.sqrt() * sc;
                    let ratio = block[(m - 1) * max_mn + (n - 1)].abs() / bound;
                    max_ratio = max_ratio.max(ratio);
                    // 1e-9 slack absorbs rounding in the floating sum.
                    if ratio > 1.0 + 1e-9 && violation.is_none() {
                        violation = Some((m as i64, n as i64, c));
                    }
                }
            }
            ((max_mn * max_mn) as u64, max_ratio, violation)
        })
        .collect();
    let mut report = WeilReport {
        checked: 0,
        max_ratio: 0.0,
        first_violation: None,
    };
    for (count, ratio, violation) in per_c {
        report.checked += count;
        report.max_ratio = report.max_ratio.max(ratio);
        if report.first_violation.is_none() {
            report.first_violation = violation;
        }
    }
    report
}

/// Which r2 identity failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum R2Identity {
    CharacterSum,
    Doubling,
    Quadrupling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R2IdentityReport {
    pub max_index: usize,
    pub passed: bool,
    pub first_counterexample: Option<(R2Identity, usize)>,
}

/// Checks r2(n) = 4 sum_{d|n} chi4(d), r2(2n) = r2(n) and r2(4n) = r2(n).
pub fn verify_r2_identities(n: usize) -> Result<R2IdentityReport> {
    let r2 = sieve_r2(n)?;
    let r2 = r2.as_integers().expect("integer table");
    // Independent route: divisor loop over chi4.
    let mut chi_sum = vec![0i64; n + 1];
    for d in 1..=n {
        let x = chi4(d as i64) as i64;
        if x == 0 {
            continue;
        }
        for m in (d..=n).step_by(d) {
            chi_sum[m] += x;
        }
    }
    let mut first = None;
    for k in 1..=n {
        if r2[k] as i64 != 4 * chi_sum[k] {
            first = Some((R2Identity::CharacterSum, k));
            break;
        }
        if 2 * k <= n && r2[2 * k] != r2[k] {
            first = Some((R2Identity::Doubling, k));
            break;
        }
        if 4 * k <= n && r2[4 * k] != r2[k] {
            first = Some((R2Identity::Quadrupling, k));
            break;
        }
    }
    Ok(R2IdentityReport {
        max_index: n,
        passed: first.is_none(),
        first_counterexample: first,
    })
}
