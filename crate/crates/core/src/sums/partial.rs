use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelSign, SmoothingKernel};
use crate::arith::{ArithmeticTable, Sieve};
use crate::error::{Error, Result};
use crate::quad::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumMode {
    Sharp,
    SmoothedPlus,
    SmoothedMinus,
}

/// Partial sums S(X; w, h) on an increasing grid of X values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumSeries {
    h: u64,
    w: Complex64,
    grid: Vec<f64>,
    values: Vec<Complex64>,
    mode: SumMode,
    y_param: Option<f64>,
}

impl PartialSumSeries {
    pub fn new(
        h: u64,
        w: Complex64,
        grid: Vec<f64>,
        values: Vec<Complex64>,
        mode: SumMode,
        y_param: Option<f64>,
    ) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Contract(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::Contract("grid must be strictly increasing".into()));
        }
        if mode != SumMode::Sharp && !y_param.is_some_and(|y| y > 1.0) {
            return Err(Error::Contract("smoothed sums need y > 1".into()));
        }
        Ok(Self {
            h,
            w,
            grid,
            values,
            mode,
            y_param,
        })
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn mode(&self) -> SumMode {
        self.mode
    }

    pub fn y_param(&self) -> Option<f64> {
        self.y_param
    }

    /// CSV with header `X,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("X,re,im\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{:.16e},{:.16e}\n", v.re, v.im));
        }
        out
    }
}

/// Integer-valued grid, `per_decade` points per decade from `x_min` to
/// `x_max` inclusive, rounded and de-duplicated.
pub fn log_grid(x_min: f64, x_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(x_min >= 1.0 && x_max > x_min) || per_decade == 0 {
        return Err(Error::Contract("grid needs 1 <= x_min < x_max and a positive density".into()));
    }
    let (l0, l1) = (x_min.log10(), x_max.log10());
    let steps = ((l1 - l0) * per_decade as f64).round() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|k| 10f64.powf(l0 + (l1 - l0) * k as f64 / steps.max(1) as f64).round())
        .collect();
    grid.dedup();
    Ok(grid)
}

enum SigmaTable {
    Divisor(ArithmeticTable),
    Complex(ArithmeticTable),
}

/// r2 and sigma_{1-2w} tables for partial sums with shift h up to `max_x`.
/// At w = 1/2 sigma_0 = d is kept as integers so sums are exact.
pub struct SumTables {
    h: u64,
    w: Complex64,
    max_x: u64,
    r2: ArithmeticTable,
    sigma: SigmaTable,
}

impl SumTables {
    pub fn new(sieve: &Sieve, w: Complex64, h: u64, max_x: u64) -> Result<Self> {
        if h == 0 {
            return Err(Error::Contract("shift h must be positive".into()));
        }
        let top = max_x.max(h + 1) as usize;
        let r2 = sieve.r2(top - h as usize)?;
        let sigma = if w == Complex64::new(0.5, 0.0) {
            SigmaTable::Divisor(sieve.divisor_count(top)?)
        } else {
            SigmaTable::Complex(sieve.sigma(top, Complex64::new(1.0, 0.0) - w * 2.0)?)
        };
        Ok(Self {
            h,
            w,
            max_x: top as u64,
            r2,
            sigma,
        })
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn max_x(&self) -> u64 {
        self.max_x
    }

    fn r2(&self) -> &[u32] {
        self.r2.as_integers().expect("integer r2 table")
    }

    /// r2(m) sigma_{1-2w}(m + h).
    #[inline]
    fn term(&self, m: usize) -> Complex64 {
        let r = self.r2()[m];
        if r == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = m + self.h as usize;
        match &self.sigma {
            SigmaTable::Divisor(t) => Complex64::new(r as f64 * t.as_integers().expect("integers")[k] as f64, 0.0),
            SigmaTable::Complex(t) => t.as_complex().expect("complex")[k] * r as f64,
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) || x.floor() > self.max_x as f64 {
            return Err(Error::Contract(format!("X = {x} outside the sieved range (max {})", self.max_x)));
        }
        Ok(())
    }

    /// Exact S(X; 1/2, h) = sum_{m + h <= X} r2(m) d(m + h) in 64-bit integers.
    pub fn sharp_exact(&self, x: f64) -> Result<u64> {
        self.check_x(x)?;
        let d = match &self.sigma {
            SigmaTable::Divisor(t) => t.as_integers().expect("integers"),
            SigmaTable::Complex(_) => return Err(Error::Contract("exact sums need w = 1/2".into())),
        };
        let xf = x.floor() as u64;
        if xf < self.h {
            return Ok(0);
        }
        let r2 = self.r2();
        let h = self.h as usize;
        let mut acc = 0u64;
        for m in 0..=(xf - self.h) as usize {
            let t = (r2[m] as u64)
                .checked_mul(d[m + h] as u64)
                .ok_or(Error::Overflow("exact partial sum"))?;
            acc = acc.checked_add(t).ok_or(Error::Overflow("exact partial sum"))?;
        }
        Ok(acc)
    }

    /// S(X; w, h); X < h gives 0.
    pub fn sharp(&self, x: f64) -> Result<Complex64> {
        if matches!(self.sigma, SigmaTable::Divisor(_)) {
            return Ok(Complex64::new(self.sharp_exact(x)? as f64, 0.0));
        }
        self.check_x(x)?;
        let xf = x.floor() as u64;
        if xf < self.h {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut s = CompensatedSum::new();
        for m in 0..=(xf - self.h) as usize {
            s.add(self.term(m));
        }
        Ok(s.value())
    }

    /// Sharp sums on a whole grid in one cumulative pass.
    pub fn sharp_series(&self, grid: &[f64]) -> Result<PartialSumSeries> {
        if let Some(&last) = grid.last() {
            self.check_x(last)?;
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut next_m = 0usize;
        let exact = matches!(self.sigma, SigmaTable::Divisor(_));
        let mut acc_int = 0u64;
        let mut acc = CompensatedSum::new();
        for &x in grid {
            self.check_x(x)?;
            let xf = x.floor() as u64;
            if xf >= self.h {
                let end = (xf - self.h) as usize;
                while next_m <= end {
                    if exact {
                        let t = self.term(next_m).re as u64;
                        acc_int = acc_int.checked_add(t).ok_or(Error::Overflow("exact partial sum"))?;
                    } else {
                        acc.add(self.term(next_m));
                    }
                    next_m += 1;
                }
            }
            values.push(if exact {
                Complex64::new(acc_int as f64, 0.0)
            } else {
                acc.value()
            });
        }
        PartialSumSeries::new(self.h, self.w, grid.to_vec(), values, SumMode::Sharp, None)
    }

    /// S_{+-y}(X) = sum_m r2(m) sigma_{1-2w}(m+h) u((m+h)/X).
    pub fn smoothed(&self, x: f64, kernel: &SmoothingKernel) -> Result<Complex64> {
        if !(x > 0.0) {
            return Err(Error::Contract("X must be positive".into()));
        }
        let end = x * kernel.support_end();
        self.check_x(end.ceil())?;
        let plateau = x * kernel.transition_start();
        // Terms with m + h <= plateau carry weight exactly 1.
        let flat = self.sharp(plateau)?;
        let first = (plateau.floor() as u64 + 1).max(self.h);
        let last = end.ceil() as u64;
        let mut s = CompensatedSum::new();
        for k in first..=last {
            let u = kernel.eval(k as f64 / x);
            if u > 0.0 {
                s.add(self.term((k - self.h) as usize) * u);
            }
        }
        Ok(flat + s.value())
    }

    pub fn smoothed_series(&self, grid: &[f64], kernel: &SmoothingKernel) -> Result<PartialSumSeries> {
        let values = grid.iter().map(|&x| self.smoothed(x, kernel)).collect::<Result<Vec<_>>>()?;
        let mode = match kernel.sign() {
            KernelSign::Plus => SumMode::SmoothedPlus,
            KernelSign::Minus => SumMode::SmoothedMinus,
        };
        PartialSumSeries::new(self.h, self.w, grid.to_vec(), values, mode, Some(kernel.y()))
    }
}

/// S(X; w, h) with freshly sieved tables.
pub fn partial_sum_sharp(x: f64, w: Complex64, h: u64) -> Result<Complex64> {
    let tables = SumTables::new(&Sieve::default(), w, h, x.floor().max(0.0) as u64)?;
    tables.sharp(x)
}

/// S_{+-y}(X; w, h) with freshly sieved tables.
pub fn partial_sum_smoothed(x: f64, kernel: &SmoothingKernel, w: Complex64, h: u64) -> Result<Complex64> {
    let top = (x * kernel.support_end()).ceil() as u64 + 1;
    let tables = SumTables::new(&Sieve::default(), w, h, top)?;
    tables.smoothed(x, kernel)
}
