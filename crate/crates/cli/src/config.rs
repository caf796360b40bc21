//! Run configuration: defaults, overridden by a flat `key = value` file,
//! then by environment variables and flags.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use shiftconv_core::arith::DEFAULT_MEMORY_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A (s, w) evaluation point.
pub type Point = (Complex64, Complex64);

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub memory_budget: u64,
    pub workers: usize,
    pub format: OutputFormat,
    /// Absolute slack added to the tail bound in `series compare`.
    pub tolerance_series: f64,
    /// Relative error estimate accepted by `special eval`.
    pub tolerance_special: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub per_decade: usize,
    pub points: Vec<Point>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            workers: 1,
            format: OutputFormat::Csv,
            tolerance_series: 1e-12,
            tolerance_special: 1e-8,
            x_min: 1e3,
            x_max: 1e5,
            per_decade: 16,
            points: Vec::new(),
        }
    }
}

pub const KEYS: [&str; 9] = [
    "memory_budget",
    "workers",
    "format",
    "tolerance.series",
    "tolerance.special",
    "grid.x_min",
    "grid.x_max",
    "grid.per_decade",
    "series.points",
];

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::default().apply_text(&text)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(mut self, text: &str) -> Result<Self, String> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), i).is_some() {
                return Err(format!("config line {}: duplicate key {key}", i + 1));
            }
            self.set(key, value).map_err(|e| format!("config line {}: {e}", i + 1))?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "memory_budget" => self.memory_budget = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "format" => {
                self.format = <OutputFormat as clap::ValueEnum>::from_str(value, true)
                    .map_err(|_| format!("format must be csv or json, got {value}"))?
            }
            "tolerance.series" => self.tolerance_series = parse(key, value)?,
            "tolerance.special" => self.tolerance_special = parse(key, value)?,
            "grid.x_min" => self.x_min = parse(key, value)?,
            "grid.x_max" => self.x_max = parse(key, value)?,
            "grid.per_decade" => self.per_decade = parse(key, value)?,
            "series.points" => {
                self.points = value
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(parse_point)
                    .collect::<Result<_, _>>()?
            }
            _ => return Err(format!("unknown key {key}; known keys: {}", KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        if !(self.tolerance_series > 0.0 && self.tolerance_special > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.per_decade == 0 {
            return Err("grid.per_decade must be positive".into());
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value for {key}: {value}"))
}

/// `re,im` (or a bare real number).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("invalid number {s:?} in {text:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im but got {text:?}")),
    }
}

/// `re_s,im_s,re_w,im_w`.
pub fn parse_point(text: &str) -> Result<Point, String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("invalid number {s:?} in point {text:?}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c, d] => Ok((Complex64::new(*a, *b), Complex64::new(*c, *d))),
        _ => Err(format!("a point is re_s,im_s,re_w,im_w; got {text:?}")),
    }
}
