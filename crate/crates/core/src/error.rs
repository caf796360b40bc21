use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the evaluators, sieves and fitting pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The argument sits on (or numerically at) a pole of the function.
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: Complex64 },

    /// A documented precondition was not met by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A table or sum would exceed the configured memory budget.
    #[error("memory budget exceeded: {requested} bytes requested, limit is {limit} bytes")]
    Budget { requested: u64, limit: u64 },

    /// A truncated series cannot certify the requested accuracy at this cutoff.
    #[error("tail bound {tail_bound:e} exceeds target {target:e} at cutoff {cutoff}; try cutoff >= {suggested}")]
    Truncation {
        cutoff: u64,
        tail_bound: f64,
        target: f64,
        suggested: u64,
    },

    /// The spectral point lies outside the region where the series converges.
    #[error("outside the region of absolute convergence: {0}")]
    Region(String),

    /// A lattice sum was requested at an exponent where it diverges.
    #[error("coset sum diverges for Re w = {re_w} (need Re w > 1)")]
    Divergence { re_w: f64 },

    /// The least-squares design is numerically rank deficient.
    #[error("ill-conditioned design: {0}")]
    Conditioning(String),

    /// Parameters outside the implemented region of an evaluator.
    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    /// Quadrature or iteration failed to reach its target.
    #[error("no convergence in {0}")]
    NoConvergence(&'static str),

    /// Integer overflow during exact accumulation.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
