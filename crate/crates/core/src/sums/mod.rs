//! Shifted-convolution partial sums, smoothing kernels and main-term fits.

mod fit;
mod kernel;
mod partial;

pub use fit::{
    extract_phi, fit_main_terms, fit_main_terms_with, FitModel, FitReport, PhiEstimate, PhiValue,
    ResidualStatus, WindowEstimate, FIT_REPORT_SCHEMA, PHI_HALF_PLUS_W, PHI_ONE, PHI_PRIME_ONE,
    PHI_THREE_HALF_MINUS_W, X_COEFFICIENT_AGGREGATE,
};
pub use kernel::{kernel_eval, mellin_u, transition, transition_derivative, KernelSign, SmoothingKernel};
pub use partial::{log_grid, partial_sum_sharp, partial_sum_smoothed, PartialSumSeries, SumMode, SumTables};
