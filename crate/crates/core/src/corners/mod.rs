//! Corner kernels and constants, slope extraction, trace comparison and the
//! asymptotics of Grunsky coefficients near corners.

mod fit;
mod kernels;
mod traces;

pub use fit::{fit_log_slope, AsymptoticFit, FitMethod};
pub use kernels::{
    corner_anomaly_by_quadrature, corner_sum, corner_sum_values, f_rho, finalintegral, hp, hp_hat, hp_hat_decay,
    hp_hat_numeric, kernel_k, kernel_kp, predicted_trace_constant, trace_constant_series, trace_constant_single,
    AngleMode,
};
pub use traces::{
    f_rho_ratio, harmonic, kernel_square_eigenvalues, kernel_trace_excess, residual_bkl_as, residual_bound,
    trace_compare, trace_compare_many, xi_approx_check, ResidualEntry, ResidualReport, TraceComparison, TraceRow,
};
