//! Input modeling from data: parametric fits, kernel smoothing, goodness of fit
//! and Bayesian calibration.

mod fit;
mod gof;
mod kernel;
mod mh;

pub use fit::{fit_mle, fit_moments, log_likelihood, Family, FitMethod, FitResult};
pub use gof::{
    ad_test, chi2_test, default_bin_count, henry_line_data, kolmogorov_cdf, kolmogorov_limit,
    ks_statistic, ks_test, qq_plot_data, qq_two_samples, HenryLine, TestResult,
};
pub use kernel::{kernel_smooth, silverman_bandwidth, KernelDensity};
pub use mh::{mh_calibrate, McmcResult, McmcSettings, Observations};
