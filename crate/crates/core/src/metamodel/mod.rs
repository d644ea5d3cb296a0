//! Surrogate models: polynomial chaos, kriging and Taylor or regression surrogates.

mod chaos;
mod enumeration;
mod family;
mod kriging;
mod surrogate;

pub use chaos::{
    chaos_fit, chaos_sobol, ChaosExpansion, ChaosMeasure, ChaosSettings, ChaosSobol, ChaosTransform, Projection,
    Truncation,
};
pub use enumeration::{cumulated_cardinal, enumerate_multi_indices, Enumeration};
pub use family::OrthonormalFamily;
pub use kriging::{kriging_fit, kriging_predict, CovarianceKind, KrigingModel, KrigingSettings, Trend};
pub use surrogate::{linear_least_squares_surrogate, taylor_surrogate};
