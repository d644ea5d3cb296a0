//! Uncertainty quantification toolkit.
//!
//! The crate follows the usual pipeline: describe the model (`model`), model the
//! input uncertainty (`dist`, `joint`, `estimation`, `process`), propagate it
//! (`propagation`), rank the inputs (`sensitivity`) and replace expensive models by
//! surrogates (`metamodel`).

pub mod design;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod flood;
pub mod joint;
pub mod metamodel;
pub mod model;
pub mod numeric;
pub mod optim;
pub mod process;
pub mod propagation;
pub mod rng;
pub mod sample;
pub mod sensitivity;
pub mod transform;
pub mod wrapper;

pub use error::{Error, Result};
pub use model::{GradientPolicy, Model};
pub use rng::RngStream;
pub use sample::Sample;
