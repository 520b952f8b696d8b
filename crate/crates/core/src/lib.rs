//! Hermite-spectrum activation design, edge-of-chaos diagnostics, deep echo
//! state networks with evolved architecture, and small MLP experiments.
//!
//! The spectral and dynamical layers are generic over [`Scalar`]; the
//! aliases below fix the common precisions. Reservoirs, training and the
//! optimiser run in `f64`.

pub mod activations;
pub mod data;
pub mod dynamics;
pub mod esn;
pub mod error;
pub mod hermite;
pub mod mlp;
pub mod optim;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Spectrum = hermite::HermiteSpectrum<f64>;
pub type Spectrum32 = hermite::HermiteSpectrum<f32>;
pub type Activation = activations::ActivationFn<f64>;
pub type Activation32 = activations::ActivationFn<f32>;
pub type Net = dynamics::LayeredNet<f64>;
pub type Net32 = dynamics::LayeredNet<f32>;
