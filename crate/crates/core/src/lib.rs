//! Gaussian and Gibbs measures on the torus, truncated Hamiltonian flows, and
//! the statistical experiments built on them.
//!
//! The layers, bottom up:
//!
//! - [`spectral`]: [`TorusField`], norms, transforms, dealiased products.
//! - [`random_fields`]: Fourier-Wiener samplers and their shifts.
//! - [`measures`]: Gibbs weights, Cameron-Martin densities, dichotomy criteria.
//! - [`pde`]: split-step NLS / Wick NLS and integrating-factor gKdV solvers.
//! - [`experiments`]: invariance, Cameron-Martin, large deviation studies.
//!
//! Every Monte Carlo routine is a pure function of its inputs and a
//! [`RandomSeed`]; results do not depend on the rayon thread count.

pub mod error;
pub mod experiments;
mod fft;
pub mod measures;
pub mod pde;
pub mod random_fields;
pub mod rng;
mod sign;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use random_fields::{Family, GaussianFieldSpec};
pub use rng::RandomSeed;
pub use sign::Sign;
pub use spectral::{GridConfig, TorusField};
