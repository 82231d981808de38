//! Gaussian-state simulation of an accelerated harmonic-oscillator detector
//! coupled to a massless scalar field in a one-dimensional cavity.
//!
//! The non-perturbative engine evolves the joint covariance matrix of the
//! detector and a truncated set of cavity modes; the perturbative engine
//! sums first-order transition probabilities over many more modes. Both feed
//! the thermality and temperature analysis used by acceleration sweeps.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod evolution;
pub mod gaussian;
pub mod integrator;
pub mod modes;
pub mod output;
pub mod perturbative;
pub mod quadrature;
pub mod sweep;
pub mod trajectory;

pub use config::{Engine, RunConfig};
pub use error::{Error, Result};
pub use evolution::InteractionModel;
pub use gaussian::{CovarianceMatrix, DetectorState, SymplecticMatrix};
pub use modes::{BoundaryCondition, CouplingScheme, ModeSet};
pub use trajectory::Worldline;
