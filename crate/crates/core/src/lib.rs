//! Macroscopic quantum superpositions in isolated spin-1/2 chains.
//!
//! The crate evaluates the variance-based macroscopicity M(|ψ⟩) (the largest
//! variance of a sum of single-site spin observables) for states evolving
//! under disordered Heisenberg/XXZ Hamiltonians, compares time averages with
//! thermal ensembles, and provides the l-bit picture of localized dynamics.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the experiment
//! layer uses.

pub mod dynamics;
pub mod error;
pub mod lbits;
pub mod macroscopicity;
pub mod models;
pub mod observable;
pub mod oracle;
pub mod scalar;
pub mod seed;
pub mod spin;
pub mod thermal;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spin::{Axis, DEFAULT_MAX_SITES};

pub type StateVector = spin::StateVector<f64>;
pub type DirectionField = spin::DirectionField<f64>;
pub type CorrelationMatrix = spin::CorrelationMatrix<f64>;
pub type ModelParams = models::ModelParams<f64>;
pub type DisorderRealization = models::DisorderRealization<f64>;
pub type Hamiltonian = models::Hamiltonian<f64>;
pub type EigenDecomposition = dynamics::EigenDecomposition<f64>;
pub type SpectralState<'a> = dynamics::SpectralState<'a, f64>;
pub type MacroResult = macroscopicity::MacroResult<f64>;
pub type EthReport = thermal::EthReport<f64>;
pub type LbitModel = lbits::LbitModel<f64>;
pub type LbitAxes = lbits::LbitAxes<f64>;

/// Crate version, recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
