//! Adiabatic single-electron transfer through an `N`-site tight-binding chain
//! whose two end sites are driven by Gaussian gate pulses.
//!
//! Starting with the electron on site 1, the pulse on site 1 is switched off
//! while the pulse on site N is switched on. If the sweep is slow compared to
//! the inverse of the smallest ground-state gap, the electron follows the
//! instantaneous ground state and ends up on site N.
//!
//! * [`chain_model`]: chain geometry, disorder, pulses and `H(t)`.
//! * [`spectral`]: instantaneous spectra, gaps, bound states, adiabaticity.
//! * [`propagator`]: time evolution and transfer fidelity.
//! * [`experiments`]: parameter sweeps and their CSV output.
//! * [`fit`]: least-squares line and parabola fits.

pub mod chain_model;
mod error;
pub mod experiments;
pub mod fit;
pub mod propagator;
pub mod spectral;
pub mod tridiag;

pub use chain_model::{
    hamiltonian_at, sample_disordered_couplings, ChainSpec, DisorderSpec, PulseSchedule,
};
pub use error::{Error, Result};
pub use propagator::{evolve, StateVector, Trajectory};
pub use spectral::{eigensystem, min_gap, SpectrumSample};
pub use tridiag::SymTridiagonal;
