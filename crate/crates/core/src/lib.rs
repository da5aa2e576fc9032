//! Propagation of quantum states of light through one-dimensional
//! tight-binding waveguide lattices.
//!
//! Two engines compute the same observables by independent routes:
//!
//! * [`moments`] evolves the initial second and fourth moments through the
//!   one-photon transfer matrix of [`spectral`] (Heisenberg picture).
//! * [`fockspace`] builds the many-photon Hamiltonian in a truncated
//!   occupation basis and evolves amplitudes sector by sector (Schrödinger
//!   picture). Only this engine yields fidelities.
//!
//! [`lattice`] holds the parameter sets, [`states`] the initial states in
//! both representations, and [`config`], [`trace`] and [`verify`] the
//! machinery behind the command-line tool.

pub mod config;
pub mod error;
pub mod fockspace;
pub mod lattice;
pub mod moments;
pub mod presets;
pub mod spectral;
pub mod states;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{CouplerParams, LatticeSpec};
pub use spectral::{Spectrum, TransferMatrix};
pub use states::{FockBasis, FockState, MomentSet};
