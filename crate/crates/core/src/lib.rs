//! Angle-resolved RABBIT photoelectron interferometry simulator.
//!
//! The crate composes one- and two-photon partial-wave ionization pathways,
//! evaluates delay-dependent angular distributions (beta_LM expansions) and
//! yields, and builds velocity-map-imaging volumes and projections.
//!
//! Atomic units are used internally (hbar = m_e = e = 1); energies at the
//! public surface are in eV unless a name says otherwise.

pub mod angular;
pub mod cli;
pub mod error;
pub mod fields;
pub mod matrix_elements;
pub mod observables;
pub mod special;
pub mod vmi;
pub mod wavefunction;

pub use error::{Error, Result};

/// Hartree energy in eV.
pub const HARTREE_EV: f64 = 27.211_386_245_988;
