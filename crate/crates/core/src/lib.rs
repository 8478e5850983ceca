//! Simulation and analysis of spin-correlation readout in optical lattices by
//! off-resonant light scattering.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: lattice description, detector/laser frames, the coupling
//!   matrix between photon polarizations and spin components, and the
//!   momentum-coverage gate.
//! * [`spinwave`]: Holstein–Primakoff ground state of the transverse-field
//!   ferromagnet, plus an exact-diagonalization oracle for small chains.
//! * [`dynamics`]: radiative evolution of momentum-space spin operators and
//!   the photon-counting observables built on it.
//! * [`detection`]: homodyne quadratures, spin-component inversion and the
//!   repetition noise model.
//! * [`reconstruction`]: inverse-Fourier assembly of position-space operators
//!   and correlation tables from momentum-grid samples.
//! * [`cluster`]: dense state-vector cluster states, stabilizers and
//!   multi-point momentum correlators.
//!
//! [`pauli`] and [`quadrature`] are shared numerical cores.

pub mod cluster;
pub mod detection;
pub mod dynamics;
pub mod geometry;
pub mod pauli;
pub mod quadrature;
pub mod reconstruction;
pub mod spinwave;

pub use geometry::{Axis, Contraction, CouplingMatrix, LatticeSpec, ScatterGeometry};
pub use spinwave::{ModelParams, MomentumCorrelation};

/// Artifact version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
