//! Simulation kernel for a quantum bouncing ball with internal structure.
//!
//! A particle bounces on a perfect mirror in a uniform gravitational field.
//! Its center-of-mass eigenstates are shifted Airy functions; internal
//! energy levels contribute to the inertial/gravitational mass, so a thermal
//! population of internal levels dephases superpositions of bounce states.
//! This crate provides:
//!
//! * [`airy`] — Ai, Ai′ and the negative-axis zeros, self-contained;
//! * [`basis`] — physical parameters, derived scales, truncated eigenbasis;
//! * [`operators`] — adaptive quadrature and matrix elements (position,
//!   kinetic, mass-coupling);
//! * [`perturbation`] — first-order corrections from the internal-level
//!   mass shift, with a dense-diagonalization cross-check;
//! * [`thermal`] — internal spectra, Boltzmann weights, energy cumulants;
//! * [`evolution`] — reduced density-matrix propagation (exact thermal sum,
//!   first-order phases, cumulant damping), observables, revival detection.

pub mod airy;
pub mod basis;
mod dd;
pub mod error;
pub mod evolution;
pub mod operators;
pub mod perturbation;
pub mod thermal;

pub use error::CoreError;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, CoreError>;
