//! Discrete time-bin model of photon-number engineering in a
//! path-unbalanced Mach-Zehnder interferometer fed by a pulsed
//! single-photon source.
//!
//! The crate is organized in layers:
//!
//! - [`fock`] — truncated Fock-space linear algebra over labeled bosonic
//!   modes: pure and mixed states, tensor composition, partial trace,
//!   normally ordered moments.
//! - [`seed`] — per-bin input states from excitation parameters (pulse
//!   area, purity) and the power-to-pulse-area calibration curve.
//! - [`interferometer`] — operator-level beam-splitter and delay
//!   transforms, the exact multi-bin joint output state, the one-bin
//!   memory channel form, and the dual-source HOM geometry.
//! - [`analytic`] — closed forms for populations, correlations,
//!   photon-number probability landscapes, visibility, and accessible
//!   ranges.
//! - [`oracle`] — brute-force exact observables from the full multi-bin
//!   state; the ground truth the closed forms are checked against.
//! - [`sampler`] — Monte Carlo generation of detector time-tag streams
//!   by sequential Born-rule measurement with a one-bin quantum memory.
//! - [`correlator`] — coincidence histograms, side-peak-normalized
//!   correlations, HOM visibility, and fringe-scan fits.
//! - [`extraction`] — inversion from measured rates and correlations to
//!   photon-number probabilities, plus the three-photon bound.
//!
//! The crate is `no_std` (alloc required); IO and file formats live in
//! the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytic;
pub mod correlator;
pub mod error;
pub mod extraction;
pub mod fock;
pub mod interferometer;
mod math;
pub mod oracle;
pub mod sampler;
pub mod seed;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
