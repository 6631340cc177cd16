//! Simulation and analysis of long-time revival structure in Rydberg wave
//! packets.
//!
//! The crate is organised bottom-up:
//!
//! * [`units`] converts between atomic time units and nanoseconds.
//! * [`spectrum`] holds the energy models (hydrogen or quantum defect) and the
//!   classical, revival and superrevival time scales derived from them.
//! * [`packet`] evaluates the autocorrelation of Gaussian-weighted eigenstate
//!   superpositions, both exactly and with the third-order phase model.
//! * [`revival`] detects peaks in an autocorrelation trace, estimates local
//!   periodicities and labels revivals and superrevivals.
//! * [`hydrogenic`] evaluates normalised hydrogen radial eigenfunctions at
//!   large `n` and projects radial functions onto them.
//! * [`squeezed`] builds radial squeezed states, fits their parameters to an
//!   orbit and follows their evolution in the eigenbasis.
//! * [`defectlab`] contrasts quantum defects with laser detuning.
//! * [`cli`] is the command-line front end.
//!
//! All physics runs in atomic units; nanoseconds appear only at I/O edges.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes are kept as published.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod defectlab;
mod error;
pub mod format;
pub mod hydrogenic;
pub mod numerics;
pub mod packet;
pub mod revival;
pub mod spectrum;
pub mod squeezed;
pub mod units;

pub use error::{Error, Result};
