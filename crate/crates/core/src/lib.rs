//! Linear-optics simulation of the heralded nonlinear sign-shift.
//!
//! Photons live in a sparse Fock basis over labelled modes ([`fock`]);
//! optical elements are mode unitaries ([`elements`]); multi-photon states are
//! evolved with matrix permanents and checked against a direct polynomial
//! expansion ([`evolve`]). Partial distinguishability is modelled with an
//! extra temporal slot for the ancilla ([`distinguish`]), and [`experiments`]
//! wires everything into the two-pass down-conversion setup with its
//! delay and phase sweeps. [`cli`] is the command-line front end.
//!
//! ```
//! use nsgate::elements::Reflectivity;
//! use nsgate::evolve::{ns_amplitude, ns_pipeline};
//!
//! let half = Reflectivity::HALF;
//! // |0_V; 2_H> picks up a sign, heralded with probability 1/8
//! let result = ns_pipeline(0, 2, half, half).unwrap();
//! assert!((result.probability - 0.125).abs() < 1e-12);
//! assert!(ns_amplitude(2, half) < 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distinguish;
pub mod elements;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod fock;

pub use error::{Error, Result};
