//! Simulation and analysis of limit tori in two coupled driven-dissipative
//! Kerr cavities: mean-field dynamics, truncated-Wigner ensembles, exact
//! small-cutoff Lindblad spectra and the dephasing/scaling analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fit;
pub mod fockspace;
pub mod meanfield;
pub mod melting;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod signal;
pub mod spectra;
pub mod twa;
pub mod wigner;

pub use error::{Error, Result};
