//! Numerical laboratory for a free Majorana chain coupled to an SYK-type cluster.
//!
//! The chain carries quasiparticles with a finite light cone while the cluster
//! scrambles in logarithmic time. Modules cover closed-form correlators, the
//! conformal and large-q analyses, imaginary-time and replica-contour
//! Schwinger–Dyson solvers, exact small-system oracles, and the black-hole cell
//! model estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell_model;
pub mod conformal_bath;
pub mod ed_oracle;
pub mod error;
pub mod free_chain;
pub mod large_q;
pub mod numerics;
pub mod params;
pub mod quench_renyi;
pub mod sd_equilibrium;

pub use error::{LcError, Result};
pub use params::{ChainParams, ConformalBath, LargeQParams, ModelParams, Momentum, SolverOptions};

pub use num_complex::Complex64;
