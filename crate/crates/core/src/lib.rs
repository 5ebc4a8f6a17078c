//! Numerical laboratory for the (1+1)-dimensional Gaussian Laplacian
//! pinning model.
//!
//! * [`model`]: Hamiltonian, banded precision matrices, partition functions,
//!   discrete bi-harmonic minimisers and covariances.
//! * [`variational`]: continuum minimisers, critical lengths and the phase
//!   classification of rate-function minimisers.
//! * [`sampler`]: exact Gaussian samplers and the heat-bath chain for the
//!   pinned Gibbs measure.
//! * [`free_energy`]: subset enumeration and thermodynamic integration.
//! * [`ldp`]: rescaled energies, Γ-convergence tables, rate functions and
//!   concentration experiments.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod free_energy;
pub mod ldp;
pub mod model;
pub mod sampler;
pub mod variational;

pub use error::{Error, Result};
