//! Exact finite-N Gaussian algebra for the Laplacian field.

mod banded;
mod field;
mod gaussian;

pub use banded::{BandedLdl, BandedPrecision};
pub use field::{free_sites, BoundaryData, LatticeField, PinningSet};
pub use gaussian::{
    discrete_minimiser, field_variance, hamiltonian, log_det_closed_form, log_partition_bc,
    log_partition_zero, precision_matrix, total_hamiltonian, LatticeHessian, PinnedGaussian,
};
