//! Continuum variational problem: bi-harmonic cubics, segment energies with a
//! zero-set reward `τ`, and the minimiser sets selected as `τ` varies.

mod classify;
mod cubic;
mod descriptor;
mod segment;

pub use classify::{
    classify_dirichlet, classify_dirichlet_symmetric, classify_free, Candidate, PhaseReport, TIE_TOLERANCE,
};
pub use cubic::{biharmonic_minimiser, BiHarmonic, CubicMinimiser};
pub use descriptor::{build_profile, sigma, sigma_free, MinimiserDescriptor, MinimiserKind, ProfileSamples};
pub use segment::{
    critical_lengths, delta_tau, ell1, ell2, segment_energy_derivative, segment_energy_tau, tau0, tau_max,
    tau_star, tau_star_symmetric, zero_count, Branch, CriticalLength,
};
