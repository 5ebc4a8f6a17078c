//! Numerical checks of the large-deviation statements: rescaled energies,
//! Γ-convergence tables, Mogulskii rates and concentration on minimiser sets.

mod concentration;
mod energy;
mod rate;

pub use concentration::{concentration_experiment, distance_to_set, ConcentrationReport, ConcentrationRow};
pub use energy::{
    gamma_convergence_check, gamma_table, rescaled_energy, smooth_test_profiles, GammaReport, GammaRow,
    SmoothProfile,
};
pub use rate::{mogulskii_rate, LegendreConjugate, RateEvaluation};
