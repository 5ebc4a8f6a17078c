//! Free energy `τ(ε)`: exact enumeration for small `N`, thermodynamic integration beyond.

mod enumeration;
mod integration;

pub use enumeration::{pin_set_distribution, ratio_exact, subset_log_weights, RatioPolynomial, RatioTable, MAX_EXACT_N};
pub use integration::{
    bracket_critical, critical_region_scan, tau_estimate, tau_estimate_at, BranchEstimate, ChainBudget, DensityNode,
    DensityRow, IntegrationBranch, TauEstimate, TauExtrapolation,
};
