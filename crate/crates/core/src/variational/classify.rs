//! Minimiser sets of the rate function over the piecewise-cubic candidate family.

use serde::{Deserialize, Serialize};

use super::descriptor::{sigma, MinimiserDescriptor};
use super::segment::{critical_lengths, sign_product, tau0, tau_star, tau_star_symmetric, Branch, CriticalLength};
use crate::error::{domain, Result};
use crate::model::BoundaryData;

/// Relative tolerance on Σ under which candidates count as coexisting.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub sigma: Option<f64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub tau: f64,
    pub minimisers: Vec<MinimiserDescriptor>,
    pub regime: String,
    pub degenerate: bool,
    pub sigma_min: f64,
    /// Every candidate considered, infeasible ones with `sigma = None`.
    pub candidates: Vec<Candidate>,
}

fn tied(x: f64, min: f64) -> bool {
    (x - min).abs() <= TIE_TOLERANCE * min.abs().max(1.0)
}

fn select(tau: f64, regime: String, pool: Vec<MinimiserDescriptor>, mut candidates: Vec<Candidate>) -> PhaseReport {
    let sigmas: Vec<f64> = pool.iter().map(|d| sigma(d, tau)).collect();
    let sigma_min = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    for (d, s) in pool.iter().zip(&sigmas) {
        candidates.push(Candidate {
            label: d.label(),
            sigma: Some(*s),
            feasible: true,
        });
    }
    let minimisers: Vec<MinimiserDescriptor> = pool
        .into_iter()
        .zip(&sigmas)
        .filter(|(_, s)| tied(**s, sigma_min))
        .map(|(d, _)| d)
        .collect();
    PhaseReport {
        tau,
        degenerate: minimisers.len() > 1,
        minimisers,
        regime,
        sigma_min,
        candidates,
    }
}

fn infeasible(cl: &CriticalLength, what: &str) -> Candidate {
    Candidate {
        label: format!("{what}{}(l={:.6})", cl.branch.index(), cl.value),
        sigma: None,
        feasible: false,
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        domain(format!("τ must be finite and non-negative, got {tau}"))
    }
}

fn lengths_or_empty(tau: f64, a: f64, alpha: f64) -> Vec<CriticalLength> {
    if tau > 0.0 {
        critical_lengths(tau, a, alpha).unwrap_or_default()
    } else {
        Vec::new()
    }
}

/// Order of `τ₀` against a branch-one threshold `t1`: `D1` above, `D2` equal, `D3` below.
fn two_branch_class(tau_zero: f64, t1: f64) -> &'static str {
    if tied(tau_zero, t1) {
        "D2"
    } else if tau_zero > t1 {
        "D1"
    } else {
        "D3"
    }
}

fn free_regime(a: f64, alpha: f64) -> String {
    if a == 0.0 && alpha == 0.0 {
        return "zero-boundary".into();
    }
    if sign_product(a, alpha) >= 0 {
        return "single-branch".into();
    }
    match tau0(a, alpha) {
        Ok(t0) => format!("two-branch-{}", two_branch_class(t0, tau_star(a, alpha, Branch::One))),
        Err(_) => "no-l2-branch".into(),
    }
}

/// Minimisers of `Σ_f` with a free right end, left data `(a, α)`.
pub fn classify_free(a: f64, alpha: f64, tau: f64) -> Result<PhaseReport> {
    check_tau(tau)?;
    BoundaryData::free_right(a, alpha).check_finite()?;
    let regime = free_regime(a, alpha);
    let mut pool = vec![MinimiserDescriptor::linear(a, alpha)];
    let mut rejected = Vec::new();
    for cl in lengths_or_empty(tau, a, alpha) {
        // ℓ = 1 reproduces the bi-harmonic profile with no reward and never beats ȟ
        if cl.feasible && cl.value < 1.0 {
            pool.push(MinimiserDescriptor::h_left(a, alpha, cl.value)?);
        } else if !cl.feasible {
            rejected.push(infeasible(&cl, "h_l"));
        }
    }
    Ok(select(tau, regime, pool, rejected))
}

/// Shape of the symmetric critical lengths relative to `1/2`.
fn symmetric_parameter_regime(lengths: &[CriticalLength]) -> &'static str {
    let l1 = lengths.iter().find(|c| c.branch == Branch::One).map(|c| c.value);
    let l2 = lengths.iter().find(|c| c.branch == Branch::Two).map(|c| c.value);
    match (l1, l2) {
        (Some(x), Some(y)) if x <= 0.5 && y > 0.5 && y <= 1.0 => "numeric-D2",
        (Some(x), Some(y)) if x <= 0.5 && y <= 0.5 => "both-half",
        (Some(x), None) if x <= 0.5 => "both-half",
        _ => "none-half",
    }
}

fn symmetric_regime(a: f64, alpha: f64, lengths: &[CriticalLength]) -> String {
    if a == 0.0 && alpha == 0.0 {
        return "zero-boundary".into();
    }
    let clause = if sign_product(a, alpha) >= 0 {
        "sym-single-branch".to_string()
    } else {
        match tau0(a, alpha) {
            Ok(t0) => format!(
                "sym-two-branch-{}",
                two_branch_class(t0, tau_star_symmetric(a, alpha, Branch::One))
            ),
            Err(_) => "sym-no-l2-branch".into(),
        }
    };
    if lengths.is_empty() {
        clause
    } else {
        format!("{clause};{}", symmetric_parameter_regime(lengths))
    }
}

fn pair_candidates(
    bc: &BoundaryData,
    left: &[CriticalLength],
    right: &[CriticalLength],
) -> Result<(Vec<MinimiserDescriptor>, Vec<Candidate>)> {
    let mut pool = Vec::new();
    let mut rejected = Vec::new();
    for li in left {
        for rj in right {
            let label = || Candidate {
                label: format!(
                    "h_lr{}{}(l={:.6},r={:.6})",
                    li.branch.index(),
                    rj.branch.index(),
                    li.value,
                    rj.value
                ),
                sigma: None,
                feasible: false,
            };
            if li.value + rj.value <= 1.0 {
                pool.push(MinimiserDescriptor::h_both(bc, li.value, rj.value)?);
            } else {
                rejected.push(label());
            }
        }
    }
    Ok((pool, rejected))
}

/// Minimisers of `Σ` for symmetric Dirichlet data `(a, α, a, -α)`.
pub fn classify_dirichlet_symmetric(a: f64, alpha: f64, tau: f64) -> Result<PhaseReport> {
    check_tau(tau)?;
    let bc = BoundaryData::symmetric(a, alpha);
    bc.check_finite()?;
    let lengths = lengths_or_empty(tau, a, alpha);
    let regime = symmetric_regime(a, alpha, &lengths);
    let (mut pool, rejected) = pair_candidates(&bc, &lengths, &lengths)?;
    pool.insert(0, MinimiserDescriptor::biharmonic(&bc)?);
    Ok(select(tau, regime, pool, rejected))
}

/// Numeric classification for arbitrary Dirichlet data over `{h*, h_{ℓ,r}}`.
pub fn classify_dirichlet(bc: &BoundaryData, tau: f64) -> Result<PhaseReport> {
    check_tau(tau)?;
    bc.check_finite()?;
    let mirror = bc.mirrored()?;
    let left = lengths_or_empty(tau, bc.a, bc.alpha);
    let right = lengths_or_empty(tau, mirror.a, mirror.alpha);
    let (mut pool, rejected) = pair_candidates(bc, &left, &right)?;
    pool.insert(0, MinimiserDescriptor::biharmonic(bc)?);
    let regime = if bc.is_zero() { "zero-boundary" } else { "numeric-general" };
    Ok(select(tau, regime.into(), pool, rejected))
}
