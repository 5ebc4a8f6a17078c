//! Thermodynamic-integration estimates of `τ_N(ε) = N⁻¹ log(Z_{N,ε}(0)/Z_N(0))`.
//!
//! With `D(u) = E_u|P|/N`:
//!
//! * lower branch: `τ_N(ε) = ∫₀^ε D(u) d log u`, chains started unpinned;
//! * upper branch: `τ_N(ε) = ((N-1)/N) log ε - log Z_N(0)/N + ∫_ε^∞ ((N-1)/N - D(u)) d log u`,
//!   chains started fully pinned.
//!
//! Both identities are exact. Near a first-order transition each branch's
//! chains stay on their own side, so each branch then underestimates `τ_N`
//! and the larger one is kept.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumeration::{RatioPolynomial, MAX_EXACT_N};
use crate::error::{domain, Result};
use crate::model::{log_partition_zero, BoundaryData, PinningSet};
use crate::sampler::{run_chain, InitialState, SamplerConfig, SweepOrder};

/// Chain effort per integration node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainBudget {
    pub sweeps: usize,
    pub burn_in: usize,
    pub replicas: u64,
    pub seed: u64,
    /// `m`: each branch uses `2m + 1` nodes.
    pub half_nodes: usize,
}

impl Default for ChainBudget {
    fn default() -> Self {
        ChainBudget {
            sweeps: 2000,
            burn_in: 200,
            replicas: 4,
            seed: 0,
            half_nodes: 16,
        }
    }
}

impl ChainBudget {
    fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return domain("budget sweeps must exceed burn-in");
        }
        if self.replicas < 2 {
            return domain("error bars need at least two replicas");
        }
        if 2 * self.half_nodes + 1 < 20 {
            return domain("integration needs at least 20 nodes (half_nodes ≥ 10)");
        }
        Ok(())
    }
}

/// Geometric span below `min(ε, 1)` covered by the lower branch.
const LOWER_SPAN: f64 = 1e-4;
/// Geometric span above `max(ε, 1)` covered by the upper branch.
const UPPER_SPAN: f64 = 1e4;
/// Replica standard error of a node density above which the node counts as unconverged.
const NODE_STDERR_LIMIT: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationBranch {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityNode {
    pub u: f64,
    pub density: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchEstimate {
    pub branch: IntegrationBranch,
    pub tau: f64,
    pub replica_stderr: f64,
    /// `|T_h - T_{2h}| / 3`
    pub discretisation: f64,
    pub nodes: Vec<DensityNode>,
}

impl BranchEstimate {
    pub fn stderr(&self) -> f64 {
        self.replica_stderr.hypot(self.discretisation)
    }

    pub fn unconverged_nodes(&self) -> usize {
        self.nodes.iter().filter(|n| n.stderr > NODE_STDERR_LIMIT).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub stderr: f64,
    /// Branches disagree by more than three combined standard errors.
    pub hysteresis: bool,
    /// Some node of a used branch exceeds the replica error limit.
    pub flagged: bool,
    pub lower: BranchEstimate,
    pub upper: BranchEstimate,
    /// `N⁻¹ log` ratio by enumeration when `N` is small enough.
    pub exact: Option<f64>,
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
        .collect()
}

fn trapezoid_log(u: &[f64], f: &[f64]) -> f64 {
    u.windows(2)
        .zip(f.windows(2))
        .map(|(uw, fw)| 0.5 * (fw[0] + fw[1]) * (uw[1] / uw[0]).ln())
        .sum()
}

fn every_other<T: Copy>(xs: &[T]) -> Vec<T> {
    xs.iter().step_by(2).copied().collect()
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

/// Mean pin densities `[node][replica]` for chains at every node.
fn node_densities(
    n: usize,
    grid: &[f64],
    budget: &ChainBudget,
    init: InitialState,
    stream_offset: u64,
) -> Result<Vec<Vec<f64>>> {
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|j| (0..budget.replicas).map(move |r| (j, r)))
        .collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(j, r)| {
            let mut c = SamplerConfig::new(n, BoundaryData::zero(), grid[j], budget.seed);
            c.sweeps = budget.sweeps;
            c.burn_in = budget.burn_in;
            c.thin = 1;
            c.replica = stream_offset + j as u64 * budget.replicas + r;
            c.order = SweepOrder::ForwardBackward;
            c.init = init;
            let (_, pin_fraction, _) = run_chain(&c)?.mean_fractions();
            Ok(pin_fraction)
        })
        .collect::<Result<_>>()?;
    Ok(values.chunks(budget.replicas as usize).map(<[f64]>::to_vec).collect())
}

fn branch_estimate(
    branch: IntegrationBranch,
    grid: Vec<f64>,
    per_node: Vec<Vec<f64>>,
    integral: impl Fn(&[f64], &[f64]) -> f64,
) -> BranchEstimate {
    let replicas = per_node[0].len();
    let per_replica: Vec<f64> = (0..replicas)
        .map(|r| {
            let f: Vec<f64> = per_node.iter().map(|v| v[r]).collect();
            integral(&grid, &f)
        })
        .collect();
    let means: Vec<f64> = per_node.iter().map(|v| mean_and_stderr(v).0).collect();
    let fine = integral(&grid, &means);
    let coarse = integral(&every_other(&grid), &every_other(&means));
    let (_, replica_stderr) = mean_and_stderr(&per_replica);
    BranchEstimate {
        branch,
        tau: fine,
        replica_stderr,
        discretisation: (fine - coarse).abs() / 3.0,
        nodes: grid
            .iter()
            .zip(&per_node)
            .map(|(&u, v)| {
                let (density, stderr) = mean_and_stderr(v);
                DensityNode { u, density, stderr }
            })
            .collect(),
    }
}

/// Thermodynamic-integration estimate of `τ_N(ε)` at one `N`, zero boundary data.
pub fn tau_estimate_at(n: usize, epsilon: f64, budget: &ChainBudget) -> Result<TauEstimate> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("τ estimate needs finite ε > 0, got {epsilon}"));
    }
    if n < 3 {
        return domain(format!("τ estimate needs N ≥ 3, got {n}"));
    }
    budget.validate()?;
    let count = 2 * budget.half_nodes + 1;
    let nf = n as f64;
    let full = (nf - 1.0) / nf;

    let lower_grid = geometric(epsilon.min(1.0) * LOWER_SPAN, epsilon, count);
    let lower_nodes = node_densities(n, &lower_grid, budget, InitialState::Gaussian, 0)?;
    // D(u) ∝ u near zero, so the tail below the grid integrates to D(u_min)
    let lower = branch_estimate(IntegrationBranch::Lower, lower_grid, lower_nodes, |u, f| {
        trapezoid_log(u, f) + f[0]
    });

    let upper_grid = geometric(epsilon, epsilon.max(1.0) * UPPER_SPAN, count);
    let offset = count as u64 * budget.replicas;
    let upper_nodes = node_densities(n, &upper_grid, budget, InitialState::Pinned, offset)?;
    let anchor = full * epsilon.ln() - log_partition_zero(n, &PinningSet::empty())? / nf;
    // unpinned density decays like 1/u, so the tail above the grid integrates to its last value
    let upper = branch_estimate(IntegrationBranch::Upper, upper_grid, upper_nodes, |u, f| {
        let gap: Vec<f64> = f.iter().map(|d| full - d).collect();
        anchor + trapezoid_log(u, &gap) + gap[gap.len() - 1]
    });

    let (sl, su) = (lower.stderr(), upper.stderr());
    let combined = sl.hypot(su);
    let hysteresis = (lower.tau - upper.tau).abs() > 3.0 * combined;
    let (tau, stderr, flagged) = if hysteresis {
        let chosen = if lower.tau >= upper.tau { &lower } else { &upper };
        (chosen.tau, chosen.stderr(), chosen.unconverged_nodes() > 0)
    } else {
        let (wl, wu) = (1.0 / sl.powi(2).max(1e-300), 1.0 / su.powi(2).max(1e-300));
        (
            (wl * lower.tau + wu * upper.tau) / (wl + wu),
            (wl + wu).recip().sqrt(),
            lower.unconverged_nodes() + upper.unconverged_nodes() > 0,
        )
    };
    let exact = if n <= MAX_EXACT_N {
        Some(RatioPolynomial::enumerate(n)?.log_ratio(epsilon) / nf)
    } else {
        None
    };
    Ok(TauEstimate {
        n,
        epsilon,
        tau,
        stderr,
        hysteresis,
        flagged,
        lower,
        upper,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauExtrapolation {
    pub epsilon: f64,
    pub per_n: Vec<TauEstimate>,
    /// Intercept of a least-squares line in `1/N`; the single estimate when one `N` is given.
    pub tau: f64,
    pub stderr: f64,
    pub slope: f64,
}

/// `τ̂(ε)` from estimates at every `N` in `n_list`, extrapolated linearly in `1/N`.
pub fn tau_estimate(epsilon: f64, n_list: &[usize], budget: &ChainBudget) -> Result<TauExtrapolation> {
    if n_list.is_empty() {
        return domain("N list is empty");
    }
    let per_n = n_list
        .iter()
        .map(|&n| tau_estimate_at(n, epsilon, budget))
        .collect::<Result<Vec<_>>>()?;
    let (tau, stderr, slope) = extrapolate(&per_n);
    Ok(TauExtrapolation {
        epsilon,
        per_n,
        tau,
        stderr,
        slope,
    })
}

fn extrapolate(per_n: &[TauEstimate]) -> (f64, f64, f64) {
    if per_n.len() == 1 {
        return (per_n[0].tau, per_n[0].stderr, 0.0);
    }
    let x: Vec<f64> = per_n.iter().map(|e| 1.0 / e.n as f64).collect();
    let k = x.len() as f64;
    let xm = x.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    // intercept = Σ w_i y_i with w_i = 1/k - xm (x_i - xm)/sxx
    let w: Vec<f64> = x.iter().map(|v| 1.0 / k - xm * (v - xm) / sxx).collect();
    let tau = w.iter().zip(per_n).map(|(wi, e)| wi * e.tau).sum();
    let stderr = w
        .iter()
        .zip(per_n)
        .map(|(wi, e)| (wi * e.stderr).powi(2))
        .sum::<f64>()
        .sqrt();
    let slope = x
        .iter()
        .zip(per_n)
        .map(|(xi, e)| (xi - xm) * e.tau)
        .sum::<f64>()
        / sxx;
    (tau, stderr, slope)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub epsilon: f64,
    /// Mean `|P|/N` from chains started unpinned.
    pub density_from_free: f64,
    pub stderr_from_free: f64,
    /// Mean `|P|/N` from chains started fully pinned.
    pub density_from_pinned: f64,
    pub stderr_from_pinned: f64,
}

/// Pin densities `D_N(ε)` over a grid, from both starting states.
pub fn critical_region_scan(epsilon: &[f64], n_list: &[usize], budget: &ChainBudget) -> Result<Vec<DensityRow>> {
    budget.validate()?;
    if let Some(e) = epsilon.iter().find(|e| !(**e >= 0.0)) {
        return domain(format!("ε must be ≥ 0, got {e}"));
    }
    let mut rows = Vec::new();
    for (i, &n) in n_list.iter().enumerate() {
        let offset = (i * epsilon.len()) as u64 * budget.replicas * 2;
        let free = node_densities(n, epsilon, budget, InitialState::Gaussian, offset)?;
        let offset = offset + epsilon.len() as u64 * budget.replicas;
        let pinned = node_densities(n, epsilon, budget, InitialState::Pinned, offset)?;
        for (j, &e) in epsilon.iter().enumerate() {
            let (df, sf) = mean_and_stderr(&free[j]);
            let (dp, sp) = mean_and_stderr(&pinned[j]);
            rows.push(DensityRow {
                n,
                epsilon: e,
                density_from_free: df,
                stderr_from_free: sf,
                density_from_pinned: dp,
                stderr_from_pinned: sp,
            });
        }
    }
    Ok(rows)
}

/// `(ε_lo, ε_hi)` between the last grid value whose free-start density falls with `N`
/// and the first at which it does not; `None` without such a crossing.
pub fn bracket_critical(rows: &[DensityRow]) -> Option<(f64, f64)> {
    let n_min = rows.iter().map(|r| r.n).min()?;
    let n_max = rows.iter().map(|r| r.n).max()?;
    if n_min == n_max {
        return None;
    }
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let density = |n: usize, e: f64| {
        rows.iter()
            .find(|r| r.n == n && r.epsilon == e)
            .map(|r| r.density_from_free)
    };
    let localized: Vec<(f64, bool)> = eps
        .iter()
        .filter_map(|&e| Some((e, density(n_max, e)? >= density(n_min, e)? && density(n_max, e)? > 0.0)))
        .collect();
    let first = localized.iter().position(|&(_, loc)| loc)?;
    if first == 0 {
        return None;
    }
    Some((localized[first - 1].0, localized[first].0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_on_log_axis_is_exact_for_log_linear() {
        let u = geometric(1e-2, 1e2, 21);
        let f: Vec<f64> = u.iter().map(|x| 2.0 + 0.5 * x.ln()).collect();
        let exact = 2.0 * (1e4f64).ln() + 0.25 * ((1e2f64).ln().powi(2) - (1e-2f64).ln().powi(2));
        assert!((trapezoid_log(&u, &f) - exact).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_recovers_line() {
        let mk = |n: usize| {
            let b = BranchEstimate {
                branch: IntegrationBranch::Lower,
                tau: 0.0,
                replica_stderr: 0.0,
                discretisation: 0.0,
                nodes: vec![],
            };
            TauEstimate {
                n,
                epsilon: 1.0,
                tau: 0.7 - 3.0 / n as f64,
                stderr: 0.01,
                hysteresis: false,
                flagged: false,
                lower: b.clone(),
                upper: b,
                exact: None,
            }
        };
        let (tau, se, slope) = extrapolate(&[mk(8), mk(16), mk(32)]);
        assert!((tau - 0.7).abs() < 1e-12 && (slope + 3.0).abs() < 1e-12);
        assert!(se > 0.01);
    }

    #[test]
    fn budget_guards() {
        let b = ChainBudget {
            half_nodes: 9,
            ..ChainBudget::default()
        };
        assert!(tau_estimate_at(6, 1.0, &b).is_err());
        assert!(tau_estimate_at(6, 0.0, &ChainBudget::default()).is_err());
    }
}
