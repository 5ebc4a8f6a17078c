//! Exact pinned-to-free partition ratios by enumerating pinning sets.
//!
//! `Z_{N,ε}(0)/Z_N(0) = Σ_P ε^{|P|} Z_N(P)/Z_N(∅)` is a polynomial in `ε`
//! with positive coefficients, stored here as logarithms grouped by `|P|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{log_partition_zero, PinningSet};

/// Largest `N` for which the `2^{N-1}` pinning sets are enumerated.
pub const MAX_EXACT_N: usize = 22;

fn check_capacity(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("N = {n} < 2"));
    }
    if n > MAX_EXACT_N {
        return Err(Error::Capacity(format!(
            "exact enumeration needs N ≤ {MAX_EXACT_N}, got {n}; use tau_estimate instead"
        )));
    }
    Ok(())
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log Z_N(P) - log Z_N(∅)` for every mask, bit `i` standing for site `i + 1`.
pub fn subset_log_weights(n: usize) -> Result<Vec<f64>> {
    check_capacity(n)?;
    let width = n - 1;
    let base = log_partition_zero(n, &PinningSet::empty())?;
    (0..1u64 << width)
        .into_par_iter()
        .map(|mask| Ok(log_partition_zero(n, &PinningSet::from_mask(mask, width))? - base))
        .collect()
}

/// `ε ↦ log(Z_{N,ε}(0)/Z_N(0))` as `log Σ_k exp(k log ε + c_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioPolynomial {
    pub n: usize,
    /// `c_k = log Σ_{|P|=k} Z_N(P)/Z_N(∅)`, `k = 0..=N-1`.
    pub log_coeffs: Vec<f64>,
}

impl RatioPolynomial {
    pub fn enumerate(n: usize) -> Result<Self> {
        let weights = subset_log_weights(n)?;
        let mut by_size: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (mask, w) in weights.into_iter().enumerate() {
            by_size[(mask as u64).count_ones() as usize].push(w);
        }
        Ok(RatioPolynomial {
            n,
            log_coeffs: by_size.into_iter().map(log_sum_exp).collect(),
        })
    }

    fn terms(&self, epsilon: f64) -> impl Iterator<Item = f64> + '_ {
        let le = epsilon.ln();
        self.log_coeffs.iter().enumerate().map(move |(k, c)| {
            if k == 0 {
                *c
            } else {
                k as f64 * le + c
            }
        })
    }

    pub fn log_ratio(&self, epsilon: f64) -> f64 {
        if epsilon == 0.0 {
            return 0.0;
        }
        log_sum_exp(self.terms(epsilon))
    }

    /// Exact `E_ε|P| = ε d/dε log ratio`.
    pub fn mean_pins(&self, epsilon: f64) -> f64 {
        if epsilon == 0.0 {
            return 0.0;
        }
        let total = self.log_ratio(epsilon);
        self.terms(epsilon)
            .enumerate()
            .map(|(k, t)| k as f64 * (t - total).exp())
            .sum()
    }

    /// Exact `E_ε|P|/N`.
    pub fn pin_density(&self, epsilon: f64) -> f64 {
        self.mean_pins(epsilon) / self.n as f64
    }
}

/// `log(Z_{N,ε}(0)/Z_N(0))` by enumeration.
pub fn ratio_exact(n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return domain(format!("ε must be ≥ 0, got {epsilon}"));
    }
    if epsilon == 0.0 {
        check_capacity(n)?;
        return Ok(0.0);
    }
    Ok(RatioPolynomial::enumerate(n)?.log_ratio(epsilon))
}

/// Probability of every pinning set under the Gibbs measure, indexed by mask.
pub fn pin_set_distribution(n: usize, epsilon: f64) -> Result<Vec<f64>> {
    let weights = subset_log_weights(n)?;
    if epsilon == 0.0 {
        let mut p = vec![0.0; weights.len()];
        p[0] = 1.0;
        return Ok(p);
    }
    let le = epsilon.ln();
    let logs: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(mask, w)| (mask as u64).count_ones() as f64 * le + w)
        .collect();
    let total = log_sum_exp(logs.iter().copied());
    Ok(logs.into_iter().map(|l| (l - total).exp()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub n: usize,
    pub epsilon: Vec<f64>,
    pub log_ratio: Vec<f64>,
}

impl RatioTable {
    pub fn exact(n: usize, epsilon: &[f64]) -> Result<Self> {
        if let Some(e) = epsilon.iter().find(|e| !(**e >= 0.0)) {
            return domain(format!("ε must be ≥ 0, got {e}"));
        }
        let poly = RatioPolynomial::enumerate(n)?;
        Ok(RatioTable {
            n,
            epsilon: epsilon.to_vec(),
            log_ratio: epsilon.iter().map(|&e| poly.log_ratio(e)).collect(),
        })
    }
}
