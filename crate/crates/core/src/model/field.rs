use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Macroscopic boundary data. `right == None` means a free right boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub a: f64,
    pub alpha: f64,
    pub right: Option<(f64, f64)>,
}

impl BoundaryData {
    pub fn dirichlet(a: f64, alpha: f64, b: f64, beta: f64) -> Self {
        BoundaryData {
            a,
            alpha,
            right: Some((b, beta)),
        }
    }

    pub fn free_right(a: f64, alpha: f64) -> Self {
        BoundaryData {
            a,
            alpha,
            right: None,
        }
    }

    pub fn zero() -> Self {
        Self::dirichlet(0.0, 0.0, 0.0, 0.0)
    }

    /// Symmetric data `(a, alpha, a, -alpha)`.
    pub fn symmetric(a: f64, alpha: f64) -> Self {
        Self::dirichlet(a, alpha, a, -alpha)
    }

    pub fn is_free_right(&self) -> bool {
        self.right.is_none()
    }

    pub fn b(&self) -> Option<f64> {
        self.right.map(|r| r.0)
    }

    pub fn beta(&self) -> Option<f64> {
        self.right.map(|r| r.1)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.alpha == 0.0 && self.right.is_none_or(|(b, beta)| b == 0.0 && beta == 0.0)
    }

    /// Data seen after the reflection `t -> 1 - t`.
    pub fn mirrored(&self) -> Result<Self> {
        match self.right {
            Some((b, beta)) => Ok(Self::dirichlet(b, -beta, self.a, -self.alpha)),
            None => domain("a free right boundary has no mirror image"),
        }
    }

    /// Microscopic boundary slots `(site, height)` for a system of length `n`.
    pub fn slots(&self, n: usize) -> Vec<(isize, f64)> {
        let nf = n as f64;
        let mut out = vec![
            (-1, self.a * nf * nf - self.alpha * nf),
            (0, self.a * nf * nf),
        ];
        if let Some((b, beta)) = self.right {
            out.push((n as isize, b * nf * nf));
            out.push((n as isize + 1, b * nf * nf + beta * nf));
        }
        out
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let ok = self.a.is_finite()
            && self.alpha.is_finite()
            && self.right.is_none_or(|(b, beta)| b.is_finite() && beta.is_finite());
        if ok {
            Ok(())
        } else {
            domain("boundary data must be finite")
        }
    }
}

/// Sites that carry a free (integrated) height variable.
pub fn free_sites(n: usize, free_right: bool) -> RangeInclusive<usize> {
    if free_right {
        1..=n + 1
    } else {
        1..=n.saturating_sub(1)
    }
}

/// Height configuration on the sites `-1, 0, ..., n, n + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    n: usize,
    values: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(n: usize) -> Self {
        LatticeField {
            n,
            values: vec![0.0; n + 3],
        }
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return domain("field length must be positive");
        }
        if values.len() != n + 3 {
            return domain(format!(
                "field of length {n} needs {} values, got {}",
                n + 3,
                values.len()
            ));
        }
        let slots = [0, 1, n + 1, n + 2];
        if slots.iter().any(|&i| !values[i].is_finite()) {
            return domain("boundary slots must be finite");
        }
        Ok(LatticeField { n, values })
    }

    /// Zero interior with the boundary slots of `bc` written in.
    pub fn with_boundary(n: usize, bc: &BoundaryData) -> Self {
        let mut f = Self::zeros(n);
        for (site, v) in bc.slots(n) {
            f.set(site, v);
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, site: isize) -> f64 {
        self.values[(site + 1) as usize]
    }

    #[inline]
    pub fn set(&mut self, site: isize, v: f64) {
        self.values[(site + 1) as usize] = v;
    }

    /// Raw storage, index `k + 1` holds site `k`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn laplacian(&self, site: isize) -> f64 {
        let i = (site + 1) as usize;
        self.values[i + 1] + self.values[i - 1] - 2.0 * self.values[i]
    }
}

/// Sorted set of sites pinned at height zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PinningSet {
    sites: Vec<usize>,
}

impl PinningSet {
    pub fn empty() -> Self {
        PinningSet { sites: Vec::new() }
    }

    pub fn new(sites: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = sites.into_iter().collect();
        PinningSet {
            sites: set.into_iter().collect(),
        }
    }

    /// Pins decoded from the bits of `mask`, bit `i` standing for site `i + 1`.
    pub fn from_mask(mask: u64, width: usize) -> Self {
        PinningSet {
            sites: (0..width).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
        }
    }

    pub fn to_mask(&self) -> u64 {
        self.sites.iter().fold(0u64, |m, &s| m | 1 << (s - 1))
    }

    pub fn validate(&self, n: usize, free_right: bool) -> Result<()> {
        let range = free_sites(n, free_right);
        match self.sites.iter().find(|s| !range.contains(s)) {
            Some(s) => domain(format!(
                "pinned site {s} outside {}..={}",
                range.start(),
                range.end()
            )),
            None => Ok(()),
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn min(&self) -> Option<usize> {
        self.sites.first().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.sites.last().copied()
    }

    pub fn union(&self, other: &PinningSet) -> PinningSet {
        PinningSet::new(self.sites.iter().chain(other.sites.iter()).copied())
    }

    /// Adds the inner neighbours of the extreme pins, `P ∪ {min + 1, max - 1}`,
    /// keeping only sites in `1..=n - 1`.
    pub fn corrected(&self, n: usize) -> PinningSet {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => {
                let extra = [lo + 1, hi.saturating_sub(1)]
                    .into_iter()
                    .filter(|&s| s >= 1 && s < n);
                PinningSet::new(self.sites.iter().copied().chain(extra))
            }
            _ => PinningSet::empty(),
        }
    }
}

impl FromIterator<usize> for PinningSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PinningSet::new(iter)
    }
}
