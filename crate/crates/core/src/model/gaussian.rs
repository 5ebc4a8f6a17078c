use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::banded::{BandedLdl, BandedPrecision};
use super::field::{free_sites, BoundaryData, LatticeField, PinningSet};
use crate::error::{domain, Error, Result};

const STENCIL: [f64; 3] = [1.0, -2.0, 1.0];

/// `Σ_{k=l+1}^{r-1} (Δφ_k)² / 2` over the interval `[l, r]`.
pub fn hamiltonian(field: &LatticeField, interval: (isize, isize)) -> Result<f64> {
    let (l, r) = interval;
    let n = field.n() as isize;
    if l < -1 || r > n + 1 {
        return domain(format!("interval ({l}, {r}) outside -1..={}", n + 1));
    }
    if r - l < 2 {
        return domain(format!("interval ({l}, {r}) shorter than 2"));
    }
    Ok(((l + 1)..r).map(|k| 0.5 * field.laplacian(k).powi(2)).sum())
}

/// Energy over the whole lattice `[-1, N + 1]`.
pub fn total_hamiltonian(field: &LatticeField) -> f64 {
    let n = field.n() as isize;
    (0..=n).map(|k| 0.5 * field.laplacian(k).powi(2)).sum()
}

/// Hessian of the full-lattice Hamiltonian, stored as bands over the
/// storage index `site + 1`.
#[derive(Clone, Debug)]
pub struct LatticeHessian {
    n: usize,
    bands: [Vec<f64>; 3],
}

impl LatticeHessian {
    pub fn new(n: usize) -> Self {
        let len = n + 3;
        let mut bands = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        // each term (Δφ_k)²/2 with k = 0..=n touches storage slots k..=k+2
        for k in 0..=n {
            for a in 0..3 {
                for b in a..3 {
                    bands[b - a][k + a] += STENCIL[a] * STENCIL[b];
                }
            }
        }
        LatticeHessian { n, bands }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry for lattice sites `i`, `j` (in `-1..=n+1`).
    #[inline]
    pub fn entry(&self, i: isize, j: isize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = (hi - lo) as usize;
        if d > 2 {
            0.0
        } else {
            self.bands[d][(lo + 1) as usize]
        }
    }

    /// `Σ_j Q_{site,j} φ_j` over all `j != site`.
    #[inline]
    pub fn off_diagonal_action(&self, field: &[f64], site: isize) -> f64 {
        let i = (site + 1) as usize;
        let mut acc = 0.0;
        if i >= 2 {
            acc += self.bands[2][i - 2] * field[i - 2];
        }
        if i >= 1 {
            acc += self.bands[1][i - 1] * field[i - 1];
        }
        if i + 1 < field.len() {
            acc += self.bands[1][i] * field[i + 1];
        }
        if i + 2 < field.len() {
            acc += self.bands[2][i] * field[i + 2];
        }
        acc
    }

    pub fn restrict(&self, sites: &[usize]) -> BandedPrecision {
        let m = sites.len();
        let at = |p: usize, q: usize| self.entry(sites[p] as isize, sites[q] as isize);
        let diag = (0..m).map(|p| at(p, p)).collect();
        let off1 = (0..m.saturating_sub(1)).map(|p| at(p, p + 1)).collect();
        let off2 = (0..m.saturating_sub(2)).map(|p| at(p, p + 2)).collect();
        BandedPrecision::new(diag, off1, off2).expect("restricted bands are consistent")
    }
}

/// Precision matrix of the unpinned interior heights.
///
/// With `free_right` the heights at `N` and `N + 1` are free variables
/// as well; pinned sites are removed from the variable set.
pub fn precision_matrix(n: usize, pins: &PinningSet, free_right: bool) -> Result<BandedPrecision> {
    if n < 2 {
        return domain(format!("N = {n} < 2"));
    }
    pins.validate(n, free_right)?;
    let sites = unpinned_sites(n, pins, free_right);
    Ok(LatticeHessian::new(n).restrict(&sites))
}

fn unpinned_sites(n: usize, pins: &PinningSet, free_right: bool) -> Vec<usize> {
    free_sites(n, free_right).filter(|&s| !pins.contains(s)).collect()
}

/// `log det B_{N-1} = log((N+1)² N (N+2) / 12)`.
pub fn log_det_closed_form(n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("N = {n} < 2"));
    }
    let nf = n as f64;
    Ok(2.0 * (nf + 1.0).ln() + nf.ln() + (nf + 2.0).ln() - 12f64.ln())
}

/// Gaussian measure with zero boundary data and a fixed set of pins,
/// factored once and reused.
#[derive(Clone, Debug)]
pub struct PinnedGaussian {
    n: usize,
    free_right: bool,
    pins: PinningSet,
    sites: Vec<usize>,
    hessian: LatticeHessian,
    ldl: BandedLdl,
}

impl PinnedGaussian {
    pub fn new(n: usize, pins: &PinningSet, free_right: bool) -> Result<Self> {
        let precision = precision_matrix(n, pins, free_right)?;
        let ldl = precision.factor()?;
        Ok(PinnedGaussian {
            n,
            free_right,
            pins: pins.clone(),
            sites: unpinned_sites(n, pins, free_right),
            hessian: LatticeHessian::new(n),
            ldl,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pins(&self) -> &PinningSet {
        &self.pins
    }

    /// Sites carrying a Gaussian variable, in matrix order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn log_det(&self) -> f64 {
        self.ldl.log_det()
    }

    pub fn log_partition(&self) -> f64 {
        0.5 * self.sites.len() as f64 * (2.0 * PI).ln() - 0.5 * self.ldl.log_det()
    }

    fn check_bc(&self, bc: &BoundaryData) -> Result<()> {
        bc.check_finite()?;
        if bc.is_free_right() != self.free_right {
            return domain("boundary type does not match the precision geometry");
        }
        Ok(())
    }

    /// Constrained minimiser of the Hamiltonian: boundary slots from `bc`,
    /// zeros on the pins, free sites from `A x = -Q_{FB} φ_B`.
    pub fn minimiser(&self, bc: &BoundaryData) -> Result<LatticeField> {
        self.check_bc(bc)?;
        let mut field = LatticeField::with_boundary(self.n, bc);
        let mut rhs: Vec<f64> = self
            .sites
            .iter()
            .map(|&s| -self.hessian.off_diagonal_action(field.values(), s as isize))
            .collect();
        self.ldl.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite {
                pivot: 0,
                value: f64::NAN,
            });
        }
        for (&s, v) in self.sites.iter().zip(rhs) {
            field.set(s as isize, v);
        }
        Ok(field)
    }

    /// Zero-mean fluctuation on the free sites, embedded in a zero field.
    pub fn sample_fluctuation<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticeField {
        let mut z: Vec<f64> = (0..self.sites.len()).map(|_| rng.sample(StandardNormal)).collect();
        self.ldl.colour_in_place(&mut z);
        let mut field = LatticeField::zeros(self.n);
        for (&s, v) in self.sites.iter().zip(z) {
            field.set(s as isize, v);
        }
        field
    }

    /// Exact draw: minimiser plus a fluctuation.
    pub fn sample<R: Rng + ?Sized>(&self, bc: &BoundaryData, rng: &mut R) -> Result<LatticeField> {
        let mut field = self.minimiser(bc)?;
        let fluct = self.sample_fluctuation(rng);
        for &s in &self.sites {
            let s = s as isize;
            field.set(s, field.get(s) + fluct.get(s));
        }
        Ok(field)
    }

    fn index_of(&self, site: usize) -> Result<usize> {
        self.sites
            .binary_search(&site)
            .map_err(|_| Error::Domain(format!("site {site} is pinned or not a free site")))
    }

    pub fn variance(&self, site: usize) -> Result<f64> {
        Ok(self.ldl.inverse_diagonal(self.index_of(site)?))
    }

    pub fn covariance(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.ldl.inverse_entry(self.index_of(i)?, self.index_of(j)?))
    }
}

/// `log Z` for zero Dirichlet data with the given pins.
pub fn log_partition_zero(n: usize, pins: &PinningSet) -> Result<f64> {
    Ok(PinnedGaussian::new(n, pins, false)?.log_partition())
}

/// Minimiser of the Hamiltonian for boundary data `bc` and zeros on `pins`.
pub fn discrete_minimiser(n: usize, bc: &BoundaryData, pins: &PinningSet) -> Result<LatticeField> {
    PinnedGaussian::new(n, pins, bc.is_free_right())?.minimiser(bc)
}

/// `log Z(bc) = log Z(0) - H(φ*)`.
pub fn log_partition_bc(n: usize, bc: &BoundaryData, pins: &PinningSet) -> Result<f64> {
    let g = PinnedGaussian::new(n, pins, bc.is_free_right())?;
    let phi = g.minimiser(bc)?;
    Ok(g.log_partition() - total_hamiltonian(&phi))
}

/// Variance of the height at `site` under the pinned zero-boundary Gaussian.
pub fn field_variance(n: usize, pins: &PinningSet, site: usize) -> Result<f64> {
    if pins.contains(site) {
        return domain(format!("site {site} is pinned"));
    }
    PinnedGaussian::new(n, pins, false)?.variance(site)
}
