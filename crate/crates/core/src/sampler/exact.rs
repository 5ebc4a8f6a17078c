//! Exact Gaussian draws: integrated random walks, bridges and pinned fields.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::model::{BoundaryData, LatticeField, PinnedGaussian, PinningSet};

/// Integrated random walk started from `Z₀ = aN²`, `Y₀ = αN`, filled on sites `1..=N+1`.
pub fn sample_integrated_rw<R: Rng + ?Sized>(n: usize, a: f64, alpha: f64, rng: &mut R) -> LatticeField {
    let nf = n as f64;
    let mut field = LatticeField::with_boundary(n, &BoundaryData::free_right(a, alpha));
    let mut z = a * nf * nf;
    let mut y = alpha * nf;
    for k in 1..=n + 1 {
        let x: f64 = rng.sample(StandardNormal);
        y += x;
        z += y;
        field.set(k as isize, z);
    }
    field
}

/// Cubic correction `A_N(x, u, v)` that removes the end value `u` and end increment `v`.
pub fn bridge_correction(n: usize, x: f64, u: f64, v: f64) -> f64 {
    let nf = n as f64;
    let cubic = x * x * x * (-2.0 * u + v * nf)
        + x * x * (3.0 * u * nf + v * nf - v * nf * nf)
        + x * ((2.0 + 3.0 * nf) * u - nf * nf * v);
    cubic / (nf * (nf + 1.0) * (nf + 2.0))
}

/// Maps a zero-started integrated walk to a walk vanishing at `N` and `N + 1`.
pub fn bridge_map(field: &LatticeField) -> Result<LatticeField> {
    let n = field.n();
    if field.get(-1) != 0.0 || field.get(0) != 0.0 {
        return domain("bridge map needs a walk started from zero height and slope");
    }
    let u = field.get(n as isize);
    let v = field.get(n as isize + 1) - u;
    let mut out = field.clone();
    for x in 1..=n + 1 {
        let xi = x as isize;
        out.set(xi, field.get(xi) - bridge_correction(n, x as f64, u, v));
    }
    // exact cancellation at the end slots
    out.set(n as isize, 0.0);
    out.set(n as isize + 1, 0.0);
    Ok(out)
}

/// Exact draw of the Gaussian field conditioned on vanishing at `pins`.
pub fn sample_pinned_gaussian<R: Rng + ?Sized>(
    n: usize,
    bc: &BoundaryData,
    pins: &PinningSet,
    rng: &mut R,
) -> Result<LatticeField> {
    bc.check_finite()?;
    PinnedGaussian::new(n, pins, bc.is_free_right())?.sample(bc, rng)
}
