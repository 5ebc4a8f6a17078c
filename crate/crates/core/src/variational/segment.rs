//! One-sided segment energies `E^τ(ℓ)` and their critical lengths.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Which root of `∂ℓ E^τ` a critical length comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub fn index(self) -> u8 {
        match self {
            Branch::One => 1,
            Branch::Two => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalLength {
    pub value: f64,
    pub branch: Branch,
    /// `value ≤ 1`
    pub feasible: bool,
}

/// `(6a² + 6aαℓ + 2α²ℓ²)/ℓ³ + τℓ`
pub fn segment_energy_tau(l: f64, a: f64, alpha: f64, tau: f64) -> Result<f64> {
    if !(l > 0.0) {
        return domain(format!("segment length must be positive, got {l}"));
    }
    Ok((6.0 * a * a + 6.0 * a * alpha * l + 2.0 * alpha * alpha * l * l) / (l * l * l) + tau * l)
}

fn energy(l: f64, a: f64, alpha: f64, tau: f64) -> f64 {
    (6.0 * a * a + 6.0 * a * alpha * l + 2.0 * alpha * alpha * l * l) / (l * l * l) + tau * l
}

/// `∂ℓ E^τ(ℓ) = -(2/ℓ⁴)(3a + αℓ - √(τ/2)ℓ²)(3a + αℓ + √(τ/2)ℓ²)`
pub fn segment_energy_derivative(l: f64, a: f64, alpha: f64, tau: f64) -> f64 {
    let s = (tau / 2.0).sqrt() * l * l;
    let base = 3.0 * a + alpha * l;
    -2.0 / l.powi(4) * (base - s) * (base + s)
}

/// `sign(aα)`, zero when either vanishes.
pub(crate) fn sign_product(a: f64, alpha: f64) -> i8 {
    let p = a * alpha;
    if p > 0.0 {
        1
    } else if p < 0.0 {
        -1
    } else {
        0
    }
}

/// Largest τ at which the second critical length exists, `α⁴/(72a²)`.
pub fn tau_max(a: f64, alpha: f64) -> Option<f64> {
    (sign_product(a, alpha) < 0).then(|| alpha.powi(4) / (72.0 * a * a))
}

/// First critical length; `None` only for `a = α = 0`.
pub fn ell1(tau: f64, a: f64, alpha: f64) -> Option<f64> {
    let (aa, al) = (a.abs(), alpha.abs());
    let r = (2.0 * tau).sqrt();
    match sign_product(a, alpha) {
        _ if a == 0.0 && alpha == 0.0 => None,
        0 if alpha == 0.0 => Some(aa.sqrt() * (18.0 / tau).powf(0.25)),
        0 => Some((2.0 / tau).sqrt() * al),
        1 => Some((al + (al * al + 6.0 * aa * r).sqrt()) / r),
        _ => {
            // rationalised form of (-|α| + √(α² + 6|a|r))/r, stable for small r
            Some(6.0 * aa / (al + (al * al + 6.0 * aa * r).sqrt()))
        }
    }
}

/// Second critical length, present only for `sign(aα) = -1` and `τ ≤ α⁴/(72a²)`.
pub fn ell2(tau: f64, a: f64, alpha: f64) -> Option<f64> {
    let tmax = tau_max(a, alpha)?;
    if tau > tmax {
        return None;
    }
    let (aa, al) = (a.abs(), alpha.abs());
    let r = (2.0 * tau).sqrt();
    let disc = (al * al - 6.0 * aa * r).max(0.0);
    Some((al + disc.sqrt()) / r)
}

fn ell_branch(tau: f64, a: f64, alpha: f64, branch: Branch) -> Option<f64> {
    match branch {
        Branch::One => ell1(tau, a, alpha),
        Branch::Two => ell2(tau, a, alpha),
    }
}

/// Local minimisers of `ℓ ↦ E^τ(ℓ)` on `(0, ∞)`; lengths above one are kept but flagged.
pub fn critical_lengths(tau: f64, a: f64, alpha: f64) -> Result<Vec<CriticalLength>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return domain(format!("critical lengths need τ > 0, got {tau}"));
    }
    let mut out = Vec::with_capacity(2);
    for branch in [Branch::One, Branch::Two] {
        if let Some(value) = ell_branch(tau, a, alpha, branch) {
            out.push(CriticalLength {
                value,
                branch,
                feasible: value <= 1.0,
            });
        }
    }
    Ok(out)
}

/// Interior zeros in `(0, ℓ)` of the minimiser on `[0, ℓ]` with data `(a, α, 0, 0)`.
pub fn zero_count(a: f64, alpha: f64, l: f64) -> u32 {
    if a == 0.0 {
        return 0;
    }
    u32::from(sign_product(a, alpha) < 0 && alpha.abs() * l / a.abs() > 3.0)
}

/// `Δ(τ) = E^τ(ℓ₁(τ)) - E^τ(ℓ₂(τ))`
pub fn delta_tau(tau: f64, a: f64, alpha: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return domain(format!("Δ needs τ > 0, got {tau}"));
    }
    match (ell1(tau, a, alpha), ell2(tau, a, alpha)) {
        (Some(l1), Some(l2)) => Ok(energy(l1, a, alpha, tau) - energy(l2, a, alpha, tau)),
        _ => domain(format!("no second critical length at τ = {tau} for (a, α) = ({a}, {alpha})")),
    }
}

const MAX_BISECTION_STEPS: usize = 400;

/// Root of `f` on `[lo, hi]` with `f(lo) > 0 ≥ f(hi)`, to absolute width `tol`.
pub(crate) fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unique zero of `Δ` on `(0, α⁴/(72a²)]`.
pub fn tau0(a: f64, alpha: f64) -> Result<f64> {
    let Some(tmax) = tau_max(a, alpha) else {
        return domain("τ₀ needs sign(aα) = -1");
    };
    let delta = |t: f64| delta_tau(t, a, alpha).unwrap_or(f64::NAN);
    if delta(tmax) > 0.0 {
        return Err(Error::NoSignChange(format!(
            "Δ stays positive up to τ = {tmax} for (a, α) = ({a}, {alpha})"
        )));
    }
    let mut lo = tmax;
    for _ in 0..64 {
        lo *= 1e-3;
        if delta(lo) > 0.0 {
            return Ok(bisect_decreasing(delta, lo, tmax, 1e-10 * tmax));
        }
    }
    Err(Error::NoSignChange(format!(
        "Δ not positive near τ = 0 for (a, α) = ({a}, {alpha})"
    )))
}

/// Smallest `τ` in `(0, hi]` where a decreasing length function `len(τ)` drops to `target`.
fn length_threshold(len: impl Fn(f64) -> f64, target: f64, hi: f64) -> f64 {
    let mut lo = hi;
    for _ in 0..200 {
        if len(lo) > target {
            let tol = 1e-15 * hi;
            return bisect_decreasing(|t| len(t) - target, lo, hi, tol);
        }
        lo *= 0.5;
    }
    0.0
}

/// `τ` at which the Σ of the branch profile on the feasible domain crosses zero.
///
/// `gain(τ, ℓ)` is the Σ difference to the reference profile, decreasing in τ
/// where `ℓ ≤ cap`. Returns `+∞` when no crossing exists.
fn crossing(
    a: f64,
    alpha: f64,
    branch: Branch,
    cap: f64,
    gain: impl Fn(f64, f64) -> f64,
) -> f64 {
    if a == 0.0 && alpha == 0.0 {
        return 0.0;
    }
    let len = |t: f64| ell_branch(t, a, alpha, branch).unwrap_or(f64::INFINITY);
    let g = |t: f64| gain(t, len(t));
    match branch {
        Branch::One => {
            // ℓ₁ decreases in τ from a limit ≥ 3|a|/|α| to 0
            let mut hi = 1.0;
            while len(hi) > cap {
                hi *= 2.0;
            }
            let start = length_threshold(len, cap, hi);
            let start = if start > 0.0 { start } else { f64::MIN_POSITIVE };
            while g(hi) > 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return f64::INFINITY;
                }
            }
            if g(start) <= 0.0 {
                return start;
            }
            bisect_decreasing(g, start, hi, 1e-13 * hi)
        }
        Branch::Two => {
            let Some(tmax) = tau_max(a, alpha) else {
                return f64::INFINITY;
            };
            if len(tmax) > cap {
                return f64::INFINITY;
            }
            let start = length_threshold(len, cap, tmax);
            if g(tmax) > 0.0 {
                return f64::INFINITY;
            }
            if start <= 0.0 || g(start) <= 0.0 {
                return start;
            }
            bisect_decreasing(g, start, tmax, 1e-13 * tmax)
        }
    }
}

/// `τ` at which `Σ_f(h_ℓ) = E^τ(ℓ) - τ` vanishes along the given branch; `+∞` if never.
pub fn tau_star(a: f64, alpha: f64, branch: Branch) -> f64 {
    crossing(a, alpha, branch, 1.0, |t, l| energy(l, a, alpha, t) - t)
}

/// Symmetric analogue: `2E^τ(ℓ) - τ = 2α²`, with `ℓ ≤ 1/2`.
pub fn tau_star_symmetric(a: f64, alpha: f64, branch: Branch) -> f64 {
    crossing(a, alpha, branch, 0.5, |t, l| {
        2.0 * energy(l, a, alpha, t) - t - 2.0 * alpha * alpha
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn segment_energy_examples() {
        assert_eq!(segment_energy_tau(0.3, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(segment_energy_tau(0.5, 1.0, -12.0, 288.0).unwrap(), 480.0, max_relative = 1e-14);
        assert!(segment_energy_tau(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reference_critical_lengths() {
        let ls = critical_lengths(288.0, 1.0, -12.0).unwrap();
        assert_eq!(ls.len(), 2);
        assert!((ls[0].value - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((ls[1].value - 0.5).abs() < 1e-12);
        let one = critical_lengths(18.0, 1.0, 0.0).unwrap();
        assert!((one[0].value - 1.0).abs() < 1e-15 && one[0].feasible);
        assert!(critical_lengths(1.0, 0.0, 0.0).unwrap().is_empty());
        assert!(critical_lengths(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn infeasible_lengths_flagged() {
        let ls = critical_lengths(10.0, 1.0, 0.0).unwrap();
        assert!(ls[0].value > 1.0 && !ls[0].feasible);
    }

    #[test]
    fn zero_count_examples() {
        assert_eq!(zero_count(1.0, -4.0, 1.0), 1);
        assert_eq!(zero_count(1.0, -2.0, 1.0), 0);
        assert_eq!(zero_count(1.0, -3.0, 1.0), 0);
        assert_eq!(zero_count(0.0, -3.0, 1.0), 0);
        assert_eq!(zero_count(1.0, 4.0, 1.0), 0);
    }

    #[test]
    fn delta_sign_structure() {
        assert!(delta_tau(288.0, 1.0, -12.0).unwrap() < 0.0);
        assert!(delta_tau(1e-3, 1.0, -12.0).unwrap() > 0.0);
        assert!(delta_tau(300.0, 1.0, -12.0).is_err());
        let t0 = tau0(1.0, -12.0).unwrap();
        assert!(t0 > 0.0 && t0 < 288.0);
        assert!(delta_tau(t0, 1.0, -12.0).unwrap().abs() < 1e-6);
        assert!(tau0(1.0, 12.0).is_err());
    }

    #[test]
    fn tau_star_closed_forms() {
        assert_relative_eq!(tau_star(0.0, 1.0, Branch::One), 8.0, max_relative = 1e-10);
        assert_relative_eq!(tau_star(0.0, -3.0, Branch::One), 72.0, max_relative = 1e-10);
        let closed = (6.0 / 18f64.powf(0.75) + 18f64.powf(0.25)).powi(4);
        assert_relative_eq!(tau_star(1.0, 0.0, Branch::One), closed, max_relative = 1e-10);
        let a: f64 = 2.5;
        let closed_a = (6.0 * a.sqrt() / 18f64.powf(0.75) + 18f64.powf(0.25) * a.sqrt()).powi(4);
        assert_relative_eq!(tau_star(a, 0.0, Branch::One), closed_a, max_relative = 1e-10);
        assert_eq!(tau_star(1.0, 1.0, Branch::Two), f64::INFINITY);
        assert_eq!(tau_star(0.0, 0.0, Branch::One), 0.0);
    }

    #[test]
    fn tau_star_root_is_sigma_zero() {
        for (a, alpha) in [(1.0, -12.0), (1.0, 2.0), (-0.5, 3.0), (1.0, -4.0)] {
            let t = tau_star(a, alpha, Branch::One);
            let l = ell1(t, a, alpha).unwrap();
            assert!(l <= 1.0 + 1e-9);
            let sigma = energy(l, a, alpha, t) - t;
            assert!(sigma.abs() < 1e-9 * t.max(1.0), "({a}, {alpha}): Σ = {sigma}");
            let t2 = 1.01 * t;
            let l2 = ell1(t2, a, alpha).unwrap();
            assert!(energy(l2, a, alpha, t2) - t2 < 0.0);
        }
    }

    #[test]
    fn derivative_vanishes_at_critical_lengths() {
        for (tau, a, alpha) in [(288.0, 1.0, -12.0), (50.0, 1.0, 0.0), (7.0, 0.0, 2.0), (30.0, 1.0, 1.5)] {
            for cl in critical_lengths(tau, a, alpha).unwrap() {
                let d = segment_energy_derivative(cl.value, a, alpha, tau);
                assert!(d.abs() < 1e-8 * tau, "{tau} {a} {alpha}: {d}");
            }
        }
    }
}
