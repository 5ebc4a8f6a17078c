use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sampler::{empirical_profile, ChainState, MacroProfile};
use crate::variational::{sigma, MinimiserDescriptor};

use super::energy::rescaled_energy;

/// Numerical convex conjugate `Λ*(x) = sup_λ (λx - Λ(λ))` over a bounded λ-window.
pub struct LegendreConjugate<F: Fn(f64) -> f64> {
    lambda: F,
    lo: f64,
    hi: f64,
    grid: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

impl<F: Fn(f64) -> f64> LegendreConjugate<F> {
    pub fn new(lambda: F, lo: f64, hi: f64, grid: usize) -> Result<Self> {
        if !(lo < hi) || grid < 3 {
            return domain("conjugation window needs lo < hi and at least three grid points");
        }
        Ok(LegendreConjugate { lambda, lo, hi, grid })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let g = |l: f64| l * x - (self.lambda)(l);
        let step = (self.hi - self.lo) / (self.grid - 1) as f64;
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..self.grid {
            let v = g(self.lo + i as f64 * step);
            if !v.is_finite() {
                return domain(format!("Λ is not finite at λ = {}", self.lo + i as f64 * step));
            }
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.0 == 0 || best.0 == self.grid - 1 {
            return domain(format!("supremum for x = {x} not attained inside the λ-window"));
        }
        // concave objective: golden-section search on the bracketing cell pair
        let (mut a, mut b) = (
            self.lo + (best.0 - 1) as f64 * step,
            self.lo + (best.0 + 1) as f64 * step,
        );
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..200 {
            if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
                break;
            }
            if gc > gd {
                b = d;
                d = c;
                gd = gc;
                c = b - GOLDEN * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + GOLDEN * (b - a);
                gd = g(d);
            }
        }
        Ok(g(0.5 * (a + b)).max(best.1))
    }
}

/// Second differences `N²(h_{j+1} + h_{j-1} - 2h_j)`, `j = 0..=N`.
fn curvatures(h: &MacroProfile) -> Result<Vec<f64>> {
    let Some((left, right)) = h.extension else {
        return domain("rate evaluation needs the values at -1/N and 1 + 1/N");
    };
    let n = h.n;
    let mut ext = Vec::with_capacity(n + 3);
    ext.push(left);
    ext.extend_from_slice(&h.values);
    ext.push(right);
    let n2 = (n as f64).powi(2);
    Ok(ext.windows(3).map(|w| n2 * (w[0] + w[2] - 2.0 * w[1])).collect())
}

/// `∫₀¹ Λ*(ḧ)` by the rectangle rule on second differences.
///
/// Without `lambda` the Gaussian `Λ*(x) = x²/2` is used. A general `Λ` is only
/// admissible for a free right end.
pub fn mogulskii_rate(
    h: &MacroProfile,
    lambda: Option<&dyn Fn(f64) -> f64>,
    free_right: bool,
) -> Result<f64> {
    let curv = curvatures(h)?;
    let dt = 1.0 / h.n as f64;
    match lambda {
        None => Ok(curv.iter().map(|x| 0.5 * x * x).sum::<f64>() * dt),
        Some(lambda) => {
            if !free_right {
                return domain("a general Λ is only supported with a free right end");
            }
            let span = curv.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let conj = LegendreConjugate::new(lambda, -8.0 * span - 10.0, 8.0 * span + 10.0, 2001)?;
            let mut total = 0.0;
            for &x in &curv {
                total += conj.eval(x)?;
            }
            Ok(total * dt)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEvaluation {
    pub energy: f64,
    pub zero_measure: f64,
    pub sigma: f64,
    pub tau_used: f64,
}

impl RateEvaluation {
    pub fn of_descriptor(d: &MinimiserDescriptor, tau: f64) -> Self {
        RateEvaluation {
            energy: d.energy,
            zero_measure: d.zero_measure,
            sigma: sigma(d, tau),
            tau_used: tau,
        }
    }

    /// Zero-set measure of a sampled profile counts pinned atoms, `|P|/N`.
    pub fn of_state(state: &ChainState, tau: f64) -> Result<Self> {
        let energy = rescaled_energy(&empirical_profile(&state.field))?;
        let zero_measure = state.pin_fraction();
        Ok(RateEvaluation {
            energy,
            zero_measure,
            sigma: energy - tau * zero_measure,
            tau_used: tau,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_rate_of_half_square() {
        let p = MacroProfile::discretize(|t| 0.5 * t * t, 50);
        let r = mogulskii_rate(&p, None, false).unwrap();
        assert!((r - 0.5 * 51.0 / 50.0).abs() < 1e-9);
        let line = MacroProfile::discretize(|t| 2.0 - 3.0 * t, 50);
        assert!(mogulskii_rate(&line, None, false).unwrap().abs() < 1e-9);
    }

    #[test]
    fn gaussian_rate_equals_rescaled_energy() {
        let p = MacroProfile::discretize(|t| (3.0 * t).sin(), 64);
        let a = mogulskii_rate(&p, None, false).unwrap();
        let b = rescaled_energy(&p).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn conjugate_of_quadratic() {
        let c = LegendreConjugate::new(|l: f64| 0.5 * l * l, -50.0, 50.0, 2001).unwrap();
        for i in 0..=40 {
            let x = -10.0 + 0.5 * i as f64;
            assert!((c.eval(x).unwrap() - 0.5 * x * x).abs() < 1e-6);
        }
        let narrow = LegendreConjugate::new(|l: f64| 0.5 * l * l, -1.0, 1.0, 11).unwrap();
        assert!(narrow.eval(5.0).is_err());
    }

    #[test]
    fn general_lambda_needs_free_end() {
        let p = MacroProfile::discretize(|t| t * t, 10);
        let quad = |l: f64| 0.5 * l * l;
        assert!(mogulskii_rate(&p, Some(&quad), false).is_err());
        let r = mogulskii_rate(&p, Some(&quad), true).unwrap();
        assert!((r - mogulskii_rate(&p, None, true).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn infinite_lambda_rejected() {
        let p = MacroProfile::discretize(|t| t * t, 10);
        let bad = |l: f64| if l > 3.0 { f64::INFINITY } else { l * l };
        assert!(mogulskii_rate(&p, Some(&bad), true).is_err());
    }
}
