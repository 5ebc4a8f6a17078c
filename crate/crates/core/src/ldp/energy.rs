use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sampler::MacroProfile;

/// `E_N(h) = ½ Σ_{j=0}^{N} N³ (h((j+1)/N) + h((j-1)/N) - 2h(j/N))²`
pub fn rescaled_energy(h: &MacroProfile) -> Result<f64> {
    let Some((left, right)) = h.extension else {
        return domain("rescaled energy needs the values at -1/N and 1 + 1/N");
    };
    let n = h.n;
    let at = |j: isize| -> f64 {
        if j < 0 {
            left
        } else if j as usize > n {
            right
        } else {
            h.values[j as usize]
        }
    };
    let n3 = (n as f64).powi(3);
    let sum: f64 = (0..=n as isize)
        .map(|j| (at(j + 1) + at(j - 1) - 2.0 * at(j)).powi(2))
        .sum();
    Ok(0.5 * n3 * sum)
}

/// Smooth profile with a known second derivative.
#[derive(Clone, Copy)]
pub struct SmoothProfile {
    pub name: &'static str,
    pub h: fn(f64) -> f64,
    pub h2: fn(f64) -> f64,
}

impl SmoothProfile {
    /// `½∫₀¹ ḧ²` by composite Simpson on 20 000 panels.
    pub fn energy(&self) -> f64 {
        let m = 20_000;
        let step = 1.0 / m as f64;
        let f = |t: f64| (self.h2)(t).powi(2);
        let mut s = f(0.0) + f(1.0);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * step);
        }
        0.5 * s * step / 3.0
    }
}

impl std::fmt::Debug for SmoothProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothProfile").field("name", &self.name).finish()
    }
}

/// Ten test profiles with nonvanishing curvature somewhere on `[0, 1]`.
pub fn smooth_test_profiles() -> Vec<SmoothProfile> {
    use std::f64::consts::PI;
    vec![
        SmoothProfile { name: "t^2", h: |t| t * t, h2: |_| 2.0 },
        SmoothProfile { name: "3t^2-2t^3", h: |t| 3.0 * t * t - 2.0 * t.powi(3), h2: |t| 6.0 - 12.0 * t },
        SmoothProfile { name: "1-12t+12t^2", h: |t| 1.0 - 12.0 * t + 12.0 * t * t, h2: |_| 24.0 },
        SmoothProfile { name: "t^4", h: |t| t.powi(4), h2: |t| 12.0 * t * t },
        SmoothProfile { name: "exp(t)", h: f64::exp, h2: f64::exp },
        SmoothProfile { name: "cos(pi t)", h: |t| (PI * t).cos(), h2: |t| -PI * PI * (PI * t).cos() },
        SmoothProfile { name: "sin(2t)", h: |t| (2.0 * t).sin(), h2: |t| -4.0 * (2.0 * t).sin() },
        SmoothProfile { name: "(1-t)^3", h: |t| (1.0 - t).powi(3), h2: |t| 6.0 * (1.0 - t) },
        SmoothProfile { name: "1/(1+t)", h: |t| 1.0 / (1.0 + t), h2: |t| 2.0 / (1.0 + t).powi(3) },
        SmoothProfile {
            name: "t^5-t^2",
            h: |t| t.powi(5) - t * t,
            h2: |t| 20.0 * t.powi(3) - 2.0,
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub n: usize,
    pub discrete: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub name: String,
    pub continuum: f64,
    pub rows: Vec<GammaRow>,
    /// Least-squares slope of `log|E_N - E|` against `log N`.
    pub order: f64,
    /// `E_N ≥ E - tol` on every row.
    pub lower_bound_holds: bool,
}

/// Table of `E_N(h)` against `E(h)` for the discretised profile.
pub fn gamma_convergence_check(profile: &SmoothProfile, n_list: &[usize]) -> Result<GammaReport> {
    let continuum = profile.energy();
    gamma_table(profile.name, |t| (profile.h)(t), continuum, n_list)
}

/// As [`gamma_convergence_check`] for any profile with a stated continuum energy.
pub fn gamma_table(name: &str, h: impl Fn(f64) -> f64, continuum: f64, n_list: &[usize]) -> Result<GammaReport> {
    if n_list.len() < 2 {
        return domain("convergence order needs at least two values of N");
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n < 2 {
            return domain(format!("N = {n} < 2"));
        }
        let discrete = rescaled_energy(&MacroProfile::discretize(&h, n))?;
        rows.push(GammaRow {
            n,
            discrete,
            error: (discrete - continuum).abs(),
        });
    }
    let tol = 1e-9 * continuum.abs().max(1.0);
    let lower_bound_holds = rows.iter().all(|r| r.discrete >= continuum - tol);
    Ok(GammaReport {
        name: name.to_string(),
        continuum,
        order: log_log_slope(&rows),
        lower_bound_holds,
        rows,
    })
}

fn log_log_slope(rows: &[GammaRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let k = pts.len() as f64;
    let (xm, ym) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - xm).powi(2)).sum();
    sxy / sxx
}
