use serde::{Deserialize, Serialize};

use super::cubic::{biharmonic_minimiser, CubicMinimiser};
use crate::error::{domain, Result};
use crate::model::BoundaryData;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinimiserKind {
    BiHarmonic,
    Linear,
    /// Cubic on `[0, l]`, zero on `[l, 1]`.
    HLeft { l: f64 },
    /// Cubic on `[0, l]` and `[1 - r, 1]`, zero between.
    HBoth { l: f64, r: f64 },
}

/// Piecewise-cubic candidate minimiser of the rate function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimiserDescriptor {
    pub kind: MinimiserKind,
    pub segments: Vec<CubicMinimiser>,
    pub energy: f64,
    pub zero_measure: f64,
}

impl MinimiserDescriptor {
    fn from_segments(kind: MinimiserKind, segments: Vec<CubicMinimiser>, zero_measure: f64) -> Self {
        let energy = segments.iter().map(CubicMinimiser::energy).sum();
        MinimiserDescriptor {
            kind,
            segments,
            energy,
            zero_measure,
        }
    }

    pub fn biharmonic(bc: &BoundaryData) -> Result<Self> {
        let h = biharmonic_minimiser(bc)?;
        let zero = if bc.is_zero() { 1.0 } else { 0.0 };
        Ok(Self::from_segments(MinimiserKind::BiHarmonic, vec![h.cubic], zero))
    }

    /// `ȟ(t) = a + αt`
    pub fn linear(a: f64, alpha: f64) -> Self {
        let line = CubicMinimiser {
            t0: 0.0,
            t1: 1.0,
            a,
            alpha,
            k: 0.0,
            c: 0.0,
        };
        let zero = if a == 0.0 && alpha == 0.0 { 1.0 } else { 0.0 };
        Self::from_segments(MinimiserKind::Linear, vec![line], zero)
    }

    pub fn h_left(a: f64, alpha: f64, l: f64) -> Result<Self> {
        if !(l > 0.0 && l <= 1.0) {
            return domain(format!("h_ℓ needs ℓ in (0, 1], got {l}"));
        }
        let seg = CubicMinimiser::on_interval(0.0, l, a, alpha, 0.0, 0.0)?;
        Ok(Self::from_segments(MinimiserKind::HLeft { l }, vec![seg], 1.0 - l))
    }

    pub fn h_both(bc: &BoundaryData, l: f64, r: f64) -> Result<Self> {
        let Some((b, beta)) = bc.right else {
            return domain("h_{ℓ,r} needs Dirichlet data on both ends");
        };
        if !(l > 0.0 && r > 0.0 && l + r <= 1.0) {
            return domain(format!("h_{{ℓ,r}} needs ℓ, r > 0 and ℓ + r ≤ 1, got ({l}, {r})"));
        }
        let left = CubicMinimiser::on_interval(0.0, l, bc.a, bc.alpha, 0.0, 0.0)?;
        let right = CubicMinimiser::on_interval(1.0 - r, 1.0, 0.0, 0.0, b, beta)?;
        Ok(Self::from_segments(
            MinimiserKind::HBoth { l, r },
            vec![left, right],
            (1.0 - l - r).max(0.0),
        ))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| s.contains(t))
            .map_or(0.0, |s| s.value(t))
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| s.contains(t))
            .map_or(0.0, |s| s.slope(t))
    }

    pub fn label(&self) -> String {
        match self.kind {
            MinimiserKind::BiHarmonic => "h*".into(),
            MinimiserKind::Linear => "linear".into(),
            MinimiserKind::HLeft { l } => format!("h_l(l={l:.6})"),
            MinimiserKind::HBoth { l, r } => format!("h_lr(l={l:.6},r={r:.6})"),
        }
    }
}

/// `½∫ḧ² - τ·|{h = 0}|`
pub fn sigma_free(d: &MinimiserDescriptor, tau: f64) -> f64 {
    d.energy - tau * d.zero_measure
}

/// Same functional on Dirichlet candidates.
pub fn sigma(d: &MinimiserDescriptor, tau: f64) -> f64 {
    sigma_free(d, tau)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSamples {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
}

/// Values of `d` at `t = i/M`, `i = 0..=M`.
pub fn build_profile(d: &MinimiserDescriptor, grid: usize) -> Result<ProfileSamples> {
    if grid < 2 {
        return domain(format!("profile grid needs M ≥ 2, got {grid}"));
    }
    let t: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    let h = t.iter().map(|&x| d.value(x)).collect();
    Ok(ProfileSamples { t, h })
}
