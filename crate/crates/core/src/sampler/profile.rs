use serde::{Deserialize, Serialize};

use crate::model::LatticeField;

/// Rescaled height `h_N(k/N) = φ_k / N²`, linearly interpolated between grid points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroProfile {
    pub n: usize,
    /// Grid values for `k = 0..=N`.
    pub values: Vec<f64>,
    /// Values at `-1/N` and `1 + 1/N`, which encode the boundary slopes.
    #[serde(default)]
    pub extension: Option<(f64, f64)>,
}

impl MacroProfile {
    /// Samples `h` at `k/N` for `k = -1..=N+1`.
    pub fn discretize(h: impl Fn(f64) -> f64, n: usize) -> Self {
        let nf = n as f64;
        MacroProfile {
            n,
            values: (0..=n).map(|k| h(k as f64 / nf)).collect(),
            extension: Some((h(-1.0 / nf), h(1.0 + 1.0 / nf))),
        }
    }

    /// Linear interpolation; `t` is clamped to `[0, 1]`.
    pub fn at(&self, t: f64) -> f64 {
        let x = t.clamp(0.0, 1.0) * self.n as f64;
        let k = (x.floor() as usize).min(self.n - 1);
        let frac = x - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sup_t |h_N(t) - g(t)|` over the grid points.
    pub fn grid_distance(&self, g: impl Fn(f64) -> f64) -> f64 {
        let nf = self.n as f64;
        self.values
            .iter()
            .enumerate()
            .fold(0.0, |m, (k, v)| m.max((v - g(k as f64 / nf)).abs()))
    }
}

pub fn empirical_profile(field: &LatticeField) -> MacroProfile {
    let n = field.n();
    let scale = (n * n) as f64;
    MacroProfile {
        n,
        values: (0..=n).map(|k| field.get(k as isize) / scale).collect(),
        extension: Some((field.get(-1) / scale, field.get(n as isize + 1) / scale)),
    }
}

/// `#{k ∈ 1..=N : φ_k = 0}`; pinned heights are exact zeros.
pub fn contact_number(field: &LatticeField) -> usize {
    (1..=field.n() as isize).filter(|&k| field.get(k) == 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_rescale_exactly() {
        let n = 8;
        let mut f = LatticeField::zeros(n);
        for k in -1..=n as isize + 1 {
            f.set(k, (k * k) as f64);
        }
        let p = empirical_profile(&f);
        for k in 0..=n {
            assert_eq!(p.values[k], (k as f64 / n as f64).powi(2));
        }
        let mid = p.at(2.5 / 8.0);
        assert_eq!(mid, 0.5 * (p.values[2] + p.values[3]));
        assert_eq!(contact_number(&f), 0);
    }

    #[test]
    fn zero_field_contacts_everywhere() {
        assert_eq!(contact_number(&LatticeField::zeros(12)), 12);
    }
}
