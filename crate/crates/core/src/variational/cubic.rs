use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::BoundaryData;

/// Cubic `h(t) = a + alpha·u + k·u² + c·u³`, `u = t - t0`, on `[t0, t1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicMinimiser {
    pub t0: f64,
    pub t1: f64,
    pub a: f64,
    pub alpha: f64,
    pub k: f64,
    pub c: f64,
}

impl CubicMinimiser {
    /// Unique minimiser of `½∫ḧ²` on `[t0, t1]` with value/slope data at both ends.
    pub fn on_interval(t0: f64, t1: f64, a: f64, alpha: f64, b: f64, beta: f64) -> Result<Self> {
        let len = t1 - t0;
        if !(len > 0.0) || !len.is_finite() {
            return domain(format!("empty interval [{t0}, {t1}]"));
        }
        // unit-interval coefficients for data (a, alpha·len, b, beta·len)
        let (au, bu) = (alpha * len, beta * len);
        let k_unit = 3.0 * (b - a) - 2.0 * au - bu;
        let c_unit = (au + bu) - 2.0 * (b - a);
        Ok(CubicMinimiser {
            t0,
            t1,
            a,
            alpha,
            k: k_unit / (len * len),
            c: c_unit / (len * len * len),
        })
    }

    pub fn len(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn value(&self, t: f64) -> f64 {
        let u = t - self.t0;
        self.a + u * (self.alpha + u * (self.k + u * self.c))
    }

    pub fn slope(&self, t: f64) -> f64 {
        let u = t - self.t0;
        self.alpha + u * (2.0 * self.k + 3.0 * u * self.c)
    }

    pub fn curvature(&self, t: f64) -> f64 {
        2.0 * self.k + 6.0 * self.c * (t - self.t0)
    }

    /// `½∫ḧ²` by Simpson's rule, exact for the quadratic integrand.
    pub fn energy(&self) -> f64 {
        let l = self.len();
        let f = |t: f64| self.curvature(t).powi(2);
        0.5 * l / 6.0 * (f(self.t0) + 4.0 * f(self.t0 + 0.5 * l) + f(self.t1))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t1
    }
}

/// Closed-form continuum minimiser on `[0, 1]` for Dirichlet data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiHarmonic {
    pub cubic: CubicMinimiser,
    /// `2k² + 6kc + 6c²`
    pub energy: f64,
}

pub fn biharmonic_minimiser(bc: &BoundaryData) -> Result<BiHarmonic> {
    let Some((b, beta)) = bc.right else {
        return domain("bi-harmonic minimiser needs Dirichlet data on both ends");
    };
    let (a, alpha) = (bc.a, bc.alpha);
    let k = 3.0 * (b - a) - 2.0 * alpha - beta;
    let c = (alpha + beta) - 2.0 * (b - a);
    Ok(BiHarmonic {
        cubic: CubicMinimiser {
            t0: 0.0,
            t1: 1.0,
            a,
            alpha,
            k,
            c,
        },
        energy: 2.0 * k * k + 6.0 * k * c + 6.0 * c * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn examples() {
        let z = biharmonic_minimiser(&BoundaryData::zero()).unwrap();
        assert_eq!(z.energy, 0.0);

        let h = biharmonic_minimiser(&BoundaryData::dirichlet(0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!((h.cubic.k, h.cubic.c), (3.0, -2.0));
        assert_eq!(h.energy, 6.0);
        assert_relative_eq!(h.cubic.energy(), 6.0, max_relative = 1e-14);

        let s = biharmonic_minimiser(&BoundaryData::symmetric(1.5, -2.0)).unwrap();
        assert_eq!((s.cubic.k, s.cubic.c), (2.0, 0.0));
        assert_eq!(s.energy, 8.0);
    }

    #[test]
    fn free_boundary_rejected() {
        assert!(biharmonic_minimiser(&BoundaryData::free_right(1.0, 0.0)).is_err());
    }

    #[test]
    fn interval_cubic_matches_data() {
        let c = CubicMinimiser::on_interval(0.3, 0.8, 1.0, -2.0, 0.5, 4.0).unwrap();
        assert!((c.value(0.3) - 1.0).abs() < 1e-12);
        assert!((c.slope(0.3) + 2.0).abs() < 1e-12);
        assert!((c.value(0.8) - 0.5).abs() < 1e-12);
        assert!((c.slope(0.8) - 4.0).abs() < 1e-12);
        assert!(CubicMinimiser::on_interval(0.5, 0.5, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn scaled_segment_energy() {
        // energy of the [0, l] minimiser with (a, alpha, 0, 0) is (6a² + 6aαl + 2α²l²)/l³
        let (a, alpha, l) = (0.7, -3.0, 0.4);
        let c = CubicMinimiser::on_interval(0.0, l, a, alpha, 0.0, 0.0).unwrap();
        let closed = (6.0 * a * a + 6.0 * a * alpha * l + 2.0 * alpha * alpha * l * l) / l.powi(3);
        assert_relative_eq!(c.energy(), closed, max_relative = 1e-12);
    }
}
