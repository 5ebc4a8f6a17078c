//! Symmetric pentadiagonal matrices and their `L D Lᵀ` factorization.
//!
//! Band layout for an `n × n` matrix `A`:
//!
//! * `diag[i]  = A[i][i]`
//! * `off1[i]  = A[i][i + 1]`, length `n - 1`
//! * `off2[i]  = A[i][i + 2]`, length `n - 2`

use crate::error::{domain, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BandedPrecision {
    diag: Vec<f64>,
    off1: Vec<f64>,
    off2: Vec<f64>,
}

impl BandedPrecision {
    pub fn new(diag: Vec<f64>, off1: Vec<f64>, off2: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if off1.len() != n.saturating_sub(1) || off2.len() != n.saturating_sub(2) {
            return domain(format!(
                "band lengths ({}, {}, {}) inconsistent",
                n,
                off1.len(),
                off2.len()
            ));
        }
        Ok(BandedPrecision { diag, off1, off2 })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off1(&self) -> &[f64] {
        &self.off1
    }

    pub fn off2(&self) -> &[f64] {
        &self.off2
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(2);
                let hi = (i + 2).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(&self) -> Result<BandedLdl> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for j in 0..n {
            let mut dj = self.diag[j];
            if j >= 1 {
                dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
            }
            if j >= 2 {
                dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
            }
            if !(dj > 0.0) || !dj.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: dj });
            }
            d[j] = dj;
            if j + 1 < n {
                let mut v = self.off1[j];
                if j >= 1 {
                    v -= l2[j - 1] * d[j - 1] * l1[j - 1];
                }
                l1[j] = v / dj;
            }
            if j + 2 < n {
                l2[j] = self.off2[j] / dj;
            }
        }
        Ok(BandedLdl { d, l1, l2 })
    }
}

/// `A = L D Lᵀ` with `L` unit lower triangular of bandwidth two.
#[derive(Clone, Debug)]
pub struct BandedLdl {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedLdl {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn log_det(&self) -> f64 {
        self.d.iter().map(|v| v.ln()).sum()
    }

    fn forward(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            if i >= 1 {
                x[i] -= self.l1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                x[i] -= self.l2[i - 2] * x[i - 2];
            }
        }
    }

    fn backward(&self, x: &mut [f64]) {
        let n = x.len();
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= self.l1[i] * x[i + 1];
            }
            if i + 2 < n {
                x[i] -= self.l2[i] * x[i + 2];
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.dim());
        self.forward(b);
        for (x, d) in b.iter_mut().zip(&self.d) {
            *x /= d;
        }
        self.backward(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Maps i.i.d. standard normals `z` to a centred Gaussian vector with
    /// covariance `A⁻¹`: `x = L⁻ᵀ D^{-1/2} z`.
    pub fn colour_in_place(&self, z: &mut [f64]) {
        assert_eq!(z.len(), self.dim());
        for (x, d) in z.iter_mut().zip(&self.d) {
            *x /= d.sqrt();
        }
        self.backward(z);
    }

    /// Diagonal entry `k` of `A⁻¹`.
    pub fn inverse_diagonal(&self, k: usize) -> f64 {
        let mut e = vec![0.0; self.dim()];
        e[k] = 1.0;
        self.solve_in_place(&mut e);
        e[k]
    }

    /// Entry `(i, j)` of `A⁻¹`.
    pub fn inverse_entry(&self, i: usize, j: usize) -> f64 {
        let mut e = vec![0.0; self.dim()];
        e[j] = 1.0;
        self.solve_in_place(&mut e);
        e[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b_matrix(n: usize) -> BandedPrecision {
        BandedPrecision::new(
            vec![6.0; n],
            vec![-4.0; n.saturating_sub(1)],
            vec![1.0; n.saturating_sub(2)],
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_determinant() {
        let ldl = b_matrix(2).factor().unwrap();
        assert!((ldl.log_det() - 20f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn solve_matches_multiplication() {
        let a = b_matrix(9);
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = a.mul_vec(&x);
        let y = a.factor().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_entry_of_two_by_two() {
        let ldl = b_matrix(2).factor().unwrap();
        assert!((ldl.inverse_diagonal(0) - 0.3).abs() < 1e-15);
        assert!((ldl.inverse_entry(0, 1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = BandedPrecision::new(vec![1.0, 1.0], vec![2.0], vec![]).unwrap();
        assert!(matches!(a.factor(), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn band_lengths_checked() {
        assert!(BandedPrecision::new(vec![1.0; 3], vec![0.0; 3], vec![0.0]).is_err());
    }
}
