use laplace_pin::free_energy::*;
use laplace_pin::model::*;
use laplace_pin::Error;
use proptest::prelude::*;

#[test]
fn two_and_three_site_closed_forms() {
    // N = 2: one free site with precision 6
    for eps in [0.2, 1.0, 9.0] {
        let expect = (1.0 + eps * (6.0 / std::f64::consts::TAU).sqrt()).ln();
        assert!((ratio_exact(2, eps).unwrap() - expect).abs() < 1e-13);
    }
    // N = 3: precision [[6, -4], [-4, 6]] with determinant 20
    let tau = std::f64::consts::TAU;
    let free = tau / 20f64.sqrt();
    let one_site = (tau / 6.0).sqrt();
    for eps in [0.5, 4.0] {
        let expect = ((free + 2.0 * eps * one_site + eps * eps) / free).ln();
        assert!((ratio_exact(3, eps).unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn slope_at_zero_is_sum_of_marginal_densities() {
    for n in [4usize, 9, 15] {
        let slope: f64 = (1..n)
            .map(|j| 1.0 / (std::f64::consts::TAU * field_variance(n, &PinningSet::empty(), j).unwrap()).sqrt())
            .sum();
        let h = 1e-7;
        let numeric = ratio_exact(n, h).unwrap() / h;
        assert!((numeric - slope).abs() < 1e-5 * slope, "N={n}");
    }
}

#[test]
fn coefficients_are_finite_and_grouped_by_size() {
    let poly = RatioPolynomial::enumerate(10).unwrap();
    assert_eq!(poly.log_coeffs.len(), 10);
    assert_eq!(poly.log_coeffs[0], 0.0);
    assert!(poly.log_coeffs.iter().all(|c| c.is_finite()));
    let weights = subset_log_weights(10).unwrap();
    assert_eq!(weights.len(), 1 << 9);
}

#[test]
fn very_good_sets_factorise_the_ratio() {
    let eps = 1.7f64;
    let n = 14;
    let weights = subset_log_weights(n).unwrap();
    let z_n = log_partition_zero(n, &PinningSet::empty()).unwrap();
    for p in 2..=n - 3 {
        let both = (1u64 << (p - 1)) | (1u64 << p);
        let lhs = weights
            .iter()
            .enumerate()
            .filter(|(m, _)| *m as u64 & both == both)
            .map(|(m, w)| ((m as u64).count_ones() as f64 * eps.ln() + w).exp())
            .sum::<f64>()
            .ln();
        let z_l = log_partition_zero(p, &PinningSet::empty()).unwrap();
        let z_r = log_partition_zero(n - p - 1, &PinningSet::empty()).unwrap();
        let rhs = 2.0 * eps.ln() + z_l + z_r - z_n + ratio_exact(p, eps).unwrap() + ratio_exact(n - p - 1, eps).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "p={p}");
    }
}

#[test]
fn contact_density_is_log_derivative() {
    let n = 12;
    let poly = RatioPolynomial::enumerate(n).unwrap();
    for eps in [0.1, 1.0, 2.0, 30.0] {
        let h = 1e-5;
        let fd = (poly.log_ratio(eps * (1.0 + h)) - poly.log_ratio(eps * (1.0 - h))) / (2.0 * h);
        assert!((fd - poly.mean_pins(eps)).abs() < 1e-6 * fd.max(1.0));
        assert!((poly.pin_density(eps) - poly.mean_pins(eps) / n as f64).abs() < 1e-15);
    }
}

#[test]
fn per_site_free_energy_stabilises() {
    let eps = 3.0;
    let tau: Vec<f64> = (8..=20).map(|n| ratio_exact(n, eps).unwrap() / n as f64).collect();
    let diffs: Vec<f64> = tau.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{diffs:?}");
}

#[test]
fn capacity_guard_and_domain() {
    assert!(matches!(RatioPolynomial::enumerate(MAX_EXACT_N + 1), Err(Error::Capacity(_))));
    assert!(RatioPolynomial::enumerate(MAX_EXACT_N).is_ok());
    assert!(ratio_exact(5, -1.0).is_err());
    assert_eq!(ratio_exact(5, 0.0).unwrap(), 0.0);
    assert!(tau_estimate_at(2, 1.0, &ChainBudget::default()).is_err());
    let thin = ChainBudget { half_nodes: 4, ..ChainBudget::default() };
    assert!(tau_estimate_at(8, 1.0, &thin).is_err());
}

#[test]
fn integration_agrees_with_enumeration_small_n() {
    let budget = ChainBudget { sweeps: 4000, burn_in: 400, replicas: 4, seed: 5, half_nodes: 10 };
    for eps in [0.5, 4.0] {
        let est = tau_estimate_at(8, eps, &budget).unwrap();
        let exact = est.exact.unwrap();
        assert!((exact - ratio_exact(8, eps).unwrap() / 8.0).abs() < 1e-15);
        assert!((est.tau - exact).abs() < 3.0 * est.stderr + 2e-3, "ε={eps}: {} ± {} vs {exact}", est.tau, est.stderr);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratio_is_increasing_and_convex_in_log_eps(n in 2usize..12, x in -4.0..4.0f64) {
        let poly = RatioPolynomial::enumerate(n).unwrap();
        let f = |t: f64| poly.log_ratio(t.exp());
        let h = 0.05;
        prop_assert!(f(x + h) > f(x));
        prop_assert!(f(x + h) + f(x - h) - 2.0 * f(x) >= -1e-12);
        // single full-pin term bounds the sum from below
        let full = (n - 1) as f64 * x - log_partition_zero(n, &PinningSet::empty()).unwrap();
        prop_assert!(f(x) >= full.max(0.0) - 1e-12);
    }
}
