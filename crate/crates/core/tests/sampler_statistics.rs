use laplace_pin::free_energy::{pin_set_distribution, RatioPolynomial};
use laplace_pin::model::*;
use laplace_pin::sampler::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn within(est: f64, truth: f64, se: f64, k: f64) -> bool {
    (est - truth).abs() <= k * se
}

#[test]
fn integrated_walk_covariance() {
    let n = 20;
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pairs = [(3usize, 3usize), (5, 12), (10, 20), (21, 21)];
    let mut mean = [0.0; 4];
    let mut prod = [0.0; 4];
    for _ in 0..draws {
        let f = sample_integrated_rw(n, 0.0, 0.0, &mut rng);
        for (i, &(m, k)) in pairs.iter().enumerate() {
            mean[i] += f.get(m as isize);
            prod[i] += f.get(m as isize) * f.get(k as isize);
        }
    }
    for (i, &(m, k)) in pairs.iter().enumerate() {
        let cov = |m: usize, k: usize| -> f64 {
            (1..=m.min(k)).map(|j| ((m - j + 1) * (k - j + 1)) as f64).sum()
        };
        let truth = cov(m, k);
        let se = ((cov(m, m) * cov(k, k) + truth * truth) / draws as f64).sqrt();
        assert!(within(prod[i] / draws as f64, truth, se, 4.0), "pair ({m},{k})");
        assert!(within(mean[i] / draws as f64, 0.0, (cov(m, m) / draws as f64).sqrt(), 4.0));
    }
}

#[test]
fn bridge_has_pinned_gaussian_law() {
    let n = 64;
    let draws = 100_000;
    let target = PinnedGaussian::new(n, &PinningSet::empty(), false).unwrap();
    let pairs = [(16usize, 16usize), (32, 32), (16, 48), (5, 60), (63, 63)];
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut mean = [0.0; 5];
    let mut prod = [0.0; 5];
    for _ in 0..draws {
        let b = bridge_map(&sample_integrated_rw(n, 0.0, 0.0, &mut rng)).unwrap();
        assert_eq!((b.get(n as isize), b.get(n as isize + 1)), (0.0, 0.0));
        for (i, &(p, q)) in pairs.iter().enumerate() {
            mean[i] += b.get(p as isize);
            prod[i] += b.get(p as isize) * b.get(q as isize);
        }
    }
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let truth = target.covariance(p, q).unwrap();
        let (vp, vq) = (target.variance(p).unwrap(), target.variance(q).unwrap());
        let se = ((vp * vq + truth * truth) / draws as f64).sqrt();
        assert!(within(prod[i] / draws as f64, truth, se, 4.0), "pair ({p},{q})");
        assert!(within(mean[i] / draws as f64, 0.0, (vp / draws as f64).sqrt(), 4.0));
    }
}

#[test]
fn pinned_gaussian_mean_and_variance() {
    let n = 24;
    let bc = BoundaryData::dirichlet(0.4, -1.0, -0.2, 0.8);
    let pins = PinningSet::new([5, 6, 13, 20]);
    let g = PinnedGaussian::new(n, &pins, false).unwrap();
    let mu = discrete_minimiser(n, &bc, &pins).unwrap();
    let draws = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let sites = [3usize, 10, 17, 23];
    let mut s1 = [0.0; 4];
    let mut s2 = [0.0; 4];
    for _ in 0..draws {
        let f = sample_pinned_gaussian(n, &bc, &pins, &mut rng).unwrap();
        for &p in pins.sites() {
            assert_eq!(f.get(p as isize), 0.0);
        }
        for (i, &k) in sites.iter().enumerate() {
            let d = f.get(k as isize) - mu.get(k as isize);
            s1[i] += d;
            s2[i] += d * d;
        }
    }
    for (i, &k) in sites.iter().enumerate() {
        let var = g.variance(k).unwrap();
        let m = draws as f64;
        assert!(within(s1[i] / m, 0.0, (var / m).sqrt(), 4.0), "mean at {k}");
        assert!(within(s2[i] / m, var, var * (2.0 / m).sqrt(), 4.0), "variance at {k}");
    }
}

#[test]
fn free_right_sample_matches_walk_mean() {
    let n = 12;
    let (a, alpha) = (0.3, -0.7);
    let g = PinnedGaussian::new(n, &PinningSet::empty(), true).unwrap();
    let mu = g.minimiser(&BoundaryData::free_right(a, alpha)).unwrap();
    let nf = n as f64;
    for k in 1..=n + 1 {
        let walk_mean = a * nf * nf + k as f64 * alpha * nf;
        assert!((mu.get(k as isize) - walk_mean).abs() < 1e-9 * walk_mean.abs().max(1.0));
    }
}

fn tv_distance(n: usize, epsilon: f64, order: SweepOrder, sweeps: usize, seed: u64) -> f64 {
    let exact = pin_set_distribution(n, epsilon).unwrap();
    let mut config = SamplerConfig::new(n, BoundaryData::zero(), epsilon, seed);
    config.sweeps = sweeps;
    config.burn_in = 1000;
    config.order = order;
    let mut counts = vec![0usize; exact.len()];
    let mut total = 0usize;
    for s in run_chain(&config).unwrap() {
        counts[s.state.pins().to_mask() as usize] += 1;
        total += 1;
    }
    0.5 * counts
        .iter()
        .zip(&exact)
        .map(|(&c, &p)| (c as f64 / total as f64 - p).abs())
        .sum::<f64>()
}

#[test]
fn heat_bath_pin_sets_follow_exact_law() {
    for order in [SweepOrder::ForwardBackward, SweepOrder::RandomScan] {
        for eps in [0.5, 3.0] {
            let tv = tv_distance(6, eps, order, 200_000, 24);
            assert!(tv < 0.02, "{order:?} ε={eps}: TV {tv}");
        }
    }
}

#[test]
fn pin_density_matches_enumeration() {
    let n = 10;
    let poly = RatioPolynomial::enumerate(n).unwrap();
    for eps in [0.3, 1.5, 6.0] {
        let mut config = SamplerConfig::new(n, BoundaryData::zero(), eps, 25);
        config.sweeps = 200_000;
        config.burn_in = 1000;
        let (_, pin, k) = run_chain(&config).unwrap().mean_fractions();
        assert_eq!(k, 199_000);
        let exact = poly.pin_density(eps);
        assert!((pin - exact).abs() < 0.01, "ε={eps}: {pin} vs {exact}");
    }
}

#[test]
fn chains_are_reproducible_and_replicas_differ() {
    let mut config = SamplerConfig::new(16, BoundaryData::zero(), 2.0, 26);
    config.sweeps = 200;
    let a: Vec<f64> = run_chain(&config).unwrap().map(|s| s.pin_fraction).collect();
    let b: Vec<f64> = run_chain(&config).unwrap().map(|s| s.pin_fraction).collect();
    assert_eq!(a, b);
    config.replica = 1;
    let c: Vec<f64> = run_chain(&config).unwrap().map(|s| s.pin_fraction).collect();
    assert_ne!(a, c);
}

#[test]
fn zero_epsilon_never_pins() {
    let mut config = SamplerConfig::new(12, BoundaryData::dirichlet(0.5, 0.5, 0.0, 0.0), 0.0, 27);
    config.sweeps = 500;
    let mut run = run_chain(&config).unwrap();
    let (_, pin, _) = run.mean_fractions();
    assert_eq!(pin, 0.0);
    assert_eq!(run.diagnostics().pinned_updates, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// `(m, c)` recovered from three evaluations of `H` along one coordinate.
    #[test]
    fn conditional_matches_energy_slice(
        n in 3usize..20, seed in any::<u64>(), free_right in any::<bool>(),
        a in -1.0..1.0f64, alpha in -1.0..1.0f64,
    ) {
        let bc = if free_right { BoundaryData::free_right(a, alpha) } else { BoundaryData::dirichlet(a, alpha, 0.3, -0.4) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = LatticeField::with_boundary(n, &bc);
        for s in free_sites(n, free_right) {
            field.set(s as isize, rng.gen_range(-5.0..5.0));
        }
        let state = ChainState::new(field.clone(), &PinningSet::empty(), free_right).unwrap();
        let kernel = HeatBath::new(n, free_right, 1.0, SweepOrder::ForwardBackward);
        let site = rng.gen_range(free_sites(n, free_right));
        let at = |x: f64| {
            let mut f = field.clone();
            f.set(site as isize, x);
            total_hamiltonian(&f)
        };
        let c = at(1.0) + at(-1.0) - 2.0 * at(0.0);
        let m = -(at(1.0) - at(-1.0)) / (2.0 * c);
        let (km, kc) = kernel.conditional(&state, site);
        prop_assert!((kc - c).abs() < 1e-9 * c);
        prop_assert!((km - m).abs() < 1e-8 * (1.0 + m.abs()));
    }
}
