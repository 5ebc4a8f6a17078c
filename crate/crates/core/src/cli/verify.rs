//! Desk-scale verification suites behind `laplace-pin verify`.

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::commands::{write_csv, write_json};
use super::{fmt_f64, Outcome, VerifyArgs};
use crate::error::Result;
use crate::free_energy::{pin_set_distribution, ratio_exact, tau_estimate_at, ChainBudget};
use crate::ldp::{concentration_experiment, gamma_convergence_check, rescaled_energy, smooth_test_profiles};
use crate::model::{
    discrete_minimiser, field_variance, log_det_closed_form, log_partition_zero, precision_matrix, total_hamiltonian,
    BoundaryData, LatticeField, PinnedGaussian, PinningSet,
};
use crate::sampler::{
    bridge_map, empirical_profile, run_chain, sample_integrated_rw, sample_pinned_gaussian, InitialState,
    SamplerConfig,
};
use crate::variational::{
    biharmonic_minimiser, classify_dirichlet, classify_free, critical_lengths, segment_energy_tau, tau_star,
    zero_count, Branch,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Core,
    Variational,
    Sampler,
    FreeEnergy,
    Ldp,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Variational => "variational",
            Suite::Sampler => "sampler",
            Suite::FreeEnergy => "free-energy",
            Suite::Ldp => "ldp",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Tables written next to the report.
    pub outputs: Vec<String>,
}

/// Pass/fail with a one-line detail; library errors count as failures.
type Check = std::result::Result<String, String>;

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: crate::Error) -> String {
    e.to_string()
}

struct Runner<'a> {
    suite: &'static str,
    seed: u64,
    out: Option<&'a Path>,
    checks: Vec<CheckResult>,
    outputs: Vec<String>,
}

impl Runner<'_> {
    fn run(&mut self, name: &str, f: impl FnOnce(u64, Option<&Path>, &mut Vec<String>) -> Check) {
        let start = Instant::now();
        let result = f(self.seed, self.out, &mut self.outputs);
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult {
            suite: self.suite.into(),
            name: name.into(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn random_pins(rng: &mut ChaCha8Rng, n: usize, density: f64) -> PinningSet {
    (1..n).filter(|_| rng.gen::<f64>() < density).collect()
}

fn core(r: &mut Runner) {
    r.run("determinant-identity", |_, _, _| {
        let mut worst = 0.0f64;
        for n in 2..=500 {
            let banded = precision_matrix(n, &PinningSet::empty(), false)
                .and_then(|m| m.factor())
                .map_err(err)?
                .log_det();
            let closed = log_det_closed_form(n).map_err(err)?;
            worst = worst.max((banded - closed).abs() / closed.abs());
        }
        verdict(worst <= 1e-9, format!("N = 2..500, max relative error {worst:.2e}"))
    });
    r.run("variance-correction-factorisation", |seed, _, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fact = 0.0f64;
        for _ in 0..1000 {
            let n = rng.gen_range(5..=64);
            let density = rng.gen_range(0.02..0.5);
            let pins = random_pins(&mut rng, n, density);
            for j in (1..n).filter(|s| !pins.contains(*s)).take(3) {
                if field_variance(n, &pins, j).map_err(err)? > (n as f64).powi(3) {
                    return Err(format!("variance above N³ at N = {n}"));
                }
            }
            if !pins.is_empty() {
                let lhs = log_partition_zero(n, &pins).map_err(err)?;
                let rhs = (TAU * n as f64).ln() + log_partition_zero(n, &pins.corrected(n)).map_err(err)?;
                if lhs > rhs + 1e-12 {
                    return Err(format!("correction-map inequality fails at N = {n}"));
                }
            }
            let p = rng.gen_range(2..=n - 3);
            let good = pins.union(&PinningSet::new([p, p + 1]));
            let left: PinningSet = good.sites().iter().copied().filter(|&s| s < p).collect();
            let right: PinningSet = good.sites().iter().filter(|&&s| s > p + 1).map(|&s| s - p - 1).collect();
            let whole = log_partition_zero(n, &good).map_err(err)?;
            let parts = log_partition_zero(p, &left).map_err(err)? + log_partition_zero(n - p - 1, &right).map_err(err)?;
            fact = fact.max((whole - parts).abs() / whole.abs().max(1.0));
        }
        verdict(fact <= 1e-9, format!("1000 configurations, factorisation error {fact:.2e}"))
    });
    r.run("discrete-minimiser-convergence", |_, _, _| {
        let bc = BoundaryData::dirichlet(0.7, -1.3, 0.4, 2.1);
        let cont = biharmonic_minimiser(&bc).map_err(err)?.cubic;
        let mut errs = Vec::new();
        for n in [10usize, 100, 1000] {
            let phi = discrete_minimiser(n, &bc, &PinningSet::empty()).map_err(err)?;
            let nf = n as f64;
            errs.push((0..=n).fold(0.0f64, |m, k| {
                m.max((phi.get(k as isize) / (nf * nf) - cont.value(k as f64 / nf)).abs())
            }));
        }
        verdict(errs.windows(2).all(|w| w[0] / w[1] > 8.0), format!("sup errors [{}]", sci(&errs)))
    });
}

fn variational(r: &mut Runner) {
    r.run("caption-critical-lengths", |_, _, _| {
        let got: Vec<f64> = critical_lengths(288.0, 1.0, -12.0).map_err(err)?.iter().map(|c| c.value).collect();
        let want = [(2f64.sqrt() - 1.0) / 2.0, 0.5];
        verdict(
            got.len() == 2 && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12),
            format!("{got:?}"),
        )
    });
    r.run("zero-count-law", |seed, _, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let (a, alpha, l): (f64, f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-30.0..30.0), rng.gen_range(0.01..1.0));
            let rule = u32::from(a * alpha < 0.0 && alpha.abs() * l > 3.0 * a.abs());
            if zero_count(a, alpha, l) != rule {
                return Err(format!("mismatch at ({a}, {alpha}, {l})"));
            }
        }
        Ok("10000 draws".into())
    });
    r.run("phase-boundaries", |_, _, _| {
        let free = (tau_star(0.0, 1.0, Branch::One) - 8.0).abs();
        let quartic = (tau_star(1.0, 0.0, Branch::One) - 512.0 / 9.0).abs();
        verdict(free < 1e-6 && quartic < 1e-6, format!("|τ* - 8α²| = {free:.1e}, |τ* - 512/9| = {quartic:.1e}"))
    });
    r.run("classification-vs-grid", |seed, _, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        while checked < 100 {
            let (a, alpha, tau): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-20.0..20.0), rng.gen_range(0.5..600.0));
            let report = classify_free(a, alpha, tau).map_err(err)?;
            let brute = (1..100_000)
                .map(|i| segment_energy_tau(i as f64 / 1e5, a, alpha, tau).map_or(f64::INFINITY, |e| e - tau))
                .fold(0.0f64, f64::min);
            let tol = 1e-6 * brute.abs().max(1.0);
            let ties = report.candidates.iter().filter_map(|c| c.sigma).filter(|s| (s - report.sigma_min).abs() < tol).count();
            if ties > 1 {
                continue;
            }
            if (brute - report.sigma_min).abs() > tol {
                return Err(format!("({a}, {alpha}, {tau}): Σ {} vs grid {brute}", report.sigma_min));
            }
            checked += 1;
        }
        Ok("100 draws agree with a 10⁵-point grid".into())
    });
}

fn sampler(r: &mut Runner) {
    r.run("heat-bath-vs-enumeration", |seed, _, _| {
        let n = 6;
        let mut tvs = Vec::new();
        for eps in [0.5, 2.0, 10.0] {
            let exact = pin_set_distribution(n, eps).map_err(err)?;
            let mut c = SamplerConfig::new(n, BoundaryData::zero(), eps, seed);
            c.sweeps = 200_000;
            c.burn_in = 1000;
            let mut counts = vec![0usize; exact.len()];
            let mut total = 0usize;
            for s in run_chain(&c).map_err(err)? {
                counts[s.state.pins().to_mask() as usize] += 1;
                total += 1;
            }
            tvs.push(0.5 * counts.iter().zip(&exact).map(|(&k, p)| (k as f64 / total as f64 - p).abs()).sum::<f64>());
        }
        verdict(tvs.iter().all(|&t| t <= 0.02), format!("N = 6, TV {tvs:.4?}"))
    });
    r.run("bridge-moments", |seed, _, _| {
        let n = 64;
        let draws = 20_000;
        let g = PinnedGaussian::new(n, &PinningSet::empty(), false).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = [(16usize, 16usize), (32, 32), (16, 48)];
        let mut prod = [0.0; 3];
        for _ in 0..draws {
            let b = bridge_map(&sample_integrated_rw(n, 0.0, 0.0, &mut rng)).map_err(err)?;
            if b.get(n as isize) != 0.0 || b.get(n as isize + 1) != 0.0 {
                return Err("bridge end values not exactly zero".into());
            }
            for (i, &(p, q)) in pairs.iter().enumerate() {
                prod[i] += b.get(p as isize) * b.get(q as isize);
            }
        }
        let mut worst = 0.0f64;
        for (i, &(p, q)) in pairs.iter().enumerate() {
            let cov = g.covariance(p, q).map_err(err)?;
            let se = ((g.variance(p).map_err(err)? * g.variance(q).map_err(err)? + cov * cov) / draws as f64).sqrt();
            worst = worst.max((prod[i] / draws as f64 - cov).abs() / se);
        }
        verdict(worst <= 4.0, format!("worst deviation {worst:.2} standard errors"))
    });
    r.run("boundary-slots-exact", |seed, _, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bc = BoundaryData::dirichlet(0.5, -1.0, 0.25, 2.0);
        let n = 40;
        let expect = LatticeField::with_boundary(n, &bc);
        for _ in 0..100 {
            let f = sample_pinned_gaussian(n, &bc, &PinningSet::new([3, 17]), &mut rng).map_err(err)?;
            for k in [-1isize, 0, n as isize, n as isize + 1] {
                if f.get(k) != expect.get(k) {
                    return Err(format!("slot {k} moved"));
                }
            }
        }
        Ok("100 draws".into())
    });
    r.run("seed-determinism", |seed, _, _| {
        let mut c = SamplerConfig::new(16, BoundaryData::zero(), 2.0, seed);
        c.sweeps = 300;
        let a: Vec<f64> = run_chain(&c).map_err(err)?.map(|s| s.profile.sup_abs()).collect();
        let b: Vec<f64> = run_chain(&c).map_err(err)?.map(|s| s.profile.sup_abs()).collect();
        verdict(a == b, format!("{} samples identical", a.len()))
    });
}

fn free_energy(r: &mut Runner) {
    r.run("two-site-closed-form", |_, _, _| {
        let mut worst = 0.0f64;
        for eps in [0.1, 1.0, 10.0] {
            let want = (1.0 + eps * (6.0 / TAU).sqrt()).ln();
            worst = worst.max((ratio_exact(2, eps).map_err(err)? - want).abs());
        }
        verdict(worst < 1e-13, format!("error {worst:.1e}"))
    });
    r.run("very-good-factorisation", |_, _, _| {
        let (n, eps) = (12usize, 1.7f64);
        let p = 5;
        let weights = crate::free_energy::subset_log_weights(n).map_err(err)?;
        let both = (1u64 << (p - 1)) | (1u64 << p);
        let lhs = weights
            .iter()
            .enumerate()
            .filter(|(m, _)| *m as u64 & both == both)
            .map(|(m, w)| ((m as u64).count_ones() as f64 * eps.ln() + w).exp())
            .sum::<f64>()
            .ln();
        let z = |k: usize| log_partition_zero(k, &PinningSet::empty()).map_err(err);
        let rhs = 2.0 * eps.ln() + z(p)? + z(n - p - 1)? - z(n)?
            + ratio_exact(p, eps).map_err(err)?
            + ratio_exact(n - p - 1, eps).map_err(err)?;
        verdict((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), format!("difference {:.1e}", (lhs - rhs).abs()))
    });
    r.run("integration-vs-enumeration", |seed, _, _| {
        let budget = ChainBudget { sweeps: 4000, burn_in: 400, replicas: 4, seed, half_nodes: 10 };
        let est = tau_estimate_at(8, 2.0, &budget).map_err(err)?;
        let exact = est.exact.unwrap_or(f64::NAN);
        verdict(
            (est.tau - exact).abs() <= 3.0 * est.stderr + 2e-3,
            format!("N = 8, ε = 2: {:.5} ± {:.5} vs {exact:.5}", est.tau, est.stderr),
        )
    });
    r.run("capacity-guard", |_, _, _| {
        verdict(
            matches!(ratio_exact(crate::free_energy::MAX_EXACT_N + 1, 1.0), Err(crate::Error::Capacity(_))),
            format!("N > {} rejected", crate::free_energy::MAX_EXACT_N),
        )
    });
}

fn ldp(r: &mut Runner) {
    r.run("energy-scaling-identity", |seed, _, _| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let n = rng.gen_range(2..200);
            let mut f = LatticeField::zeros(n);
            for k in -1..=n as isize + 1 {
                f.set(k, rng.gen_range(-100.0..100.0));
            }
            let h = total_hamiltonian(&f);
            let e = rescaled_energy(&empirical_profile(&f)).map_err(err)?;
            worst = worst.max((n as f64 * e - h).abs() / h);
        }
        verdict(worst <= 1e-9, format!("relative error {worst:.1e}"))
    });
    r.run("gamma-convergence", |_, _, _| {
        let mut worst = f64::NEG_INFINITY;
        for p in smooth_test_profiles() {
            let rep = gamma_convergence_check(&p, &[16, 64, 256, 1024]).map_err(err)?;
            if !rep.lower_bound_holds {
                return Err(format!("{}: E_N below E", rep.name));
            }
            worst = worst.max(rep.order);
        }
        verdict(worst <= -0.9, format!("shallowest slope {worst:.3}"))
    });
    r.run("concentration-tables", |seed, out, outputs| {
        let n_list = [32, 64, 128, 256];
        let mut rows = Vec::new();
        let mut ok = true;
        let mut detail = Vec::new();
        let cases: [(&str, BoundaryData, f64, InitialState, usize, usize); 2] = [
            ("eps8-zero-bc", BoundaryData::zero(), 8.0, InitialState::Pinned, 5, 150),
            ("eps0-dirichlet", BoundaryData::dirichlet(1.0, -2.0, 0.5, 1.0), 0.0, InitialState::Minimiser, 1, 200),
        ];
        for (case, bc, eps, init, thin, samples) in cases {
            // zero data: h ≡ 0 minimises Σ for every τ > 0, so any positive τ labels the set
            let tau = if eps > 0.0 { eps.ln() } else { 0.0 };
            let report = classify_dirichlet(&bc, tau).map_err(err)?;
            let mut c = SamplerConfig::new(32, bc, eps, seed);
            c.init = init;
            c.burn_in = 500;
            c.thin = thin;
            let table = concentration_experiment(&c, &report, &n_list, samples, &[0.01]).map_err(err)?;
            let med: Vec<f64> = table.rows.iter().map(|r| r.median).collect();
            ok &= med.windows(2).all(|w| w[1] < w[0]);
            detail.push(format!("{case}: medians [{}]", sci(&med)));
            for row in &table.rows {
                rows.push(vec![
                    row.n.to_string(),
                    fmt_f64(if eps > 0.0 { eps } else { tau }),
                    fmt_f64(row.median),
                    fmt_f64(row.q90),
                    fmt_f64(row.mean_contact),
                    case.to_string(),
                ]);
            }
        }
        if let Some(dir) = out {
            let name = "concentration.csv";
            write_csv(
                &dir.join(name),
                &["n", "eps_or_tau", "median_dist", "q90_dist", "mean_contact", "case"],
                rows,
            )
            .map_err(err)?;
            outputs.push(name.into());
        }
        verdict(ok, detail.join("; "))
    });
}

/// Runs `suite`; tables go to `out` when given.
pub fn run_suite(suite: Suite, seed: u64, out: Option<&Path>) -> SuiteReport {
    let mut r = Runner {
        suite: suite.name(),
        seed,
        out,
        checks: Vec::new(),
        outputs: Vec::new(),
    };
    let all = suite == Suite::All;
    for (s, f) in [
        (Suite::Core, core as fn(&mut Runner)),
        (Suite::Variational, variational),
        (Suite::Sampler, sampler),
        (Suite::FreeEnergy, free_energy),
        (Suite::Ldp, ldp),
    ] {
        if all || s == suite {
            r.suite = s.name();
            f(&mut r);
        }
    }
    SuiteReport {
        schema: "laplace-pin/verify-report".into(),
        schema_version: super::SCHEMA_VERSION,
        suite: suite.name().into(),
        seed,
        passed: r.checks.iter().all(|c| c.passed),
        checks: r.checks,
        outputs: r.outputs,
    }
}

pub(super) fn command(args: &VerifyArgs, out: &Path) -> Result<(Vec<String>, Outcome)> {
    let report = run_suite(args.suite, args.seed, Some(out));
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}/{} ({:.2}s): {}", c.suite, c.name, c.seconds, c.detail);
    }
    let name = format!("verify_{}.json", args.suite.name());
    write_json(&out.join(&name), &report)?;
    let mut outputs = vec![name];
    outputs.extend(report.outputs.iter().cloned());
    let outcome = if report.passed { Outcome::Success } else { Outcome::ChecksFailed };
    Ok((outputs, outcome))
}
