//! Heat-bath Markov chain for the pinned Gibbs measure.
//!
//! At a free site `k` with all other heights fixed, the Gaussian part of the
//! measure has precision `c_k = Q_kk` and mean `m_k = -Σ_{j≠k} Q_kj φ_j / c_k`.
//! The full conditional is the mixture
//!
//! ```text
//! ε e^{-c_k m_k²/2} δ₀  +  √(2π/c_k) N(m_k, 1/c_k)
//! ```
//!
//! (normalised), which the sweep samples exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::exact::sample_pinned_gaussian;
use super::profile::{contact_number, empirical_profile, MacroProfile};
use crate::error::{domain, Result};
use crate::model::{discrete_minimiser, free_sites, BoundaryData, LatticeField, LatticeHessian, PinningSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    /// Sites in increasing order, then decreasing.
    #[default]
    ForwardBackward,
    /// As many uniformly chosen sites as there are free sites.
    RandomScan,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Discrete minimiser without pins.
    #[default]
    Minimiser,
    /// Every free site pinned.
    Pinned,
    /// Exact draw from the unpinned Gaussian.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub bc: BoundaryData,
    pub epsilon: f64,
    pub seed: u64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Stream index; replicas sharing a seed draw from disjoint streams.
    #[serde(default)]
    pub replica: u64,
    #[serde(default)]
    pub order: SweepOrder,
    #[serde(default)]
    pub init: InitialState,
}

impl SamplerConfig {
    pub fn new(n: usize, bc: BoundaryData, epsilon: f64, seed: u64) -> Self {
        SamplerConfig {
            n,
            bc,
            epsilon,
            seed,
            sweeps: 1000,
            burn_in: 100,
            thin: 1,
            replica: 0,
            order: SweepOrder::default(),
            init: InitialState::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("N = {} < 2", self.n));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return domain(format!("ε must be finite and ≥ 0, got {}", self.epsilon));
        }
        if self.sweeps <= self.burn_in {
            return domain(format!("sweeps ({}) must exceed burn-in ({})", self.sweeps, self.burn_in));
        }
        if self.thin == 0 {
            return domain("thin must be ≥ 1");
        }
        self.bc.check_finite()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replica);
        rng
    }
}

/// Field plus the atoms selected at pinned sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub field: LatticeField,
    /// `pinned[k]` for site `k`; index 0 unused.
    pinned: Vec<bool>,
    free_right: bool,
}

impl ChainState {
    pub fn new(field: LatticeField, pins: &PinningSet, free_right: bool) -> Result<Self> {
        let n = field.n();
        pins.validate(n, free_right)?;
        let mut pinned = vec![false; n + 2];
        let mut field = field;
        for &s in pins.sites() {
            pinned[s] = true;
            field.set(s as isize, 0.0);
        }
        Ok(ChainState {
            field,
            pinned,
            free_right,
        })
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn free_right(&self) -> bool {
        self.free_right
    }

    pub fn pins(&self) -> PinningSet {
        self.pinned
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn pin_count(&self) -> usize {
        self.pinned.iter().filter(|&&p| p).count()
    }

    pub fn is_pinned(&self, site: usize) -> bool {
        self.pinned.get(site).copied().unwrap_or(false)
    }

    /// `|P| / N`
    pub fn pin_fraction(&self) -> f64 {
        self.pin_count() as f64 / self.n() as f64
    }

    /// `#{k ≤ N : φ_k = 0} / N`
    pub fn contact_fraction(&self) -> f64 {
        contact_number(&self.field) as f64 / self.n() as f64
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub sweeps: usize,
    pub site_updates: u64,
    /// Updates that ended pinned.
    pub pinned_updates: u64,
    /// Updates that changed the pinned status of a site.
    pub pin_flips: u64,
}

impl ChainDiagnostics {
    pub fn pin_rate(&self) -> f64 {
        ratio(self.pinned_updates, self.site_updates)
    }

    pub fn flip_rate(&self) -> f64 {
        ratio(self.pin_flips, self.site_updates)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Single-site heat-bath kernel bound to one lattice size and pinning strength.
#[derive(Clone, Debug)]
pub struct HeatBath {
    hessian: LatticeHessian,
    log_epsilon: f64,
    sites: Vec<usize>,
    order: SweepOrder,
}

impl HeatBath {
    pub fn new(n: usize, free_right: bool, epsilon: f64, order: SweepOrder) -> Self {
        HeatBath {
            hessian: LatticeHessian::new(n),
            log_epsilon: epsilon.ln(),
            sites: free_sites(n, free_right).collect(),
            order,
        }
    }

    /// Conditional Gaussian `(m_k, c_k)` at `site`.
    pub fn conditional(&self, state: &ChainState, site: usize) -> (f64, f64) {
        let s = site as isize;
        let c = self.hessian.entry(s, s);
        let m = -self.hessian.off_diagonal_action(state.field.values(), s) / c;
        (m, c)
    }

    /// Probability of selecting the atom at `site`.
    pub fn pin_probability(&self, state: &ChainState, site: usize) -> f64 {
        let (m, c) = self.conditional(state, site);
        pin_probability(self.log_epsilon, m, c)
    }

    pub fn update_site<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        site: usize,
        rng: &mut R,
        diag: &mut ChainDiagnostics,
    ) {
        let (m, c) = self.conditional(state, site);
        let pin = rng.gen::<f64>() < pin_probability(self.log_epsilon, m, c);
        let value = if pin {
            0.0
        } else {
            m + rng.sample::<f64, _>(StandardNormal) / c.sqrt()
        };
        diag.site_updates += 1;
        diag.pinned_updates += u64::from(pin);
        diag.pin_flips += u64::from(pin != state.pinned[site]);
        state.pinned[site] = pin;
        state.field.set(site as isize, value);
    }

    pub fn sweep<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, diag: &mut ChainDiagnostics) {
        match self.order {
            SweepOrder::ForwardBackward => {
                for &s in self.sites.iter().chain(self.sites.iter().rev()) {
                    self.update_site(state, s, rng, diag);
                }
            }
            SweepOrder::RandomScan => {
                for _ in 0..self.sites.len() {
                    let s = *self.sites.choose(rng).expect("at least one free site");
                    self.update_site(state, s, rng, diag);
                }
            }
        }
        diag.sweeps += 1;
    }
}

/// `σ(log ε - c m²/2 - ½ log(2π/c))`
fn pin_probability(log_epsilon: f64, m: f64, c: f64) -> f64 {
    if log_epsilon == f64::NEG_INFINITY {
        return 0.0;
    }
    let logit = log_epsilon - 0.5 * c * m * m - 0.5 * (std::f64::consts::TAU / c).ln();
    if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    }
}

/// One forward-backward sweep at pinning strength `epsilon`.
pub fn gibbs_sweep<R: Rng + ?Sized>(state: &mut ChainState, epsilon: f64, rng: &mut R) -> ChainDiagnostics {
    let kernel = HeatBath::new(state.n(), state.free_right, epsilon, SweepOrder::ForwardBackward);
    let mut diag = ChainDiagnostics::default();
    kernel.sweep(state, rng, &mut diag);
    diag
}

/// Starting state for `config`.
pub fn initial_state<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> Result<ChainState> {
    let n = config.n;
    let free_right = config.bc.is_free_right();
    match config.init {
        InitialState::Minimiser => {
            ChainState::new(discrete_minimiser(n, &config.bc, &PinningSet::empty())?, &PinningSet::empty(), free_right)
        }
        InitialState::Pinned => {
            let pins: PinningSet = free_sites(n, free_right).collect();
            ChainState::new(LatticeField::with_boundary(n, &config.bc), &pins, free_right)
        }
        InitialState::Gaussian => {
            let field = sample_pinned_gaussian(n, &config.bc, &PinningSet::empty(), rng)?;
            ChainState::new(field, &PinningSet::empty(), free_right)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub sweep: usize,
    pub contact_fraction: f64,
    pub pin_fraction: f64,
    pub profile: MacroProfile,
    pub state: ChainState,
}

/// Iterator over thinned post-burn-in states of one chain.
pub struct ChainRun {
    config: SamplerConfig,
    kernel: HeatBath,
    state: ChainState,
    rng: ChaCha8Rng,
    diagnostics: ChainDiagnostics,
}

impl ChainRun {
    pub fn diagnostics(&self) -> ChainDiagnostics {
        self.diagnostics
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// Runs the remaining sweeps, folding `(contact fraction, pin fraction)` means.
    pub fn mean_fractions(&mut self) -> (f64, f64, usize) {
        let (mut c, mut p, mut k) = (0.0, 0.0, 0usize);
        while let Some((cf, pf)) = self.advance() {
            c += cf;
            p += pf;
            k += 1;
        }
        if k == 0 {
            (0.0, 0.0, 0)
        } else {
            (c / k as f64, p / k as f64, k)
        }
    }

    /// Sweeps to the next emitted state without cloning it.
    fn advance(&mut self) -> Option<(f64, f64)> {
        loop {
            if self.diagnostics.sweeps >= self.config.sweeps {
                return None;
            }
            self.kernel.sweep(&mut self.state, &mut self.rng, &mut self.diagnostics);
            let done = self.diagnostics.sweeps;
            if done > self.config.burn_in && (done - self.config.burn_in).is_multiple_of(self.config.thin) {
                return Some((self.state.contact_fraction(), self.state.pin_fraction()));
            }
        }
    }
}

impl Iterator for ChainRun {
    type Item = ChainSample;

    fn next(&mut self) -> Option<ChainSample> {
        let (contact_fraction, pin_fraction) = self.advance()?;
        Some(ChainSample {
            sweep: self.diagnostics.sweeps,
            contact_fraction,
            pin_fraction,
            profile: empirical_profile(&self.state.field),
            state: self.state.clone(),
        })
    }
}

/// Deterministic chain for `config`; the seed and replica index fix the stream.
pub fn run_chain(config: &SamplerConfig) -> Result<ChainRun> {
    config.validate()?;
    let mut rng = config.rng();
    let state = initial_state(config, &mut rng)?;
    Ok(ChainRun {
        kernel: HeatBath::new(config.n, config.bc.is_free_right(), config.epsilon, config.order),
        config: config.clone(),
        state,
        rng,
        diagnostics: ChainDiagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(epsilon: f64) -> SamplerConfig {
        let mut c = SamplerConfig::new(8, BoundaryData::zero(), epsilon, 5);
        c.sweeps = 200;
        c.burn_in = 20;
        c.thin = 3;
        c
    }

    #[test]
    fn config_validation() {
        let mut c = config(1.0);
        assert!(c.validate().is_ok());
        c.burn_in = c.sweeps;
        assert!(c.validate().is_err());
        assert!(config(-1.0).validate().is_err());
        let mut c = config(1.0);
        c.thin = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<_> = run_chain(&config(2.0)).unwrap().collect();
        let b: Vec<_> = run_chain(&config(2.0)).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 60);
        let mut other = config(2.0);
        other.replica = 1;
        let c: Vec<_> = run_chain(&other).unwrap().collect();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_epsilon_never_pins() {
        let (contact, pins, k) = run_chain(&config(0.0)).unwrap().mean_fractions();
        assert_eq!(pins, 0.0);
        // site N carries the zero boundary height
        assert!((contact - 1.0 / 8.0).abs() < 1e-15);
        assert_eq!(k, 60);
    }

    #[test]
    fn huge_epsilon_pins_everything() {
        let mut c = config(1e12);
        c.init = InitialState::Minimiser;
        let mut run = run_chain(&c).unwrap();
        let last = run.by_ref().last().unwrap();
        assert_eq!(last.state.pin_count(), 7);
        assert_eq!(last.contact_fraction, 1.0);
    }

    #[test]
    fn pins_are_exact_zeros() {
        let mut c = config(3.0);
        c.bc = BoundaryData::free_right(0.2, -0.5);
        c.order = SweepOrder::RandomScan;
        for s in run_chain(&c).unwrap() {
            for &p in s.state.pins().sites() {
                assert_eq!(s.state.field.get(p as isize), 0.0);
            }
            assert_eq!(s.state.field.get(0), 0.2 * 64.0);
        }
    }

    #[test]
    fn pin_probability_limits() {
        assert_eq!(pin_probability(f64::NEG_INFINITY, 0.0, 6.0), 0.0);
        assert!(pin_probability(1e3, 0.0, 6.0) > 1.0 - 1e-12);
        let p = pin_probability(0.0, 0.0, std::f64::consts::TAU);
        assert!((p - 0.5).abs() < 1e-15);
    }
}
