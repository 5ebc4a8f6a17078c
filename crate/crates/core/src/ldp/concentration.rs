//! Sup-distance of sampled profiles to a classified minimiser set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{PinnedGaussian, PinningSet};
use crate::sampler::{empirical_profile, run_chain, MacroProfile, SamplerConfig};
use crate::variational::{build_profile, PhaseReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub samples: usize,
    pub median: f64,
    pub q90: f64,
    pub mean_contact: f64,
    /// Fraction of samples within each `δ` of the minimiser set.
    pub coverage: Vec<f64>,
    /// Mean pin density moved by more than 0.05 between chain halves.
    pub unconverged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub delta: Vec<f64>,
    pub rows: Vec<ConcentrationRow>,
}

/// Grid sup-distance from `h` to the closest listed minimiser.
pub fn distance_to_set(h: &MacroProfile, report: &PhaseReport) -> Result<f64> {
    let mut best = f64::INFINITY;
    for d in &report.minimisers {
        let target = build_profile(d, h.n)?;
        let dist = h
            .values
            .iter()
            .zip(&target.h)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        best = best.min(dist);
    }
    Ok(best)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distances and contact fractions of `samples` draws at size `n`.
///
/// `ε = 0` uses exact Gaussian draws; otherwise thinned heat-bath states
/// from `config` with `n` substituted.
fn draw(config: &SamplerConfig, n: usize, samples: usize, report: &PhaseReport) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let mut c = config.clone();
    c.n = n;
    if c.epsilon == 0.0 {
        let gauss = PinnedGaussian::new(n, &PinningSet::empty(), c.bc.is_free_right())?;
        let mut rng = c.rng();
        let mut dist = Vec::with_capacity(samples);
        let mut contact = Vec::with_capacity(samples);
        for _ in 0..samples {
            let f = gauss.sample(&c.bc, &mut rng)?;
            dist.push(distance_to_set(&empirical_profile(&f), report)?);
            contact.push(crate::sampler::contact_number(&f) as f64 / n as f64);
        }
        return Ok((dist, contact, false));
    }
    c.sweeps = c.burn_in + samples * c.thin;
    let mut dist = Vec::with_capacity(samples);
    let mut contact = Vec::with_capacity(samples);
    let mut pins = Vec::with_capacity(samples);
    for s in run_chain(&c)? {
        dist.push(distance_to_set(&s.profile, report)?);
        contact.push(s.contact_fraction);
        pins.push(s.pin_fraction);
    }
    let half = pins.len() / 2;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    let unconverged = (mean(&pins[..half]) - mean(&pins[half..])).abs() > 0.05;
    Ok((dist, contact, unconverged))
}

/// Empirical law of `dist_∞(h_N, M)` for every `N` in `n_list`.
pub fn concentration_experiment(
    config: &SamplerConfig,
    report: &PhaseReport,
    n_list: &[usize],
    samples: usize,
    delta: &[f64],
) -> Result<ConcentrationReport> {
    if samples < 2 {
        return domain("concentration needs at least two samples per N");
    }
    if report.minimisers.is_empty() {
        return domain("phase report lists no minimisers");
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let (mut dist, contact, unconverged) = draw(config, n, samples, report)?;
            dist.sort_by(f64::total_cmp);
            let coverage = delta
                .iter()
                .map(|&d| dist.iter().filter(|&&x| x <= d).count() as f64 / dist.len() as f64)
                .collect();
            Ok(ConcentrationRow {
                n,
                epsilon: config.epsilon,
                tau: report.tau,
                samples: dist.len(),
                median: quantile(&dist, 0.5),
                q90: quantile(&dist, 0.9),
                mean_contact: contact.iter().sum::<f64>() / contact.len() as f64,
                coverage,
                unconverged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport {
        delta: delta.to_vec(),
        rows,
    })
}
