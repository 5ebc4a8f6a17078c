use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::tau_table::TauTable;
use super::{fmt_f64, FreeEnergyArgs, FreeEnergyMode, MinimiseArgs, PhaseSweepArgs, SampleArgs, SweepBoundary};
use crate::error::{domain, Error, Result};
use crate::free_energy::{bracket_critical, critical_region_scan, tau_estimate, ChainBudget, RatioPolynomial};
use crate::model::BoundaryData;
use crate::sampler::{run_chain, ReplicaSummary, SamplerConfig, TraceWriter};
use crate::variational::{
    build_profile, classify_dirichlet, CriticalLength, classify_dirichlet_symmetric, classify_free, critical_lengths,
    sigma, MinimiserDescriptor, MinimiserKind, PhaseReport,
};

pub(super) fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub(super) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Dispatches to the free, symmetric or general Dirichlet classification.
pub fn classify(bc: &BoundaryData, tau: f64) -> Result<PhaseReport> {
    match bc.right {
        None => classify_free(bc.a, bc.alpha, tau),
        Some((b, beta)) if b == bc.a && beta == -bc.alpha => classify_dirichlet_symmetric(bc.a, bc.alpha, tau),
        Some(_) => classify_dirichlet(bc, tau),
    }
}

#[derive(Serialize)]
struct MinimiseReport<'a> {
    schema: &'static str,
    schema_version: u32,
    boundary: BoundaryData,
    tau: f64,
    epsilon: Option<f64>,
    /// Critical lengths of the left data; empty when undefined (zero data).
    critical_lengths_left: Vec<CriticalLength>,
    /// Critical lengths of the mirrored right data; absent for a free right end.
    critical_lengths_right: Option<Vec<CriticalLength>>,
    report: &'a PhaseReport,
    profiles: Vec<String>,
}

pub(super) fn minimise(args: &MinimiseArgs, out: &Path) -> Result<Vec<String>> {
    let tau = match (args.tau, args.eps, &args.tau_from) {
        (Some(t), None, _) => t,
        (None, Some(e), Some(path)) => TauTable::from_csv(path)?.tau_at(e)?,
        _ => return domain("give exactly one of --tau or --eps with --tau-from"),
    };
    let bc = args.bc.boundary();
    let report = classify(&bc, tau)?;
    let mut outputs = Vec::new();
    for (i, d) in report.minimisers.iter().enumerate() {
        let p = build_profile(d, args.grid)?;
        let name = format!("minimiser_{i}.csv");
        write_csv(
            &out.join(&name),
            &["t", "h"],
            p.t.iter().zip(&p.h).map(|(t, h)| vec![fmt_f64(*t), fmt_f64(*h)]),
        )?;
        outputs.push(name);
    }
    println!("regime {}; Σ_min = {}; τ = {tau}", report.regime, report.sigma_min);
    for c in &report.candidates {
        let sigma = c.sigma.map_or("infeasible".to_string(), |s| s.to_string());
        println!("  candidate {:<32} Σ = {sigma}", c.label);
    }
    for d in &report.minimisers {
        println!("  minimiser {}", d.label());
    }
    let name = "minimise_report.json".to_string();
    write_json(
        &out.join(&name),
        &MinimiseReport {
            schema: "laplace-pin/minimise-report",
            schema_version: super::SCHEMA_VERSION,
            boundary: bc,
            tau,
            epsilon: args.eps,
            critical_lengths_left: critical_lengths(tau, bc.a, bc.alpha).unwrap_or_default(),
            critical_lengths_right: bc
                .mirrored()
                .ok()
                .map(|m| critical_lengths(tau, m.a, m.alpha).unwrap_or_default()),
            report: &report,
            profiles: outputs.clone(),
        },
    )?;
    outputs.insert(0, name);
    Ok(outputs)
}

/// Nearest critical-length branch of a segment of length `l` with data `(a, α)`.
fn branch_of(l: f64, a: f64, alpha: f64, tau: f64) -> String {
    critical_lengths(tau, a, alpha)
        .ok()
        .and_then(|cls| {
            cls.into_iter()
                .min_by(|x, y| (x.value - l).abs().total_cmp(&(y.value - l).abs()))
        })
        .map_or("?".into(), |c| c.branch.index().to_string())
}

fn family(d: &MinimiserDescriptor, bc: &BoundaryData, tau: f64) -> String {
    match d.kind {
        MinimiserKind::BiHarmonic => "h*".into(),
        MinimiserKind::Linear => "linear".into(),
        MinimiserKind::HLeft { l } => format!("h_l{}", branch_of(l, bc.a, bc.alpha, tau)),
        MinimiserKind::HBoth { l, r } => {
            let right = bc.mirrored().map_or("?".into(), |m| branch_of(r, m.a, m.alpha, tau));
            format!("h_lr{}{right}", branch_of(l, bc.a, bc.alpha, tau))
        }
    }
}

/// Sorted minimiser families, e.g. `h_l1+linear`; identifies a phase.
pub fn phase_signature(report: &PhaseReport, bc: &BoundaryData) -> String {
    let mut f: Vec<String> = report.minimisers.iter().map(|d| family(d, bc, report.tau)).collect();
    f.sort();
    f.dedup();
    f.join("+")
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseBoundary {
    pub a: f64,
    pub alpha: f64,
    pub tau: f64,
    pub before: String,
    pub after: String,
}

#[derive(Serialize)]
struct SweepSummary {
    schema: &'static str,
    schema_version: u32,
    pairs: Vec<PairSummary>,
}

#[derive(Serialize)]
struct PairSummary {
    a: f64,
    alpha: f64,
    boundary: BoundaryData,
    phases: Vec<String>,
    boundaries: Vec<PhaseBoundary>,
    /// No phase reappears after being left along increasing τ.
    intervals_ok: bool,
}

fn sweep_boundary(args: &PhaseSweepArgs, a: f64, alpha: f64) -> BoundaryData {
    match args.boundary {
        SweepBoundary::Free => BoundaryData::free_right(a, alpha),
        SweepBoundary::Symmetric => BoundaryData::symmetric(a, alpha),
        SweepBoundary::Dirichlet => BoundaryData::dirichlet(a, alpha, args.b, args.beta),
    }
}

/// Bisects the change from `sig_lo` on `[lo, hi]` to relative width 1e-12.
/// Signature with ties broken by the strictly lowest energy, so bisection can resolve
/// a boundary below the tie tolerance.
fn strict_family(report: &PhaseReport, bc: &BoundaryData) -> String {
    if !report.degenerate {
        return phase_signature(report, bc);
    }
    let best = report
        .minimisers
        .iter()
        .min_by(|x, y| sigma(x, report.tau).total_cmp(&sigma(y, report.tau)))
        .expect("degenerate report has minimisers");
    family(best, bc, report.tau)
}

fn bisect_phase(bc: &BoundaryData, sig_lo: &str, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if strict_family(&classify(bc, mid)?, bc) == sig_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classification and phase signature at one grid point.
pub type SweepRow = (PhaseReport, String);

/// Phases along the τ grid for one boundary datum, with bisected boundaries.
pub fn sweep_pair(bc: &BoundaryData, taus: &[f64]) -> Result<(Vec<SweepRow>, Vec<PhaseBoundary>)> {
    let rows: Vec<SweepRow> = taus
        .iter()
        .map(|&t| {
            let r = classify(bc, t)?;
            let s = phase_signature(&r, bc);
            Ok((r, s))
        })
        .collect::<Result<_>>()?;
    // grid points on a tie belong to neither neighbouring phase
    let regular: Vec<&SweepRow> = rows.iter().filter(|(r, _)| !r.degenerate).collect();
    let mut boundaries = Vec::new();
    for w in regular.windows(2) {
        let ((r0, s0), (r1, s1)) = (w[0], w[1]);
        if s0 != s1 {
            boundaries.push(PhaseBoundary {
                a: bc.a,
                alpha: bc.alpha,
                tau: bisect_phase(bc, s0, r0.tau, r1.tau)?,
                before: s0.clone(),
                after: s1.clone(),
            });
        }
    }
    Ok((rows, boundaries))
}

/// Phases in order of appearance, skipping degenerate grid points; false if one recurs.
fn intervals_ok(rows: &[SweepRow]) -> (Vec<String>, bool) {
    let mut seen: Vec<String> = Vec::new();
    let mut ok = true;
    for (_, s) in rows.iter().filter(|(r, _)| !r.degenerate) {
        if seen.last() != Some(s) {
            ok &= !seen.contains(s);
            seen.push(s.clone());
        }
    }
    (seen, ok)
}

pub(super) fn phase_sweep(args: &PhaseSweepArgs, out: &Path) -> Result<Vec<String>> {
    if !(args.tau_min >= 0.0 && args.tau_max > args.tau_min) || args.steps < 1 {
        return domain("phase sweep needs 0 ≤ tau-min < tau-max and steps ≥ 1");
    }
    let taus: Vec<f64> = (0..=args.steps)
        .map(|i| args.tau_min + (args.tau_max - args.tau_min) * i as f64 / args.steps as f64)
        .collect();
    let pairs: Vec<(f64, f64)> = args
        .a
        .iter()
        .flat_map(|&a| args.alpha.iter().map(move |&al| (a, al)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(a, alpha)| {
            let bc = sweep_boundary(args, a, alpha);
            sweep_pair(&bc, &taus).map(|r| (bc, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grid_rows = Vec::new();
    let mut boundary_rows = Vec::new();
    let mut summary = Vec::new();
    for (bc, (rows, boundaries)) in results {
        for (r, s) in &rows {
            let labels: Vec<String> = r.minimisers.iter().map(|d| d.label()).collect();
            grid_rows.push(vec![
                fmt_f64(bc.a),
                fmt_f64(bc.alpha),
                fmt_f64(r.tau),
                r.regime.clone(),
                s.clone(),
                labels.join(";"),
                fmt_f64(r.sigma_min),
                r.degenerate.to_string(),
            ]);
        }
        for b in &boundaries {
            boundary_rows.push(vec![
                fmt_f64(b.a),
                fmt_f64(b.alpha),
                fmt_f64(b.tau),
                b.before.clone(),
                b.after.clone(),
            ]);
            println!("a = {}, α = {}: {} → {} at τ = {}", b.a, b.alpha, b.before, b.after, b.tau);
        }
        let (phases, ok) = intervals_ok(&rows);
        if !ok {
            eprintln!("warning: a phase recurs along τ for a = {}, α = {}", bc.a, bc.alpha);
        }
        summary.push(PairSummary {
            a: bc.a,
            alpha: bc.alpha,
            boundary: bc,
            phases,
            boundaries,
            intervals_ok: ok,
        });
    }
    write_csv(
        &out.join("phase_sweep.csv"),
        &["a", "alpha", "tau", "regime", "phase", "minimisers", "sigma_min", "degenerate"],
        grid_rows,
    )?;
    write_csv(
        &out.join("phase_boundaries.csv"),
        &["a", "alpha", "tau", "before", "after"],
        boundary_rows,
    )?;
    write_json(
        &out.join("phase_summary.json"),
        &SweepSummary {
            schema: "laplace-pin/phase-summary",
            schema_version: super::SCHEMA_VERSION,
            pairs: summary,
        },
    )?;
    Ok(vec!["phase_sweep.csv".into(), "phase_boundaries.csv".into(), "phase_summary.json".into()])
}

#[derive(Serialize)]
struct SampleSummary {
    schema: &'static str,
    schema_version: u32,
    config: SamplerConfig,
    replicas: Vec<ReplicaSummary>,
    mean_contact_fraction: f64,
    mean_pin_fraction: f64,
    /// Standard error of the pin fraction across replicas; absent for one replica.
    pin_fraction_stderr: Option<f64>,
}

pub(super) fn sample(args: &SampleArgs, out: &Path) -> Result<Vec<String>> {
    if args.replicas == 0 {
        return domain("at least one replica is required");
    }
    let mut config = SamplerConfig::new(args.n, args.bc.boundary(), args.eps, args.seed);
    config.sweeps = args.sweeps;
    config.burn_in = args.burn_in;
    config.thin = args.thin;
    config.order = args.order;
    config.init = args.init;
    config.validate()?;
    let replicas = (0..args.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut c = config.clone();
            c.replica = replica;
            let file = File::create(out.join(format!("trace_r{replica}.csv")))?;
            let mut writer = TraceWriter::new(BufWriter::new(file), c.n, args.profiles)?;
            let mut run = run_chain(&c)?;
            let (mut contact, mut pins, mut k) = (0.0, 0.0, 0usize);
            for s in run.by_ref() {
                contact += s.contact_fraction;
                pins += s.pin_fraction;
                k += 1;
                writer.write(&s)?;
            }
            writer.finish()?;
            let k_f = k.max(1) as f64;
            Ok(ReplicaSummary {
                replica,
                samples: k,
                mean_contact_fraction: contact / k_f,
                mean_pin_fraction: pins / k_f,
                diagnostics: run.diagnostics(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let r = replicas.len() as f64;
    let mean_pin = replicas.iter().map(|s| s.mean_pin_fraction).sum::<f64>() / r;
    let mean_contact = replicas.iter().map(|s| s.mean_contact_fraction).sum::<f64>() / r;
    let stderr = (replicas.len() > 1).then(|| {
        let var = replicas.iter().map(|s| (s.mean_pin_fraction - mean_pin).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    });
    println!("mean contact fraction {mean_contact}, mean pin fraction {mean_pin} over {} replicas", replicas.len());
    let mut outputs: Vec<String> = (0..args.replicas).map(|r| format!("trace_r{r}.csv")).collect();
    write_json(
        &out.join("sample_summary.json"),
        &SampleSummary {
            schema: "laplace-pin/sample-summary",
            schema_version: super::SCHEMA_VERSION,
            config,
            replicas,
            mean_contact_fraction: mean_contact,
            mean_pin_fraction: mean_pin,
            pin_fraction_stderr: stderr,
        },
    )?;
    outputs.push("sample_summary.json".into());
    Ok(outputs)
}

fn tau_over_log_eps(tau: f64, eps: f64) -> Option<f64> {
    (eps > 0.0 && eps != 1.0).then(|| tau / eps.ln())
}

pub(super) fn free_energy(args: &FreeEnergyArgs, out: &Path) -> Result<Vec<String>> {
    let eps = args.epsilon_grid()?;
    if let Some(e) = eps.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return domain(format!("ε must be finite and ≥ 0, got {e}"));
    }
    let budget = ChainBudget {
        sweeps: args.sweeps,
        burn_in: args.burn_in,
        replicas: args.replicas,
        seed: args.seed,
        half_nodes: args.half_nodes,
    };
    match args.mode {
        FreeEnergyMode::Exact => {
            let mut rows = Vec::new();
            for &n in &args.n {
                let poly = RatioPolynomial::enumerate(n)?;
                for &e in &eps {
                    let log_ratio = if e == 0.0 { 0.0 } else { poly.log_ratio(e) };
                    let density = if e == 0.0 { 0.0 } else { poly.pin_density(e) };
                    rows.push(vec![
                        n.to_string(),
                        fmt_f64(e),
                        fmt_f64(log_ratio),
                        fmt_f64(log_ratio / n as f64),
                        fmt_f64(density),
                    ]);
                }
            }
            write_csv(
                &out.join("free_energy_exact.csv"),
                &["n", "epsilon", "log_ratio", "tau", "pin_density"],
                rows,
            )?;
            Ok(vec!["free_energy_exact.csv".into()])
        }
        FreeEnergyMode::Estimate => {
            if args.n.iter().any(|&n| n < 3) {
                return domain("estimation needs N ≥ 3");
            }
            let mut per_n = Vec::new();
            let mut curve = Vec::new();
            for &e in &eps {
                if e == 0.0 {
                    for &n in &args.n {
                        per_n.push(vec![
                            n.to_string(),
                            fmt_f64(0.0),
                            fmt_f64(0.0),
                            fmt_f64(0.0),
                            "false".into(),
                            "false".into(),
                            fmt_f64(0.0),
                            fmt_f64(0.0),
                            if n <= crate::free_energy::MAX_EXACT_N { fmt_f64(0.0) } else { String::new() },
                        ]);
                    }
                    curve.push(vec![fmt_f64(0.0), fmt_f64(0.0), fmt_f64(0.0), fmt_f64(0.0), String::new()]);
                    continue;
                }
                let ext = tau_estimate(e, &args.n, &budget)?;
                for est in &ext.per_n {
                    per_n.push(vec![
                        est.n.to_string(),
                        fmt_f64(e),
                        fmt_f64(est.tau),
                        fmt_f64(est.stderr),
                        est.hysteresis.to_string(),
                        est.flagged.to_string(),
                        fmt_f64(est.lower.tau),
                        fmt_f64(est.upper.tau),
                        opt(est.exact),
                    ]);
                }
                println!("ε = {e}: τ̂ = {} ± {}", ext.tau, ext.stderr);
                curve.push(vec![
                    fmt_f64(e),
                    fmt_f64(ext.tau),
                    fmt_f64(ext.stderr),
                    fmt_f64(ext.slope),
                    opt(tau_over_log_eps(ext.tau, e)),
                ]);
            }
            write_csv(
                &out.join("free_energy_per_n.csv"),
                &["n", "epsilon", "tau", "stderr", "hysteresis", "flagged", "lower_tau", "upper_tau", "exact_tau"],
                per_n,
            )?;
            write_csv(
                &out.join("free_energy_curve.csv"),
                &["epsilon", "tau", "stderr", "slope_in_inverse_n", "tau_over_log_eps"],
                curve,
            )?;
            Ok(vec!["free_energy_per_n.csv".into(), "free_energy_curve.csv".into()])
        }
        FreeEnergyMode::Scan => {
            let rows = critical_region_scan(&eps, &args.n, &budget)?;
            let bracket = bracket_critical(&rows);
            write_csv(
                &out.join("free_energy_scan.csv"),
                &[
                    "n",
                    "epsilon",
                    "density_from_free",
                    "stderr_from_free",
                    "density_from_pinned",
                    "stderr_from_pinned",
                ],
                rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f64(r.epsilon),
                        fmt_f64(r.density_from_free),
                        fmt_f64(r.stderr_from_free),
                        fmt_f64(r.density_from_pinned),
                        fmt_f64(r.stderr_from_pinned),
                    ]
                }),
            )?;
            match bracket {
                Some((lo, hi)) => println!("critical strength bracketed in [{lo}, {hi}]"),
                None => println!("no crossing from vanishing to non-vanishing density on this grid"),
            }
            write_json(
                &out.join("free_energy_bracket.json"),
                &serde_json::json!({
                    "schema": "laplace-pin/critical-bracket",
                    "schema_version": super::SCHEMA_VERSION,
                    "bracket": bracket,
                }),
            )?;
            Ok(vec!["free_energy_scan.csv".into(), "free_energy_bracket.json".into()])
        }
    }
}
