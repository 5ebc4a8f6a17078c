use std::path::Path;
use std::process::{Command, Output};

use laplace_pin::cli::{RunManifest, MANIFEST_SCHEMA, SCHEMA_VERSION};

fn laplace_pin(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laplace-pin"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = laplace_pin(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("{name} in {header:?}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minimise_caption_case_lists_both_critical_lengths() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["minimise", "--a", "1", "--alpha", "-12", "--free-right", "--tau", "288"]);
    let report = json(&dir.path().join("minimise_report.json"));
    let mut lengths: Vec<f64> = report["critical_lengths_left"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["value"].as_f64().unwrap())
        .collect();
    lengths.sort_by(f64::total_cmp);
    assert_eq!(lengths.len(), 2, "{report}");
    assert!((lengths[0] - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
    assert!((lengths[1] - 0.5).abs() < 1e-12);
    assert_eq!(report["report"]["candidates"].as_array().unwrap().len(), 3);
    assert!(report["critical_lengths_right"].is_null());
    let (header, rows) = read_csv(&dir.path().join("minimiser_0.csv"));
    assert_eq!(header, ["t", "h"]);
    assert_eq!(rows.len(), 201);
}

#[test]
fn minimise_zero_data_gives_zero_profile() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["minimise", "--a", "0", "--alpha", "0", "--free-right", "--tau", "5", "--grid", "50"]);
    let report = json(&dir.path().join("minimise_report.json"));
    assert_eq!(report["report"]["sigma_min"].as_f64().unwrap(), -5.0);
    assert!(column(&dir.path().join("minimiser_0.csv"), "h").iter().all(|h| *h == 0.0));
}

#[test]
fn minimise_symmetric_dirichlet_keeps_bi_harmonic_profile() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["minimise", "--a", "1", "--alpha", "-12", "--b", "1", "--beta", "12", "--tau", "288"]);
    let report = json(&dir.path().join("minimise_report.json"));
    assert!((report["report"]["sigma_min"].as_f64().unwrap() - 288.0).abs() < 1e-9);
    assert_eq!(report["report"]["minimisers"].as_array().unwrap().len(), 1);
    assert!(stdout.contains("minimiser h*"), "{stdout}");
}

#[test]
fn invalid_flag_combinations_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["minimise", "--a", "1", "--tau", "3", "--eps", "2"][..],
        &["minimise", "--a", "1"],
        &["minimise", "--a", "1", "--eps", "2"],
        &["minimise", "--a", "1", "--b", "1", "--tau", "2"],
        &["minimise", "--a", "1", "--b", "1", "--beta", "0", "--free-right", "--tau", "2"],
    ] {
        let o = laplace_pin(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn eps_adapter_reads_free_energy_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["free-energy", "--n", "6,10", "--eps", "1,10,100"]);
    let table = dir.path().join("free_energy_exact.csv");
    ok(dir.path(), &["minimise", "--a", "1", "--free-right", "--eps", "10", "--tau-from", table.to_str().unwrap()]);
    let report = json(&dir.path().join("minimise_report.json"));
    let taus = column(&table, "tau");
    // rows of the largest N come last
    assert_eq!(report["tau"].as_f64().unwrap(), taus[4]);
    assert_eq!(report["epsilon"].as_f64().unwrap(), 10.0);
    let o = laplace_pin(dir.path(), &["minimise", "--eps", "1000", "--tau-from", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phase_sweep_locates_both_boundaries_once() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["phase-sweep", "--a", "1,0", "--alpha", "0,1", "--tau-max", "100", "--steps", "50"]);
    let b = dir.path().join("phase_boundaries.csv");
    let (a, alpha, tau) = (column(&b, "a"), column(&b, "alpha"), column(&b, "tau"));
    let at = |pa: f64, pal: f64| -> Vec<f64> {
        (0..tau.len()).filter(|&i| a[i] == pa && alpha[i] == pal).map(|i| tau[i]).collect()
    };
    let (one_zero, zero_one) = (at(1.0, 0.0), at(0.0, 1.0));
    assert_eq!(one_zero.len(), 1, "{one_zero:?}");
    assert_eq!(zero_one.len(), 1, "{zero_one:?}");
    assert!((one_zero[0] - 512.0 / 9.0).abs() < 1e-6);
    assert!((zero_one[0] - 8.0).abs() < 1e-6);
    let summary = json(&dir.path().join("phase_summary.json"));
    for pair in summary["pairs"].as_array().unwrap() {
        assert_eq!(pair["intervals_ok"], true, "{pair}");
    }
    let (header, rows) = read_csv(&dir.path().join("phase_sweep.csv"));
    assert_eq!(header, ["a", "alpha", "tau", "regime", "phase", "minimisers", "sigma_min", "degenerate"]);
    // every (a, α) pair of the two lists
    assert_eq!(rows.len(), 4 * 51);
}

#[test]
fn sample_is_reproducible_and_respects_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = ["sample", "--n", "12", "--eps", "1", "--seed", "7", "--sweeps", "40", "--burn-in", "5", "--replicas", "3", "--profiles"];
    ok(&a, &args);
    ok(&b, &args);
    for r in 0..3 {
        let f = format!("trace_r{r}.csv");
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap());
    }
    assert_ne!(std::fs::read(a.join("trace_r0.csv")).unwrap(), std::fs::read(a.join("trace_r1.csv")).unwrap());

    let mut free = args.to_vec();
    free.push("--free-right");
    ok(&c, &free);
    assert!(column(&a.join("trace_r0.csv"), "h_12").iter().all(|h| *h == 0.0));
    assert!(column(&c.join("trace_r0.csv"), "h_12").iter().any(|h| *h != 0.0));
}

#[test]
fn sample_without_reward_never_touches_zero() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["sample", "--n", "20", "--eps", "0", "--a", "1", "--b", "1", "--beta", "0", "--sweeps", "30", "--burn-in", "0"],
    );
    let trace = dir.path().join("trace_r0.csv");
    assert!(column(&trace, "contact_fraction").iter().all(|c| *c == 0.0));
    assert!(column(&trace, "pin_fraction").iter().all(|c| *c == 0.0));
    let summary = json(&dir.path().join("sample_summary.json"));
    assert_eq!(summary["mean_contact_fraction"].as_f64().unwrap(), 0.0);
}

#[test]
fn free_energy_exact_zero_row_and_capacity_guard() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["free-energy", "--n", "4,8", "--eps", "0,1,10"]);
    let f = dir.path().join("free_energy_exact.csv");
    let (header, _) = read_csv(&f);
    assert_eq!(header, ["n", "epsilon", "log_ratio", "tau", "pin_density"]);
    let (eps, tau) = (column(&f, "epsilon"), column(&f, "tau"));
    for (e, t) in eps.iter().zip(&tau) {
        assert_eq!(*e == 0.0, *t == 0.0);
    }
    let o = laplace_pin(dir.path(), &["free-energy", "--n", "23", "--eps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

#[test]
fn free_energy_estimate_matches_exact_at_twelve_sites() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["free-energy", "--mode", "estimate", "--n", "12", "--eps", "2", "--sweeps", "20000", "--burn-in", "1000"]);
    let f = dir.path().join("free_energy_per_n.csv");
    let (tau, stderr, exact) = (column(&f, "tau")[0], column(&f, "stderr")[0], column(&f, "exact_tau")[0]);
    assert!((tau - exact).abs() <= 2.0 * stderr, "{tau} ± {stderr} vs {exact}");
}

#[test]
fn free_energy_large_eps_reward_is_near_log_eps() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["free-energy", "--mode", "estimate", "--n", "64", "--eps", "1000", "--sweeps", "400", "--burn-in", "50"]);
    let ratio = column(&dir.path().join("free_energy_curve.csv"), "tau_over_log_eps")[0];
    assert!((0.8..1.2).contains(&ratio), "{ratio}");
}

#[test]
fn verify_core_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let stdout = ok(dir.path(), &["verify", "--suite", "core"]);
    assert!(start.elapsed().as_secs() < 60);
    assert!(!stdout.contains("FAIL"), "{stdout}");
    let report = json(&dir.path().join("verify_core.json"));
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 3);
}

#[test]
fn verify_ldp_emits_concentration_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["verify", "--suite", "ldp"]);
    let (header, rows) = read_csv(&dir.path().join("concentration.csv"));
    assert_eq!(header, ["n", "eps_or_tau", "median_dist", "q90_dist", "mean_contact", "case"]);
    assert!(!rows.is_empty());
}

#[test]
fn manifests_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));
    let runs: [&[&str]; 4] = [
        &["minimise", "--a", "1", "--alpha", "-12", "--free-right", "--tau", "288"],
        &["phase-sweep", "--a", "1", "--alpha", "-2", "--steps", "20"],
        &["sample", "--n", "10", "--eps", "2", "--seed", "3", "--sweeps", "25", "--burn-in", "5", "--replicas", "2"],
        &["free-energy", "--n", "6", "--eps", "0,0.5,5"],
    ];
    for args in runs {
        ok(&first, args);
        let name = RunManifest::file_name(args[0]);
        let manifest = RunManifest::read(&first.join(&name)).unwrap();
        assert_eq!(manifest.schema, MANIFEST_SCHEMA);
        assert_eq!(manifest.schema_version, SCHEMA_VERSION);
        assert_eq!(manifest.command, args[0]);
        ok(&second, &["replay", first.join(&name).to_str().unwrap()]);
        for f in &manifest.outputs {
            assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn output_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_laplace-pin"))
        .env("LAPLACE_PIN_OUT", &target)
        .args(["minimise", "--tau", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("minimise.manifest.json").exists());
}
