use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use laplace_pin::cli::SCHEMA_VERSION;

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

fn load_schemas() -> BTreeMap<String, Value> {
    std::fs::read_dir(schema_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".schema.json"))
        .map(|p| {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), v)
        })
        .collect()
}

/// File pattern of a schema, with one `{placeholder}` standing for a non-empty token.
fn file_pattern(schema: &Value) -> &str {
    schema.get("file").or_else(|| schema.get("x-file")).and_then(Value::as_str).unwrap()
}

fn matches(pattern: &str, name: &str) -> bool {
    match (pattern.find('{'), pattern.find('}')) {
        (Some(open), Some(close)) => {
            let (prefix, suffix) = (&pattern[..open], &pattern[close + 1..]);
            name.len() > prefix.len() + suffix.len() && name.starts_with(prefix) && name.ends_with(suffix)
        }
        _ => pattern == name,
    }
}

fn run(out: &Path, args: &[&str]) {
    let o = Command::new(env!("CARGO_BIN_EXE_laplace-pin")).arg("--out").arg(out).args(args).output().unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn check_csv(schema: &Value, path: &Path) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let fixed: Vec<&str> = schema["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(header.len() >= fixed.len(), "{}: {header:?}", path.display());
    assert_eq!(header[..fixed.len()], fixed[..], "{}", path.display());
    let extra = &header[fixed.len()..];
    if !extra.is_empty() {
        let pattern = schema["trailing_columns"]["pattern"].as_str().unwrap_or_else(|| panic!("{}", path.display()));
        let prefix = &pattern[..pattern.find('{').unwrap()];
        for (k, name) in extra.iter().enumerate() {
            assert_eq!(*name, format!("{prefix}{k}"));
        }
    }
    let types: Vec<&str> = schema["columns"].as_array().unwrap().iter().map(|c| c["type"].as_str().unwrap()).collect();
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), header.len());
        for (field, ty) in rec.iter().zip(&types) {
            let ok = match *ty {
                "real" => field.parse::<f64>().is_ok(),
                "real or empty" => field.is_empty() || field.parse::<f64>().is_ok(),
                "integer" => field.parse::<u64>().is_ok(),
                "bool" => field == "true" || field == "false",
                "string" => true,
                other => panic!("unknown column type {other}"),
            };
            assert!(ok, "{}: {field:?} is not {ty}", path.display());
        }
        for field in rec.iter().skip(types.len()) {
            field.parse::<f64>().unwrap();
        }
    }
}

fn check_json(schema: &Value, path: &Path) {
    let instance: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
}

#[test]
fn schema_files_are_well_formed_and_versioned() {
    let schemas = load_schemas();
    assert!(schemas.len() >= 15);
    for (name, s) in &schemas {
        if s.get("schema").and_then(Value::as_str) == Some("laplace-pin/csv-layout") {
            assert_eq!(s["version"], SCHEMA_VERSION, "{name}");
            assert!(!s["columns"].as_array().unwrap().is_empty(), "{name}");
        } else {
            assert!(jsonschema::meta::is_valid(s), "{name}");
            assert_eq!(s["properties"]["schema_version"]["const"], SCHEMA_VERSION, "{name}");
        }
    }
}

#[test]
fn every_output_matches_its_schema() {
    let schemas = load_schemas();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run(out, &["minimise", "--a", "1", "--alpha", "-12", "--free-right", "--tau", "288"]);
    run(out, &["phase-sweep", "--a", "1,0", "--alpha", "0,1", "--steps", "20"]);
    run(out, &["sample", "--n", "8", "--eps", "1", "--sweeps", "20", "--burn-in", "2", "--replicas", "2", "--profiles"]);
    run(out, &["free-energy", "--n", "4,6", "--eps", "0,1,10"]);
    run(out, &["free-energy", "--mode", "estimate", "--n", "6,8", "--eps", "0,2", "--sweeps", "200", "--burn-in", "20"]);
    run(out, &["free-energy", "--mode", "scan", "--n", "8", "--eps", "0.5,5", "--sweeps", "200", "--burn-in", "20"]);
    run(out, &["verify", "--suite", "ldp"]);

    let mut covered = 0;
    for entry in std::fs::read_dir(out).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let hits: Vec<&Value> = schemas.values().filter(|s| matches(file_pattern(s), &name)).collect();
        assert_eq!(hits.len(), 1, "{name} matches {} schemas", hits.len());
        if name.ends_with(".csv") {
            check_csv(hits[0], &path);
        } else {
            check_json(hits[0], &path);
        }
        covered += 1;
    }
    // every schema file is exercised at least once
    let names: Vec<String> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for (schema_name, s) in &schemas {
        assert!(names.iter().any(|n| matches(file_pattern(s), n)), "{schema_name} unused");
    }
    assert!(covered >= schemas.len());
}
