use std::path::Path;
use std::process::Command;

use symrtn::experiment::{exit_code, run, ExperimentConfig};

const EXAMPLES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn unknown_fields_and_versions_rejected() {
    assert!(ExperimentConfig::from_json(
        r#"{"schema_version":1,"kind":"oracle","lattice":{"width":2,"height":2},"extra":1}"#
    )
    .is_err());
    let c = cfg(
        r#"{"schema_version":2,"kind":"oracle","lattice":{"width":2,"height":2},"group":"Z2"}"#,
    );
    assert_eq!(exit_code(&c.validate(false).map(|_| unreachable!())), 2);
}

#[test]
fn budgets_need_override() {
    let text = r#"{"schema_version":1,"kind":"oracle","lattice":{"width":2,"height":2},"group":"Z2",
                   "budgets":{"max_configs":99999999}}"#;
    assert!(matches!(
        cfg(text).validate(false),
        Err(symrtn::Error::Config(_))
    ));
    assert!(cfg(text).validate(true).is_ok());
}

#[test]
fn oversized_runs_report_budget() {
    let c = cfg(
        r#"{"schema_version":1,"kind":"exactness","lattice":{"width":5,"height":4},
                    "regions":[{"sites":[0]}],"samples":100}"#,
    );
    let err = c.validate(false).unwrap_err();
    assert!(err.is_budget());
    assert_eq!(exit_code(&Err(err)), 3);
}

#[test]
fn symmetric_bond_must_match_group() {
    let c = cfg(
        r#"{"schema_version":1,"kind":"exactness","lattice":{"width":2,"height":2},"group":"S3",
                    "bond_dim":2,"regions":[{"sites":[0]}]}"#,
    );
    assert!(matches!(c.validate(false), Err(symrtn::Error::Config(_))));
}

#[test]
fn params_hash_tracks_content() {
    let a = cfg(
        r#"{"schema_version":1,"kind":"oracle","lattice":{"width":2,"height":2},"group":"Z2"}"#,
    );
    let mut b = a.clone();
    assert_eq!(a.params_hash(), b.params_hash());
    b.seed = 1;
    assert_ne!(a.params_hash(), b.params_hash());
}

#[test]
fn example_configs_validate() {
    for entry in std::fs::read_dir(EXAMPLES).unwrap() {
        let path = entry.unwrap().path();
        let c = ExperimentConfig::load(&path).unwrap();
        c.validate(false)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn oracle_run_reports_diagonal_mismatch() {
    let c = cfg(
        r#"{"schema_version":1,"kind":"oracle","lattice":{"width":2,"height":2},"group":"Z2"}"#,
    );
    c.validate(false).unwrap();
    let r = run(&c).unwrap();
    assert!(r.passed());
    let mismatches = r.summary["mismatches"].as_array().unwrap();
    assert!(mismatches
        .iter()
        .any(|m| m["count"] == "32" && m["formula"] == "8" && m["tree"] == false));
}

#[test]
fn exactness_writes_csv_and_json() {
    let c = cfg(
        r#"{"schema_version":1,"kind":"exactness","lattice":{"width":2,"height":1},
                    "regions":[{"sites":[0]}],"samples":2000,"seed":3,"write_samples":true}"#,
    );
    c.validate(false).unwrap();
    let r = run(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = r.write(dir.path()).unwrap();
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["exactness.csv", "exactness_samples.csv", "exactness.json"]
    );
    let csv = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(csv.starts_with("# kind=exactness\n"));
    assert!(csv.contains("region,n,quantity,haar_mean,haar_stderr,exact,z\n"));
    let samples = std::fs::read_to_string(&paths[1]).unwrap();
    assert_eq!(
        samples.lines().filter(|l| !l.starts_with('#')).count(),
        2001
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&paths[2]).unwrap()).unwrap();
    assert_eq!(json["seed"], 3);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_symrtn");
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, config: &Path| {
        Command::new(bin)
            .args([sub, "--config"])
            .arg(config)
            .arg("--out")
            .arg(dir.path())
            .env("RUST_LOG", "off")
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap()
            .code()
    };
    let oracle = Path::new(EXAMPLES).join("oracle.json");
    assert_eq!(run("oracle", &oracle), Some(0));
    assert!(dir.path().join("oracle.csv").exists());
    assert_eq!(run("exactness", &oracle), Some(2));
    let big = dir.path().join("big.json");
    std::fs::write(
        &big,
        r#"{"schema_version":1,"kind":"renyi","lattice":{"width":6,"height":6},"regions":[{"sites":[0]}]}"#,
    )
    .unwrap();
    assert_eq!(run("renyi", &big), Some(3));
    assert_eq!(run("renyi", &dir.path().join("missing.json")), Some(2));
}
