use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn mediatopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mediatopo")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, name: &str, config: &str) -> Output {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, config).unwrap();
    let out = dir.join(name);
    mediatopo(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn results(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn catalog_lists_reference_defaults_and_is_stable() {
    let a = mediatopo(&["--task", "list-models"]);
    assert!(a.status.success());
    let b = mediatopo(&["--task", "list-models"]);
    assert_eq!(a.stdout, b.stdout);

    let catalog: Value = serde_json::from_slice(&a.stdout).unwrap();
    let default_of = |model: &str, key: &str| {
        let entry = catalog.as_array().unwrap().iter().find(|m| m["name"] == model).unwrap();
        entry["params"].as_array().unwrap().iter().find(|p| p["key"] == key).unwrap()["default"].as_f64()
    };
    assert_eq!(default_of("qwz", "u"), Some(1.2));
    assert_eq!(default_of("stacked_hn", "J"), Some(0.5));
}

#[test]
fn config_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("empty_name", r#"{"task": "invariant", "model": {"name": "", "params": {}}}"#),
        ("unknown_key", r#"{"task": "invariant", "model": {"name": "ssh", "params": {}}, "colour": 1}"#),
        ("no_model", r#"{"task": "classify"}"#),
        ("small_grid", r#"{"task": "invariant", "model": {"name": "ssh", "params": {}}, "grid": 4}"#),
        ("bad_projector", r#"{"task": "mediate", "model": {"name": "ssh", "params": {}},
            "layout": {"pi_diagonal": [1], "omega_e": {"re": 0, "im": 0}, "g": 0.1, "stripe_d": 0}}"#),
    ];
    for (name, config) in cases {
        let o = run_config(dir.path(), name, config);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let report: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(report["error"]["kind"], "config");
        assert!(!dir.path().join(name).exists());
    }
}

#[test]
fn domain_errors_name_the_failed_module() {
    let dir = tempfile::tempdir().unwrap();
    // omega_e inside the bath spectrum makes the resolvent singular
    let config = r#"{"task": "mediate", "model": {"name": "ssh", "params": {"v": 1, "w": 1}},
        "layout": {"pi_diagonal": [1, 1], "omega_e": {"re": 0, "im": 0}, "g": 0.1, "stripe_d": 0}}"#;
    let o = run_config(dir.path(), "singular", config);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["error"]["kind"], "domain");
    assert_eq!(report["error"]["module"], "mediator");
    assert_eq!(report["error"]["code"], "resolvent_singular");
}

#[test]
fn results_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"task": "invariant", "model": {"name": "qwz", "params": {}}, "grid": 24}"#;
    for name in ["a", "b"] {
        assert!(run_config(dir.path(), name, config).status.success());
    }
    for file in ["results.json", "spectra.csv", "profiles.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let r = results(&dir.path().join("a"));
    assert_eq!(r["results"]["photonic"]["kind"], "CHERN");
    assert_eq!(r["results"]["photonic"]["value"], 1);
    assert_eq!(r["results"]["atomic"]["value"], -1);
    assert_eq!(r["results"]["photonic"]["grid_m"], 24);
}

#[test]
fn table1_prints_a_verdict_per_quadrant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1");
    let o = mediatopo(&["--task", "table1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    for model in ["ssh", "qwz", "hn", "chiral_nh_2d"] {
        let line = text.lines().find(|l| l.starts_with(model)).unwrap();
        assert!(line.ends_with("PASS"), "{line}");
    }
    let r = results(&out);
    assert_eq!(r["results"]["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn classify_reports_prediction_and_direct_class() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(dir.path(), "c", r#"{"task": "classify", "model": {"name": "hn", "params": {}}}"#);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = results(&dir.path().join("c"));
    assert_eq!(r["results"]["agree"], true);
    assert_eq!(r["metadata"]["config"]["variant"], "nh_az");
}

#[test]
fn fig3_profiles_localize_on_opposite_edges() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"task": "figure", "figure": {"id": "fig3", "delta": 0.5, "g": 0.5,
        "omega_e": {"re": 0, "im": -1}}}"#;
    assert!(run_config(dir.path(), "f3", config).status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("f3/profiles.csv")).unwrap();
    let mut panels = [Vec::new(), Vec::new()];
    for row in reader.records() {
        let row = row.unwrap();
        let panel: f64 = row[0].parse().unwrap();
        panels[panel as usize].push(row[3].parse::<f64>().unwrap());
    }
    let argmax = |w: &[f64]| (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    assert_eq!(argmax(&panels[0]), panels[0].len() - 1);
    assert_eq!(argmax(&panels[1]), 0);
    assert!(dir.path().join("f3/plot_fig3.py").exists());
}

/// Runs every figure with default parameters, then reruns each from the
/// configuration echoed in its own metadata.
#[test]
fn figures_round_trip_through_metadata_within_budget() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    for id in ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"] {
        let first = dir.path().join(id);
        let o = mediatopo(&["--figure", id, "--out", first.to_str().unwrap()]);
        assert!(o.status.success(), "{id}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(start.elapsed() < Duration::from_secs(300), "{:?}", start.elapsed());

    for id in ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"] {
        let first = dir.path().join(id);
        let echoed = results(&first)["metadata"]["config"].to_string();
        let o = run_config(dir.path(), &format!("{id}_again"), &echoed);
        assert!(o.status.success(), "{id}: {}", String::from_utf8_lossy(&o.stderr));
        for file in ["results.json", "spectra.csv", "profiles.csv", &format!("plot_{id}.py")] {
            let a = fs::read(first.join(file)).unwrap();
            let b = fs::read(dir.path().join(format!("{id}_again")).join(file)).unwrap();
            assert!(a == b, "{id}/{file} differs");
        }
    }
}
