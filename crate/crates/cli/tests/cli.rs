use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonlocal-hj"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(config: &Path, experiment: &str, out: &Path) -> Output {
    bin().args(["run", "--config"]).arg(config).args(["--experiment", experiment, "--out"]).arg(out).output().unwrap()
}

fn validate(config: &Path) -> Output {
    bin().args(["validate", "--config"]).arg(config).output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn small_ergodic() -> Value {
    json!({
        "grid": { "n": 64 },
        "measure": { "kind": "fractional", "sigma": 0.5 },
        "hamiltonian": { "m": 2.0, "f": { "kind": "cosine", "amplitude": 1.0 } },
        "experiment": {
            "ergodic": { "lambdas": [0.2, 0.1, 0.05], "t1": 5.0, "t2": 10.0 }
        },
        "seed": 3
    })
}

#[test]
fn unknown_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&configs().join("cosine-ergodic.json"), "no-such-thing", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-thing"));
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&dir.path().join("absent.json"), "ergodic", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forced_zero_c1_fails_certification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&configs().join("barrier-forced-zero.json"), "barrier", dir.path());
    assert_eq!(out.status.code(), Some(1));
    let s = summary(dir.path());
    assert_eq!(s["passed"], false);
    let margin =
        s["checks"].as_array().unwrap().iter().find(|c| c["name"].as_str().unwrap().contains("margin")).unwrap();
    assert!(margin["value"].as_f64().unwrap() < 0.0);
    assert!(dir.path().join("barrier.csv").exists());
}

#[test]
fn validate_reports_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_ergodic();
    let path = write_config(dir.path(), "a.json", &cfg);
    let out = validate(&path);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("gamma0 (boundary) = 0.75"), "{text}");
    assert!(text.contains("gamma0 (interior) = 1"), "{text}");

    cfg["measure"]["sigma"] = json!(1.5);
    let path = write_config(dir.path(), "b.json", &cfg);
    let out = validate(&path);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("gamma0 (interior) = 0.5"), "{text}");

    cfg["hamiltonian"]["m"] = json!(1.2);
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = validate(&path);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_rejects_unordered_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_ergodic();
    cfg["experiment"]["ergodic"]["lambdas"] = json!([0.1, 0.2]);
    let path = write_config(dir.path(), "cfg.json", &cfg);
    assert_eq!(validate(&path).status.code(), Some(2));
    let out = run(&path, "ergodic", &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_validate() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let out = validate(&path);
        assert_eq!(out.status.code(), Some(0), "{}", path.display());
    }
}

#[test]
fn ergodic_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "cfg.json", &small_ergodic());
    let out_dir = dir.path().join("out");
    let out = run(&path, "ergodic", &out_dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in ["ergodic.csv", "corrector.csv", "trajectory.csv", "summary.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let s = summary(&out_dir);
    assert_eq!(s["experiment"], "ergodic");
    assert_eq!(s["passed"], true);
    let csv = fs::read_to_string(out_dir.join("ergodic.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": { "n": 64 },
        "measure": { "kind": "fractional", "sigma": 1.0 },
        "hamiltonian": { "m": 2.0, "f": { "kind": "cosine", "amplitude": 0.5 } },
        "experiment": { "comparison": { "pairs": 3, "arbitrary_pairs": 2, "t_end": 0.5 } },
        "seed": 11
    });
    let path = write_config(dir.path(), "cfg.json", &cfg);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&path, "comparison", &a).status.code(), Some(0));
    assert_eq!(run(&path, "comparison", &b).status.code(), Some(0));
    assert_eq!(fs::read(a.join("kappa.csv")).unwrap(), fs::read(b.join("kappa.csv")).unwrap());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn schema_tracks_config_fields() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(root).unwrap()).unwrap();
    let cfg = nonlocal_hj::Config::from_json(&small_ergodic().to_string()).unwrap();
    let full = serde_json::to_value(&cfg).unwrap();
    let props = &schema["properties"];
    assert_eq!(keys(props), keys(&full));
    for section in ["grid", "hamiltonian", "thresholds"] {
        assert_eq!(keys(&props[section]["properties"]), keys(&full[section]), "{section}");
    }
    let exp = &props["experiment"]["properties"];
    assert_eq!(keys(exp), keys(&full["experiment"]));
    for (name, section) in full["experiment"].as_object().unwrap() {
        assert_eq!(keys(&exp[name]["properties"]), keys(section), "{name}");
    }
}
