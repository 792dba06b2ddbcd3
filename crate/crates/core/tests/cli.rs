use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gridloop::feedback::SimulationTrace;

fn gridloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridloop"))
        .args(args)
        .env_remove("GRIDLOOP_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) {
    let out = gridloop(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{"kappas":[0.5],"attack_types":["sudden"],"replications":1,"seed":3}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn staged_commands_reproduce_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let d = |name: &str| tmp.path().join(name).to_str().unwrap().to_owned();

    ok(&["--config", &cfg, "--out", &d("run"), "run"]);
    ok(&["--config", &cfg, "--out", &d("grid"), "synth", "--replication", "0"]);
    ok(&["--config", &cfg, "--out", &d("sim"), "simulate", "--grid", &d("grid/microgrid.csv"), "--kappa", "0.5"]);
    ok(&["--config", &cfg, "--out", &d("att"), "attack", "--trace", &d("sim/trace.csv"), "--kind", "sudden"]);
    ok(&[
        "--config", &cfg, "--out", &d("det"), "detect", "--trace", &d("att/trace.csv"), "--replication", "0",
        "--kappa", "0.5", "--attack-type", "sudden",
    ]);
    ok(&["--config", &cfg, "--out", &d("eval"), "evaluate", "--detections", &d("det/detections.csv"), "--kappa", "0.5", "--attack-type", "sudden"]);

    let scenario = tmp.path().join("run/kappa0.5_sudden_rep00");
    let same = |a: &str, b: &Path| assert_eq!(fs::read(tmp.path().join(a)).unwrap(), fs::read(b).unwrap(), "{a}");
    same("att/trace.csv", &scenario.join("trace.csv"));
    for f in ["detections.csv", "metrics.json", "roc.csv"] {
        same(&format!("det/{f}"), &scenario.join(f));
    }
    same("eval/metrics.json", &scenario.join("metrics.json"));
    same("eval/roc.csv", &scenario.join("roc.csv"));
}

#[test]
fn sudden_attack_adds_level_to_last_day() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let d = |name: &str| tmp.path().join(name).to_str().unwrap().to_owned();
    ok(&["--config", &cfg, "--out", &d("grid"), "synth"]);
    ok(&["--config", &cfg, "--out", &d("sim"), "simulate", "--grid", &d("grid/microgrid.csv"), "--kappa", "0"]);
    ok(&["--out", &d("att"), "attack", "--trace", &d("sim/trace.csv"), "--kind", "sudden", "--level", "150"]);

    let before = SimulationTrace::read_csv(d("sim/trace.csv")).unwrap();
    let after = SimulationTrace::read_csv(d("att/trace.csv")).unwrap();
    // no participation: the observed load is the base load
    assert_eq!(before.observed(), before.base());
    let n = before.steps.len();
    for (t, (a, b)) in after.observed().iter().zip(before.observed()).enumerate() {
        let expected = if t >= n - 24 { b + 150.0 } else { b };
        assert!((a - expected).abs() < 1e-9, "hour {t}: {a} vs {expected}");
    }
    let attack: serde_json::Value = serde_json::from_str(&fs::read_to_string(d("att/attack.json")).unwrap()).unwrap();
    assert_eq!(attack["window"], serde_json::json!([n - 24, n]));
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!gridloop(&[]).status.success());
    assert!(!gridloop(&["attack", "--kind", "sideways", "--trace", "x.csv"]).status.success());
    let missing = gridloop(&["simulate", "--grid", "/nonexistent/microgrid.csv"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}
