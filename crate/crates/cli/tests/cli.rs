use std::process::{Command, Output};

use seqrev_core::{posterior_mean, Parameters, Sign, ValueContext};

fn seqrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqrev"))
        .args(args)
        .env_remove("SEQREV_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn thresholds_json() {
    let out = stdout(&seqrev(&["thresholds"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["command"], "thresholds");
    let a = v["result"]["a"].as_f64().unwrap();
    let b = v["result"]["b"].as_f64().unwrap();
    assert!((a - 0.37).abs() < 0.005 && (b - 0.55).abs() < 0.005);
    assert!(v["result"].get("note").is_none());

    let eq = stdout(&seqrev(&["thresholds", "--c0", "0.5", "--c1", "1"]));
    let v: serde_json::Value = serde_json::from_str(&eq).unwrap();
    assert!((v["result"]["a"].as_f64().unwrap() - v["result"]["b"].as_f64().unwrap()).abs() < 1e-9);
    assert!(v["result"]["note"].is_string());
}

#[test]
fn invalid_configuration_exits_one() {
    for args in [
        &["thresholds", "--c2", "0"][..],
        &["thresholds", "--mu=-1"],
        &["thresholds", "--set", "bogus=1"],
        &["risk", "--n-paths", "0"],
        &["value", "--set", "x_min=2"],
        &["simulate", "--dt", "nan"],
        &["thresholds", "--config", "/nonexistent/seqrev.cfg"],
    ] {
        let out = seqrev(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn config_file_env_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.cfg");
    std::fs::write(&file, "# instance\nmu = 1\nc0 = 0.5\nc1 = 1\n").unwrap();
    let from_flag = stdout(&seqrev(&["thresholds", "--config", file.to_str().unwrap()]));
    let from_env = Command::new(env!("CARGO_BIN_EXE_seqrev"))
        .arg("thresholds")
        .env("SEQREV_CONFIG", &file)
        .output()
        .unwrap();
    assert_eq!(from_flag, stdout(&from_env));
    let v: serde_json::Value = serde_json::from_str(&from_flag).unwrap();
    assert_eq!(v["config"]["problem"]["mu"], 1.0);

    let overridden = stdout(&seqrev(&["thresholds", "--config", file.to_str().unwrap(), "--mu", "2"]));
    let v: serde_json::Value = serde_json::from_str(&overridden).unwrap();
    assert_eq!(v["config"]["problem"]["mu"], 2.0);

    let out_file = dir.path().join("t.json");
    let out = seqrev(&["thresholds", "--out", out_file.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out_file).unwrap(), stdout(&seqrev(&["thresholds"])));
}

#[test]
fn value_table() {
    let out = stdout(&seqrev(&["value", "--set", "x_min=-0.99", "--set", "x_max=0.99", "--set", "x_n=199"]));
    assert_eq!(out.lines().next(), Some("x,V,U_plus,U_minus"));
    let table = rows(&out);
    assert_eq!(table.len(), 199);
    let ctx = ValueContext::new(Parameters::reference()).unwrap();
    let mid = &table[99];
    assert!(mid[0].abs() < 1e-15);
    assert!((mid[1] - ctx.thresholds.k).abs() < 1e-12);
    for (r, mirror) in table.iter().zip(table.iter().rev()) {
        assert!((r[1] - mirror[1]).abs() < 1e-12);
        assert!((r[2] - mirror[3]).abs() < 1e-12);
        assert!(r[1] <= r[2].min(r[3]) + 1e-12);
    }
    let a = ctx.thresholds.a;
    assert!((ctx.value_v(a).unwrap() - ctx.value_u(a, Sign::Plus).unwrap()).abs() < 1e-12);
}

#[test]
fn simulate_trace() {
    let out = stdout(&seqrev(&["simulate", "--dt", "0.01", "--set", "path_index=3"]));
    assert_eq!(out.lines().next(), Some("t,x,m,d"));
    let params = Parameters::reference();
    let table = rows(&out);
    assert!(table.len() > 10);
    for (i, r) in table.iter().enumerate() {
        assert!((r[0] - i as f64 * 0.01).abs() < 1e-12);
        assert!((r[2] - posterior_mean(&params, r[1]).value()).abs() < 1e-12);
        assert!(r[3] == 0.0 || r[3].abs() == 1.0);
    }

    let certain = stdout(&seqrev(&["simulate", "--p", "1", "--dt", "0.01", "--set", "t_max=1"]));
    assert!(rows(&certain).iter().all(|r| r[2] == 1.0));
}

#[test]
fn risk_with_known_sign_is_zero() {
    let out = stdout(&seqrev(&["risk", "--p", "1", "--n-paths", "100", "--dt", "0.01"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["estimate"]["mean"], 0.0);
    assert_eq!(v["result"]["estimate"]["stderr"], 0.0);
}

#[test]
fn verify_passes() {
    let out = stdout(&seqrev(&["verify"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["all_passed"], true);
}

#[test]
fn repeated_runs_are_identical() {
    for args in [
        &["risk", "--n-paths", "200", "--dt", "0.01", "--seed", "5"][..],
        &["sweep", "--n-paths", "100", "--dt", "0.02", "--format", "csv"],
        &["simulate", "--dt", "0.005"],
    ] {
        assert_eq!(stdout(&seqrev(args)), stdout(&seqrev(args)), "{args:?}");
    }
    let a = stdout(&seqrev(&["risk", "--n-paths", "200", "--dt", "0.01", "--seed", "5"]));
    let b = stdout(&seqrev(&["risk", "--n-paths", "200", "--dt", "0.01", "--seed", "6"]));
    assert_ne!(a, b);
}
