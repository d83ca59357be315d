//! The `akpz` binary: outputs, determinism, exit codes, configuration.

use std::path::Path;
use std::process::{Command, Output};

use akpz::io::read_state;
use akpz::tiling::Lozenge;
use akpz_core::InterlacingArray;

fn akpz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akpz"))
        .args(args)
        .env_remove("AKPZ_SEED")
        .output()
        .unwrap()
}

fn akpz_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akpz"))
        .args(args)
        .env("AKPZ_SEED", seed)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn packed_at_time_zero() {
    let o = akpz(&["simulate", "--n", "3", "--t", "0", "--chain", "ctmc"]);
    assert!(o.status.success());
    let a: InterlacingArray = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(a, InterlacingArray::packed(3).unwrap());
}

#[test]
fn hundred_levels_at_time_25() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = akpz(&["simulate", "--n", "100", "--t", "25", "--chain", "ctmc", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_state(&out).unwrap();
    assert_eq!(a.n(), 100);
    assert!(a.validate().is_ok());
    assert_ne!(a, InterlacingArray::packed(100).unwrap());
}

#[test]
fn same_seed_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, seed) in ["7", "7", "8"].iter().enumerate() {
        let out = dir.path().join(format!("{i}.json"));
        let tr = dir.path().join(format!("{i}.ndjson"));
        let o = akpz(&["simulate", "--n", "20", "--t", "5", "--seed", seed, "--out", s(&out), "--trace", s(&tr)]);
        assert!(o.status.success());
        files.push((std::fs::read(&out).unwrap(), std::fs::read(&tr).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn trace_replays_to_the_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let tr = dir.path().join("t.ndjson");
    let o = akpz(&["simulate", "--n", "6", "--t", "3", "--seed", "2", "--out", s(&out), "--trace", s(&tr)]);
    assert!(o.status.success());
    let events = akpz::io::read_trace(&tr).unwrap();
    assert!(!events.is_empty());
    let mut sim = akpz_core::dynamics::Ctmc::packed(6).unwrap();
    for e in &events {
        assert_eq!(sim.fire(e.k, e.m), e.c);
    }
    assert_eq!(sim.state(), &read_state(&out).unwrap());
}

#[test]
fn discrete_chains() {
    for chain in ["seq", "parallel", "aztec"] {
        let o = akpz(&["simulate", "--n", "8", "--t", "4", "--chain", chain, "--beta", "0.7"]);
        assert!(o.status.success(), "{chain}: {}", String::from_utf8_lossy(&o.stderr));
        let a: InterlacingArray = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(a.n(), 8);
    }
    let o = akpz(&["simulate", "--n", "4", "--t", "2", "--chain", "seq", "--family", "geometric-left", "--beta", "0.3"]);
    assert!(o.status.success());
    // fractional step counts are a usage error
    let o = akpz(&["simulate", "--n", "4", "--t", "2.5", "--chain", "seq"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tiling_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let st = dir.path().join("s.json");
    std::fs::write(&st, r#"{"n":2,"levels":[[-1],[-2,-1]]}"#).unwrap();
    let o = akpz(&["tiling", "--state", s(&st), "--format", "json"]);
    assert!(o.status.success());
    let tiles: Vec<Lozenge> = serde_json::from_str(&stdout(&o)).unwrap();
    let a = read_state(&st).unwrap();
    for t in &tiles {
        assert_eq!(a.classify_lozenge(t.x, t.n).unwrap(), t.ty);
    }
    assert_eq!(tiles.iter().filter(|t| t.ty == akpz_core::LozengeType::I).count(), 3);

    let svg1 = dir.path().join("a.svg");
    let svg2 = dir.path().join("b.svg");
    for p in [&svg1, &svg2] {
        let o = akpz(&["tiling", "--state", s(&st), "--format", "svg", "--out", s(p)]);
        assert!(o.status.success());
    }
    let (a, b) = (std::fs::read(&svg1).unwrap(), std::fs::read(&svg2).unwrap());
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("<svg"));

    std::fs::write(&st, r#"{"n":2,"levels":[[-1],[-1,0]]}"#).unwrap();
    let o = akpz(&["tiling", "--state", s(&st)]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"].is_string());
}

#[test]
fn kernel_reports_the_representation() {
    let o = akpz(&["kernel", "--p1", "0,2,3", "--p2", "1,2,3"]);
    assert!(o.status.success());
    let a: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let o = akpz(&["kernel", "--p1", "0,2,3", "--p2", "1,2,3", "--repr", "charlier"]);
    let b: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(b["repr"], "charlier");
    assert!((a["value"].as_f64().unwrap() - b["value"].as_f64().unwrap()).abs() < 1e-10);
    // Charlier needs equal (n, t)
    let o = akpz(&["kernel", "--p1", "0,3,1", "--p2", "0,2,2", "--repr", "charlier"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn limit_shape_table() {
    let o = akpz(&["limit-shape", "--tau", "1", "--grid", "8"]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let head: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(head, ["nu", "eta", "tau", "rho", "h", "h_nu", "h_eta", "h_tau", "re_omega", "im_omega"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert!(!rows.is_empty());
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[3] > 0.0 && v[3] < 1.0 && v[9] > 0.0);
        assert!((v[3] + v[5]).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(akpz(&["suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(akpz(&["simulate", "--n", "abc"]).status.code(), Some(2));
    assert_eq!(akpz(&["simulate"]).status.code(), Some(2));
    assert_eq!(akpz(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(akpz(&["--help"]).status.code(), Some(0));
    // a report that fails its tolerance
    let o = akpz(&["stats", "shape", "--point", "1,1,1", "--scale", "10", "--replicas", "20", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["pass"], false);
    let o = akpz(&["stats", "freq", "--event", "-1,2,1", "--replicas", "2000"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn oracle_suite() {
    let o = akpz(&["oracle"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["suite"], "oracle");
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test run\nn = 10\nt = 2.5\nseed = 3\n").unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut args = vec!["--config", s(&cfg), "simulate"];
        args.extend_from_slice(extra);
        let o = match env {
            Some(e) => akpz_env(&args, e),
            None => akpz(&args),
        };
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let direct = |seed: &str| stdout(&akpz(&["simulate", "--n", "10", "--t", "2.5", "--seed", seed]));
    // file value used
    assert_eq!(run(&[], None), direct("3"));
    // flag beats file
    assert_eq!(run(&["--seed", "4"], None), direct("4"));
    // file beats environment
    assert_eq!(run(&[], Some("9")), direct("3"));
    // environment beats the default
    let o = akpz_env(&["simulate", "--n", "10", "--t", "2.5"], "9");
    assert_eq!(stdout(&o), direct("9"));
    // flags override other file keys too
    let a: InterlacingArray = serde_json::from_str(&run(&["--n", "5"], None)).unwrap();
    assert_eq!(a.n(), 5);

    std::fs::write(&cfg, "n = ten\n").unwrap();
    let o = akpz(&["--config", s(&cfg), "simulate"]);
    assert_eq!(o.status.code(), Some(2));
}
