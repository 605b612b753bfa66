use std::path::Path;
use std::process::Command;

use ailimit::entropy::StandardEntropyBound;
use ailimit::hyperbolicity::ConeReport;
use ailimit::io::{read_orbit_csv, read_sweep_csv, write_json, write_orbit_csv, write_sweep_csv, ShadowReport};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["ailimit"];
    full.extend_from_slice(args);
    let code = ailimit::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn period2(dir: &Path) -> String {
    write(dir, "period2.json", r#"{"multiples":[0,1],"periodic":true}"#)
}

#[test]
fn shadow_period_two() {
    let dir = tempfile::tempdir().unwrap();
    let code = period2(dir.path());
    let (status, out, err) = run(&["shadow", "--model", "standard", "--lambda", "20", "--code", &code]);
    assert_eq!(status, 0, "{err}");
    let rows = read_orbit_csv(&out).unwrap();
    let u = (std::f64::consts::TAU / 20.0).asin();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].x[0] - u).abs() < 1e-9);
    assert!((rows[1].x[0] - (std::f64::consts::PI + u)).abs() < 1e-9);
    let report: ShadowReport = serde_json::from_str(&err).unwrap();
    assert!(report.residual <= 1e-10);
}

#[test]
fn shadow_below_threshold_is_certification_failure() {
    let dir = tempfile::tempdir().unwrap();
    let code = period2(dir.path());
    let (status, _, err) = run(&["shadow", "--model", "standard", "--lambda", "2", "--code", &code]);
    assert_eq!(status, 2);
    assert!(err.contains("contraction failure"), "{err}");
}

#[test]
fn entropy_bound_at_twenty() {
    let (status, out, _) = run(&["entropy", "--model", "standard", "--lambda", "20", "--sigma", "0.7854"]);
    assert_eq!(status, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["q"], 7);
    assert!((v["bound_nats"].as_f64().unwrap() - 1.9459).abs() < 5e-5);
}

#[test]
fn validate_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let code = period2(dir.path());
    let good = write(dir.path(), "good.json", &format!(
        r#"{{"command":"shadow","model":"standard","lambda":20,"code":{code:?}}}"#
    ));
    assert_eq!(run(&["validate", &good]), (0, String::new(), String::new()));
    let sweep = write(dir.path(), "sweep.json", &format!(
        r#"{{"command":"sweep","model":"standard","code":{code:?},"grid":"10:40:5"}}"#
    ));
    assert_eq!(run(&["validate", &sweep]), (0, String::new(), String::new()));

    let bad_sigma = write(dir.path(), "sigma.json", r#"{"command":"entropy","model":{"model":"standard","lambda":20,"sigma":2.0}}"#);
    let (status, out, _) = run(&["validate", &bad_sigma]);
    assert_eq!(status, 1);
    assert!(out.contains("sigma outside (0, π/2)"), "{out}");
    assert_eq!(out.lines().count(), 1);

    let missing = dir.path().join("absent.json").display().to_string();
    let no_code = write(dir.path(), "nocode.json", &format!(
        r#"{{"command":"shadow","model":"standard","lambda":20,"code":{missing:?}}}"#
    ));
    let (status, out, _) = run(&["validate", &no_code]);
    assert_eq!(status, 1);
    assert!(out.contains(&missing), "{out}");
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "broken.json", "{\n  \"command\": \"shadow\",\n  \"lambda\": ,\n}\n");
    let (status, _, err) = run(&["shadow", "--config", &cfg]);
    assert_eq!(status, 1);
    assert!(err.contains("line 3 column"), "{err}");
    let (status, out, _) = run(&["validate", &cfg]);
    assert_eq!(status, 1);
    assert!(out.contains("line 3 column"), "{out}");
}

#[test]
fn model_invariant_violation_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "narrow.json", r#"{"model":"billiard","width":0.1,"lower":{"kind":"cosine","amplitude":0.1},"upper":{"kind":"cosine","amplitude":0.07}}"#);
    let (status, _, err) = run(&["verify", "--model", &spec]);
    assert_eq!(status, 1, "{err}");
    assert!(err.contains("strip too narrow"), "{err}");
}

#[test]
fn artifacts_round_trip_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let code = write(dir.path(), "code.json", r#"{"multiples":[0,0,1,1,0,-1,-1,0],"periodic":true}"#);
    let out = dir.path().join("out").display().to_string();
    let sweep = |o: &str| {
        assert_eq!(run(&["sweep", "--model", "standard", "--code", &code, "--grid", "4:40:4", "--out", o]).0, 0);
        assert_eq!(run(&["shadow", "--model", "standard", "--lambda", "15", "--code", &code, "--out", o]).0, 0);
        assert_eq!(run(&["verify", "--model", "standard", "--lambda", "15", "--code", &code, "--out", o]).0, 0);
        assert_eq!(run(&["entropy", "--model", "standard", "--lambda", "15", "--out", o]).0, 0);
    };
    sweep(&out);
    let read = |name: &str| std::fs::read_to_string(Path::new(&out).join(name)).unwrap();
    let orbit = read("orbit.csv");
    assert_eq!(write_orbit_csv(&read_orbit_csv(&orbit).unwrap()).unwrap(), orbit);
    let csv = read("sweep.csv");
    let rows = read_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(!rows[0].converged && rows[9].converged);
    assert_eq!(write_sweep_csv(&rows).unwrap(), csv);
    fn round_trip<T: serde::Serialize + serde::de::DeserializeOwned>(text: &str) -> String {
        write_json(&serde_json::from_str::<T>(text).unwrap()).unwrap()
    }
    let (report, cone, bound) = (read("report.json"), read("verify.json"), read("entropy.json"));
    assert_eq!(round_trip::<ShadowReport>(&report), report);
    assert_eq!(round_trip::<ConeReport>(&cone), cone);
    assert_eq!(round_trip::<StandardEntropyBound>(&bound), bound);
    assert!(cone.contains("\"tier\": \"exact\""), "{cone}");

    let again = dir.path().join("again").display().to_string();
    sweep(&again);
    for name in ["orbit.csv", "report.json", "verify.json", "entropy.json", "sweep.csv"] {
        assert_eq!(read(name), std::fs::read_to_string(Path::new(&again).join(name)).unwrap(), "{name}");
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = period2(dir.path());
    let bin = env!("CARGO_BIN_EXE_ailimit");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["shadow", "--model", "standard", "--lambda", "20", "--code", &code]), 0);
    assert_eq!(status(&["shadow", "--model", "standard", "--lambda", "2", "--code", &code]), 2);
    assert_eq!(status(&["shadow", "--model", "standard", "--lambda", "20", "--code", "nope.json"]), 1);
    assert_eq!(status(&["frobnicate"]), 1);
    assert_eq!(status(&["--help"]), 0);
}
