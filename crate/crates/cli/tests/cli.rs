use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sgdelta_cli::config::{parse_config, render_config};

fn sgdelta(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_sgdelta"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn config_round_trips_through_render() {
    let doc = "scenario = \"ground_state\"\nq = -4.0\nseed = 7\n[delta]\nkind = \"mollified\"\neps = 0.1\n[sweep]\nspeeds = [0.3]\n";
    let cfg = parse_config(doc).unwrap();
    assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
}

#[test]
fn ground_state_run_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgdelta(
        dir.path(),
        "scenario = \"ground_state\"\nq = -4.0\nhorizon = 50.0\n",
        &["run"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let total = column(&csv, "total");
    assert!(total.len() > 100);
    for e in total {
        assert!((e + 2.0).abs() <= 1e-4, "{e}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/run.json")).unwrap())
            .unwrap();
    assert_eq!(json["kind"], "run");
    assert_eq!(json["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn vacuum_spectrum_shows_the_bound_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgdelta(
        dir.path(),
        "scenario = \"vacuum\"\nq = -1.0\n[grid]\nhalf_width = 40.0\nnode_count = 8001\n",
        &["spectrum"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/spectrum.json")).unwrap())
            .unwrap();
    let l1 = json["report"]["eigenvalues"][0].as_f64().unwrap();
    assert!((l1 - 0.75).abs() <= 1e-3, "{l1}");
    assert!(json["report"]
        .get("eigenvectors")
        .is_none_or(|v| v.as_array().unwrap().is_empty()));
    assert!(dir.path().join("out/eigenvectors.csv").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let doc = "scenario = \"kink\"\nq = 1.0\nseed = 3\n[grid]\nnode_count = 1001\n[stability]\namplitudes = [0.001]\nhorizon = 5.0\n";
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for _ in 0..2 {
        let out = sgdelta(dir.path(), doc, &["stability"]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let read = |n: &str| fs::read(dir.path().join("out").join(n)).unwrap();
        files.push((
            read("stability.csv"),
            read("stability.json"),
            read("summary.txt"),
        ));
    }
    assert!(files[0] == files[1]);
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("scenario = \"ground_state\"\nq = 1.0\n", "physics"),
        ("scenario = \"boosted_kink\"\nspeed = 1.2\n", "physics"),
        ("colour = 3\n", "config"),
        ("[delta]\nkind = \"sharp\"\nextra = 1\n", "config"),
    ];
    for (doc, kind) in cases {
        let out = sgdelta(dir.path(), doc, &["run"]);
        assert_eq!(out.status.code(), Some(2), "{doc}");
        let record: serde_json::Value =
            serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
        assert_eq!(record["error"], kind);
        assert_eq!(record["exit_code"], 2);
    }
    let out = sgdelta(dir.path(), "scenario = \"vacuum\"\n", &["stability"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = sgdelta(dir.path(), "", &["validate", "--criteria", "2,7"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("PASS [ 2]") && stdout.contains("PASS [ 7]"),
        "{stdout}"
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/validation.json")).unwrap())
            .unwrap();
    assert_eq!(json["report"].as_array().unwrap().len(), 2);
    let out = sgdelta(dir.path(), "", &["validate", "--criteria", "13"]);
    assert_eq!(out.status.code(), Some(2));
}
