use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn segmerge() -> Command {
    Command::new(env!("CARGO_BIN_EXE_segmerge"))
}

#[test]
fn integrate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = (dir.path().join("m.ucd"), dir.path().join("r.json"));
    let status = segmerge()
        .arg("integrate")
        .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
        .args(["--right".as_ref(), fixture("g2.ucd").as_os_str()])
        .args(["--lexicon".as_ref(), fixture("lexicon.tsv").as_os_str()])
        .args(["--out".as_ref(), out.as_os_str()])
        .args(["--report".as_ref(), report.as_os_str()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("diagram \"G1+G2\""));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["classes"].as_array().unwrap().len(), 3);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        format!("threshold = 0.99\nlexicon = {:?}\n", fixture("lexicon.tsv")),
    )
    .unwrap();
    let report = dir.path().join("r.json");
    let run = |extra: &[&str]| {
        let status = segmerge()
            .arg("integrate")
            .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
            .args(["--right".as_ref(), fixture("g2.ucd").as_os_str()])
            .args(["--config".as_ref(), cfg.as_os_str()])
            .args(["--out".as_ref(), dir.path().join("m.ucd").as_os_str()])
            .args(["--report".as_ref(), report.as_os_str()])
            .args(extra)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let r: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        r["config"]["similarity"]["threshold"].as_f64().unwrap()
    };
    assert_eq!(run(&[]), 0.99);
    assert_eq!(run(&["--threshold", "0.5"]), 0.5);
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let status = segmerge()
        .arg("integrate")
        .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
        .args([
            "--right".as_ref(),
            dir.path().join("missing.ucd").as_os_str(),
        ])
        .args(["--out".as_ref(), dir.path().join("m.ucd").as_os_str()])
        .args(["--report".as_ref(), dir.path().join("r.json").as_os_str()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "treshold = 1").unwrap();
    let status = segmerge()
        .arg("verify")
        .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
        .args(["--right".as_ref(), fixture("g2.ucd").as_os_str()])
        .args(["--config".as_ref(), cfg.as_os_str()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = segmerge()
        .arg("integrate")
        .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
        .args(["--right".as_ref(), fixture("g2.ucd").as_os_str()])
        .args(["--threshold", "1.5"])
        .args(["--out".as_ref(), dir.path().join("m.ucd").as_os_str()])
        .args(["--report".as_ref(), dir.path().join("r.json").as_os_str()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_reports_agreement() {
    let out = segmerge()
        .arg("verify")
        .args(["--left".as_ref(), fixture("g1.ucd").as_os_str()])
        .args(["--right".as_ref(), fixture("g2.ucd").as_os_str()])
        .args(["--lexicon".as_ref(), fixture("lexicon.tsv").as_os_str()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.trim(), "mappings=9 engine=3 oracle=3 agree");
}
