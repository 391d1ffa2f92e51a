use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use codazzi_core::report::VerificationReport;

fn codazzi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codazzi"))
        .args(args)
        .env_remove("CODAZZI_TOL")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const PLANE: &str = r#"
schema = 1
name = "plane"

[chart]
coords = ["x", "y"]

[metric]
"x,x" = "1"
"y,y" = "1"

[fields.b]
kind = "sym2"
components = { "x,x" = "x", "y,y" = "x" }

[fields.w]
kind = "covector"
components = { x = "y" }

[[points]]
name = "p"
at = [0.5, 0.5]
"#;

#[test]
fn list_and_conventions() {
    let out = codazzi(&["catalog", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().any(|l| l.starts_with("s2xs2 ")));

    let out = codazzi(&["conventions"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("curv-conv/1"));
}

#[test]
fn emit_unknown_name_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = codazzi(&["catalog", "emit", "nonexistent", dir.path().join("x.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nonexistent") && err.contains("available:"), "{err}");
}

#[test]
fn emit_to_stdout_matches_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.toml");
    assert!(codazzi(&["catalog", "emit", "s3_round", p.to_str().unwrap()]).status.success());
    let out = codazzi(&["catalog", "emit", "s3_round", "-"]);
    assert_eq!(out.stdout, std::fs::read(&p).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", &format!("{PLANE}[[checks]]\nkind = \"codazzi\"\nb = \"b\"\nexpect = \"fail\"\n"));
    assert_eq!(codazzi(&["verify", ok.to_str().unwrap()]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.toml", &format!("{PLANE}[[checks]]\nkind = \"codazzi\"\nb = \"b\"\n"));
    let out = codazzi(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let wrong = write(dir.path(), "wrong.toml", &format!("{PLANE}[[checks]]\nkind = \"codazzi\"\nb = \"w\"\n"));
    let out = codazzi(&["verify", wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("checks[0]"));

    assert_eq!(codazzi(&["verify", "/nonexistent/m.toml"]).status.code(), Some(2));
    let out = codazzi(&["verify", ok.to_str().unwrap(), "--only", "harmonic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_point_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
schema = 1
name = "pole"
[chart]
coords = ["th", "ph"]
[metric]
"th,th" = "1"
"ph,ph" = "sin(th)^2"
[[points]]
name = "north"
at = [0.0, 1.0]
"#;
    let p = write(dir.path(), "pole.toml", text);
    let out = codazzi(&["verify", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("north") && err.contains("singular"), "{err}");
}

#[test]
fn tolerance_flag_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    // raw residual 1 with scale 1 -> normalized 0.5
    let p = write(dir.path(), "t.toml", &format!("{PLANE}[[checks]]\nkind = \"codazzi\"\nb = \"b\"\n"));
    let path = p.to_str().unwrap();
    assert_eq!(codazzi(&["verify", path, "--tol", "0.6"]).status.code(), Some(0));
    assert_eq!(codazzi(&["verify", path, "--tol", "0.4"]).status.code(), Some(1));
    let env = |v: &str, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_codazzi"))
            .args(["verify", path])
            .args(extra)
            .env("CODAZZI_TOL", v)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(env("0.6", &[]), Some(0));
    assert_eq!(env("0.4", &[]), Some(1));
    // the flag wins over the environment
    assert_eq!(env("0.4", &["--tol", "0.6"]), Some(0));
    assert_eq!(codazzi(&["verify", path, "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn records_parse_back_and_only_filters() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s2xs2.toml");
    assert!(codazzi(&["catalog", "emit", "s2xs2", p.to_str().unwrap()]).status.success());
    let out = codazzi(&[
        "verify",
        p.to_str().unwrap(),
        "--format",
        "records",
        "--only",
        "codazzi,identity,invariance:ricci,k_symmetries".replace("identity", "cyclic_identity").as_str(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rep = VerificationReport::from_records(&text).unwrap();
    assert_eq!(rep.summary.checks, 4);
    assert_eq!(rep.records.len(), 4 * 5);
    assert!(rep.records.iter().all(|r| r.status.is_ok()));
    assert_eq!(rep.header.convention, "curv-conv/1");
    assert!(rep.header.digest.starts_with("sha256:"));
    let inv = rep.records.iter().find(|r| r.check == "invariance:ricci").unwrap();
    assert!(inv.witness.is_some());
    assert_eq!(inv.info["admissible"], 16);
}
