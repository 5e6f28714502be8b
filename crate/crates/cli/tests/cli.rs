use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kdpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdpp")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
N_grid = [3, 5]
replicates = 3
master_seed = 11

[kernel]
family = "periodic-sobolev"
s = 1
M_spec = 200

[scheme]
name = "oka"

[[design]]
family = "dpp"

[[design]]
family = "christoffel"
M = 3
q = "unit"

[[design]]
family = "cvs"

[[target]]
kind = "eigenfunction"
m = 2
rkhs = true
"#;

#[test]
fn schema_is_a_valid_config() {
    let out = kdpp(&["config-schema"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &String::from_utf8(out.stdout).unwrap());
    let out = kdpp(&["sample", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sampling_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for o in [&a, &b] {
        let out = kdpp(&["sample", "--config", &cfg, "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    let nodes = fs::read_to_string(a.join("designs_periodic-sobolev-s1_dpp.csv")).unwrap();
    assert_eq!(nodes.lines().count(), 1 + 3 * (3 + 5));
    let christoffel = fs::read_to_string(a.join("designs_periodic-sobolev-s1_christoffel_log.csv")).unwrap();
    for row in christoffel.lines().skip(1) {
        assert_eq!(row.split(',').nth(5), Some("0"), "{row}");
    }
    let cvs = fs::read_to_string(a.join("designs_periodic-sobolev-s1_cvs_log.csv")).unwrap();
    assert!(cvs.lines().skip(1).all(|r| r.contains("T=")), "{cvs}");
}

#[test]
fn seed_override_changes_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(kdpp(&["sample", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(kdpp(&["sample", "--config", &cfg, "--seed", "12", "--out", b.to_str().unwrap()]).status.success());
    let name = "designs_periodic-sobolev-s1_dpp.csv";
    assert_ne!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
}

#[test]
fn study_writes_records_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = dir.path().join("o");
    let out = kdpp(&["study", "--config", &cfg, "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(o.join("study_periodic-sobolev-s1_dpp_oka_e2F.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("kernel,design,scheme,target,N,M,replicate,metric,value,seed"));
    // two metrics per replicate for OKA
    assert_eq!(lines.count(), 2 * 2 * 3);
    assert!(o.join("study_periodic-sobolev-s1_cvs_oka_e2F_rkhs_sq.dat").exists());
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("N_grid = [3, 5]", "N_grid = []"));
    let out = kdpp(&["sample", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn missing_config_file_fails() {
    assert_eq!(kdpp(&["study", "--config", "/nonexistent/run.toml"]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(kdpp(&["verify", "no-such-suite"]).status.code(), Some(1));
    let ok = kdpp(&["verify", "eps-bound"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(kdpp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(kdpp(&["sample"]).status.code(), Some(1));
}
