use std::path::Path;
use std::process::{Command, Output};

use orlicz_spectral::{DomainMask, MaskPreset};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orlicz-spectral")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn count_square_well() {
    let o = run(&["count", "--domain", "square", "--potential", "constant-well:50", "--grid", "128"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["N"], 3);
    assert_eq!(r["grid_n"], 128);
    assert_eq!(r["seed"], 0);
    for key in ["domain_id", "h", "alpha", "n_zero", "norm_B", "ratio", "weyl_target", "warnings"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn weyl_csv_table() {
    let o = run(&["weyl", "--potential", "constant-well:1", "--alphas", "250,1000", "--grid", "64", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,N,N_over_alpha,target"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&o);
    assert_eq!(r["passed"], true);
    assert_eq!(r["seed"], 7);
}

#[test]
fn reports_are_deterministic() {
    let args = ["norm", "--domain", "disk", "--potential", "gaussian-well:40,0.2", "--grid", "32", "--seed", "3"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 3);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_pgm = write(dir.path(), "bad.pgm", "P2\n2 2\n1\n0 1\nx 0\n");
    let o = run(&["count", "--domain", &bad_pgm]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.pgm:5"), "{}", String::from_utf8_lossy(&o.stderr));

    let empty = write(dir.path(), "empty.csv", "0,0\n0,0\n");
    assert_eq!(code(&run(&["count", "--domain", &empty])), 1);

    let nan_potential = write(dir.path(), "v.csv", "1,NaN\n");
    let mask = write(dir.path(), "m.csv", "1,1\n");
    assert_eq!(code(&run(&["count", "--domain", &mask, "--potential", &nan_potential])), 1);

    for args in [
        vec!["count", "--grid", "8"],
        vec!["count", "--grid", "5000"],
        vec!["count", "--domain", "hexagon"],
        vec!["count", "--potential", "constant-well"],
        vec!["count", "--alpha", "-1"],
        vec!["weyl", "--alphas", "10,5"],
        vec!["norm", "--format", "csv"],
        vec!["explode"],
        vec![],
        vec!["verify-cert", "--potential", "constant-well:100", "--grid", "16", "--level", "5"],
    ] {
        assert_eq!(code(&run(&args)), 1, "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["count", "--help"])), 0);
}

#[test]
fn thread_cap_is_validated() {
    let ok = Command::new(env!("CARGO_BIN_EXE_orlicz-spectral"))
        .args(["count", "--grid", "16"])
        .env("ORLICZ_SPECTRAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_orlicz-spectral"))
        .args(["count", "--grid", "16"])
        .env("ORLICZ_SPECTRAL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn single_cell_csv_mask() {
    let dir = tempfile::tempdir().unwrap();
    let mask = write(dir.path(), "one.csv", "0,0,0\n0,1,0\n0,0,0\n");
    let o = run(&["count", "--domain", &mask, "--potential", "constant-well:1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["N"], 0);
}

#[test]
fn pgm_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for p in MaskPreset::ALL {
        let m = DomainMask::preset(p, 32).unwrap();
        let path = write(dir.path(), &format!("{}.pgm", p.name()), &m.to_pgm());
        assert_eq!(DomainMask::load(Path::new(&path), None).unwrap(), m);
        let a = json(&run(&["count", "--domain", p.name(), "--grid", "32", "--potential", "constant-well:80"]));
        let b = json(&run(&["count", "--domain", &path, "--potential", "constant-well:80"]));
        assert_eq!(a["N"], b["N"]);
        assert_eq!(a["norm_B"], b["norm_B"]);
    }
}

#[test]
fn cover_and_certificate_files() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.json").display().to_string();
    let common = ["--domain", "square", "--potential", "constant-well:60", "--grid", "16"];
    let o = run(&[&["cover", "--level", "0.25", "--out", &cov][..], &common[..]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&cov).unwrap()).unwrap();
    assert!(doc["M_bound_rhs"].as_f64().unwrap() >= doc["cubes"].as_array().unwrap().len() as f64);

    let o = run(&[&["verify-cert", "--covering", &cov][..], &common[..]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["branch"], "covering");
    assert!(r["N"].as_u64().unwrap() <= r["M"].as_u64().unwrap());

    // a covering with cubes removed no longer covers the domain
    let mut broken = doc.clone();
    broken["cubes"].as_array_mut().unwrap().truncate(3);
    let broken_path = write(dir.path(), "broken.json", &broken.to_string());
    let o = run(&[&["verify-cert", "--covering", &broken_path][..], &common[..]].concat());
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["covering_certified"], false);
}

#[test]
fn bound_corpus_reports_constant() {
    let o = run(&["bound", "--corpus", "--grid", "16"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["rows"].as_array().unwrap().len() >= 30);
    assert!(r["c_hat"].as_f64().unwrap() > 0.0);
}
