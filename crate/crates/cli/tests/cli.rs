use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn raftmin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raftmin")).args(args).env("RAFTMIN_THREADS", "1").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = raftmin(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn with_out<'a>(cmd: &'a str, dir: &'a str) -> Vec<&'a str> {
    cmd.split_whitespace().chain(["--out", dir]).collect()
}

fn summary(dir: &Path) -> BTreeMap<String, String> {
    std::fs::read_to_string(dir.join("summary.txt"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value(s: &BTreeMap<String, String>, key: &str) -> f64 {
    s[key].parse().unwrap()
}

fn out_dir(tmp: &TempDir, name: &str) -> String {
    tmp.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn modes_report_closed_form_optimum() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "modes");
    ok(&["modes", "--q", "0.75", "--eps", "0.05", "--nmax", "16", "--out", &dir]);
    let s = summary(Path::new(&dir));
    assert!((value(&s, "f_star") + 0.25).abs() < 1e-12);
    assert_eq!(s["argmin_n"], "3");
    let csv = std::fs::read_to_string(Path::new(&dir).join("modes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn nondim_of_lowest_tabulated_tension() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "nd");
    ok(&["nondim", "--table1", "--sigma", "5e-6", "--out", &dir]);
    let q = value(&summary(Path::new(&dir)), "q");
    assert!((q - (1.0 - 5e-19 * 5e-6 / (4.9e-12f64 * 4.9e-12))).abs() < 1e-12);
    assert!((q - 0.896).abs() < 1e-3);
}

#[test]
fn mode_energy_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "e");
    ok(&["energy", "--mode", "n=1", "--eps", "0.1", "--q", "0.75", "--out", &dir]);
    let s = summary(Path::new(&dir));
    assert!((value(&s, "eps_quadratic") - value(&s, "f_qn")).abs() < 1e-10);
    let csv = std::fs::read_to_string(Path::new(&dir).join("energy.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",n,lambda,f_qn,eps_quadratic"));
}

#[test]
fn constant_well_has_zero_energy() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "c");
    ok(&["energy", "--const", "1", "--out", &dir]);
    assert!(value(&summary(Path::new(&dir)), "total").abs() < 1e-10);
}

#[test]
fn saved_flow_field_reproduces_final_energy() {
    let tmp = TempDir::new().unwrap();
    let flow = out_dir(&tmp, "flow");
    ok(&with_out(
        "flow --random --amplitude 0.2 --seed 4 --q 0.5 --eps 0.1 --points 128 --dt 0.01 --max-steps 300",
        &flow,
    ));
    let field = Path::new(&flow).join("final.raftfield");
    let e = out_dir(&tmp, "energy");
    ok(&["energy", "--field", field.to_str().unwrap(), "--q", "0.5", "--eps", "0.1", "--points", "128", "--out", &e]);
    let a = value(&summary(Path::new(&flow)), "energy");
    let b = value(&summary(Path::new(&e)), "total");
    assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let a = out_dir(&tmp, "a");
    let b = out_dir(&tmp, "b");
    let cmd = "flow --random --seed 11 --q 0.75 --eps 0.05 --dt 0.05 --max-steps 200";
    ok(&with_out(cmd, &a));
    ok(&with_out(cmd, &b));
    let manifest = Path::new(&a).join("manifest.toml");
    let c = out_dir(&tmp, "c");
    ok(&["run", manifest.to_str().unwrap(), "--out", &c]);
    for name in ["trajectory.csv", "final.raftfield", "final.csv", "summary.txt"] {
        let x = std::fs::read(Path::new(&a).join(name)).unwrap();
        assert_eq!(x, std::fs::read(Path::new(&b).join(name)).unwrap(), "{name}");
        assert_eq!(x, std::fs::read(Path::new(&c).join(name)).unwrap(), "{name} from manifest");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[energy]\neps = 0.2\nq = 0.3\n[modes]\nnmax = 4\n").unwrap();
    let dir = out_dir(&tmp, "m");
    ok(&["modes", "--config", cfg.to_str().unwrap(), "--q", "0.6", "--out", &dir]);
    let s = summary(Path::new(&dir));
    assert_eq!(value(&s, "eps"), 0.2);
    assert_eq!(value(&s, "q"), 0.6);
    let manifest = std::fs::read_to_string(Path::new(&dir).join("manifest.toml")).unwrap();
    assert!(manifest.contains("nmax = 4"));
}

#[test]
fn gamma_slab_ratio_trends_to_one() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "g");
    ok(&with_out("gamma --geometry slab --eps 0.1,0.05,0.02 --q 0.05 --points 1024 --knots 256", &dir));
    let csv = std::fs::read_to_string(Path::new(&dir).join("gamma.csv")).unwrap();
    let ratios: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()), "{ratios:?}");
    assert_eq!(summary(Path::new(&dir))["trend_ok"], "true");
}

#[test]
fn exit_codes_follow_contract() {
    let tmp = TempDir::new().unwrap();
    let bad_cfg = tmp.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[energy]\nepsilon = 0.1\n").unwrap();
    let dir = out_dir(&tmp, "x");
    assert_eq!(raftmin(&["energy", "--config", bad_cfg.to_str().unwrap(), "--out", &dir]).status.code(), Some(2));
    assert_eq!(raftmin(&["energy", "--eps", "-1", "--out", &dir]).status.code(), Some(2));

    let junk = tmp.path().join("junk.raftfield");
    std::fs::write(&junk, "not a field\n").unwrap();
    assert_eq!(raftmin(&["energy", "--field", junk.to_str().unwrap(), "--out", &dir]).status.code(), Some(3));
    let missing = tmp.path().join("missing.raftfield");
    assert_eq!(raftmin(&["energy", "--field", missing.to_str().unwrap(), "--out", &dir]).status.code(), Some(3));

    assert_eq!(raftmin(&["modes", "--q", "1.5", "--out", &dir]).status.code(), Some(4));
    assert_eq!(raftmin(&["nondim", "--sigma", "1e-3", "--strict", "--out", &dir]).status.code(), Some(2));
}

#[test]
fn cell_summary_respects_floor() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "cell");
    ok(&["cell", "--q", "0.05", "--knots", "128", "--eps-count", "6", "--out", &dir]);
    let s = summary(Path::new(&dir));
    assert!(value(&s, "md") >= value(&s, "floor"));
    let profile = std::fs::read_to_string(Path::new(&dir).join("profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 402);
}

#[test]
fn helmholtz_residual_is_small() {
    let tmp = TempDir::new().unwrap();
    let dir = out_dir(&tmp, "h");
    ok(&["helmholtz", "--random", "--eps", "0.1", "--extents", "1,1", "--points", "32,32", "--out", &dir]);
    assert!(value(&summary(Path::new(&dir)), "residual_max") < 1e-10);
    assert!(Path::new(&dir).join("v.raftfield").exists());
}
