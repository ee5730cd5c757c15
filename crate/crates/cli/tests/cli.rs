//! End-to-end runs of the binary on the configs in tests/data.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hejhal-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn verify_annulus_passes() {
    let o = run(&["verify", &data("annulus.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 19);
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
        for key in ["name", "value", "tolerance"] {
            assert!(c.get(key).is_some());
        }
    }
}

#[test]
fn verify_writes_report_file() {
    let out = std::env::temp_dir().join(format!("hejhal-lab-report-{}.json", std::process::id()));
    let o = run(&["verify", &data("disk.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["connectivity"], 1);
    std::fs::remove_file(out).ok();
}

#[test]
fn unattainable_tolerance_exits_one() {
    let o = run(&["verify", &data("annulus.json"), "--tolerance", "identity_residual=1e-16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed: identity_residual"));
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["verify", &data("figure_eight.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("self-intersecting"));
    let o = run(&["lambda", &data("disk.json"), "--method", "fit"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("connectivity must be ≥ 2"));
    assert_eq!(run(&["verify", &data("missing.json")]).status.code(), Some(2));
    assert_eq!(run(&["verify", &data("disk.json"), "--tolerance", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", &data("annulus.json"), "--steps", "0"]).status.code(), Some(2));
    assert_eq!(run(&["lambda", &data("annulus.json"), "--method", "guess"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hejhal-lab"))
        .args(["lambda", &data("annulus.json")])
        .env("HEJHAL_LAB_THREADS", "none")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lambda_methods_agree_on_annulus() {
    let o = run(&["lambda", &data("annulus.json"), "--method", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    let lambda: Vec<f64> = rows.iter().filter(|r| !r[2].is_empty()).map(|r| num(&r[3])).collect();
    let methods: Vec<&str> = rows.iter().filter(|r| !r[2].is_empty()).map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["fit", "periods", "double"]);
    for a in &lambda {
        for b in &lambda {
            assert!((a - b).abs() <= 1e-4 * a.abs());
        }
    }
    assert_eq!(rows.iter().filter(|r| r[2].is_empty()).count(), 3);
}

#[test]
fn lambda_fit_shape_on_three_connected() {
    let o = run(&["lambda", &data("three.json"), "--method", "fit"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    let entries: Vec<(String, String)> =
        rows.iter().filter(|r| !r[2].is_empty()).map(|r| (r[1].clone(), r[2].clone())).collect();
    let pairs: Vec<(&str, &str)> = entries.iter().map(|(i, j)| (i.as_str(), j.as_str())).collect();
    assert_eq!(pairs, [("1", "1"), ("1", "2"), ("2", "2")]);
    let mu: Vec<f64> = rows.iter().filter(|r| r[2].is_empty()).map(|r| num(&r[3])).collect();
    assert_eq!(mu.len(), 2);
    assert!(mu[0] > 0.0 && mu[0] <= mu[1]);
}

#[test]
fn sweep_is_positive_and_deterministic() {
    let dir = std::env::temp_dir();
    let paths: Vec<PathBuf> =
        (0..2).map(|k| dir.join(format!("hejhal-lab-trace-{}-{k}.csv", std::process::id()))).collect();
    for p in &paths {
        let o = run(&["sweep", &data("annulus.json"), "--steps", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let first = std::fs::read(&paths[0]).unwrap();
    assert_eq!(first, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("step,radius,center_re,center_im,mu_1,mu_2,min_mu,status\n"));
    let rows = rows(&text);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(num(&r[6]) > 0.0);
        assert_eq!(r[7], "ok");
    }
    for p in paths {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn tabulate_disk_szego_is_constant() {
    let o = run(&["tabulate", &data("disk.json"), "--kernel", "S", "--grid", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    assert!(rows.len() > 20);
    for r in rows {
        assert!((num(&r[4]) - 1.0 / (2.0 * PI)).abs() < 1e-9 && num(&r[5]).abs() < 1e-9);
    }
}

#[test]
fn tabulate_annulus_f_matches_closed_form() {
    let o = run(&["tabulate", &data("annulus.json"), "--kernel", "F", "--grid", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = rows(&stdout(&o));
    assert!(rows.len() > 20);
    for r in rows {
        let z = num_complex::Complex64::new(num(&r[0]), num(&r[1]));
        let exact = 1.0 / (z * 0.5f64.ln());
        assert!((num_complex::Complex64::new(num(&r[4]), num(&r[5])) - exact).norm() < 1e-8, "{z}");
    }
}

#[test]
fn tabulate_bergman_is_hermitian() {
    let table = |w: &str| {
        let o = run(&["tabulate", &data("annulus.json"), "--kernel", "K", "--grid", "8", "--w", w]);
        assert_eq!(o.status.code(), Some(0));
        rows(&stdout(&o))
    };
    let value = |r: &Vec<String>| num_complex::Complex64::new(num(&r[4]), num(&r[5]));
    let at = |t: &[Vec<String>], z: &Vec<String>| t.iter().find(|r| r[0] == z[0] && r[1] == z[1]).cloned().unwrap();
    let grid = table("0,0.75");
    let (z0, z1) = (&grid[0], &grid[grid.len() / 2]);
    let k10 = value(&at(&table(&format!("{},{}", z0[0], z0[1])), z1));
    let k01 = value(&at(&table(&format!("{},{}", z1[0], z1[1])), z0));
    assert!((k10 - k01.conj()).norm() < 1e-8 * k10.norm());
}
