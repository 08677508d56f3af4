use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fintype(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fintype"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn construct(dir: &Path, kind: &str, r: &str, probs: &str) -> String {
    let path = dir.join(format!("{kind}{r}.toml"));
    let out = fintype(&[
        "construct",
        kind,
        "--R",
        r,
        "--block-probs",
        probs,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn construct_then_analyze_round_trip() {
    let tmp = TempDir::new().unwrap();
    let cfg = construct(tmp.path(), "multipoint", "4", "1/164,2/164,1/164");
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("p_star = \"5/41\""));

    let out_dir = tmp.path().join("out");
    let out = fintype(&["analyze", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for n in [1, 2, 4, 5] {
        assert!(stdout.contains(&format!("requirement({n}) pass")), "{stdout}");
    }

    let omega = fs::read_to_string(out_dir.join("omega.txt")).unwrap();
    assert_eq!(omega.lines().count(), 12);
    let dimset = fs::read_to_string(out_dir.join("dimset.txt")).unwrap();
    assert!(dimset.contains("groups=3 disjoint=true"), "{dimset}");
    assert_eq!(dimset.lines().filter(|l| l.starts_with("set=K")).count(), 3);
    assert!(out_dir.join("classes.txt").exists());
}

#[test]
fn invalid_probabilities_exit_with_their_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        "R = 2\ndigits = [0, 2]\nprobs = [\"1/2\", \"1/3\"]\n",
    );
    let out = fintype(&["analyze", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(17));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ProbabilitySum"));
}

#[test]
fn construction_errors_name_themselves() {
    let out = fintype(&["construct", "multipoint", "--R", "5", "--block-probs", "1/2,1/2"]);
    assert_eq!(out.status.code(), Some(30));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ParityError"));

    let out = fintype(&["construct", "multiinterval", "--R", "8", "--block-probs", "1"]);
    assert_eq!(out.status.code(), Some(31));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CongruenceError"));
}

#[test]
fn missing_config_is_a_config_error() {
    let out = fintype(&["dimset", "--config", "/nonexistent/system.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("IoError"));
}

#[test]
fn multiinterval_dimset_has_one_line_per_block() {
    let tmp = TempDir::new().unwrap();
    let cfg = construct(
        tmp.path(),
        "multiinterval",
        "14",
        "1/1150,3/1150,3/1150,7/1150,5/1150,1/1150",
    );
    let out = fintype(&["dimset", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let blocks: Vec<&str> = text.lines().filter(|l| l.starts_with("set=K")).collect();
    assert_eq!(blocks.len(), 4, "{text}");
    assert!(blocks[2].contains("kind=exact-interval"));
    assert!(text.contains("groups=4 disjoint=true"));
}

#[test]
fn single_point_grid_gives_one_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "binary.toml",
        "R = 2\ndigits = [0, 2]\nprobs = [\"1/2\", \"1/2\"]\n",
    );
    let out_dir = tmp.path().join("s");
    let out = fintype(&[
        "spectra",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--qmin",
        "0",
        "--qmax",
        "0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tau = fs::read_to_string(out_dir.join("tau.csv")).unwrap();
    let lines: Vec<&str> = tau.lines().collect();
    assert_eq!(lines[0], "q,lower,upper,active");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,-1,-1,"), "{tau}");
    assert_eq!(fs::read_to_string(out_dir.join("crossings.txt")).unwrap(), "");
    let f = fs::read_to_string(out_dir.join("f.csv")).unwrap();
    assert!(f.starts_with("component,alpha,f\n"));
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = construct(tmp.path(), "multipoint", "4", "1/164,2/164,1/164");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let d = dir.to_str().unwrap();
        assert!(fintype(&["analyze", "--config", &cfg, "--out", d]).status.success());
        assert!(fintype(&["spectra", "--config", &cfg, "--out", d]).status.success());
        runs.push(dir);
    }
    for file in ["omega.txt", "classes.txt", "dimset.txt", "tau.csv", "f.csv", "crossings.txt"] {
        assert_eq!(
            fs::read(runs[0].join(file)).unwrap(),
            fs::read(runs[1].join(file)).unwrap(),
            "{file} differs between runs"
        );
    }
}

#[test]
fn spectra_reports_the_crossing() {
    let tmp = TempDir::new().unwrap();
    let cfg = construct(tmp.path(), "multipoint", "4", "1/164,2/164,1/164");
    let dir = tmp.path().join("s");
    let out = fintype(&["spectra", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let crossings = fs::read_to_string(dir.join("crossings.txt")).unwrap();
    assert_eq!(crossings.lines().count(), 1);
    assert!(crossings.contains("left=K0 right=essential"));
    let tau = fs::read_to_string(dir.join("tau.csv")).unwrap();
    assert!(tau.lines().skip(1).all(|l| l.split(',').count() == 4));
}

#[test]
fn dump_commands_print_structure() {
    let tmp = TempDir::new().unwrap();
    let cfg = construct(tmp.path(), "multipoint", "4", "1/164,2/164,1/164");
    let out = fintype(&["dump-omega", "--config", &cfg]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("1  ell=1  V=(0)  children="));
    let out = fintype(&["dump-classes", "--config", &cfg]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("essential=true")).count(), 1);
}

#[test]
fn oracle_on_the_binary_system() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "binary.toml",
        "R = 2\ndigits = [0, 2]\nprobs = [\"1/2\", \"1/2\"]\n",
    );
    let out = fintype(&["oracle", "--config", &cfg, "--x", "1/3", "--q", "0,2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        let field = line.split_whitespace().nth(1).unwrap();
        field.split('=').nth(1).unwrap().parse().unwrap()
    };
    assert!((value("x=1/3") - 1.0).abs() < 0.1, "{text}");
    assert!((value("q=0") + 1.0).abs() < 1e-9, "{text}");
    assert!((value("q=2") - 1.0).abs() < 1e-9, "{text}");
}
