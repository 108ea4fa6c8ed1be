use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bregman_tweedie::{predict, Hyperplane};

fn btclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btclass"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .expect("spawn btclass")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Two well separated classes, labels written as text.
fn write_blobs(dir: &Path, name: &str, n: usize, shift: f64) -> PathBuf {
    let mut s = String::from("x1,x2,class\n");
    let mut state: u64 = 0x9e37 + n as u64;
    let mut u = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for i in 0..n {
        let (y, c) = if i % 2 == 0 { ("yes", shift) } else { ("no", -shift) };
        let _ = writeln!(s, "{},{},{y}", c + u(), c + 2.0 * u());
    }
    let p = dir.join(name);
    std::fs::write(&p, s).unwrap();
    p
}

#[test]
fn loss_table_logistic_rows() {
    let o = btclass(&["loss-table", "--alpha", "1", "--steps", "3", "--m-min", "-1", "--m-max", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("m,loss,grad\n"));
    let r = rows(&o);
    assert_eq!(r.len(), 3);
    for row in r {
        let m: f64 = row[0].parse().unwrap();
        let l: f64 = row[1].parse().unwrap();
        let g: f64 = row[2].parse().unwrap();
        assert!((l - (1.0 + (-m).exp()).ln()).abs() < 1e-12);
        assert!((g + 1.0 / (1.0 + m.exp())).abs() < 1e-12);
    }
}

#[test]
fn loss_table_unhinge_column() {
    let o = btclass(&["loss-table", "--alpha", "0", "--steps", "13"]);
    assert!(o.status.success());
    for row in rows(&o) {
        let m: f64 = row[0].parse().unwrap();
        let l: f64 = row[1].parse().unwrap();
        assert!((l - (1.0 - m)).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn loss_table_blank_gradient_past_singularity() {
    let o = btclass(&["loss-table", "--alpha", "20/101", "--mode", "l", "--m-min", "0", "--m-max", "4", "--steps", "41"]);
    assert!(o.status.success());
    let limit = 202.0 / 81.0;
    for row in rows(&o) {
        let m: f64 = row[0].parse().unwrap();
        assert_eq!(row[2].is_empty(), m >= limit, "{row:?}");
    }
}

#[test]
fn loss_table_hinge_family() {
    let o = btclass(&["loss-table", "--family", "hinge", "--alpha", "1/2", "--c", "0.25", "--steps", "7"]);
    assert!(o.status.success());
    for row in rows(&o) {
        let m: f64 = row[0].parse().unwrap();
        let l: f64 = row[1].parse().unwrap();
        assert!((l - 0.25 * (1.0 - m).max(0.0).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn domain_info_examples() {
    let o = btclass(&["domain-info", "--alpha", "2/3"]);
    let s = stdout(&o);
    assert!(s.contains("α ∈ ℝe"), "{s}");
    assert!(s.contains("dom Ψ = ℝ\n"), "{s}");

    let s = stdout(&btclass(&["domain-info", "--alpha", "1"]));
    assert!(s.contains("dom Ψ = ℝ\n"), "{s}");
    assert!(s.contains("dom Φ = ℝ+\n"), "{s}");

    let o = btclass(&["domain-info", "--alpha", "1/2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("ℝxe"), "{s}");
    assert!(s.contains("warning: α = 1/2"), "{s}");
}

#[test]
fn divergence_table_blank_outside_domain() {
    let o = btclass(&[
        "divergence-table", "--alpha", "2", "--base", "psi", "--branch", "negative", "--y", "-1", "--x-min", "-2", "--x-max", "1",
        "--steps", "4",
    ]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r[1][1], "0");
    assert!(r[0][1].parse::<f64>().unwrap() > 0.0);
    assert!(r[2][1].is_empty() && r[3][1].is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(btclass(&["loss-table", "--bogus"]).status.code(), Some(2));
    assert_eq!(btclass(&["loss-table", "--alpha", "1/3"]).status.code(), Some(2));
    assert_eq!(btclass(&["loss-table", "--alpha", "1", "--mode", "h", "--c", "2"]).status.code(), Some(2));
    assert_eq!(btclass(&["divergence-table", "--alpha", "2", "--y", "1"]).status.code(), Some(2));
    assert_eq!(btclass(&["train", "--data", "/nonexistent/x.csv"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let tr = write_blobs(dir.path(), "tr.csv", 20, 2.0);
    let o = btclass(&["train", "--data", tr.to_str().unwrap(), "--has-header", "--rho", "2.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho"));
}

#[test]
fn cv_default_grid_has_twenty_rows() {
    let dir = tempfile::tempdir().unwrap();
    let tr = write_blobs(dir.path(), "tr.csv", 24, 2.0);
    let o = btclass(&["cv", "--data", tr.to_str().unwrap(), "--has-header", "--alpha", "1", "--reps", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&o);
    assert_eq!(r.len(), 20);
    assert_eq!(r[0][0].parse::<f64>().unwrap(), 2f64.powi(-14));
    assert_eq!(r[19][0].parse::<f64>().unwrap(), 32.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("best lambda"));
}

#[test]
fn train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tr = write_blobs(dir.path(), "tr.csv", 40, 2.0);
    let te = write_blobs(dir.path(), "te.csv", 30, 2.0);
    let model = dir.path().join("model.txt");
    let o = btclass(&[
        "train", "--data", tr.to_str().unwrap(), "--has-header", "--label-map", "yes:+1,no:-1", "--alpha", "84/85", "--mode", "h",
        "--reps", "1", "--out", model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());

    let o = btclass(&[
        "predict", "--model", model.to_str().unwrap(), "--data", te.to_str().unwrap(), "--has-header", "--label-map", "yes:+1,no:-1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = Hyperplane::load(&model).unwrap();
    let text = std::fs::read_to_string(&te).unwrap();
    let r = rows(&o);
    assert_eq!(r.len(), 30);
    for (row, line) in r.iter().zip(text.lines().skip(1)) {
        let x: Vec<f64> = line.split(',').take(2).map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), predict(&h, &x).unwrap());
        assert_eq!(row[0], if line.ends_with("yes") { "1" } else { "-1" });
        assert_eq!(row[0], row[1]);
    }
}

#[test]
fn train_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let tr = write_blobs(dir.path(), "tr.csv", 30, 0.3);
    let run = || stdout(&btclass(&["train", "--data", tr.to_str().unwrap(), "--has-header", "--reps", "2", "--seed", "7"]));
    let a = run();
    assert!(a.starts_with("btclass-model 1\n"));
    assert_eq!(a, run());
}

#[test]
fn bench_two_datasets() {
    let dir = tempfile::tempdir().unwrap();
    write_blobs(dir.path(), "a_tr.csv", 24, 2.0);
    write_blobs(dir.path(), "a_te.csv", 20, 2.0);
    write_blobs(dir.path(), "b_tr.csv", 24, 0.4);
    write_blobs(dir.path(), "b_te.csv", 20, 0.4);
    let manifest = dir.path().join("manifest.txt");
    std::fs::write(&manifest, "# name,train,test,label,header\na,a_tr.csv,a_te.csv,class,true\nb,b_tr.csv,b_te.csv,last,true\n").unwrap();
    let o = btclass(&["bench", "--manifest", manifest.to_str().unwrap(), "--reps", "1", "--lambda-grid", "2^-4,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 5, "{s}");
    assert!(lines[0].starts_with("dataset,HB1,"));
    assert!(lines[3].starts_with("Mean,"));
    assert!(lines[4].starts_with("Friedman Ranking,"));
    let ranks: Vec<f64> = lines[4].split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert_eq!(ranks.len(), 13);
    assert!((ranks.iter().sum::<f64>() - 91.0).abs() < 1e-9);

    let o = btclass(&["bench", "--manifest", manifest.to_str().unwrap(), "--reps", "1", "--lambda-grid", "1", "--format", "markdown"]);
    assert!(stdout(&o).starts_with("| dataset | HB1 |"));
}
