//! Subcommand smoke tests through the binary.

use std::path::Path;
use std::process::{Command, Output};

const G: &str = "thetaop prime=exact order=2 degree=1\n0\n-1/4\n0\n-1\n1\n-1\n";
const B: &str = "thetaop prime=exact order=2 degree=1\n1/4\n0\n-1\n0\n1\n-1\n";

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odeforge")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(args: &[&str], cwd: &Path) -> String {
    let out = run(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.op"), G).unwrap();
    std::fs::write(dir.path().join("b.op"), B).unwrap();
    std::fs::write(dir.path().join("seed.ser"), "series var=w prime=exact offset=0 count=1\n1\n").unwrap();
    dir
}

#[test]
fn multiply_extend_guess_roundtrip() {
    let dir = workdir();
    let d = dir.path();
    std::fs::write(d.join("l.op"), stdout(&["op", "mul", "g.op", "b.op"], d)).unwrap();
    stdout(&["extend", "--op", "l.op", "--seed", "seed.ser", "--to", "40", "-o", "s.ser"], d);
    let guessed = stdout(&["guess", "--series", "s.ser", "--max-order", "4", "--max-degree", "2"], d);
    assert!(guessed.starts_with("thetaop prime=exact order=4 degree=2"));
    std::fs::write(d.join("guessed.op"), guessed).unwrap();
    let div = stdout(&["op", "divr", "guessed.op", "b.op"], d);
    assert!(div.contains("# divides true"), "{div}");
    let applied = stdout(&["op", "apply", "guessed.op", "s.ser"], d);
    assert!(applied.lines().skip(1).take(30).all(|l| l.trim() == "0"), "{applied}");
}

#[test]
fn pcurvature_of_exact_operator() {
    let dir = workdir();
    let out = stdout(&["op", "pcurv", "g.op", "--primes", "5,7"], dir.path());
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.contains("nilpotent")), "{out}");
}

#[test]
fn annihilator_of_geometric_series() {
    let dir = workdir();
    let out = stdout(&["op", "ann-rational", "--num", "1", "--den", "1-w"], dir.path());
    assert_eq!(out, "thetaop prime=exact order=1 degree=1\n0\n1\n-1\n1\n");
}

#[test]
fn frobenius_writes_one_file_per_solution() {
    let dir = workdir();
    stdout(&["frobenius", "--op", "b.op", "--at", "0", "--terms", "8", "--out-dir", "sols"], dir.path());
    let n = std::fs::read_dir(dir.path().join("sols")).unwrap().count();
    assert_eq!(n, 2);
}

#[test]
fn crt_and_rational_reconstruction() {
    let dir = workdir();
    let tsv = "0 32749 5\n0 32719 5\n1 32749 16375\n1 32719 16360\n";
    std::fs::write(dir.path().join("r.tsv"), tsv).unwrap();
    assert_eq!(stdout(&["ratrec", "--in", "r.tsv"], dir.path()), "0\t5\n1\t1/2\n");
    assert!(stdout(&["crt", "--in", "r.tsv"], dir.path()).starts_with("0\t5\n"));
}

#[test]
fn cf_detect_exit_codes() {
    let dir = workdir();
    // 1/3 + 10^-k
    let converging: String = (1..=12u32).map(|k| format!("{}/{}\n", 10u64.pow(k) + 3, 3 * 10u64.pow(k))).collect();
    std::fs::write(dir.path().join("c.txt"), converging).unwrap();
    let out = run(&["cf-detect", "--in", "c.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("1/3 "));
    let sqrt2 = "1\n3/2\n7/5\n17/12\n41/29\n99/70\n239/169\n577/408\n";
    std::fs::write(dir.path().join("s.txt"), sqrt2).unwrap();
    assert_eq!(run(&["cf-detect", "--in", "s.txt"], dir.path()).status.code(), Some(2));
}

#[test]
fn optmatch_prints_point_and_digits() {
    let dir = workdir();
    let out = stdout(&["optmatch", "--Nw", "100", "--Ny", "100"], dir.path());
    let y: f64 = out.lines().next().unwrap().strip_prefix("y_m ").unwrap().parse().unwrap();
    assert!(y > 0.0 && y < 0.183);
}

#[test]
fn bad_input_exits_one() {
    let dir = workdir();
    let out = run(&["op", "adjoint", "missing.op"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
