//! End-to-end runs of the reconstruction and factor pipelines.

use std::path::Path;
use std::process::Command;

use odeforge_cli::pipeline::{check_manifest, run_factor_probe_pipeline, run_reconstruction_pipeline, PipelineConfig};
use odeforge_cli::Outcome;
use odeforge_core::opalgebra::multiply;
use odeforge_core::theta::{read_op, AnyOp};
use odeforge_core::{Rationals, ThetaOp, ThetaOperatorX};

const G: &str = "thetaop prime=exact order=2 degree=1\n0\n-1/4\n0\n-1\n1\n-1\n";
const B: &str = "thetaop prime=exact order=2 degree=1\n1/4\n0\n-1\n0\n1\n-1\n";

fn exact(text: &str) -> ThetaOperatorX {
    match read_op(text).unwrap() {
        AnyOp::Exact(op) => op,
        AnyOp::Prime(_) => panic!("expected an exact operator"),
    }
}

fn first_order(c0: i64, c1: i64, d0: i64, d1: i64) -> ThetaOperatorX {
    ThetaOp::from_ints(Rationals, &[&[c0, c1], &[d0, d1]])
}

/// Writes G, B and the plant G·B into `dir`.
fn plant_files(dir: &Path) {
    std::fs::write(dir.join("g.op"), G).unwrap();
    std::fs::write(dir.join("b.op"), B).unwrap();
    std::fs::write(dir.join("plant.op"), multiply(&exact(G), &exact(B)).to_text()).unwrap();
}

const RECONSTRUCT: &str = r#"
[primes]
count = 4
check = 1

[budget]
max_order = 4
max_degree = 3
margin = 10
extend_to = 120

[input.plant]
operator = "plant.op"
seed = ["1"]
terms = 60

[output]
dir = "out"

[jobs]
width = 2

[verify]
pcurv_primes = [5, 7, 11]
right_factors = ["b.op"]
"#;

#[test]
fn planted_product_reconstructs_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    plant_files(dir.path());
    let cfg = PipelineConfig::parse(RECONSTRUCT).unwrap();
    let report = run_reconstruction_pipeline(&cfg, dir.path()).unwrap();
    assert_eq!(report.operator.order(), 4);
    assert_eq!(report.lift_primes.len(), 4);
    assert_eq!(report.check_primes.len(), 1);
    assert!(report.verification.iter().all(|v| v.1), "{:?}", report.verification);
    let names: Vec<&str> = report.verification.iter().map(|v| v.0.as_str()).collect();
    for want in ["(check)", "plant is right-divisible", "right-divisible by b.op", "w=1", "mod 11"] {
        assert!(names.iter().any(|n| n.contains(want)), "missing check {want}");
    }
    let plant = exact(&std::fs::read_to_string(dir.path().join("plant.op")).unwrap());
    assert_eq!(plant.monic_lex(), report.operator.monic_lex());
    assert!(check_manifest(&report.out_dir).unwrap().iter().all(|c| c.1));
}

#[test]
fn rerun_is_bit_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        plant_files(dir.path());
        let cfg = PipelineConfig::parse(&RECONSTRUCT.replace("width = 2", "width = 3")).unwrap();
        run_reconstruction_pipeline(&cfg, dir.path()).unwrap();
        let out = dir.path().join("out");
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let a = run();
    assert!(a.iter().any(|f| f.0 == "manifest.json"));
    assert_eq!(a, run());
}

#[test]
fn manifest_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    plant_files(dir.path());
    let cfg = PipelineConfig::parse(RECONSTRUCT).unwrap();
    run_reconstruction_pipeline(&cfg, dir.path()).unwrap();
    let got = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reconstruct_manifest.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(golden).unwrap());
}

fn odeforge(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_odeforge")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn too_few_primes_fails_with_advice() {
    let dir = tempfile::tempdir().unwrap();
    plant_files(dir.path());
    let cfg = RECONSTRUCT.replace("count = 4", "count = 1")
        + "\n[lift]\nmode = \"integer\"\nnormalizer = \"1\"\nk_max = 64\nheadroom = 2\n";
    std::fs::write(dir.path().join("cfg.toml"), cfg).unwrap();
    let out = odeforge(&["pipeline", "reconstruct", "--config", "cfg.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no power of two"), "{err}");
    assert!(err.contains("estimated prime budget"), "{err}");
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    assert!(manifest.contains("\"error: lift\""));
}

#[test]
fn partial_sections_take_defaults() {
    let cfg = PipelineConfig::parse(&RECONSTRUCT.replace("[jobs]", "[lift]\nmode = \"integer\"\n\n[jobs]")).unwrap();
    assert_eq!(cfg.lift.mode, "integer");
    assert_eq!(cfg.lift.k_max, 64);
    assert_eq!(cfg.budget.reguess_max_degree, None);
}

#[test]
fn unknown_config_field_is_rejected() {
    let bad = RECONSTRUCT.replace("[jobs]", "[jobs]\nthreads = 4");
    assert!(PipelineConfig::parse(&bad).is_err());
}

fn factor_config(op: &str, p: u64, extra: &str) -> PipelineConfig {
    let text = format!(
        "[primes]\ncount = 1\npool = [{p}]\n[input]\noperator = \"{op}\"\n[output]\ndir = \"fout\"\n{extra}"
    );
    PipelineConfig::parse(&text).unwrap()
}

#[test]
fn chain_of_three_splits_into_three_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let a = first_order(-1, 0, 3, 0);
    let b = first_order(0, -1, 1, 1);
    let c = first_order(0, -1, 1, -1);
    let abc = multiply(&multiply(&a, &b), &c);
    std::fs::write(dir.path().join("abc.op"), abc.to_text()).unwrap();
    let r = run_factor_probe_pipeline(&factor_config("abc.op", 32749, ""), dir.path()).unwrap();
    assert_eq!(r.outcome, Outcome::Done);
    let leaves = r.tree.leaves();
    assert_eq!(leaves.len(), 3);
    assert!(leaves.iter().all(|l| l.order() == 1));
    assert!(dir.path().join("fout/factor2.op").exists());
}

#[test]
fn hypergeometric_order_three_stays_unsplit() {
    // θ³ - w(θ + 1/2)³ is irreducible over Q; modulo a large prime the
    // probes either exclude every solution or leave a free coefficient
    let dir = tempfile::tempdir().unwrap();
    let op = "thetaop prime=exact order=3 degree=1\n0\n-1/8\n0\n-3/4\n0\n-3/2\n1\n-1\n";
    std::fs::write(dir.path().join("h.op"), op).unwrap();
    let r = run_factor_probe_pipeline(&factor_config("h.op", 32749, ""), dir.path()).unwrap();
    assert!(r.tree.split.is_none());
    assert_eq!(r.outcome, Outcome::Undecided);
    assert!(r.text.contains("undecided (1 free coefficient(s))"), "{}", r.text);
}

#[test]
fn irreducible_order_two_reports_singular_probes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.op"), G).unwrap();
    let r = run_factor_probe_pipeline(&factor_config("g.op", 32749, ""), dir.path()).unwrap();
    assert_eq!(r.outcome, Outcome::Done);
    assert!(r.text.contains("no factors; all probe solutions singular at w in {1}"), "{}", r.text);
}

#[test]
fn free_coefficient_is_swept_mod_101() {
    // ((θ - 1) - 3w)·((1 - w)θ - w): the right factor's solution 1/(1 - w)
    // is alpha_0 + alpha_1, not the normalized alpha_0
    let dir = tempfile::tempdir().unwrap();
    let l = multiply(&first_order(-1, -3, 1, 0), &first_order(0, -1, 1, -1));
    std::fs::write(dir.path().join("m.op"), l.to_text()).unwrap();
    let extra = "[factor]\ndepth_budget = 4\norder_budget = 60\nsweep_limit = 1000\n";
    let r = run_factor_probe_pipeline(&factor_config("m.op", 101, extra), dir.path()).unwrap();
    assert_eq!(r.outcome, Outcome::Done);
    assert!(r.text.contains("w=0 alpha_0: right factor of order 1 at alpha=1"), "{}", r.text);
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = odeforge(&["pipeline", "factor", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn undecided_factor_run_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let op = "thetaop prime=exact order=3 degree=1\n0\n-1/8\n0\n-3/4\n0\n-3/2\n1\n-1\n";
    std::fs::write(dir.path().join("h.op"), op).unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "[primes]\ncount = 1\npool = [32749]\n[input]\noperator = \"h.op\"\n[output]\ndir = \"fout\"\n",
    )
    .unwrap();
    let out = odeforge(&["pipeline", "factor", "--config", "cfg.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.path().join("fout/factor_report.txt")).unwrap();
    assert!(report.ends_with("status: undecided\n"));
}
