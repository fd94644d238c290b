use std::path::PathBuf;
use std::process::{Command, Output};

use deak_core::corpus;
use deak_core::render;
use tempfile::TempDir;

fn deak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deak")).args(args).env_remove("DEAK_FUEL").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn corpus_file(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "data", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// The composed cut of a completeness entry, rendered as a proof file.
fn composed_cut_file(dir: &TempDir, id: &str) -> String {
    let e = corpus::get(id).unwrap();
    let cut = e.composed_cut().unwrap().expect("entry has two directions");
    write(dir, "cut.proof", &render(&cut, &e.decls().unwrap()))
}

const WRONG_PREMISE: &str = r#"(And_R "p ; q |- 'p & q'"
  (Id "p |- p")
  (Id "p |- p"))"#;

const CUT_FREE: &str = "# a comment that must survive\n(Id \"p |- p\")\n";

#[test]
fn check_corpus_file() {
    let o = deak(&["check", &corpus_file("decls.deak"), &corpus_file("C.dia-atom.proof")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("\nOK ").count(), 2);
}

#[test]
fn check_wrong_premise_fails() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.proof", WRONG_PREMISE);
    let o = deak(&["check", &corpus_file("decls.deak"), &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL "), "{}", stdout(&o));
}

#[test]
fn check_missing_decls_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.deak");
    let o = deak(&["check", missing.to_str().unwrap(), &corpus_file("C.dia-atom.proof")]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn check_legacy_rule_needs_legacy_calculus() {
    let dir = TempDir::new().unwrap();
    let decls = corpus_file("decls.deak");
    let p = write(&dir, "r.proof", "(reduce_L \"{alpha}p |- r\"\n  (Hyp \"q ; {alpha}p |- r\"))\n");
    let o = deak(&["check", &decls, &p, "--calculus", "deak-legacy"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("HYP "));
    let o = deak(&["check", &decls, &p]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("unknown-rule reduce_L"));
}

#[test]
fn check_derived_legacy_rule_in_prime_calculus() {
    let o = deak(&["check", &corpus_file("decls.deak"), &corpus_file("A.reduce-L.proof")]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn eliminate_composed_cut_round_trip() {
    let dir = TempDir::new().unwrap();
    let decls = corpus_file("decls.deak");
    let cut = composed_cut_file(&dir, "C.box-and");
    let out = dir.path().join("out.proof");
    let o = deak(&["eliminate", &decls, &cut, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("cuts-in=1 "), "{}", stdout(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains("(Cut "));
    let c = deak(&["check", &decls, out.to_str().unwrap()]);
    assert_eq!(code(&c), 0, "{}", stdout(&c));
}

#[test]
fn eliminate_cut_free_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "id.proof", CUT_FREE);
    let out = dir.path().join("out.proof");
    let o = deak(&["eliminate", &corpus_file("decls.deak"), &p, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&out).unwrap(), CUT_FREE.as_bytes());
    let o = deak(&["eliminate", &corpus_file("decls.deak"), &p]);
    assert_eq!(o.stdout, CUT_FREE.as_bytes());
}

#[test]
fn eliminate_fuel_exhaustion() {
    let dir = TempDir::new().unwrap();
    let decls = corpus_file("decls.deak");
    let cut = composed_cut_file(&dir, "C.dia-and");
    assert_eq!(code(&deak(&["eliminate", &decls, &cut, "--fuel", "1"])), 3);
    let o = Command::new(env!("CARGO_BIN_EXE_deak"))
        .args(["eliminate", &decls, &cut])
        .env("DEAK_FUEL", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn lint_exit_codes() {
    let o = deak(&["lint"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("segregation FAIL atom"), "{}", stdout(&o));
    let o = deak(&["lint", "--calculus", "deak-legacy"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).lines().any(|l| l.starts_with("C1 FAIL reduce")), "{}", stdout(&o));
    assert_eq!(code(&deak(&["lint", "--calculus", "deak-nope"])), 2);
}

#[test]
fn lint_list_is_stable() {
    let a = deak(&["lint", "--list"]);
    let b = deak(&["lint", "--list"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().any(|l| l.starts_with("Cut ")));
}

#[test]
fn mc_axioms_hold_under_defaults() {
    let o = deak(&["mc", "--axioms"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let schemas: Vec<_> = stdout(&o).lines().map(|l| l.split(' ').next().unwrap().to_string()).collect();
    assert_eq!(schemas, ["facts", "interaction", "neg", "or"]);
    assert!(stdout(&o).lines().all(|l| l.contains("VALID-UP-TO-BOUND")));
}

#[test]
fn mc_adjoint_example_sequent_has_a_counterexample() {
    let dir = TempDir::new().unwrap();
    let decls = write(&dir, "example.deak", deak_core::semantics::ADJOINT_EXAMPLE_DECLS);
    let model = write(&dir, "example.model", deak_core::semantics::ADJOINT_EXAMPLE_MODEL);
    let o = deak(&["mc", &decls, "--seq", "'<alpha>[a]p' |- q", "--model", &model]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).trim_end().ends_with(" at u"), "{}", stdout(&o));
    let o = deak(&["mc", &decls, "--seq", "'<alpha>[a]p' |- q"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("COUNTEREXAMPLE"));
}

#[test]
fn mc_malformed_sequent() {
    assert_eq!(code(&deak(&["mc", "--seq", "p |-"])), 2);
    assert_eq!(code(&deak(&["mc", "--seq", "p ; q |- q"])), 2);
    assert_eq!(code(&deak(&["mc"])), 2);
}

#[test]
fn corpus_commands() {
    let o = deak(&["corpus", "--verify"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = deak(&["corpus", "--show", "C.dia-atom"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(DDia_L "));
    assert_eq!(code(&deak(&["corpus", "--show", "bogus"])), 2);
    let o = deak(&["corpus", "--list"]);
    assert_eq!(stdout(&o).lines().count(), corpus::list().len());
}

#[test]
fn output_is_deterministic() {
    let a = deak(&["corpus", "--verify"]);
    let b = deak(&["corpus", "--verify"]);
    assert_eq!(a.stdout, b.stdout);
}
