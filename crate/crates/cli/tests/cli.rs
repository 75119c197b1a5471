//! End-to-end checks of the command-line contract: exit codes, output
//! shapes, and the parseability of the lines format.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tilog-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn tilog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilog")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_reports_answers_with_exit_zero() {
    let p = fixture("prime.pl", "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(a).\n");
    let out = tilog(&["run", p.to_str().unwrap(), "?- p(X1,X2)."]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("X1 = f(a), X2 = a"));
}

#[test]
fn run_reports_no_answers_with_exit_one() {
    let p = fixture("orig.pl", "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(b).\n");
    let out = tilog(&["run", p.to_str().unwrap(), "?- p(X1,X2)."]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("no."));
}

#[test]
fn parse_errors_exit_two() {
    let p = fixture("prime2.pl", "q(a).\n");
    let out = tilog(&["run", p.to_str().unwrap(), "?- q(X"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tilog(&["run", "/nonexistent.pl", "?- q(X)."]);
    assert_eq!(out.status.code(), Some(2));
    let out = tilog(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn equiv_exit_codes() {
    let p = fixture("sep.pl", "p(X). p(a). q(X).\n");
    let path = p.to_str().unwrap();
    let out = tilog(&["equiv", path, "?- p(X).", "?- q(X).", "--rel=3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("separated"));
    let out = tilog(&["equiv", path, "?- p(X).", "?- q(X).", "--rel=1", "--depth-term=2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("equivalent"));
}

#[test]
fn lines_format_round_trips_answers() {
    let p = fixture("prime3.pl", "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(a).\n");
    let out = tilog(&["run", p.to_str().unwrap(), "?- p(X1,X2).", "--format=lines"]);
    assert_eq!(out.status.code(), Some(0));
    let mut answer_lines = 0;
    for line in stdout(&out).lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == "answer" {
            answer_lines += 1;
            let reparsed = tilog::syntax::parse_goal(&format!("?- {}", fields[2])).unwrap();
            assert_eq!(reparsed.atoms.len(), 2);
            assert_eq!(reparsed.atoms[0].pred, "bind");
        }
    }
    assert_eq!(answer_lines, 1);
}

#[test]
fn compare_and_axioms_pass() {
    let out = tilog(&["compare", "--seed=7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
    let out = tilog(&["axioms", "--seed=7"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn causality_replays_consistently() {
    let p = fixture("prime4.pl", "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(a).\n");
    let out = tilog(&["causality", p.to_str().unwrap(), "?- p(X1,X2)."]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("schedules\t0\tcount=2\texhaustive=true"));
    assert_eq!(text.matches("\tok").count(), 2);
}

#[test]
fn trace_prints_steps_and_proofs() {
    let p = fixture("sum.pl", "sum(0,X1,X1).\nsum(s(X1),X2,s(X3)) :- sum(X1,X2,X3).\n");
    let out = tilog(&["trace", p.to_str().unwrap(), "?- sum(s(0),0,Z)."]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("derivation\t0"));
    assert!(text.contains("clause=c2"));
    assert!(text.contains("refutation\t0"));
    assert!(text.contains("vcomp"));
}

#[test]
fn repl_reads_goals_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let p = fixture("prime5.pl", "p(f(X1),X2) :- q(X1), r(X1,X2).\nr(a,a).\nq(a).\n");
    let mut child = Command::new(env!("CARGO_BIN_EXE_tilog"))
        .args(["repl", p.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(b"p(X1,X2)\nquit\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("X1 = f(a), X2 = a"));
}
