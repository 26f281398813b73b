//! End-to-end tests of the `clf` and `clf-scanner` executables: exit codes,
//! output formats, and the session protocol over real pipes.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn clf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clf"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    clf().args(args).output().expect("clf runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn unknown_subcommand_exits_64_with_usage() {
    let out = run(&["bogus"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr_of(&out).contains("usage:"));
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn help_lists_every_subcommand_and_flag() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = stdout_of(&out);
    for needle in [
        "lex",
        "compile-grammar",
        "emit-dcg",
        "parse",
        "--spec",
        "--end-marker",
        "--target",
        "--entry",
        "--emit-dcg",
        "--grammar",
        "--scanner",
        "--keep-comments",
        "[BEGINDATA]",
        "[PARSEFILE]",
        "[QUIT]",
    ] {
        assert!(help.contains(needle), "help must mention {needle}");
    }
}

#[test]
fn version_prints_and_exits_0() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).starts_with("clf "));
}

#[test]
fn emit_dcg_prints_the_transformed_listing() {
    let out = run(&["emit-dcg", fixture("add.csp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out), include_str!("goldens/add_dcg.txt"));
}

#[test]
fn emit_dcg_missing_file_is_an_io_error() {
    let out = run(&["emit-dcg", "/no/such/file.csp"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_grammar_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csp");
    std::fs::write(&path, "p(A,B) :- q(A).\n").unwrap();
    let out = run(&["emit-dcg", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
    assert!(stderr_of(&out).contains("argument"));
}

#[test]
fn bad_lexer_spec_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.lex");
    std::fs::write(&spec, "<sentences> ( => keyword\n").unwrap();
    let src = dir.path().join("x.exp");
    std::fs::write(&src, "A\n").unwrap();
    let out = run(&[
        "parse",
        "--spec",
        spec.to_str().unwrap(),
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn compile_grammar_checks_and_writes_listing() {
    let dir = tempfile::tempdir().unwrap();
    let listing = dir.path().join("add.dcg");
    let out = run(&[
        "compile-grammar",
        fixture("add.csp").to_str().unwrap(),
        "--entry",
        "add",
        "--emit-dcg",
        listing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&listing).unwrap(), include_str!("goldens/add_dcg.txt"));
    // undefined entry
    let out = run(&["compile-grammar", fixture("add.csp").to_str().unwrap(), "--entry", "nosuch"]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn parse_prints_term_and_refs() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.exp");
    std::fs::write(&src, "A +\n  B\n").unwrap();
    let out = run(&[
        "parse",
        "--spec",
        fixture("exp.lex").to_str().unwrap(),
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(stdout_of(&out), "plus(id('A'),id('B'))\nnode(1,node(1,nil),node(2,nil))\n");
}

#[test]
fn parse_keep_comments_appends_comment_lines() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.exp");
    std::fs::write(&src, "A % note\n+ B\n").unwrap();
    let out = run(&[
        "parse",
        "--spec",
        fixture("exp.lex").to_str().unwrap(),
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        "--keep-comments",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_of(&out),
        "plus(id('A'),id('B'))\nnode(1,node(1,nil),node(2,nil))\n% 1:  note\n"
    );
}

#[test]
fn parse_error_reports_file_and_line_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("broken.exp");
    std::fs::write(&src, "A +\n").unwrap();
    let out = run(&[
        "parse",
        "--spec",
        fixture("exp.lex").to_str().unwrap(),
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    let expected_prefix = format!("error: {}:1 expected", src.display());
    assert!(err.starts_with(&expected_prefix), "got {err:?}");
    assert!(err.contains("expected '(' or ID or INT"), "got {err:?}");
}

#[test]
fn parse_unreadable_source_exits_3() {
    let out = run(&[
        "parse",
        "--spec",
        fixture("exp.lex").to_str().unwrap(),
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        "/no/such/source.exp",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_usage_errors_exit_64() {
    let out = run(&["parse", "--grammar", "g.csp", "--entry", "e", "file"]);
    assert_eq!(out.status.code(), Some(64), "needs --spec or --scanner");
    let out = run(&["parse", "--spec", "a", "--scanner", "b", "--grammar", "g", "--entry", "e", "f"]);
    assert_eq!(out.status.code(), Some(64), "exactly one scanner source");
}

#[test]
fn parse_via_scanner_subprocess_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.exp");
    std::fs::write(&src, "X1 * (2 + 3)\n").unwrap();
    let spec = fixture("exp.lex");
    let grammar = fixture("exp.csp");
    let in_process = run(&[
        "parse",
        "--spec",
        spec.to_str().unwrap(),
        "--grammar",
        grammar.to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    let scanner_cmd = format!("{} --spec {}", env!("CARGO_BIN_EXE_clf-scanner"), spec.display());
    let subprocess = run(&[
        "parse",
        "--scanner",
        &scanner_cmd,
        "--grammar",
        grammar.to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    assert_eq!(in_process.status.code(), Some(0));
    assert_eq!(subprocess.status.code(), Some(0), "stderr: {}", stderr_of(&subprocess));
    assert_eq!(stdout_of(&in_process), stdout_of(&subprocess));
    assert_eq!(stdout_of(&in_process), "mult(id('X1'),plus(int(2),int(3)))\nnode(1,node(1,nil),node(1,node(1,nil),node(1,nil)))\n");
}

#[test]
fn parse_with_broken_scanner_command_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.exp");
    std::fs::write(&src, "A\n").unwrap();
    let out = run(&[
        "parse",
        "--scanner",
        "/no/such/scanner-binary",
        "--grammar",
        fixture("exp.csp").to_str().unwrap(),
        "--entry",
        "exp",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn kind_mismatch_exits_65() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = dir.path().join("mismatch.csp");
    std::fs::write(&grammar, "p(n(A)) :- stoken('ID',integer(A)).\n").unwrap();
    let src = dir.path().join("s.exp");
    std::fs::write(&src, "A\n").unwrap();
    let out = run(&[
        "parse",
        "--spec",
        fixture("exp.lex").to_str().unwrap(),
        "--grammar",
        grammar.to_str().unwrap(),
        "--entry",
        "p",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(65));
    assert!(stderr_of(&out).contains("ID"));
}

#[test]
fn lex_subcommand_serves_a_session() {
    let mut child = clf()
        .args(["lex", "--spec", fixture("exp.lex").to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    write!(stdin, "[BEGINDATA]\nX + 1\n{}\n[QUIT]\n", clf_core::DEFAULT_END_MARKER).unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "stoken\tID\tX\nkeyword\t+\nitoken\tINT\t1\n[ENDTOKENS]\n"
    );
}

#[test]
fn lex_with_custom_end_marker_and_eclipse_target() {
    let mut child = clf()
        .args([
            "lex",
            "--spec",
            fixture("exp.lex").to_str().unwrap(),
            "--end-marker",
            "[DONE]",
            "--target",
            "eclipse",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    write!(stdin, "[BEGINDATA]\nX\n[DONE]\n[QUIT]\n").unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "token('ID',string(\"X\")).\n[ENDTOKENS]\n"
    );
}

#[test]
fn scanner_binary_usage_and_load_errors() {
    let scanner = Command::new(env!("CARGO_BIN_EXE_clf-scanner"))
        .arg("--bogus")
        .output()
        .unwrap();
    assert_eq!(scanner.status.code(), Some(64));
    let scanner = Command::new(env!("CARGO_BIN_EXE_clf-scanner"))
        .args(["--spec", "/no/such.lex"])
        .output()
        .unwrap();
    assert_eq!(scanner.status.code(), Some(3));
}
