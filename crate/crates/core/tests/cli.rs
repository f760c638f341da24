//! End-to-end tests of the binary: transcript golden output, exit codes,
//! and byte stability.

use std::io::Write;
use std::process::{Command, Output, Stdio};

const SESSION: &str = "let y = (y1, y2) in (y, \\(x:s) z)";

fn run_occ(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_occ"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("failed to start the binary");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn session_transcript_golden() {
    let out = run_occ(&["--ascii"], SESSION);
    assert!(out.status.success());
    let expected = "\
Parsed expression: let y = (y1, y2) in (y, \\(x:s) z)

The variables (y1, y2, z) were unbound; we add them to the default
environment with dummy types (ty_y1, ty_y2, ty_z) and values
(val_y1, val_y2, val_z).

Inferred typing:
  y1:ty_y1^1,y2:ty_y2^1,z:ty_z^0 |-
    let y = (y1, y2) in (y, \\(x:s) z)
    : (ty_y1 * ty_y2) * [y1:ty_y1^0,y2:ty_y2^0,z:ty_z^1](x:s^0) -> ty_z

Result value:
  ((val_y1, val_y2), ([y1,y2,z], ((y |-> (val_y1, val_y2))), \\(x) z))
";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn session_rendering_is_byte_stable() {
    let first = run_occ(&["--ascii"], SESSION);
    let second = run_occ(&["--ascii"], SESSION);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let uni1 = run_occ(&[], SESSION);
    let uni2 = run_occ(&[], SESSION);
    assert_eq!(uni1.stdout, uni2.stdout);
}

#[test]
fn unicode_transcript_matches_ascii_modulo_symbols() {
    let out = run_occ(&[], SESSION);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("y1:ty_y1\u{00b9},y2:ty_y2\u{00b9},z:ty_z\u{2070} \u{22a2}"));
    assert!(text.contains(
        "((val_y1, val_y2), ([y1,y2,z], ((y \u{21a6} (val_y1, val_y2))), \u{03bb}(x) z))"
    ));
}

#[test]
fn exit_zero_on_success() {
    let out = run_occ(&[], "\\(x:a) x");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_one_on_ill_scoped_annotation() {
    let out = run_occ(&[], "\\(g:[q:s^1](w:r^0) -> s) x");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("type error"), "stderr: {err}");
}

#[test]
fn exit_one_on_budget_exhaustion() {
    let out = run_occ(&["--max-steps", "50"], "(fix f(x:ty_y):ty_y = f x) y");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget"), "stderr: {err}");
}

#[test]
fn exit_two_on_syntax_error() {
    let out = run_occ(&[], "let y = in y");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("syntax error"), "stderr: {err}");
}

#[test]
fn strict_mode_exit_one() {
    let out = run_occ(&["--strict"], "x");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn derivation_flags_render_rules() {
    let out = run_occ(
        &["--ascii", "--typing-derivation", "--reduction-derivation"],
        SESSION,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Typing derivation:"));
    assert!(text.contains("Let: "));
    assert!(text.contains("Subst-Closure: "));
    assert!(text.contains("Reduction derivation:"));
    assert!(text.contains("Red-Let: "));
}

#[test]
fn noninterference_report_text_and_json() {
    let out = run_occ(&["--ascii", "--check-noninterference"], "let w = x in \\(q:s) q");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Non-interference report:"));
    assert!(text.contains("violations: 0"));

    let out = run_occ(
        &["--ascii", "--check-noninterference", "--report-json"],
        "let w = x in \\(q:s) q",
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json_line = stdout
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("a JSON report line");
    let parsed: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(parsed["violations"].as_array().unwrap().len(), 0);
    assert!(parsed["pairs_tested"].as_u64().unwrap() > 0);
}

#[test]
fn classic_flag_snapshots_environments() {
    let out = run_occ(&["--ascii", "--classic"], "let y = x in \\(z:t) y");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("((x |-> val_x, y |-> val_x), \\(z) y)"));
}

#[test]
fn reads_program_from_file() {
    let dir = std::env::temp_dir().join(format!("occ-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("program.occ");
    std::fs::write(&path, SESSION).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_occ"))
        .arg("--ascii")
        .arg(&path)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Result value:"));
}
