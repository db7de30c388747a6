mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use common::{assert_schema, crate_path};
use fmcheck::encode::read_dimacs;

fn fmcheck(args: &[&str]) -> Output {
    fmcheck_with(args, "", &[])
}

fn fmcheck_with(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fmcheck"));
    cmd.current_dir(crate_path(""))
        .args(args)
        .env_remove("FMCHECK_COUNT_CAP")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const CAD: &str = "examples/cad_partial.fm";

#[test]
fn check_example_one_is_valid() {
    let o = fmcheck(&["check", CAD, "examples/configs/example1.cfg"]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("result: Valid"));
    assert!(!out.contains("FALSE"));
    assert!(out.contains("G2  xor group: v1 {v1.1, v1.2}"));
}

#[test]
fn check_example_two_propagates_then_validates() {
    let o = fmcheck(&["check", CAD, "examples/configs/example2.cfg"]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("forced + v1.1 (requires: v2.3.1 -> v1.1)"));
    assert!(out.contains("forced + v3.2 (requires: v2.4 -> v3.2)"));
    assert!(out.contains("result: Valid"));
}

#[test]
fn check_example_two_taken_literally_is_invalid() {
    let o = fmcheck(&["check", CAD, "tests/fixtures/example2_raw.cfg"]);
    let out = stdout(&o);
    assert_eq!(code(&o), 1, "{out}");
    assert!(out.contains("result: Invalid (failing: G2, G5, D1, D2)"), "{out}");
}

#[test]
fn check_example_three_reports_the_conflict() {
    let o = fmcheck(&["check", CAD, "examples/configs/example3.cfg"]);
    let out = stdout(&o);
    assert_eq!(code(&o), 1, "{out}");
    assert!(out.contains("conflict on v1.1"));
    assert!(out.contains("(xor group: v1 {v1.1, v1.2})"));
    assert!(out.contains("(requires: v2.3.1 -> v1.1)"));
}

#[test]
fn check_json_matches_schema() {
    for cfg in ["example1", "example2", "example3"] {
        let o = fmcheck(&["--json", "check", CAD, &format!("examples/configs/{cfg}.cfg")]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_schema("CheckReport", &v);
    }
    let o = fmcheck(&["--json", "check", CAD, "tests/fixtures/example2_raw.cfg"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_schema("CheckReport", &v);
    assert_eq!(v["status"], "invalid");
}

#[test]
fn missing_and_malformed_inputs_exit_with_usage_code() {
    assert_eq!(code(&fmcheck(&["check", "nope.fm", "examples/configs/example1.cfg"])), 2);
    assert_eq!(code(&fmcheck(&["check", CAD, "nope.cfg"])), 2);
    let o = fmcheck(&["analyze", "tests/fixtures/broken.fm"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("broken.fm:3:3: GroupTooSmall"), "{err}");
    assert_eq!(code(&fmcheck(&["frobnicate"])), 2);
    assert_eq!(code(&fmcheck(&["--backend", "magic", "analyze", CAD])), 2);
    // A configuration naming a feature the model lacks.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "+v9\n").unwrap();
    assert_eq!(code(&fmcheck(&["check", CAD, cfg.to_str().unwrap()])), 2);
}

#[test]
fn analyze_fixtures() {
    let o = fmcheck(&["analyze", "--count", CAD]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0);
    assert!(out.contains("void: false\ndead: (none)\ncore: CAD, v1, v2, v3\nproducts: 56\n"), "{out}");

    let o = fmcheck(&["analyze", "tests/fixtures/dead_feature.fm"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dead: A\ncore: R, B\n"), "{}", stdout(&o));

    let o = fmcheck(&["analyze", "tests/fixtures/void.fm"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("void: true"));
}

#[test]
fn analyze_json_matches_schema_for_both_backends() {
    for backend in ["brute", "dpll", "auto"] {
        for model in [CAD, "tests/fixtures/dead_feature.fm", "tests/fixtures/void.fm"] {
            let o = fmcheck(&["--json", "--backend", backend, "analyze", "--count", model]);
            let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
            assert_schema("AnalysisReport", &v);
        }
    }
    let o = fmcheck(&["--json", "analyze", "tests/fixtures/dead_feature.fm"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dead"], serde_json::json!(["A"]));
}

#[test]
fn count_cap_is_enforced_and_overridable() {
    let o = fmcheck(&["analyze", "--count", "examples/cad_full.fm"]);
    assert_eq!(code(&o), 3);
    assert_eq!(code(&fmcheck(&["count", "examples/cad_full.fm"])), 3);
    // Without --count the size limit does not apply.
    assert_eq!(code(&fmcheck(&["analyze", "examples/cad_full.fm"])), 0);
    assert_eq!(
        code(&fmcheck_with(&["count", CAD], "", &[("FMCHECK_COUNT_CAP", "10")])),
        3
    );
    let o = fmcheck_with(&["count", "examples/cad_full.fm"], "", &[("FMCHECK_COUNT_CAP", "30")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn count_and_enumerate() {
    assert_eq!(stdout(&fmcheck(&["count", CAD])), "56\n");
    assert_eq!(stdout(&fmcheck(&["count", "tests/fixtures/root_optional.fm"])), "2\n");
    assert_eq!(
        stdout(&fmcheck(&["enumerate", "tests/fixtures/root_optional.fm"])),
        "Root\nRoot c\n"
    );
    let o = fmcheck(&["enumerate", "--limit", "3", CAD]);
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = fmcheck(&["--json", "enumerate", "--limit", "100", CAD]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["products"].as_array().unwrap().len(), 56);
}

#[test]
fn encode_pretty_and_dimacs() {
    let o = fmcheck(&["encode", "--pretty", CAD]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0);
    assert!(out.lines().any(|l| l.trim() == "(v1.1 ⊕ v1.2) ⇔ v1"), "{out}");
    assert!(out.lines().any(|l| l.trim() == "(v2.1 ∨ v2.2 ∨ v2.3 ∨ v2.4) ⇔ v2"));

    let ascii = stdout(&fmcheck(&["--ascii", "encode", CAD]));
    assert!(ascii.lines().any(|l| l.trim() == "(v1.1 ^ v1.2) <-> v1"), "{ascii}");
    assert!(ascii.is_ascii());

    let o = fmcheck(&["encode", "--dimacs", "tests/fixtures/root_only.fm"]);
    assert_eq!(stdout(&o), "c map 1 Root\np cnf 1 1\n1 0\n");

    let text = stdout(&fmcheck(&["encode", "--dimacs", CAD]));
    let cnf = read_dimacs(&text).unwrap();
    assert_eq!(cnf.num_vars, 14);
    assert_eq!(cnf.names[0], (1, "CAD".to_string()));
}

#[test]
fn configure_transcripts() {
    let o = fmcheck_with(&["configure", CAD], "+v2.3.1\ndone\n", &[]);
    let out = stdout(&o);
    assert_eq!(code(&o), 0, "{out}");
    assert!(out.contains("forced + v1.1 (requires: v2.3.1 -> v1.1)"), "{out}");
    assert!(out.contains("extensible to a valid product: yes"));

    let o = fmcheck_with(&["configure", CAD], "+v1.2\n+v2.3.1\n", &[]);
    let out = stdout(&o);
    assert_eq!(code(&o), 1, "{out}");
    assert!(out.contains("conflict on v1.1"));
    assert!(out.contains("xor group: v1 {v1.1, v1.2}"));

    let o = fmcheck_with(&["configure", CAD], "done\n", &[]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("incomplete: 10 undecided; extensible to a valid product: yes"));

    let o = fmcheck_with(&["configure", CAD], "+nope\n?\n", &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown feature `nope`"));
    assert!(stdout(&o).contains("  ? v2.2\n"));

    let full = "+v1.1\n+v2.1\n-v2.2\n-v2.3\n-v2.3.1\n-v2.3.2\n-v2.4\n+v3.1\n";
    let o = fmcheck_with(&["configure", CAD], full, &[]);
    assert!(stdout(&o).ends_with("complete: Valid\n"), "{}", stdout(&o));

    // Undeciding releases what the decision forced.
    let o = fmcheck_with(&["configure", CAD], "+v2.4\n-v2.4\n", &[]);
    assert!(stdout(&o).contains("released + v3.2"), "{}", stdout(&o));
}

#[test]
fn output_is_deterministic() {
    let runs: Vec<Vec<u8>> = (0..3)
        .flat_map(|_| {
            [
                fmcheck(&["--json", "analyze", "--count", CAD]).stdout,
                fmcheck(&["check", CAD, "examples/configs/example3.cfg"]).stdout,
                fmcheck(&["encode", "--dimacs", "examples/cad_full.fm"]).stdout,
                fmcheck(&["enumerate", "--limit", "20", CAD]).stdout,
            ]
        })
        .collect();
    for (i, r) in runs.iter().enumerate().skip(4) {
        assert_eq!(r, &runs[i % 4]);
    }
}

#[test]
fn serve_answers_health_and_rejects_a_busy_port() {
    use std::io::{BufRead, BufReader, Read};
    use std::net::{TcpListener, TcpStream};

    let busy = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let o = fmcheck(&["serve", "examples", "--port", &port]);
    assert_eq!(code(&o), 2);

    let free = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = free.local_addr().unwrap().port();
    drop(free);
    let mut child = Command::new(env!("CARGO_BIN_EXE_fmcheck"))
        .current_dir(crate_path(""))
        .args(["serve", "tests/fixtures", "--port", &port.to_string()])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut log = BufReader::new(child.stderr.take().unwrap());
    let mut seen = String::new();
    let mut line = String::new();
    while !seen.contains("listening on") {
        line.clear();
        if log.read_line(&mut line).unwrap() == 0 {
            break;
        }
        seen.push_str(&line);
    }
    assert!(seen.contains("broken.fm"), "{seen}");
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    s.write_all(b"GET /api/health HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.ends_with(r#"{"status":"ok"}"#), "{resp}");
}
