mod common;

use std::collections::HashMap;
use std::time::Duration;

use common::fuzz::invalid_programs;
use common::rpc::Daemon;
use common::*;
use psv::defgraph::call_graph;
use psv::gen::rng;
use psv::session::cli::run_cli;
use psv::session::{load, report_json, solve, Options, Overall};
use serde_json::json;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut all = vec!["psv"];
    all.extend_from_slice(args);
    let code = run_cli(all, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    corpus_path(name).display().to_string()
}

#[test]
fn size_exits_zero_with_one_proved_vc() {
    let (code, out, _) = cli(&["verify", &path("size")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("size.postcondition.0") && out.contains("1/1 proved, overall unsat"), "{out}");
}

#[test]
fn syntax_error_exits_two_with_span() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad_syntax.psc");
    std::fs::write(&f, "def f(x: BigInt): BigInt = x +\n").unwrap();
    let (code, _, err) = cli(&["verify", f.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad_syntax.psc:2:1") || err.contains("bad_syntax.psc:1:"), "{err}");
}

#[test]
fn unknown_flag_and_missing_file_exit_two() {
    assert_eq!(cli(&["verify", &path("size"), "--frobnicate"]).0, 2);
    assert_eq!(cli(&["verify", "/nonexistent/x.psc"]).0, 2);
    assert_eq!(cli(&[]).0, 2);
}

#[test]
fn stripped_hints_exits_one_with_two_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("hints_plain.psc");
    std::fs::write(&f, strip_hints(&corpus_source("hints"))).unwrap();
    let (code, out, _) = cli(&["verify", f.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(out.lines().filter(|l| l.contains(" unknown ")).count(), 2, "{out}");
    assert!(out.lines().any(|l| l.starts_with("sumReverse") && l.contains("proved")), "{out}");
}

#[test]
fn reports_and_theories_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    for name in CORPUS {
        let mut seen = Vec::new();
        for i in 0..2 {
            let j = dir.path().join(format!("{name}{i}.json"));
            let t = dir.path().join(format!("{name}{i}.thy.txt"));
            cli(&["verify", &path(name), "--json-report", j.to_str().unwrap(), "--emit-theory", t.to_str().unwrap()]);
            seen.push((std::fs::read(&j).unwrap(), std::fs::read(&t).unwrap()));
        }
        assert!(seen[0] == seen[1], "{name} differs between runs");
        let report: serde_json::Value = serde_json::from_slice(&seen[0].0).unwrap();
        for key in ["tool_version", "source_hash", "vcs", "axioms", "phases"] {
            assert!(report.get(key).is_some(), "{name}: missing {key}");
        }
    }
}

#[test]
fn dump_flags_print_intermediate_forms() {
    let (_, out, _) = cli(&["verify", &path("size"), "--dump-depgraph", "--dump-equations", "--dump-termination", "--dump-vcs"]);
    assert!(out.contains("size_0 Nil_0 = 0"), "{out}");
    assert!(out.contains("measure [(size'0, 0)]"), "{out}");
    assert!(out.contains("size.postcondition.0 [postcondition]"), "{out}");
}

#[test]
fn empty_program_is_unsat() {
    let p = load("empty.psc", "").unwrap();
    let (_, v) = solve(&p, &Options::default());
    assert_eq!(v.overall, Overall::Unsat);
    assert!(v.per_vc.is_empty());
}

#[test]
fn callees_are_processed_first() {
    for name in CORPUS {
        let p = corpus_program(name);
        let (_, v) = run(&p);
        let pos: HashMap<String, usize> = v.phase_log.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let component_line = |f: &psv::ir::Name| v.phase_log.iter().position(|l| l.starts_with("component ") && l.split(": ").nth(1).is_some_and(|ms| ms.split(", ").any(|m| m == f.internal())));
        for (caller, callee, _) in call_graph(&p).edges {
            if caller == callee || p.fun(&callee).unwrap().origin != psv::surface::ast::Origin::User {
                continue;
            }
            let (Some(a), Some(b)) = (component_line(&callee), component_line(&caller)) else { panic!("{callee} or {caller} not logged") };
            if a == b {
                continue;
            }
            assert!(a < b, "{name}: {callee} processed after its caller {caller}");
            let first_caller_proof = v.per_vc.iter().filter(|o| o.vc.fun == caller).filter_map(|o| pos.get(&format!("prove {}", o.vc.id))).min();
            let last_callee_proof = v.per_vc.iter().filter(|o| o.vc.fun == callee).filter_map(|o| pos.get(&format!("prove {}", o.vc.id))).max();
            if let (Some(x), Some(y)) = (first_caller_proof, last_callee_proof) {
                assert!(y < x, "{name}: {caller} proved before {callee}");
            }
        }
    }
}

#[test]
fn daemon_status_when_idle() {
    let d = Daemon::start(Options::default());
    d.send_raw(r#"{"id":1,"method":"status","params":{}}"#);
    assert_eq!(d.wait_for(1, Duration::from_secs(5)), json!({"id": 1, "result": {"state": "idle"}}));
    d.finish();
}

#[test]
fn daemon_load_verify_emit() {
    let d = Daemon::start(Options::default());
    d.send(&json!({"id": 1, "method": "load", "params": {"source": corpus_source("size")}}));
    let r = d.wait_for(1, Duration::from_secs(5));
    assert_eq!(r["result"]["diagnostics"], json!([]));
    let pid = r["result"]["program_id"].as_u64().unwrap();
    d.send(&json!({"id": 2, "method": "verify", "params": {"program_id": pid}}));
    d.send(&json!({"id": 3, "method": "emit_theory", "params": {"program_id": pid}}));
    let v = d.wait_for(2, Duration::from_secs(30));
    assert_eq!(v["result"]["overall"], "unsat");
    let t = d.wait_for(3, Duration::from_secs(30));
    assert!(t["result"].as_str().unwrap().contains("fun size_0"));
    d.send(&json!({"id": 4, "method": "load", "params": {"source": "def f( = 1"}}));
    let bad = d.wait_for(4, Duration::from_secs(5));
    assert_eq!(bad["result"]["program_id"], json!(null));
    assert_eq!(bad["result"]["diagnostics"].as_array().unwrap().len(), 1);
    d.finish();
}

#[test]
fn daemon_protocol_errors() {
    let d = Daemon::start(Options::default());
    d.send_raw("this is not json");
    d.send_raw(r#"{"id":1,"method":"status"}"#);
    d.send_raw(r#"{"id":1,"method":"status"}"#);
    d.send_raw(r#"{"id":2,"method":"frobnicate","params":{}}"#);
    d.send_raw(r#"{"id":3,"method":"verify","params":{"program_id":99}}"#);
    d.send_raw(r#"{"id":4,"method":"shutdown","params":{}}"#);
    let rs = d.finish();
    assert_eq!(rs[0]["id"], json!(null));
    assert_eq!(rs[0]["error"]["code"], "parse-error");
    let by_code = |c: &str| rs.iter().filter(|r| r["error"]["code"] == c).count();
    assert_eq!(by_code("duplicate-id"), 1);
    assert_eq!(by_code("method-not-found"), 1);
    assert_eq!(by_code("unknown-program"), 1);
    assert_eq!(rs.last().unwrap(), &json!({"id": 4, "result": {}}));
}

#[test]
fn daemon_cancel_reports_cancelled() {
    let d = Daemon::start(Options::default());
    d.send(&json!({"id": 1, "method": "load", "params": {"source": corpus_source("stdlib")}}));
    d.wait_for(1, Duration::from_secs(10));
    d.send(&json!({"id": 2, "method": "verify", "params": {"program_id": 1}}));
    d.send(&json!({"id": 3, "method": "status", "params": {}}));
    d.send(&json!({"id": 4, "method": "cancel", "params": {"id": 2}}));
    let c = d.wait_for(4, Duration::from_secs(10));
    assert_eq!(c["result"]["cancelled"], true);
    let v = d.wait_for(2, Duration::from_secs(60));
    assert_eq!(v["error"]["code"], "cancelled");
    assert_eq!(d.wait_for(3, Duration::from_secs(5))["result"]["state"], "busy");
    d.finish();
}

#[test]
fn invalid_programs_never_verify() {
    let mut r = rng(99);
    let opts = Options {
        max_steps: 4_000,
        ..Options::default()
    };
    for (src, p) in invalid_programs(40, &mut r) {
        let (_, v) = solve(&p, &opts);
        assert_eq!(v.overall, Overall::Unknown, "{src}");
        let report: serde_json::Value = serde_json::from_str(&report_json(&src, &v, false)).unwrap();
        assert_eq!(report["overall"], "unknown");
    }
}
