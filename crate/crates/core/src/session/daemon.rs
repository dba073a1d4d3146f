//! Newline-delimited JSON request/response loop.
//!
//! Each line is `{"id": N, "method": "...", "params": {...}}`. Every request
//! gets exactly one response `{"id": N, "result": ...}` or
//! `{"id": N, "error": {"code": "...", "message": "..."}}`. `verify` and
//! `emit_theory` run on worker threads, so their responses can arrive after
//! those of requests issued later.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};

use super::{load, report, solve, theory, Options};
use crate::ir::CoreProgram;

pub const PARSE_ERROR: &str = "parse-error";
pub const DUPLICATE_ID: &str = "duplicate-id";
pub const METHOD_NOT_FOUND: &str = "method-not-found";
pub const INVALID_PARAMS: &str = "invalid-params";
pub const UNKNOWN_PROGRAM: &str = "unknown-program";
pub const CANCELLED: &str = "cancelled";

struct Loaded {
    source: String,
    program: CoreProgram,
}

struct Shared<W> {
    out: Mutex<W>,
    programs: Mutex<HashMap<u64, Arc<Loaded>>>,
    in_flight: Mutex<HashMap<u64, Arc<AtomicBool>>>,
}

impl<W: Write> Shared<W> {
    fn send(&self, msg: Value) {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        let _ = writeln!(out, "{msg}");
        let _ = out.flush();
    }

    fn ok(&self, id: u64, result: Value) {
        self.send(json!({"id": id, "result": result}));
    }

    fn err(&self, id: Option<u64>, code: &str, message: impl Into<String>) {
        self.send(json!({"id": id, "error": {"code": code, "message": message.into()}}));
    }
}

fn program_id(params: &Value) -> Option<u64> {
    params.get("program_id")?.as_u64()
}

/// Serves requests from `input` until `shutdown` or end of input. Workers
/// still running at that point are allowed to finish and respond.
pub fn serve<R, W>(input: R, output: W, options: Options)
where
    R: BufRead,
    W: Write + Send + 'static,
{
    let shared = Arc::new(Shared {
        out: Mutex::new(output),
        programs: Mutex::new(HashMap::new()),
        in_flight: Mutex::new(HashMap::new()),
    });
    let mut seen: HashSet<u64> = HashSet::new();
    let mut next_program = 1u64;
    let mut workers: Vec<JoinHandle<()>> = Vec::new();
    let mut shutdown_id = None;

    for line in input.lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let msg: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                shared.err(None, PARSE_ERROR, e.to_string());
                continue;
            }
        };
        let id = match msg.get("id").and_then(Value::as_u64) {
            Some(id) if id > 0 => id,
            _ => {
                shared.err(None, PARSE_ERROR, "request needs a positive integer id");
                continue;
            }
        };
        let Some(method) = msg.get("method").and_then(Value::as_str) else {
            shared.err(None, PARSE_ERROR, "request needs a method");
            continue;
        };
        if !seen.insert(id) {
            shared.err(Some(id), DUPLICATE_ID, format!("id {id} was already used"));
            continue;
        }
        let params = msg.get("params").cloned().unwrap_or_else(|| json!({}));
        match method {
            "status" => {
                let busy = !shared.in_flight.lock().unwrap().is_empty();
                shared.ok(id, json!({"state": if busy { "busy" } else { "idle" }}));
            }
            "load" => {
                let Some(source) = params.get("source").and_then(Value::as_str) else {
                    shared.err(Some(id), INVALID_PARAMS, "load needs a string `source`");
                    continue;
                };
                let file = params.get("file").and_then(Value::as_str).unwrap_or("<daemon>");
                match load(file, source) {
                    Ok(program) => {
                        let pid = next_program;
                        next_program += 1;
                        let loaded = Loaded { source: source.to_string(), program };
                        shared.programs.lock().unwrap().insert(pid, Arc::new(loaded));
                        shared.ok(id, json!({"program_id": pid, "diagnostics": []}));
                    }
                    Err(e) => shared.ok(id, json!({"program_id": null, "diagnostics": [e.to_string()]})),
                }
            }
            "verify" | "emit_theory" => {
                let Some(pid) = program_id(&params) else {
                    shared.err(Some(id), INVALID_PARAMS, "needs an integer `program_id`");
                    continue;
                };
                let Some(loaded) = shared.programs.lock().unwrap().get(&pid).cloned() else {
                    shared.err(Some(id), UNKNOWN_PROGRAM, format!("no program {pid}"));
                    continue;
                };
                let mut opts = options.clone();
                if let Some(ids) = params.get("vc_ids").and_then(Value::as_array) {
                    opts.vc_ids = Some(ids.iter().filter_map(|v| v.as_str().map(String::from)).collect());
                }
                let flag = Arc::new(AtomicBool::new(false));
                opts.cancel = Some(flag.clone());
                shared.in_flight.lock().unwrap().insert(id, flag.clone());
                let emit = method == "emit_theory";
                let sh = shared.clone();
                let spawned = std::thread::Builder::new().stack_size(super::STACK_SIZE).spawn(move || {
                    let (analysis, verdict) = solve(&loaded.program, &opts);
                    sh.in_flight.lock().unwrap().remove(&id);
                    if flag.load(Ordering::Relaxed) {
                        sh.err(Some(id), CANCELLED, format!("request {id} was cancelled"));
                    } else if emit {
                        let name = params.get("name").and_then(Value::as_str).unwrap_or("Program");
                        sh.ok(id, Value::String(theory(name, &loaded.program, &analysis, &verdict)));
                    } else {
                        let r = report(&loaded.source, &verdict, opts.report_timings);
                        sh.ok(id, serde_json::to_value(r).expect("report serializes"));
                    }
                });
                match spawned {
                    Ok(h) => workers.push(h),
                    Err(e) => {
                        shared.in_flight.lock().unwrap().remove(&id);
                        shared.err(Some(id), "internal", e.to_string());
                    }
                }
            }
            "cancel" => {
                let Some(target) = params.get("id").and_then(Value::as_u64) else {
                    shared.err(Some(id), INVALID_PARAMS, "cancel needs an integer `id`");
                    continue;
                };
                let hit = match shared.in_flight.lock().unwrap().get(&target) {
                    Some(flag) => {
                        flag.store(true, Ordering::Relaxed);
                        true
                    }
                    None => false,
                };
                shared.ok(id, json!({"cancelled": hit}));
            }
            "shutdown" => {
                shutdown_id = Some(id);
                break;
            }
            other => shared.err(Some(id), METHOD_NOT_FOUND, format!("unknown method `{other}`")),
        }
        workers.retain(|w| !w.is_finished());
    }
    for w in workers {
        let _ = w.join();
    }
    if let Some(id) = shutdown_id {
        shared.ok(id, json!({}));
    }
}
