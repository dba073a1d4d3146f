//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::descent::{certify, components, remove_decrease, sample_descent};
use common::exhaust::{brute, MatchGen};
use common::fuzz::invalid_programs;
use common::rpc::Daemon;
use common::trace::mutants;
use common::*;
use psv::defgraph::check_positivity;
use psv::gen::rng;
use psv::ir::eval::{eval_expr, Value};
use psv::ir::Type;
use psv::patcomp::{check_exhaustive, oracle_equivalence, split_equations, ORACLE_DEPTH};
use psv::prover::{check_trace, MappingStatus, ProofResult, Sequent};
use psv::session::{load, report_json, solve, theory, LoadError, Options, Overall};
use psv::termination::validate_certificate;
use psv::vcgen::VcKind;
use serde_json::{json, Value as Json};

const SIZE_BUDGET: Duration = Duration::from_secs(1);
const HINTS_BUDGET: Duration = Duration::from_secs(10);
const STDLIB_MIN_FUNCTIONS: usize = 20;
const STDLIB_MIN_VCS: usize = 30;
const STDLIB_MIN_PROVED: f64 = 0.70;
const ORACLE_SAMPLES: usize = 1000;
const RANDOM_MATCHES: usize = 200;
const PROTOCOL_REQUESTS: u64 = 50;
const FUZZ_PROGRAMS: usize = 500;

type Check = Result<String, String>;

macro_rules! ensure {
    ($c:expr, $($fmt:tt)*) => {
        if !$c {
            return Err(format!($($fmt)*));
        }
    };
}

fn size() -> Check {
    let t = Instant::now();
    let p = corpus_program("size");
    let (a, v) = run(&p);
    let elapsed = t.elapsed();
    let f = p.find_function("size").unwrap();
    let eqs: Vec<String> = split_equations(f, &p).iter().map(|e| unsuffix(&psv::emitter::render_equation(&p, e))).collect();
    ensure!(eqs == ["size Nil = 0", "size (Cons _ xs) = 1 + size xs"], "equations {eqs:?}");
    let cert = a
        .termination
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .find(|c| c.component.contains(&f.name))
        .ok_or("size not certified")?;
    let positions: Vec<Option<usize>> = cert.measure.iter().map(|&j| cert.matrix.columns[j].position_of(&f.name)).collect();
    ensure!(positions == [Some(0)], "measure positions {positions:?}");
    let o = v.outcome("size.postcondition.0").ok_or("no postcondition VC")?;
    ensure!(o.result.is_proved(), "postcondition {:?}", o.reason());
    ensure!(v.overall == Overall::Unsat, "overall {}", v.overall.as_str());
    ensure!(elapsed < SIZE_BUDGET, "took {elapsed:?}");
    Ok(format!("2 equations, measure on arg 0, unsat in {} ms", elapsed.as_millis()))
}

fn hints() -> Check {
    let t = Instant::now();
    let ids = ["sumReverse.holds.0", "sumConstant.holds.0", "mapFstZip.postcondition.0"];
    let (_, with) = run(&corpus_program("hints"));
    let (_, without) = run(&program(&strip_hints(&corpus_source("hints"))));
    let elapsed = t.elapsed();
    let verdicts = |v: &psv::session::SolverVerdict| -> Result<Vec<&str>, String> {
        ids.iter().map(|id| v.outcome(id).map(|o| o.verdict()).ok_or(format!("no {id}"))).collect()
    };
    let (a, b) = (verdicts(&with)?, verdicts(&without)?);
    ensure!(a == ["proved", "proved", "proved"], "annotated {a:?}");
    ensure!(b == ["proved", "unknown", "unknown"], "stripped {b:?}");
    ensure!(elapsed < HINTS_BUDGET, "took {elapsed:?}");
    Ok(format!("annotated 3/3, stripped 1/3, {} ms", elapsed.as_millis()))
}

fn stdlib() -> Check {
    let p = corpus_program("stdlib");
    let functions = p.user_functions().count();
    let (_, v) = run(&p);
    let (_, again) = run(&p);
    let src = corpus_source("stdlib");
    ensure!(report_json(&src, &v, false) == report_json(&src, &again, false), "report differs between runs");
    let manifest = std::fs::read_to_string(corpus_path("stdlib").with_extension("manifest.tsv")).map_err(|e| e.to_string())?;
    let pinned: Vec<(String, String, String)> = manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].to_string(), c[1].to_string(), c[2].to_string())
        })
        .collect();
    let actual: Vec<(String, String, String)> = v.per_vc.iter().map(|o| (o.vc.id.clone(), o.vc.kind.as_str().to_string(), o.verdict().to_string())).collect();
    ensure!(pinned == actual, "run differs from the manifest");
    let proved = actual.iter().filter(|r| r.2 == "proved").count();
    let ratio = proved as f64 / actual.len() as f64;
    ensure!(functions >= STDLIB_MIN_FUNCTIONS, "{functions} functions");
    ensure!(actual.len() >= STDLIB_MIN_VCS, "{} VCs", actual.len());
    ensure!(ratio >= STDLIB_MIN_PROVED, "{proved}/{} proved", actual.len());
    Ok(format!("{functions} functions, {proved}/{} VCs proved ({:.1}%), matches manifest", actual.len(), ratio * 100.0))
}

fn oracle() -> Check {
    let mut checked = BTreeSet::new();
    let mut inputs = 0;
    for name in CORPUS {
        let p = corpus_program(name);
        for f in &p.functions {
            if !checked.insert(f.name.to_string()) {
                continue;
            }
            let eqs = split_equations(f, &p);
            let v = oracle_equivalence(&p, f, &eqs, ORACLE_SAMPLES, 3, 10_000);
            ensure!(v.agrees(), "{name}/{}: {:?}", f.name, v.disagreement);
            inputs += v.agreements;
        }
    }
    ensure!(ORACLE_DEPTH <= 5, "depth {ORACLE_DEPTH}");
    Ok(format!("{} functions, {inputs} agreeing evaluations", checked.len()))
}

fn termination() -> Check {
    let p = corpus_program("termination");
    let mut certified = BTreeSet::new();
    for c in components(&p).iter().filter(|c| c.recursive) {
        if certify(&p, c).is_ok() {
            certified.extend(c.members.iter().map(|m| m.base.to_string()));
        }
    }
    for want in ["size", "map", "append", "zip", "ack", "even", "odd"] {
        ensure!(certified.contains(want), "{want} not certified");
    }
    let lp = corpus_program("loop");
    let c = components(&lp).into_iter().find(|c| &*c.members[0].base == "f").unwrap();
    ensure!(certify(&lp, &c).is_err(), "f(x) = f(x) certified");
    let (mut certs, mut checks, mut mutated) = (0, 0, 0);
    for name in CORPUS {
        let p = corpus_program(name);
        for c in components(&p).iter().filter(|c| c.recursive) {
            let cert = certify(&p, c).map_err(|_| format!("{name} {:?} not certified", c.members))?;
            validate_certificate(&cert).map_err(|e| format!("{name}: {e}"))?;
            let rep = sample_descent(&p, &cert, 400, 5);
            ensure!(rep.violations.is_empty(), "{name}: {:?}", rep.violations);
            ensure!(rep.exercised == rep.rows, "{name} {:?}: rows not exercised", c.members);
            checks += rep.checks;
            certs += 1;
            ensure!(certify(&remove_decrease(&p, c), c).is_err(), "{name} {:?} survives mutation", c.members);
            mutated += 1;
        }
    }
    Ok(format!("{certs} certificates, {checks} sampled descents, {mutated} mutants rejected, self-loop rejected"))
}

fn positivity() -> Check {
    match load("bad.psc", &corpus_source("bad_positivity")) {
        Err(LoadError::Positivity(e)) => ensure!(e.field == "f", "names field {}", e.field),
        other => return Err(format!("{:?}", other.map(|_| "accepted"))),
    }
    let mut n = 0;
    for name in CORPUS {
        let p = corpus_program(name);
        check_positivity(&p.datatypes).map_err(|e| format!("{name}: {e}"))?;
        n += p.datatypes.len();
    }
    Ok(format!("Bad rejected on field f, {n} corpus datatypes accepted"))
}

fn traces() -> Check {
    let (mut replayed, mut corrupted) = (0, 0);
    for name in CORPUS {
        let p = corpus_program(name);
        let (a, v) = run(&p);
        for o in &v.per_vc {
            let ProofResult::Proved(proof) = &o.result else { continue };
            let root = Sequent::from_vc(&o.vc);
            check_trace(&p, &a.rules, &root, proof).map_err(|e| format!("{}: {e}", o.vc.id))?;
            replayed += 1;
            for (pos, m) in mutants(proof) {
                ensure!(check_trace(&p, &a.rules, &root, &m.proof).is_err(), "{}: {} at {pos} accepted", o.vc.id, m.what);
                corrupted += 1;
            }
        }
    }
    Ok(format!("{replayed} traces replayed, {corrupted}/{corrupted} corruptions detected"))
}

fn exhaustiveness() -> Check {
    let p = program("def uses(xs: List[Boolean], n: Nat, ns: List[Nat]): Boolean = true\n");
    let ts: Vec<Type> = p.find_function("uses").unwrap().params.iter().map(|(_, t)| t.clone()).collect();
    let types = [
        Type::Bool,
        ts[0].clone(),
        ts[1].clone(),
        ts[2].clone(),
        Type::Tuple(vec![ts[1].clone(), Type::Bool]),
        Type::Tuple(vec![ts[0].clone(), ts[1].clone()]),
    ];
    let mut g = MatchGen::new(&p);
    let mut r = rng(42);
    for i in 0..RANDOM_MATCHES {
        let t = &types[i % types.len()];
        let clauses = g.clauses(t, &mut r);
        let c = check_exhaustive(&clauses, t, &p);
        let b = brute(&p, &clauses, t);
        ensure!(c.complete == b.complete && c.redundant == b.redundant, "match {i} on {t} disagrees");
    }
    let q = program("def first(xs: List[BigInt]): BigInt = xs match {\n  case Cons(x, _) => x\n}\n");
    let (_, v) = run(&q);
    let o = v.per_vc.iter().find(|o| o.vc.kind == VcKind::Exhaustiveness).ok_or("no exhaustiveness VC")?;
    ensure!(!o.result.is_proved(), "missing Nil proved");
    let nil = q.datatypes.iter().flat_map(|d| &d.ctors).find(|c| &*c.name.base == "Nil").unwrap();
    let env = [(o.vc.fixed[0].0.clone(), Value::Ctor(nil.name.clone(), vec![]))].into_iter().collect();
    ensure!(eval_expr(&q, &env, &o.vc.goal, 1000) == Ok(Value::Bool(false)), "goal not falsified on Nil");
    Ok(format!("{RANDOM_MATCHES} matches agree to depth 3, missing Nil unknown and falsified"))
}

const MAPPING: &str = "@library(\"map\")
def myMap[A, B](xs: List[A], f: A => B): List[B] = xs match {
  case Nil() => Nil[B]()
  case Cons(x, t) => Cons(f(x), myMap(t, f))
}

def lenMyMap[A, B](xs: List[A], f: A => B) = (length(myMap(xs, f)) == length(xs)).holds
";

fn mappings() -> Check {
    let p = program(MAPPING);
    let (_, v) = run(&p);
    ensure!(v.mappings.len() == 1 && matches!(v.mappings[0].status, MappingStatus::Proved(_)), "not proved: {:?}", v.mapping_failures);
    ensure!(v.axioms_assumed.is_empty(), "prove mode assumed {:?}", v.axioms_assumed);
    let opts = Options {
        assume_mappings: true,
        ..Options::default()
    };
    let (_, w) = solve(&p, &opts);
    let id = w.mappings[0].id();
    ensure!(w.axioms_assumed == [id.clone()], "assumed {:?}", w.axioms_assumed);
    let r: Json = serde_json::from_str(&report_json(MAPPING, &w, false)).unwrap();
    ensure!(r["axioms"] == json!([id]), "report axioms {}", r["axioms"]);
    Ok(format!("proved in prove mode, report lists exactly [{id}] when assumed"))
}

fn determinism() -> Check {
    let mut bytes = 0;
    for name in CORPUS {
        let src = corpus_source(name);
        let docs: Vec<(String, String)> = (0..2)
            .map(|_| {
                let p = corpus_program(name);
                let (a, v) = run(&p);
                (theory(name, &p, &a, &v), report_json(&src, &v, false))
            })
            .collect();
        ensure!(docs[0].0 == docs[1].0, "{name}: theory differs");
        ensure!(docs[0].1 == docs[1].1, "{name}: report differs");
        bytes += docs[0].0.len() + docs[0].1.len();
    }
    Ok(format!("{} programs, {bytes} bytes identical across runs", CORPUS.len()))
}

/// The scripted session: loads, then verify/status/cancel interleaved.
fn script() -> Vec<Json> {
    let mut reqs = Vec::new();
    for (i, name) in ["size", "hints", "termination", "stdlib"].iter().enumerate() {
        reqs.push(json!({"id": i + 1, "method": "load", "params": {"source": corpus_source(name), "file": format!("{name}.psc")}}));
    }
    reqs.push(json!({"id": 5, "method": "load", "params": {"source": "def broken( = 1"}}));
    let mut last_verify = 0;
    for id in 6..PROTOCOL_REQUESTS {
        let req = match id % 4 {
            0 | 3 => {
                last_verify = id;
                json!({"id": id, "method": "verify", "params": {"program_id": (id / 4) % 4 + 1}})
            }
            1 => json!({"id": id, "method": "status", "params": {}}),
            _ => json!({"id": id, "method": "cancel", "params": {"id": last_verify}}),
        };
        reqs.push(req);
    }
    reqs.push(json!({"id": PROTOCOL_REQUESTS, "method": "shutdown", "params": {}}));
    reqs
}

fn protocol() -> Check {
    let reqs = script();
    ensure!(reqs.len() as u64 == PROTOCOL_REQUESTS, "{} requests", reqs.len());
    let d = Daemon::start(Options::default());
    for r in &reqs {
        d.send(r);
    }
    let rs = d.finish();
    let mut by_id: BTreeMap<u64, Vec<&Json>> = BTreeMap::new();
    for r in &rs {
        let id = r["id"].as_u64().ok_or(format!("response without id: {r}"))?;
        by_id.entry(id).or_default().push(r);
    }
    ensure!(by_id.len() as u64 == PROTOCOL_REQUESTS && by_id.values().all(|v| v.len() == 1), "{} responses for {} ids", rs.len(), by_id.len());
    let order: Vec<u64> = rs.iter().filter_map(|r| r["id"].as_u64()).collect();
    let reordered = order.windows(2).filter(|w| w[0] > w[1]).count();
    let mut cancelled = 0;
    for req in &reqs {
        let id = req["id"].as_u64().unwrap();
        let resp = by_id[&id][0];
        match req["method"].as_str().unwrap() {
            "cancel" => {
                let target = req["params"]["id"].as_u64().unwrap();
                let hit = resp["result"]["cancelled"].as_bool().ok_or(format!("cancel {id}: {resp}"))?;
                let was = by_id.get(&target).is_some_and(|r| r[0]["error"]["code"] == "cancelled");
                ensure!(hit == was, "cancel {id} said {hit} but verify {target} cancelled={was}");
                cancelled += hit as usize;
            }
            "verify" => {
                let overall = &resp["result"]["overall"];
                ensure!(resp["error"]["code"] == "cancelled" || overall == "unsat" || overall == "unknown", "verify {id}: {resp}");
            }
            _ => ensure!(resp.get("result").is_some(), "{id}: {resp}"),
        }
    }
    let opts = Options {
        max_steps: 4_000,
        timeout: Duration::from_secs(2),
        ..Options::default()
    };
    let mut r = rng(2024);
    let programs = invalid_programs(FUZZ_PROGRAMS, &mut r);
    for (src, p) in &programs {
        let (_, v) = solve(p, &opts);
        ensure!(v.overall == Overall::Unknown, "invalid program verified:\n{src}");
    }
    Ok(format!(
        "{} responses, {reordered} out of order, {cancelled} cancelled; {} refuted programs all unknown",
        rs.len(),
        programs.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("size end-to-end", size),
        ("hinted suite", hints),
        ("stdlib coverage", stdlib),
        ("oracle equivalence", oracle),
        ("termination", termination),
        ("positivity", positivity),
        ("trace checking", traces),
        ("exhaustiveness", exhaustiveness),
        ("mapping modes", mappings),
        ("determinism", determinism),
        ("protocol and never-sat", protocol),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
