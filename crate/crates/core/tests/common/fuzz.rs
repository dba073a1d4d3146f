//! Random contracts that a ground counterexample refutes.

use psv::gen::{instantiate, Rng8};
use psv::ir::eval::{eval_expr, Value};
use psv::ir::CoreProgram;
use psv::session::load;
use psv::vcgen::Vc;
use rand::seq::SliceRandom;
use rand::Rng;

pub const PRELUDE: &str = "def len(xs: List[BigInt]): BigInt = xs match {
  case Nil() => BigInt(0)
  case Cons(_, t) => 1 + len(t)
}

def sumInts(xs: List[BigInt]): BigInt = xs match {
  case Nil() => BigInt(0)
  case Cons(x, t) => x + sumInts(t)
}
";

fn int_term(r: &mut Rng8, depth: u32) -> String {
    const ATOMS: [&str; 8] = [
        "len(xs)",
        "len(ys)",
        "sumInts(xs)",
        "sumInts(ys)",
        "len(append(xs, ys))",
        "len(reverse(xs))",
        "sumInts(append(ys, xs))",
        "n",
    ];
    if depth == 0 || r.gen_bool(0.5) {
        if r.gen_bool(0.25) {
            return format!("BigInt({})", r.gen_range(-2..=3));
        }
        return ATOMS.choose(r).unwrap().to_string();
    }
    let a = int_term(r, depth - 1);
    let b = int_term(r, depth - 1);
    match r.gen_range(0..3) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        _ => format!("(2 * {a})"),
    }
}

fn list_term(r: &mut Rng8) -> String {
    const LISTS: [&str; 7] = ["xs", "ys", "append(xs, ys)", "append(ys, xs)", "reverse(xs)", "Nil[BigInt]()", "Cons(n, xs)"];
    LISTS.choose(r).unwrap().to_string()
}

fn claim(r: &mut Rng8) -> String {
    if r.gen_bool(0.2) {
        let op = if r.gen_bool(0.7) { "==" } else { "!=" };
        return format!("{} {op} {}", list_term(r), list_term(r));
    }
    let op = ["==", "!=", "<", "<=", ">", ">="].choose(r).unwrap();
    format!("{} {op} {}", int_term(r, 2), int_term(r, 2))
}

/// Source of one random program with a single `.holds` claim.
pub fn random_program(r: &mut Rng8) -> String {
    let body = if r.gen_bool(0.4) {
        format!("{{\n  require({})\n  {}\n}}", claim(r), claim(r))
    } else {
        format!("({})", claim(r))
    };
    format!("{PRELUDE}\ndef claim(xs: List[BigInt], ys: List[BigInt], n: BigInt) = {body}.holds\n")
}

/// A ground instance satisfying the hypotheses and falsifying the goal.
pub fn counterexample(p: &CoreProgram, vc: &Vc, samples: usize, r: &mut Rng8) -> Option<String> {
    for _ in 0..samples {
        let env = instantiate(p, &vc.fixed, 4, r);
        let holds = |e| eval_expr(p, &env, e, 10_000) == Ok(Value::Bool(true));
        if vc.hypotheses.iter().all(holds) && eval_expr(p, &env, &vc.goal, 10_000) == Ok(Value::Bool(false)) {
            let mut shown: Vec<String> = env.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            shown.sort();
            return Some(shown.join(", "));
        }
    }
    None
}

/// Random programs whose claim is refuted by some ground instance.
pub fn invalid_programs(count: usize, r: &mut Rng8) -> Vec<(String, CoreProgram)> {
    let mut out = Vec::new();
    while out.len() < count {
        let src = random_program(r);
        let p = load("fuzz.psc", &src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        let a = psv::session::analyze(&p);
        let vc = a.vcs.iter().find(|v| &*v.fun.base == "claim").unwrap();
        if counterexample(&p, vc, 200, r).is_some() {
            out.push((src, p));
        }
    }
    out
}
