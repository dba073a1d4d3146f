//! Single-point corruptions of proof trees.

use num_bigint::BigInt;
use psv::ir::Expr;
use psv::prover::{Builtin, Proof, RuleId, Split, Step};

pub struct Mutant {
    pub what: String,
    pub proof: Proof,
}

fn other_rule(r: &RuleId) -> RuleId {
    match r {
        RuleId::Builtin(Builtin::Beta) => RuleId::Builtin(Builtin::Arith),
        RuleId::Builtin(_) => RuleId::Builtin(Builtin::Beta),
        RuleId::Equation(f, i) => RuleId::Equation(f.clone(), i + 1),
        RuleId::Fact(i) => RuleId::Fact(i + 1),
        RuleId::Lemma(_) | RuleId::Mapping(_) => RuleId::Builtin(Builtin::EqRefl),
    }
}

fn junk() -> Expr {
    Expr::Int(BigInt::from(987_654_321))
}

/// Corrupted variants of one step.
fn step_mutants(s: &Step) -> Vec<(String, Step)> {
    match s {
        Step::Rewrite { target, path, rule, result } => vec![
            (
                format!("rule {rule} swapped"),
                Step::Rewrite {
                    target: *target,
                    path: path.clone(),
                    rule: other_rule(rule),
                    result: result.clone(),
                },
            ),
            (
                "rewrite result replaced".into(),
                Step::Rewrite {
                    target: *target,
                    path: path.clone(),
                    rule: rule.clone(),
                    result: if *result == junk() { Expr::Bool(false) } else { junk() },
                },
            ),
        ],
        Step::IntroImp => vec![("intro replaced by split".into(), Step::SplitFact(usize::MAX))],
        Step::SplitFact(i) => vec![("split index shifted".into(), Step::SplitFact(i + 1000))],
        Step::DropFact(i) => vec![("drop index shifted".into(), Step::DropFact(i + 1000))],
        Step::UsePost { fun, args } => vec![(
            "postcondition argument replaced".into(),
            Step::UsePost {
                fun: fun.clone(),
                args: args.iter().map(|_| Expr::Bool(true)).collect(),
            },
        )],
        Step::Instantiate { fact, terms } => vec![(
            "instance term replaced".into(),
            Step::Instantiate {
                fact: *fact,
                terms: terms.iter().map(|_| Expr::Bool(true)).collect(),
            },
        )],
    }
}

fn node_mutants(p: &Proof) -> Vec<(String, Proof)> {
    match p {
        Proof::Open => vec![],
        Proof::Steps(..) => vec![],
        Proof::CloseTrue => vec![("true closure opened".into(), Proof::Open)],
        Proof::CloseFalse(i) => vec![("false closure index shifted".into(), Proof::CloseFalse(i + 1))],
        Proof::Linarith(certs) => {
            let mut out = vec![("certificate emptied".into(), Proof::Linarith(vec![]))];
            if let Some(c) = certs.first() {
                if c.terms.len() > 1 {
                    let mut c2 = certs.clone();
                    c2[0].terms.remove(0);
                    out.push(("certificate term dropped".into(), Proof::Linarith(c2)));
                }
            }
            out
        }
        Proof::SplitConj(ps) => vec![("conjunct proof dropped".into(), Proof::SplitConj(ps[..ps.len().saturating_sub(1)].to_vec()))],
        Proof::Cases(split, ps) => {
            let flipped = match split {
                Split::Bool(e) => Split::Bool(Expr::not(e.clone())),
                Split::Ctor(e) => Split::Ctor(junk_like(e)),
                Split::Int(e, ks) => Split::Int(e.clone(), ks.iter().map(|k| k + 1).collect()),
            };
            let mut out = vec![("case split term changed".into(), Proof::Cases(flipped, ps.clone()))];
            if ps.len() > 1 && ps.first() != ps.last() {
                let mut r = ps.clone();
                r.reverse();
                out.push(("case proofs reordered".into(), Proof::Cases(split.clone(), r)));
            }
            out
        }
        Proof::Induct { principle, vars, cases } => {
            let mut out = vec![(
                "induction principle renamed".into(),
                Proof::Induct {
                    principle: format!("{principle}_x"),
                    vars: vars.clone(),
                    cases: cases.clone(),
                },
            )];
            if cases.len() > 1 && cases.first() != cases.last() {
                let mut r = cases.clone();
                r.reverse();
                out.push((
                    "induction cases reordered".into(),
                    Proof::Induct {
                        principle: principle.clone(),
                        vars: vars.clone(),
                        cases: r,
                    },
                ));
            }
            out
        }
    }
}

fn junk_like(e: &Expr) -> Expr {
    match e {
        Expr::Var(_) => Expr::Bool(true),
        _ => junk(),
    }
}

/// Every single-point corruption of `p`, tagged with its pre-order position.
pub fn mutants(p: &Proof) -> Vec<(usize, Mutant)> {
    let mut out = Vec::new();
    let mut n = 0;
    walk(p, &mut n, &mut |pos, what, build| out.push((pos, Mutant { what, proof: build })), &mut |q| q);
    out
}

type Rebuild<'a> = dyn FnMut(Proof) -> Proof + 'a;

fn walk(p: &Proof, n: &mut usize, emit: &mut dyn FnMut(usize, String, Proof), rebuild: &mut Rebuild) {
    let here = *n;
    *n += 1;
    for (what, q) in node_mutants(p) {
        emit(here, what, rebuild(q));
    }
    match p {
        Proof::Steps(steps, rest) => {
            for (i, s) in steps.iter().enumerate() {
                let pos = *n;
                *n += 1;
                for (what, t) in step_mutants(s) {
                    let mut st = steps.clone();
                    st[i] = t;
                    emit(pos, what, rebuild(Proof::Steps(st, rest.clone())));
                }
            }
            let steps = steps.clone();
            walk(rest, n, emit, &mut |q| rebuild(Proof::Steps(steps.clone(), Box::new(q))));
        }
        Proof::SplitConj(ps) => {
            for (i, c) in ps.iter().enumerate() {
                let ps = ps.clone();
                walk(c, n, emit, &mut |q| {
                    let mut v = ps.clone();
                    v[i] = q;
                    rebuild(Proof::SplitConj(v))
                });
            }
        }
        Proof::Cases(split, ps) => {
            for (i, c) in ps.iter().enumerate() {
                let ps = ps.clone();
                walk(c, n, emit, &mut |q| {
                    let mut v = ps.clone();
                    v[i] = q;
                    rebuild(Proof::Cases(split.clone(), v))
                });
            }
        }
        Proof::Induct { principle, vars, cases } => {
            for (i, c) in cases.iter().enumerate() {
                let cs = cases.clone();
                walk(c, n, emit, &mut |q| {
                    let mut v = cs.clone();
                    v[i] = q;
                    rebuild(Proof::Induct {
                        principle: principle.clone(),
                        vars: vars.clone(),
                        cases: v,
                    })
                });
            }
        }
        _ => {}
    }
}
