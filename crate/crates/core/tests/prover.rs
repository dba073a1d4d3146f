mod common;

use common::*;
use num_bigint::BigInt;
use psv::gen::{instantiate, rng};
use psv::ir::eval::{eval, eval_expr, Value};
use psv::ir::{CoreProgram, Expr, Type};
use psv::prover::kernel::Kernel;
use psv::prover::rules::structural_name;
use psv::prover::{
    check_trace, prove, prove_sequent, register_mapping, Builtin, Limits, MappingMode, MappingStatus, Proof, ProofResult, RuleId,
    Sequent, Step, Strategy, UnknownReason,
};
use psv::session::{analyze, Options};
use psv::vcgen::{HintStep, Vc, VcKind};

fn vc<'a>(vcs: &'a [Vc], id: &str) -> &'a Vc {
    vcs.iter().find(|v| v.id == id).unwrap_or_else(|| {
        let ids: Vec<&str> = vcs.iter().map(|v| v.id.as_str()).collect();
        panic!("no vc {id} in {ids:?}")
    })
}

fn find_rewrites(p: &Proof, out: &mut Vec<RuleId>) {
    match p {
        Proof::Steps(steps, rest) => {
            for s in steps {
                if let Step::Rewrite { rule, .. } = s {
                    out.push(rule.clone());
                }
            }
            find_rewrites(rest, out);
        }
        Proof::SplitConj(ps) | Proof::Cases(_, ps) | Proof::Induct { cases: ps, .. } => ps.iter().for_each(|q| find_rewrites(q, out)),
        _ => {}
    }
}

fn has_induct(p: &Proof) -> bool {
    match p {
        Proof::Induct { .. } => true,
        Proof::Steps(_, rest) => has_induct(rest),
        Proof::SplitConj(ps) | Proof::Cases(_, ps) => ps.iter().any(has_induct),
        _ => false,
    }
}

fn first_linarith(p: &Proof) -> Option<&Proof> {
    match p {
        Proof::Linarith(_) => Some(p),
        Proof::Steps(_, rest) => first_linarith(rest),
        Proof::SplitConj(ps) | Proof::Cases(_, ps) | Proof::Induct { cases: ps, .. } => ps.iter().find_map(first_linarith),
        _ => None,
    }
}

fn hint(steps: Vec<HintStep>) -> Strategy {
    Strategy::Hint(steps)
}

const SIZE_PLUS: &str = "def size[A](l: List[A]): BigInt = (l match {
  case Nil() => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)

def sizeNil() = (size(Nil[BigInt]()) >= 0).holds

def distinct(x: BigInt, xs: List[BigInt]) = {
  require(Cons(x, xs) == Nil[BigInt]())
  false
}.holds

def shift(s: BigInt) = {
  require(s >= 0)
  1 + s >= 0
}.holds

def selfGreater(x: BigInt) = {
  require(x > x)
  false
}.holds

def square(x: BigInt) = (x * x >= 0).holds
";

#[test]
fn simp_unfolds_size_on_nil() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "sizeNil.holds.0");
    let r = prove_sequent(&p, &rules, &Sequent::from_vc(v), &hint(vec![HintStep::Simp]), &Limits::default());
    let ProofResult::Proved(proof) = r else { panic!("{r:?}") };
    let mut used = Vec::new();
    find_rewrites(&proof, &mut used);
    let size = p.find_function("size").unwrap().name.clone();
    assert_eq!(used.iter().filter(|r| **r == RuleId::Equation(size.clone(), 0)).count(), 1);
    assert!(used.contains(&RuleId::Builtin(Builtin::Arith)), "{used:?}");
}

#[test]
fn simp_closes_true() {
    let p = program(SIZE_PLUS);
    let a = analyze(&p);
    let seq = Sequent {
        fixed: vec![],
        facts: vec![],
        goal: Expr::Bool(true),
    };
    let r = prove_sequent(&p, &a.rules, &seq, &hint(vec![HintStep::Simp]), &Limits::default());
    assert_eq!(r, ProofResult::Proved(Proof::CloseTrue));
}

#[test]
fn simp_uses_constructor_distinctness() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "distinct.holds.0");
    let r = prove_sequent(&p, &rules, &Sequent::from_vc(v), &hint(vec![HintStep::Simp]), &Limits::default());
    let ProofResult::Proved(proof) = r else { panic!("{r:?}") };
    let mut used = Vec::new();
    find_rewrites(&proof, &mut used);
    assert!(used.contains(&RuleId::Builtin(Builtin::EqCtor)), "{used:?}");
}

#[test]
fn linarith_combines_hypothesis_and_goal() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "shift.holds.0");
    let r = prove(&p, &rules, v, &Limits::default());
    let ProofResult::Proved(proof) = r else { panic!("{r:?}") };
    let Some(Proof::Linarith(certs)) = first_linarith(&proof) else { panic!("{proof:?}") };
    assert_eq!(certs.len(), 1);
    let coeffs: Vec<BigInt> = certs[0].terms.iter().map(|(_, k)| k.clone()).collect();
    assert_eq!(coeffs, vec![BigInt::from(1), BigInt::from(1)]);
}

#[test]
fn linarith_refutes_self_comparison() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    assert!(prove(&p, &rules, vc(&a.vcs, "selfGreater.holds.0"), &Limits::default()).is_proved());
}

#[test]
fn nonlinear_goal_is_unknown() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let r = prove(&p, &rules, vc(&a.vcs, "square.holds.0"), &Limits::default());
    assert!(matches!(r, ProofResult::Unknown { reason: UnknownReason::NoProgress, .. }), "{r:?}");
}

#[test]
fn structural_induction_on_list() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "size.postcondition.0");
    let seq = Sequent::from_vc(v);
    let xs = v.fixed[0].0.clone();
    let list = p.datatypes.iter().find(|d| &*d.name.base == "List").unwrap();
    let cases = Kernel::new(&p, &rules).induct(&seq, &structural_name(&list.name), &[xs]).unwrap();
    assert_eq!(cases.len(), 2);
    let mut extra: Vec<usize> = cases.iter().map(|c| c.facts.len() - seq.facts.len()).collect();
    extra.sort();
    assert_eq!(extra, vec![0, 1], "only the Cons case carries a hypothesis");
}

#[test]
fn simultaneous_induction_from_zip() {
    let p = corpus_program("hints");
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "mapFstZip.postcondition.0");
    let seq = Sequent::from_vc(v);
    let vars: Vec<_> = v.fixed.iter().take(2).map(|(n, _)| n.clone()).collect();
    let cases = Kernel::new(&p, &rules).induct(&seq, "list_induct2", &vars).unwrap();
    assert!(cases.len() >= 2);
    let with_ih = cases.iter().filter(|c| c.facts.len() > seq.facts.len()).count();
    assert_eq!(with_ih, 1, "only the Cons/Cons case recurses");
}

#[test]
fn induction_on_int_is_rejected() {
    let p = program(SIZE_PLUS);
    let (a, rules) = rules_with_lemmas(&p);
    let v = vc(&a.vcs, "shift.holds.0");
    let s = v.fixed[0].0.clone();
    assert_eq!(v.fixed[0].1, Type::Int);
    let k = Kernel::new(&p, &rules);
    assert!(k.induct(&Sequent::from_vc(v), "no_such_rule", &[s.clone()]).is_err());
    let r = prove_sequent(&p, &rules, &Sequent::from_vc(v), &hint(vec![HintStep::Induct(s), HintStep::Auto]), &Limits::default());
    assert!(matches!(r, ProofResult::Unknown { reason: UnknownReason::HintFailed, .. }), "{r:?}");
}

#[test]
fn size_default_strategy_inducts() {
    let p = corpus_program("size");
    let (a, v) = run(&p);
    let o = v.outcome("size.postcondition.0").unwrap();
    let ProofResult::Proved(proof) = &o.result else { panic!("{:?}", o.result) };
    assert!(has_induct(proof));
    check_trace(&p, &a.rules, &Sequent::from_vc(&o.vc), proof).unwrap();
}

#[test]
fn zip_property_needs_its_hint() {
    let p = corpus_program("hints");
    let (_, v) = run(&p);
    assert!(v.outcome("mapFstZip.postcondition.0").unwrap().result.is_proved());
    let p = program(&strip_hints(&corpus_source("hints")));
    let (_, v) = run(&p);
    assert!(!v.outcome("mapFstZip.postcondition.0").unwrap().result.is_proved());
}

#[test]
fn empty_trace_is_invalid() {
    let p = corpus_program("size");
    let a = analyze(&p);
    let e = check_trace(&p, &a.rules, &Sequent::from_vc(&a.vcs[0]), &Proof::Open).unwrap_err();
    assert_eq!(e.step, 0);
}

/// Pre-order positions of rewrite steps, numbered like the checker numbers nodes.
fn rewrite_positions(p: &Proof, n: &mut usize, out: &mut Vec<usize>) {
    *n += 1;
    match p {
        Proof::Steps(steps, rest) => {
            for s in steps {
                if matches!(s, Step::Rewrite { .. }) {
                    out.push(*n);
                }
                *n += 1;
            }
            rewrite_positions(rest, n, out);
        }
        Proof::SplitConj(ps) | Proof::Cases(_, ps) | Proof::Induct { cases: ps, .. } => {
            ps.iter().for_each(|q| rewrite_positions(q, n, out))
        }
        _ => {}
    }
}

fn swap_rule(r: &RuleId) -> RuleId {
    match r {
        RuleId::Builtin(Builtin::Beta) => RuleId::Builtin(Builtin::Arith),
        RuleId::Builtin(_) => RuleId::Builtin(Builtin::Beta),
        RuleId::Equation(f, i) => RuleId::Equation(f.clone(), i + 1),
        RuleId::Fact(i) => RuleId::Fact(i + 1),
        RuleId::Lemma(_) | RuleId::Mapping(_) => RuleId::Builtin(Builtin::EqRefl),
    }
}

/// Applies `f` to the `k`-th rewrite step in pre-order.
fn mutate_rewrite(p: &Proof, k: &mut usize, f: &dyn Fn(&Step) -> Step) -> Proof {
    match p {
        Proof::Steps(steps, rest) => {
            let steps = steps
                .iter()
                .map(|s| {
                    if matches!(s, Step::Rewrite { .. }) {
                        let hit = *k == 0;
                        *k = k.wrapping_sub(1);
                        if hit {
                            return f(s);
                        }
                    }
                    s.clone()
                })
                .collect();
            Proof::Steps(steps, Box::new(mutate_rewrite(rest, k, f)))
        }
        Proof::SplitConj(ps) => Proof::SplitConj(ps.iter().map(|q| mutate_rewrite(q, k, f)).collect()),
        Proof::Cases(s, ps) => Proof::Cases(s.clone(), ps.iter().map(|q| mutate_rewrite(q, k, f)).collect()),
        Proof::Induct { principle, vars, cases } => Proof::Induct {
            principle: principle.clone(),
            vars: vars.clone(),
            cases: cases.iter().map(|q| mutate_rewrite(q, k, f)).collect(),
        },
        other => other.clone(),
    }
}

#[test]
fn swapped_rule_id_fails_at_that_step() {
    let p = corpus_program("size");
    let (a, v) = run(&p);
    let o = &v.per_vc[0];
    let ProofResult::Proved(proof) = &o.result else { panic!() };
    let root = Sequent::from_vc(&o.vc);
    let mut at = Vec::new();
    rewrite_positions(proof, &mut 0, &mut at);
    assert!(!at.is_empty());
    for (i, pos) in at.iter().enumerate() {
        let mut k = i;
        let bad = mutate_rewrite(proof, &mut k, &|s| match s {
            Step::Rewrite { target, path, rule, result } => Step::Rewrite {
                target: *target,
                path: path.clone(),
                rule: swap_rule(rule),
                result: result.clone(),
            },
            _ => unreachable!(),
        });
        let e = check_trace(&p, &a.rules, &root, &bad).unwrap_err();
        assert_eq!(e.step, *pos, "rewrite {i}: {e}");
    }
}

const MAPPING: &str = "@library(\"map\")
def myMap[A, B](xs: List[A], f: A => B): List[B] = xs match {
  case Nil() => Nil[B]()
  case Cons(x, t) => Cons(f(x), myMap(t, f))
}

def lenMyMap[A, B](xs: List[A], f: A => B) = (length(myMap(xs, f)) == length(xs)).holds
";

#[test]
fn mapping_is_proved_then_used() {
    let p = program(MAPPING);
    let (a, v) = run(&p);
    assert_eq!(v.mappings.len(), 1);
    let MappingStatus::Proved(proof) = &v.mappings[0].status else { panic!("{:?}", v.mappings[0]) };
    assert!(has_induct(proof));
    assert!(v.axioms_assumed.is_empty());
    assert!(v.outcome("lenMyMap.holds.0").unwrap().result.is_proved());
    let mut used = Vec::new();
    if let ProofResult::Proved(pr) = &v.outcome("lenMyMap.holds.0").unwrap().result {
        find_rewrites(pr, &mut used);
    }
    assert!(used.iter().any(|r| matches!(r, RuleId::Mapping(_))), "{used:?}");
    assert!(a.rules.mapping_rule(&p.find_function("myMap").unwrap().name).is_some());
}

#[test]
fn mapping_agrees_with_library_on_samples() {
    let p = program(MAPPING);
    let user = p.find_function("myMap").unwrap();
    let lib = p.find_function("map").unwrap();
    let mut r = rng(7);
    for _ in 0..200 {
        let args = psv::gen::ValueGen::new(&p, 5).args(&user.params.iter().map(|(_, t)| t.clone()).collect::<Vec<_>>(), &mut r);
        let x = eval(&p, &user.name, args.clone(), 10_000);
        let y = eval(&p, &lib.name, args, 10_000);
        assert_eq!(x, y);
    }
}

#[test]
fn assumed_mapping_is_reported() {
    let p = program(MAPPING);
    let opts = Options {
        assume_mappings: true,
        ..Options::default()
    };
    let (_, v) = psv::session::solve(&p, &opts);
    assert_eq!(v.axioms_assumed, vec![v.mappings[0].id()]);
    assert!(matches!(v.mappings[0].status, MappingStatus::Axiom));
}

#[test]
fn swapped_arguments_fail_to_map() {
    let src = MAPPING.replace("myMap[A, B](xs: List[A], f: A => B)", "myMap[A, B](f: A => B, xs: List[A])").replace("myMap(t, f)", "myMap(f, t)").replace("myMap(xs, f)", "myMap(f, xs)");
    let p = program(&src);
    let mut a = analyze(&p);
    let user = p.find_function("myMap").unwrap().clone();
    let lib = p.find_function("map").unwrap().name.clone();
    let r = register_mapping(&p, &mut a.rules, &user, &lib, MappingMode::Prove, &Limits::default());
    assert!(r.is_err());
    let (_, v) = run(&p);
    assert_eq!(v.mapping_failures.len(), 1);
    assert!(v.mappings.is_empty());
}

#[test]
fn missing_nil_case_is_ground_falsified() {
    let src = "def first(xs: List[BigInt]): BigInt = xs match {
  case Cons(x, _) => x
}
";
    let p = program(src);
    let (_, v) = run(&p);
    let o = v.per_vc.iter().find(|o| o.vc.kind == VcKind::Exhaustiveness).unwrap();
    assert!(!o.result.is_proved());
    let xs = o.vc.fixed[0].0.clone();
    let nil = p.datatypes.iter().flat_map(|d| &d.ctors).find(|c| &*c.name.base == "Nil").unwrap();
    let env = [(xs, Value::Ctor(nil.name.clone(), vec![]))].into_iter().collect();
    assert_eq!(eval_expr(&p, &env, &o.vc.goal, 1000).unwrap(), Value::Bool(false));
}

/// Evaluates hypotheses and goal on random instances; returns how many
/// instances satisfied the hypotheses.
fn ground_check(p: &CoreProgram, v: &Vc, samples: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let env = instantiate(p, &v.fixed, 4, &mut r);
        let hyps_hold = v.hypotheses.iter().all(|h| eval_expr(p, &env, h, 10_000) == Ok(Value::Bool(true)));
        if !hyps_hold {
            continue;
        }
        match eval_expr(p, &env, &v.goal, 10_000) {
            Ok(g) => {
                assert_eq!(g, Value::Bool(true), "{} falsified by {env:?}", v.id);
                hits += 1;
            }
            Err(_) => {}
        }
    }
    hits
}

#[test]
fn proved_vcs_hold_on_ground_instances() {
    for name in CORPUS {
        let p = corpus_program(name);
        let (_, v) = run(&p);
        for o in v.per_vc.iter().filter(|o| o.result.is_proved()) {
            ground_check(&p, &o.vc, 500, 11);
        }
    }
}

#[test]
fn hints_are_deterministic() {
    let p = corpus_program("stdlib");
    let (a, rules) = rules_with_lemmas(&p);
    for v in a.vcs.iter().filter(|v| v.hint.is_some()) {
        let x = prove(&p, &rules, v, &Limits::default());
        let y = prove(&p, &rules, v, &Limits::default());
        assert_eq!(x, y, "{}", v.id);
    }
}

#[test]
fn false_claims_stay_unknown() {
    let src = "def len[A](xs: List[A]): BigInt = xs match {
  case Nil() => BigInt(0)
  case Cons(_, t) => 1 + len(t)
}
def wrong1[A](xs: List[A]) = (len(xs) > 0).holds
def wrong2[A](xs: List[A], ys: List[A]) = (append(xs, ys) == append(ys, xs)).holds
def wrong3(n: Nat) = (plus(n, n) == n).holds
def wrong4(xs: List[BigInt]) = (reverse(xs) == xs).holds
def wrong5(x: BigInt, y: BigInt) = {
  require(x <= y)
  x < y
}.holds
";
    let p = program(src);
    let (_, v) = run(&p);
    assert_eq!(v.per_vc.len(), 5);
    assert!(v.per_vc.iter().all(|o| !o.result.is_proved()));
}

#[test]
fn induction_rule_named_as_in_source() {
    let src = "@proof(method = \"(induct rule: List.induct, auto)\")
def appNil[A](xs: List[A]) = (append(xs, Nil[A]()) == xs).holds
";
    let p = program(src);
    let (a, v) = run(&p);
    let o = v.outcome("appNil.holds.0").unwrap();
    let ProofResult::Proved(proof) = &o.result else { panic!("{:?}", o.result) };
    let Proof::Induct { principle, .. } = proof else { panic!("{proof:?}") };
    assert!(principle.starts_with("List'") && principle.ends_with(".induct"), "{principle}");
    check_trace(&p, &a.rules, &Sequent::from_vc(&o.vc), proof).unwrap();
}
