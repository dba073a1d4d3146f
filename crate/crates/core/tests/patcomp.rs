mod common;

use common::exhaust::{brute, MatchGen};
use common::*;
use psv::gen::rng;
use psv::ir::Type;
use psv::patcomp::{check_exhaustive, oracle_equivalence, split_equations, ORACLE_DEPTH};

const TYPES_SRC: &str = "def uses(xs: List[Boolean], n: Nat, ns: List[Nat]): Boolean = true\n";

fn sample_types(p: &psv::ir::CoreProgram) -> Vec<Type> {
    let f = p.find_function("uses").unwrap();
    let ts: Vec<Type> = f.params.iter().map(|(_, t)| t.clone()).collect();
    vec![
        Type::Bool,
        ts[0].clone(),
        ts[1].clone(),
        ts[2].clone(),
        Type::Tuple(vec![ts[1].clone(), Type::Bool]),
        Type::Tuple(vec![ts[0].clone(), ts[1].clone()]),
    ]
}

#[test]
fn random_matches_agree_with_enumeration() {
    let p = program(TYPES_SRC);
    let types = sample_types(&p);
    let mut g = MatchGen::new(&p);
    let mut r = rng(42);
    let (mut complete, mut incomplete) = (0, 0);
    for i in 0..200 {
        let t = &types[i % types.len()];
        let clauses = g.clauses(t, &mut r);
        let c = check_exhaustive(&clauses, t, &p);
        let b = brute(&p, &clauses, t);
        assert_eq!(c.complete, b.complete, "match {i} on {t}: {clauses:?}");
        assert_eq!(c.redundant, b.redundant, "match {i} on {t}: {clauses:?}");
        if b.complete {
            complete += 1;
        } else {
            incomplete += 1;
            assert!(!c.missing.is_empty());
        }
    }
    assert!(complete > 20 && incomplete > 20, "{complete} complete, {incomplete} incomplete");
}

#[test]
fn corpus_equations_match_bodies() {
    for name in CORPUS {
        let p = corpus_program(name);
        for f in p.user_functions() {
            let eqs = split_equations(f, &p);
            let v = oracle_equivalence(&p, f, &eqs, 1000, 3, 10_000);
            assert!(v.agrees(), "{name}/{}: {:?}", f.name, v.disagreement);
        }
    }
    assert_eq!(ORACLE_DEPTH, 5);
}

#[test]
fn size_equations_print_like_the_theory() {
    let p = corpus_program("size");
    let f = p.find_function("size").unwrap();
    let eqs: Vec<String> = split_equations(f, &p).iter().map(|e| unsuffix(&psv::emitter::render_equation(&p, e))).collect();
    assert_eq!(eqs, vec!["size Nil = 0", "size (Cons _ xs) = 1 + size xs"]);
}
