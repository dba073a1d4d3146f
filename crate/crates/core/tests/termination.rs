mod common;

use common::descent::{certify, components, remove_decrease, sample_descent};
use common::*;
use psv::defgraph::check_positivity;
use psv::ir::Name;
use psv::session::LoadError;
use psv::termination::validate_certificate;

fn recursive_names(p: &psv::ir::CoreProgram) -> Vec<Vec<Name>> {
    components(p).into_iter().filter(|c| c.recursive).map(|c| c.members).collect()
}

#[test]
fn corpus_shapes_are_certified() {
    let p = corpus_program("termination");
    let want = ["size", "map", "append", "zip", "ack", "even", "countdown", "plus", "times"];
    for c in components(&p) {
        let names: Vec<&str> = c.members.iter().map(|m| &*m.base).collect();
        let r = certify(&p, &c);
        if names.iter().any(|n| want.contains(n)) {
            let cert = r.unwrap_or_else(|e| panic!("{names:?}: {}", psv::termination::render_result(&Err(e.clone()))));
            validate_certificate(&cert).unwrap();
        }
    }
}

#[test]
fn even_odd_share_one_component() {
    let p = corpus_program("termination");
    let pair: Vec<String> = recursive_names(&p)
        .into_iter()
        .find(|m| m.len() == 2)
        .unwrap()
        .iter()
        .map(|n| n.base.to_string())
        .collect();
    assert_eq!(pair, vec!["even", "odd"]);
}

#[test]
fn self_loop_is_rejected() {
    let p = corpus_program("loop");
    let c = components(&p).into_iter().find(|c| &*c.members[0].base == "f").unwrap();
    let e = certify(&p, &c).unwrap_err();
    assert_eq!(e.residual.len(), 1);
    let (_, v) = run(&p);
    assert_eq!(v.per_vc[0].reason(), Some(psv::prover::UnknownReason::Termination));
}

#[test]
fn certificates_descend_on_samples() {
    for name in CORPUS {
        let p = corpus_program(name);
        for c in components(&p).iter().filter(|c| c.recursive) {
            let cert = certify(&p, c).unwrap();
            let rep = sample_descent(&p, &cert, 400, 5);
            assert!(rep.violations.is_empty(), "{name} {:?}: {:?}", c.members, rep.violations);
            assert_eq!(rep.exercised, rep.rows, "{name} {:?}: unexercised rows", c.members);
        }
    }
}

#[test]
fn removing_the_decrease_breaks_certification() {
    for name in CORPUS {
        let p = corpus_program(name);
        for c in components(&p).iter().filter(|c| c.recursive) {
            let q = remove_decrease(&p, c);
            assert!(certify(&q, c).is_err(), "{name} {:?} still certified", c.members);
        }
    }
}

#[test]
fn negative_occurrence_is_rejected() {
    let src = corpus_source("bad_positivity");
    match psv::session::load("bad.psc", &src) {
        Err(LoadError::Positivity(e)) => {
            assert_eq!(e.field, "f");
            assert_eq!(e.datatype, "Bad");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn corpus_datatypes_are_positive() {
    for name in CORPUS {
        check_positivity(&corpus_program(name).datatypes).unwrap();
    }
}
