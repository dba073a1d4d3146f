mod common;

use common::trace::mutants;
use common::*;
use psv::prover::{check_trace, ProofResult, Sequent};

#[test]
fn proved_corpus_traces_replay() {
    for name in CORPUS {
        let p = corpus_program(name);
        let (a, v) = run(&p);
        for o in &v.per_vc {
            if let ProofResult::Proved(proof) = &o.result {
                check_trace(&p, &a.rules, &Sequent::from_vc(&o.vc), proof).unwrap_or_else(|e| panic!("{}: {e}", o.vc.id));
            }
        }
    }
}

#[test]
fn every_single_corruption_is_detected() {
    let mut total = 0;
    for name in CORPUS {
        let p = corpus_program(name);
        let (a, v) = run(&p);
        for o in &v.per_vc {
            let ProofResult::Proved(proof) = &o.result else { continue };
            let root = Sequent::from_vc(&o.vc);
            for (pos, m) in mutants(proof) {
                total += 1;
                let r = check_trace(&p, &a.rules, &root, &m.proof);
                assert!(r.is_err(), "{}: {} at {pos} accepted", o.vc.id, m.what);
            }
        }
    }
    assert!(total > 100, "{total}");
}
