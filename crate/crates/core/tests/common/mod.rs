#![allow(dead_code)]

pub mod descent;
pub mod exhaust;
pub mod fuzz;
pub mod rpc;
pub mod trace;

use std::path::PathBuf;

use psv::ir::CoreProgram;
use psv::prover::{prove_lemmas, Limits, RuleSet};
use psv::session::{analyze, load, solve, Analysis, Options, SolverVerdict};

pub const CORPUS: [&str; 4] = ["size", "hints", "stdlib", "termination"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.psc"))
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn program(src: &str) -> CoreProgram {
    load("test.psc", src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

pub fn corpus_program(name: &str) -> CoreProgram {
    load(&format!("{name}.psc"), &corpus_source(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn run(p: &CoreProgram) -> (Analysis, SolverVerdict) {
    solve(p, &Options::default())
}

/// Analysis plus the rule set with proved base lemmas, as used for user VCs.
pub fn rules_with_lemmas(p: &CoreProgram) -> (Analysis, RuleSet) {
    let a = analyze(p);
    let mut rules = a.rules.clone();
    prove_lemmas(p, &mut rules, &Limits::default());
    (a, rules)
}

/// Removes every `@proof(...)` annotation line.
pub fn strip_hints(src: &str) -> String {
    src.lines().filter(|l| !l.trim_start().starts_with("@proof")).map(|l| format!("{l}\n")).collect()
}

/// Drops the numeric suffix of rendered names, `size_0` -> `size`.
pub fn unsuffix(text: &str) -> String {
    let mut out = String::new();
    let cs: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '_' && i + 1 < cs.len() && cs[i + 1].is_ascii_digit() && i > 0 && (cs[i - 1].is_alphanumeric() || cs[i - 1] == '\'') {
            let mut j = i + 1;
            while j < cs.len() && cs[j].is_ascii_digit() {
                j += 1;
            }
            if j == cs.len() || !(cs[j].is_alphanumeric() || cs[j] == '_') {
                i = j;
                continue;
            }
        }
        out.push(cs[i]);
        i += 1;
    }
    out
}
