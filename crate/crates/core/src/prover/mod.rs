//! Trace-producing prover: rewriting, case splits, induction and linear
//! arithmetic, with every proof replayed by the kernel checker.

pub mod arith;
pub mod kernel;
pub mod rules;
pub mod search;

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde::Serialize;

use crate::ir::{Expr, Name, Prim, Type};

pub use arith::Certificate;
pub use kernel::{check_trace, Kernel, TraceError};
pub use rules::{register_mapping, MappingFailure, MappingMode, MappingStatus, MappingTheorem, Principle, Rule, RuleSet};
pub use search::{default_induct_vars, prove, prove_lemmas, prove_sequent, Strategy};

/// A hypothesis, possibly quantified and conditional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub vars: Vec<(Name, Type)>,
    pub premises: Vec<Expr>,
    pub concl: Expr,
}

impl Fact {
    pub fn ground(e: Expr) -> Fact {
        Fact {
            vars: Vec::new(),
            premises: Vec::new(),
            concl: e,
        }
    }

    /// Unquantified and unconditional.
    pub fn is_plain(&self) -> bool {
        self.vars.is_empty() && self.premises.is_empty()
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            let vs: Vec<String> = self.vars.iter().map(|(n, _)| n.to_string()).collect();
            write!(f, "forall {}. ", vs.join(" "))?;
        }
        for p in &self.premises {
            write!(f, "{p} ==> ")?;
        }
        write!(f, "{}", self.concl)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub fixed: Vec<(Name, Type)>,
    pub facts: Vec<Fact>,
    pub goal: Expr,
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.facts {
            writeln!(f, "  {h}")?;
        }
        write!(f, "  |- {}", self.goal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Beta,
    ApplyFun,
    Proj,
    If,
    Match,
    Let,
    Arith,
    EqRefl,
    EqCtor,
    Bool,
    NatEq,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Builtin(Builtin),
    Fact(usize),
    Equation(Name, usize),
    Mapping(Name),
    Lemma(Name),
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleId::Builtin(b) => write!(f, "builtin {b:?}"),
            RuleId::Fact(i) => write!(f, "fact {i}"),
            RuleId::Equation(n, i) => write!(f, "{n}.eq{i}"),
            RuleId::Mapping(n) => write!(f, "{n}.mapping"),
            RuleId::Lemma(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Goal,
    Fact(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Rewrite {
        target: Target,
        path: Vec<usize>,
        rule: RuleId,
        result: Expr,
    },
    IntroImp,
    SplitFact(usize),
    DropFact(usize),
    /// Adds the proved postcondition of `fun` at a call in the sequent.
    UsePost { fun: Name, args: Vec<Expr> },
    /// Adds an instance of a quantified fact.
    Instantiate { fact: usize, terms: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Split {
    Bool(Expr),
    Ctor(Expr),
    Int(Expr, Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proof {
    /// Unfinished leaf; never valid in a checked trace.
    Open,
    Steps(Vec<Step>, Box<Proof>),
    CloseTrue,
    CloseFalse(usize),
    Linarith(Vec<Certificate>),
    SplitConj(Vec<Proof>),
    Cases(Split, Vec<Proof>),
    Induct {
        principle: String,
        vars: Vec<Name>,
        cases: Vec<Proof>,
    },
}

impl Proof {
    pub fn steps(steps: Vec<Step>, then: Proof) -> Proof {
        if steps.is_empty() {
            then
        } else {
            match then {
                Proof::Steps(mut more, rest) => {
                    let mut all = steps;
                    all.append(&mut more);
                    Proof::Steps(all, rest)
                }
                other => Proof::Steps(steps, Box::new(other)),
            }
        }
    }

    pub fn count_open(&self) -> usize {
        match self {
            Proof::Open => 1,
            Proof::Steps(_, p) => p.count_open(),
            Proof::SplitConj(ps) | Proof::Cases(_, ps) | Proof::Induct { cases: ps, .. } => ps.iter().map(|p| p.count_open()).sum(),
            _ => 0,
        }
    }

    /// Number of recorded steps, counting each node and each rewrite.
    pub fn size(&self) -> usize {
        match self {
            Proof::Steps(s, p) => s.len() + p.size(),
            Proof::SplitConj(ps) | Proof::Cases(_, ps) | Proof::Induct { cases: ps, .. } => 1 + ps.iter().map(|p| p.size()).sum::<usize>(),
            _ => 1,
        }
    }

    /// Replaces open leaves, left to right, by the given proofs.
    pub fn fill(self, fills: &mut impl Iterator<Item = Proof>) -> Proof {
        match self {
            Proof::Open => fills.next().unwrap_or(Proof::Open),
            Proof::Steps(s, p) => Proof::steps(s, p.fill(fills)),
            Proof::SplitConj(ps) => Proof::SplitConj(ps.into_iter().map(|p| p.fill(fills)).collect()),
            Proof::Cases(s, ps) => Proof::Cases(s, ps.into_iter().map(|p| p.fill(fills)).collect()),
            Proof::Induct { principle, vars, cases } => Proof::Induct {
                principle,
                vars,
                cases: cases.into_iter().map(|p| p.fill(fills)).collect(),
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    NoProgress,
    Timeout,
    Termination,
    HintFailed,
    Cancelled,
}

impl UnknownReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnknownReason::NoProgress => "no-progress",
            UnknownReason::Timeout => "timeout",
            UnknownReason::Termination => "termination",
            UnknownReason::HintFailed => "hint-failed",
            UnknownReason::Cancelled => "cancelled",
        }
    }
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofResult {
    Proved(Proof),
    Unknown { reason: UnknownReason, residual: Vec<Sequent> },
}

impl ProofResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofResult::Proved(_))
    }
}

pub const DEFAULT_TIMEOUT_MS: u64 = 5_000;
pub const DEFAULT_MAX_STEPS: u64 = 20_000;
pub const DEFAULT_INDUCT_DEPTH: u32 = 2;

#[derive(Debug, Clone)]
pub struct Limits {
    pub timeout: Duration,
    pub max_steps: u64,
    pub induct_depth: u32,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            timeout: Duration::from_millis(DEFAULT_TIMEOUT_MS),
            max_steps: DEFAULT_MAX_STEPS,
            induct_depth: DEFAULT_INDUCT_DEPTH,
            cancel: None,
        }
    }
}

/// Per-call consumption of the limits.
#[derive(Debug)]
pub struct Budget {
    pub steps_left: u64,
    pub deadline: Instant,
    pub cancel: Option<Arc<AtomicBool>>,
    pub exhausted: Option<UnknownReason>,
}

impl Budget {
    pub fn new(l: &Limits) -> Self {
        Budget {
            steps_left: l.max_steps,
            deadline: Instant::now() + l.timeout,
            cancel: l.cancel.clone(),
            exhausted: None,
        }
    }

    /// Consumes one step; false once any limit is hit.
    pub fn tick(&mut self) -> bool {
        if self.exhausted.is_some() {
            return false;
        }
        if self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            self.exhausted = Some(UnknownReason::Cancelled);
            return false;
        }
        if self.steps_left == 0 {
            self.exhausted = Some(UnknownReason::Timeout);
            return false;
        }
        self.steps_left -= 1;
        if self.steps_left % 64 == 0 && Instant::now() >= self.deadline {
            self.exhausted = Some(UnknownReason::Timeout);
            return false;
        }
        true
    }

    pub fn ok(&self) -> bool {
        self.exhausted.is_none()
    }
}

pub(crate) fn is_prim(e: &Expr, p: Prim) -> bool {
    matches!(e, Expr::Prim(q, _) if *q == p)
}
