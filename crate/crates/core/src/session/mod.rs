//! The verification pipeline, run reports, the CLI and the daemon.

pub mod cli;
pub mod daemon;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::emitter::{emit_theory, LemmaStatus};
use crate::defgraph::{call_graph, check_positivity, scc_topo, ComponentOrder, PositivityError};
use crate::ir::{elaborate, CoreProgram, IrError, Name};
use crate::patcomp::{oracle_equivalence, split_with, Equation, SplitResult, DEFAULT_SPLIT_LIMIT};
use crate::prover::{
    prove, prove_lemmas, register_mapping, Limits, MappingFailure, MappingMode, MappingStatus, MappingTheorem, ProofResult, RuleSet,
    UnknownReason, DEFAULT_INDUCT_DEPTH, DEFAULT_MAX_STEPS, DEFAULT_TIMEOUT_MS,
};
use crate::surface::ast::Origin;
use crate::surface::{parse_program, resolve_names, SurfaceError};
use crate::termination::{certify_termination, TerminationCert, TerminationFailure};
use crate::vcgen::{generate_vcs, HintError, Vc};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_FUEL: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;
/// Stack for threads that run the pipeline.
pub const STACK_SIZE: usize = 256 << 20;

/// Inputs per function for the body/equation cross-check run by `solve`.
pub const ORACLE_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Surface(#[from] SurfaceError),
    #[error("{0}")]
    Ir(#[from] IrError),
    #[error("{0}")]
    Positivity(#[from] PositivityError),
    #[error("{span}: in proof hint of `{fun}` at offset {}: {}", err.offset, err.message)]
    Hint {
        fun: String,
        span: crate::surface::SourceSpan,
        err: HintError,
    },
}

/// Parses, resolves, elaborates and checks datatype positivity and hints.
pub fn load(file: &str, source: &str) -> Result<CoreProgram, LoadError> {
    let surface = resolve_names(parse_program(file, source)?)?;
    let program = elaborate(&surface)?;
    check_positivity(&program.datatypes)?;
    for f in &program.functions {
        if let Err(err) = generate_vcs(&program, f) {
            return Err(LoadError::Hint {
                fun: f.name.base.to_string(),
                span: f.span.clone(),
                err,
            });
        }
    }
    Ok(program)
}

pub fn source_hash(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct Options {
    pub timeout: Duration,
    pub max_steps: u64,
    pub induct_depth: u32,
    pub assume_mappings: bool,
    pub fuel: u64,
    pub seed: u64,
    /// Restricts proving to these VC ids; the others are left out of the verdict.
    pub vc_ids: Option<BTreeSet<String>>,
    pub cancel: Option<Arc<AtomicBool>>,
    /// Records wall-clock times in reports; off by default so reports are byte-stable.
    pub report_timings: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            timeout: Duration::from_millis(DEFAULT_TIMEOUT_MS),
            max_steps: DEFAULT_MAX_STEPS,
            induct_depth: DEFAULT_INDUCT_DEPTH,
            assume_mappings: false,
            fuel: DEFAULT_FUEL,
            seed: DEFAULT_SEED,
            vc_ids: None,
            cancel: None,
            report_timings: false,
        }
    }
}

impl Options {
    pub fn limits(&self) -> Limits {
        Limits {
            timeout: self.timeout,
            max_steps: self.max_steps,
            induct_depth: self.induct_depth,
            cancel: self.cancel.clone(),
        }
    }
}

/// Everything computed before proving.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub order: ComponentOrder,
    pub splits: BTreeMap<Name, SplitResult>,
    /// One entry per component, in component order.
    pub termination: Vec<Result<TerminationCert, TerminationFailure>>,
    pub rules: RuleSet,
    /// VCs of user functions in component order.
    pub vcs: Vec<Vc>,
}

impl Analysis {
    pub fn equations(&self, f: &Name) -> &[Equation] {
        self.splits.get(f).map(|s| s.equations.as_slice()).unwrap_or(&[])
    }
}

pub fn analyze(program: &CoreProgram) -> Analysis {
    let order = scc_topo(&call_graph(program));
    let mut fresh = program.fresh_names();
    let splits: BTreeMap<Name, SplitResult> = program
        .functions
        .iter()
        .map(|f| (f.name.clone(), split_with(f, program, DEFAULT_SPLIT_LIMIT, &mut fresh)))
        .collect();
    let eqs: HashMap<Name, Vec<Equation>> = splits.iter().map(|(n, s)| (n.clone(), s.equations.clone())).collect();
    let mut rules = RuleSet::new(program);
    let mut termination = Vec::new();
    for c in &order.components {
        let cert = certify_termination(program, c, &eqs);
        for m in &c.members {
            match &cert {
                Ok(cert) => {
                    let f = program.fun(m).expect("component member");
                    rules.add_function(program, f, &splits[m], c.recursive, cert);
                }
                Err(_) => rules.mark_uncertified(m),
            }
        }
        termination.push(cert);
    }
    let mut vcs = Vec::new();
    for c in &order.components {
        for m in &c.members {
            let f = program.fun(m).expect("component member");
            if f.origin == Origin::User {
                vcs.extend(generate_vcs(program, f).unwrap_or_default());
            }
        }
    }
    Analysis {
        order,
        splits,
        termination,
        rules,
        vcs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Unsat,
    Unknown,
}

impl Overall {
    pub fn as_str(self) -> &'static str {
        match self {
            Overall::Unsat => "unsat",
            Overall::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct VcOutcome {
    pub vc: Vc,
    pub result: ProofResult,
    pub millis: u64,
}

impl VcOutcome {
    pub fn verdict(&self) -> &'static str {
        if self.result.is_proved() {
            "proved"
        } else {
            "unknown"
        }
    }

    pub fn reason(&self) -> Option<UnknownReason> {
        match &self.result {
            ProofResult::Proved(_) => None,
            ProofResult::Unknown { reason, .. } => Some(*reason),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverVerdict {
    pub overall: Overall,
    pub per_vc: Vec<VcOutcome>,
    pub axioms_assumed: Vec<String>,
    pub mappings: Vec<MappingTheorem>,
    pub mapping_failures: Vec<MappingFailure>,
    /// Base-library lemmas and whether each was proved.
    pub lemmas: Vec<(Name, bool)>,
    /// Functions whose body and equations disagreed on some sampled input.
    pub oracle_failures: Vec<String>,
    pub timings: BTreeMap<String, u64>,
    /// Processing events in order, for auditing the pipeline order.
    pub phase_log: Vec<String>,
}

impl SolverVerdict {
    pub fn outcome(&self, id: &str) -> Option<&VcOutcome> {
        self.per_vc.iter().find(|o| o.vc.id == id)
    }
}

fn overall_of(per_vc: &[VcOutcome]) -> Overall {
    if per_vc.iter().all(|o| o.result.is_proved()) {
        Overall::Unsat
    } else {
        Overall::Unknown
    }
}

fn millis(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Runs the whole pipeline: ordering, splitting, termination, lemma and
/// mapping registration, then the VCs of each component in order.
pub fn solve(program: &CoreProgram, options: &Options) -> (Analysis, SolverVerdict) {
    let mut timings = BTreeMap::new();
    let mut log = Vec::new();
    let limits = options.limits();
    let t = Instant::now();
    let mut analysis = analyze(program);
    timings.insert("analysis".to_string(), millis(t));

    let t = Instant::now();
    let mut oracle_failures = Vec::new();
    for f in program.functions.iter().filter(|f| f.origin == Origin::User) {
        let eqs = analysis.equations(&f.name);
        if !oracle_equivalence(program, f, eqs, ORACLE_SAMPLES, options.seed, options.fuel).agrees() {
            oracle_failures.push(f.name.internal());
        }
    }
    timings.insert("oracle".to_string(), millis(t));

    let t = Instant::now();
    let lemma_results = prove_lemmas(program, &mut analysis.rules, &limits);
    let lemmas = lemma_results.iter().map(|(n, r)| (n.clone(), r.is_proved())).collect();
    timings.insert("lemmas".to_string(), millis(t));

    let mode = if options.assume_mappings {
        MappingMode::Assume
    } else {
        MappingMode::Prove
    };
    let mut mappings = Vec::new();
    let mut mapping_failures = Vec::new();
    let mut per_vc = Vec::new();
    let mut mapping_ms = 0;
    let mut prove_ms = 0;
    let all_vcs = std::mem::take(&mut analysis.vcs);
    for (ci, c) in analysis.order.components.iter().enumerate() {
        let users: Vec<&Name> = c
            .members
            .iter()
            .filter(|m| program.fun(m).is_some_and(|f| f.origin == Origin::User))
            .collect();
        if users.is_empty() {
            continue;
        }
        let names: Vec<String> = users.iter().map(|n| n.internal()).collect();
        log.push(format!("component {ci}: {}", names.join(", ")));
        for m in &users {
            let f = program.fun(m).expect("user function");
            let Some(lib) = &f.library else {
                continue;
            };
            let t = Instant::now();
            let target = program.functions.iter().find(|g| g.origin == Origin::Base && *g.name.base == **lib);
            let result = match target {
                Some(g) => register_mapping(program, &mut analysis.rules, f, &g.name, mode, &limits),
                None => Err(MappingFailure {
                    user: f.name.clone(),
                    library: Name::new(lib, 0, crate::surface::NameKind::Function),
                    message: format!("no base library function named {lib}"),
                    residual: Vec::new(),
                }),
            };
            match result {
                Ok(m) => {
                    log.push(format!("mapping {}", m.id()));
                    mappings.push(m);
                }
                Err(e) => mapping_failures.push(e),
            }
            mapping_ms += millis(t);
        }
        for m in &users {
            let mut posts_proved = true;
            let mut has_post = false;
            for vc in all_vcs.iter().filter(|v| &&v.fun == m) {
                let selected = options.vc_ids.as_ref().is_none_or(|ids| ids.contains(&vc.id));
                let is_post = vc.kind == crate::vcgen::VcKind::Postcondition;
                has_post |= is_post;
                if !selected {
                    posts_proved &= !is_post;
                    continue;
                }
                let t = Instant::now();
                log.push(format!("prove {}", vc.id));
                let result = prove(program, &analysis.rules, vc, &limits);
                let ms = millis(t);
                prove_ms += ms;
                posts_proved &= !is_post || result.is_proved();
                per_vc.push(VcOutcome {
                    vc: vc.clone(),
                    result,
                    millis: ms,
                });
            }
            if has_post && posts_proved {
                analysis.rules.proven_posts.insert((*m).clone());
            }
        }
    }
    analysis.vcs = all_vcs;
    timings.insert("mappings".to_string(), mapping_ms);
    timings.insert("prove".to_string(), prove_ms);
    let axioms_assumed = mappings
        .iter()
        .filter(|m| matches!(m.status, MappingStatus::Axiom))
        .map(|m| m.id())
        .collect();
    let verdict = SolverVerdict {
        overall: overall_of(&per_vc),
        per_vc,
        axioms_assumed,
        mappings,
        mapping_failures,
        lemmas,
        oracle_failures,
        timings,
        phase_log: log,
    };
    (analysis, verdict)
}

#[derive(Debug, Serialize)]
pub struct VcRecord {
    pub id: String,
    pub kind: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnknownReason>,
    pub millis: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub source_hash: String,
    pub overall: Overall,
    pub vcs: Vec<VcRecord>,
    pub axioms: Vec<String>,
    pub phases: BTreeMap<String, u64>,
}

pub fn report(source: &str, v: &SolverVerdict, timings: bool) -> Report {
    Report {
        tool_version: TOOL_VERSION.to_string(),
        source_hash: source_hash(source),
        overall: v.overall,
        vcs: v
            .per_vc
            .iter()
            .map(|o| VcRecord {
                id: o.vc.id.clone(),
                kind: o.vc.kind.as_str().to_string(),
                verdict: o.verdict().to_string(),
                reason: o.reason(),
                millis: if timings { o.millis } else { 0 },
            })
            .collect(),
        axioms: v.axioms_assumed.clone(),
        phases: v.timings.iter().map(|(k, &ms)| (k.clone(), if timings { ms } else { 0 })).collect(),
    }
}

pub fn report_json(source: &str, v: &SolverVerdict, timings: bool) -> String {
    let mut s = serde_json::to_string_pretty(&report(source, v, timings)).expect("report serializes");
    s.push('\n');
    s
}

/// Human-readable verdict table.
pub fn render_table(v: &SolverVerdict) -> String {
    let w = v.per_vc.iter().map(|o| o.vc.id.len()).max().unwrap_or(2).max(2);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w$}  {:<15}  {:<8}  reason", "vc", "kind", "verdict");
    for o in &v.per_vc {
        let reason = o.reason().map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{:<w$}  {:<15}  {:<8}  {}", o.vc.id, o.vc.kind.as_str(), o.verdict(), reason);
    }
    for a in &v.axioms_assumed {
        let _ = writeln!(out, "assumed axiom: {a}");
    }
    for m in &v.mapping_failures {
        let _ = writeln!(out, "mapping {} -> {} failed: {}", m.user, m.library, m.message);
    }
    let proved = v.per_vc.iter().filter(|o| o.result.is_proved()).count();
    let _ = writeln!(out, "{proved}/{} proved, overall {}", v.per_vc.len(), v.overall.as_str());
    out
}

/// Theory document for a completed run; VCs outside the verdict are unchecked.
pub fn theory(name: &str, program: &CoreProgram, analysis: &Analysis, verdict: &SolverVerdict) -> String {
    let eqs: BTreeMap<Name, Vec<Equation>> = analysis.splits.iter().map(|(n, s)| (n.clone(), s.equations.clone())).collect();
    let lemmas: Vec<(Vc, LemmaStatus)> = analysis
        .vcs
        .iter()
        .map(|vc| {
            let status = match verdict.outcome(&vc.id).map(|o| o.reason()) {
                Some(None) => LemmaStatus::Proved,
                Some(Some(r)) => LemmaStatus::Unknown(r),
                None => LemmaStatus::Unchecked,
            };
            (vc.clone(), status)
        })
        .collect();
    emit_theory(name, program, &analysis.order, &eqs, &lemmas)
}
