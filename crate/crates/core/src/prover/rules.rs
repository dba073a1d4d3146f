//! Rewrite rules, induction principles and library mappings available to a run.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ir::typeck::Unifier;
use crate::ir::{alpha_eq, CoreProgram, Expr, FunDef, Name, Pattern, Type};
use crate::patcomp::{check_exhaustive, Equation, SplitResult};
use crate::surface::ast::Origin;
use crate::termination::{Entry, MeasureKind, TerminationCert};

use super::arith::NatSig;
use super::search::{prove_sequent, Strategy};
use super::{Fact, Limits, Proof, ProofResult, RuleId, Sequent};
use crate::ir::Prim;

/// An oriented, possibly conditional equation over pattern variables `vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub vars: Vec<Name>,
    pub premises: Vec<Expr>,
    pub lhs: Expr,
    pub rhs: Expr,
}

fn contains_subterm(e: &Expr, sub: &Expr) -> bool {
    alpha_eq(e, sub) || e.children().into_iter().any(|c| contains_subterm(c, sub))
}

impl Rule {
    /// Orients `concl` as a rule; equalities left to right, with a flip
    /// towards constructor values when `flip` is set.
    pub fn orient(id: RuleId, vars: Vec<Name>, premises: Vec<Expr>, concl: &Expr, flip: bool) -> Option<Rule> {
        let usable = |l: &Expr, r: &Expr| {
            let fv = l.free_vars();
            !matches!(l, Expr::Var(v) if vars.contains(v))
                && !matches!(l, Expr::Bool(_))
                && vars.iter().all(|v| fv.contains(v))
                && !contains_subterm(r, l)
        };
        let mk = |lhs: &Expr, rhs: Expr| Rule {
            id: id.clone(),
            vars: vars.clone(),
            premises: premises.clone(),
            lhs: lhs.clone(),
            rhs,
        };
        match concl {
            Expr::Bool(_) => None,
            Expr::Prim(Prim::Eq, a) if a.len() == 2 => {
                let (l, r) = (&a[0], &a[1]);
                let swap = flip && l.is_value_shape() && !r.is_value_shape();
                let (first, second) = if swap { ((r, l), (l, r)) } else { ((l, r), (r, l)) };
                if usable(first.0, first.1) {
                    Some(mk(first.0, first.1.clone()))
                } else if flip && usable(second.0, second.1) {
                    Some(mk(second.0, second.1.clone()))
                } else {
                    None
                }
            }
            Expr::Prim(Prim::Not, a) if usable(&a[0], &Expr::Bool(false)) => Some(mk(&a[0], Expr::Bool(false))),
            Expr::Prim(Prim::Not, _) => None,
            p if usable(p, &Expr::Bool(true)) => Some(mk(p, Expr::Bool(true))),
            _ => None,
        }
    }

    /// Lhs and rhs coincide up to renaming of the pattern variables.
    pub fn is_permutative(&self) -> bool {
        fn shape(a: &Expr, b: &Expr, vars: &[Name], m: &mut HashMap<Name, Name>) -> bool {
            match (a, b) {
                (Expr::Var(x), Expr::Var(y)) if vars.contains(x) && vars.contains(y) => {
                    m.entry(x.clone()).or_insert_with(|| y.clone()) == y
                }
                _ => {
                    let (ca, cb) = (a.children(), b.children());
                    std::mem::discriminant(a) == std::mem::discriminant(b)
                        && ca.len() == cb.len()
                        && head_eq(a, b)
                        && ca.iter().zip(cb).all(|(x, y)| shape(x, y, vars, m))
                }
            }
        }
        shape(&self.lhs, &self.rhs, &self.vars, &mut HashMap::new())
    }
}

/// Equality of the node labels, ignoring children.
pub(crate) fn head_eq(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) | (Expr::Fun(x), Expr::Fun(y)) => x == y,
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Bool(x), Expr::Bool(y)) => x == y,
        (Expr::Ctor(c, xs), Expr::Ctor(d, ys)) | (Expr::Call(c, xs), Expr::Call(d, ys)) => c == d && xs.len() == ys.len(),
        (Expr::Prim(p, xs), Expr::Prim(q, ys)) => p == q && xs.len() == ys.len(),
        (Expr::Proj(_, i), Expr::Proj(_, j)) => i == j,
        (Expr::Tuple(xs), Expr::Tuple(ys)) => xs.len() == ys.len(),
        (Expr::Apply(_, xs), Expr::Apply(_, ys)) => xs.len() == ys.len(),
        (Expr::If(..), Expr::If(..)) => true,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionHyp {
    pub conds: Vec<Expr>,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipleCase {
    /// Wildcard-free patterns, one per induction variable.
    pub pats: Vec<Pattern>,
    pub ihs: Vec<InductionHyp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Principle {
    pub name: String,
    pub params: Vec<Type>,
    pub cases: Vec<PrincipleCase>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunRules {
    pub equations: Vec<Equation>,
    pub recursive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingMode {
    Prove,
    Assume,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingStatus {
    Proved(Proof),
    Axiom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTheorem {
    pub user: Name,
    pub library: Name,
    pub status: MappingStatus,
}

impl MappingTheorem {
    pub fn id(&self) -> String {
        format!("{}.mapping", self.user.base)
    }

    pub fn rule(&self, program: &CoreProgram) -> Option<Rule> {
        let f = program.fun(&self.user)?;
        let vars: Vec<Name> = f.params.iter().map(|(n, _)| n.clone()).collect();
        let args: Vec<Expr> = vars.iter().cloned().map(Expr::Var).collect();
        Some(Rule {
            id: RuleId::Mapping(self.user.clone()),
            vars,
            premises: Vec::new(),
            lhs: Expr::Call(self.user.clone(), args.clone()),
            rhs: Expr::Call(self.library.clone(), args),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot map {user} to {library}: {message}")]
pub struct MappingFailure {
    pub user: Name,
    pub library: Name,
    pub message: String,
    pub residual: Vec<Sequent>,
}

/// Everything the prover may use, as an immutable snapshot per proof.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    pub functions: BTreeMap<Name, FunRules>,
    pub lemmas: Vec<Rule>,
    pub mappings: Vec<MappingTheorem>,
    pub principles: BTreeMap<String, Principle>,
    pub nats: Vec<NatSig>,
    pub proven_posts: BTreeSet<Name>,
    pub uncertified: BTreeSet<Name>,
    /// Parameter positions measured structurally by the termination certificate.
    pub induct_params: BTreeMap<Name, Vec<usize>>,
    mapping_rules: Vec<Rule>,
    lemma_heads: HashMap<Name, Vec<usize>>,
    lemma_other: Vec<usize>,
}

pub const LIST_INDUCT2: &str = "list_induct2";

impl RuleSet {
    /// Structural principles for every datatype and the Peano signatures.
    pub fn new(program: &CoreProgram) -> RuleSet {
        let mut rs = RuleSet::default();
        for d in &program.datatypes {
            let cases = d
                .ctors
                .iter()
                .map(|c| {
                    let binders: Vec<Name> = (0..c.fields.len())
                        .map(|i| Name::new(&c.fields[i].0, 0, crate::surface::NameKind::Variable))
                        .collect();
                    let ihs = c
                        .fields
                        .iter()
                        .zip(&binders)
                        .filter(|((_, t), _)| t.datatype() == Some(&d.name))
                        .map(|(_, b)| InductionHyp {
                            conds: Vec::new(),
                            args: vec![Expr::Var(b.clone())],
                        })
                        .collect();
                    PrincipleCase {
                        pats: vec![Pattern::Ctor(c.name.clone(), binders.into_iter().map(Pattern::Var).collect())],
                        ihs,
                    }
                })
                .collect();
            rs.principles.insert(
                structural_name(&d.name),
                Principle {
                    name: structural_name(&d.name),
                    params: vec![d.self_type()],
                    cases,
                    origin: d.origin,
                },
            );
            if d.typarams.is_empty() && d.ctors.len() == 2 {
                let nullary = d.ctors.iter().find(|c| c.fields.is_empty());
                let unary = d
                    .ctors
                    .iter()
                    .find(|c| c.fields.len() == 1 && c.fields[0].1 == Type::Data(d.name.clone(), Vec::new()));
                if let (Some(z), Some(s)) = (nullary, unary) {
                    rs.nats.push(NatSig {
                        datatype: d.name.clone(),
                        zero: z.name.clone(),
                        succ: s.name.clone(),
                        plus: None,
                        times: None,
                    });
                }
            }
        }
        rs
    }

    pub fn principle(&self, name: &str) -> Option<&Principle> {
        self.principles.get(name)
    }

    /// Looks a principle up by the name written in a hint: the exact name,
    /// or `List.induct` for `List'0.induct` when only one datatype matches.
    pub fn principle_named(&self, written: &str) -> Option<&Principle> {
        if let Some(p) = self.principles.get(written) {
            return Some(p);
        }
        let unsuffixed = |n: &str| -> String {
            let (head, tail) = n.split_once('.').unwrap_or((n, ""));
            let base = head.split_once('\'').map_or(head, |(b, _)| b);
            if tail.is_empty() {
                base.to_string()
            } else {
                format!("{base}.{tail}")
            }
        };
        let mut hits = self.principles.values().filter(|p| unsuffixed(&p.name) == written);
        match (hits.next(), hits.next()) {
            (Some(p), None) => Some(p),
            _ => None,
        }
    }

    pub fn structural_for(&self, t: &Type) -> Option<&Principle> {
        self.principles.get(&structural_name(t.datatype()?))
    }

    pub fn equations(&self, f: &Name) -> Option<&FunRules> {
        self.functions.get(f)
    }

    pub fn lemma(&self, n: &Name) -> Option<&Rule> {
        self.lemmas.iter().find(|r| r.id == RuleId::Lemma(n.clone()))
    }

    pub fn mapping_rule(&self, f: &Name) -> Option<&Rule> {
        self.mapping_rules.iter().find(|r| r.id == RuleId::Mapping(f.clone()))
    }

    /// Lemma rules whose lhs may match a term with head `head`.
    pub fn lemmas_for(&self, head: Option<&Name>) -> impl Iterator<Item = &Rule> {
        let by_head = head.and_then(|h| self.lemma_heads.get(h)).map(|v| v.as_slice()).unwrap_or(&[]);
        let mut idx: Vec<usize> = by_head.iter().chain(self.lemma_other.iter()).copied().collect();
        idx.sort_unstable();
        idx.into_iter().map(move |i| &self.lemmas[i])
    }

    pub fn nat_for(&self, e: &Expr) -> Option<&NatSig> {
        self.nats.iter().find(|s| s.is_nat_head(e))
    }

    pub fn add_lemma(&mut self, rule: Rule) {
        let i = self.lemmas.len();
        match &rule.lhs {
            Expr::Call(f, _) => self.lemma_heads.entry(f.clone()).or_default().push(i),
            _ => self.lemma_other.push(i),
        }
        self.lemmas.push(rule);
    }

    pub fn add_mapping(&mut self, program: &CoreProgram, m: MappingTheorem) {
        if let Some(r) = m.rule(program) {
            self.mapping_rules.push(r);
        }
        self.mappings.push(m);
    }

    pub fn mark_uncertified(&mut self, f: &Name) {
        self.uncertified.insert(f.clone());
    }

    /// Registers the equations of a function whose component terminated,
    /// with its functional induction principle when one is valid.
    pub fn add_function(&mut self, program: &CoreProgram, f: &FunDef, split: &SplitResult, recursive: bool, cert: &TerminationCert) {
        self.functions.insert(
            f.name.clone(),
            FunRules {
                equations: split.equations.clone(),
                recursive,
            },
        );
        for sig in &mut self.nats {
            match nat_role(sig, f, &split.equations) {
                Some(NatRole::Plus) if sig.plus.is_none() => sig.plus = Some(f.name.clone()),
                Some(NatRole::Times) if sig.times.is_none() => sig.times = Some(f.name.clone()),
                _ => {}
            }
        }
        if !recursive {
            return;
        }
        let mut params = Vec::new();
        for c in cert.measure_columns() {
            if c.kind == MeasureKind::Size {
                if let Some(i) = c.position_of(&f.name) {
                    if !params.contains(&i) {
                        params.push(i);
                    }
                }
            }
        }
        self.induct_params.insert(f.name.clone(), params);
        if split.order_sensitive || !equations_exhaustive(program, f, &split.equations) {
            return;
        }
        let p = functional_principle(f, &split.equations);
        let name = p.name.clone();
        let replace = match self.principles.get(&name) {
            Some(old) => old.origin == Origin::Base && f.origin == Origin::User,
            None => true,
        };
        if replace {
            self.principles.insert(name, p.clone());
        }
        if lockstep(f, cert) {
            let replace = match self.principles.get(LIST_INDUCT2) {
                Some(old) => old.origin == Origin::User && f.origin == Origin::Base,
                None => true,
            };
            if replace {
                let mut q = p;
                q.name = LIST_INDUCT2.to_string();
                self.principles.insert(LIST_INDUCT2.to_string(), q);
            }
        }
    }
}

pub fn structural_name(d: &Name) -> String {
    format!("{}.induct", d.internal())
}

fn equations_exhaustive(program: &CoreProgram, f: &FunDef, eqs: &[Equation]) -> bool {
    if f.params.len() == 1 {
        let pats: Vec<Pattern> = eqs.iter().map(|e| e.lhs[0].clone()).collect();
        check_exhaustive(&pats, &f.params[0].1, program).complete
    } else {
        let pats: Vec<Pattern> = eqs.iter().map(|e| Pattern::Tuple(e.lhs.clone())).collect();
        let t = Type::Tuple(f.params.iter().map(|(_, t)| t.clone()).collect());
        check_exhaustive(&pats, &t, program).complete
    }
}

fn fill_wild(p: &Pattern, n: &mut usize) -> Pattern {
    match p {
        Pattern::Wild => {
            *n += 1;
            Pattern::Var(Name::new("uu", *n as u32 - 1, crate::surface::NameKind::Variable))
        }
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| fill_wild(q, n)).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| fill_wild(q, n)).collect()),
        _ => p.clone(),
    }
}

/// Self-calls of `f` reachable without entering a binder, with the
/// if-conditions on the path.
fn self_calls(f: &Name, e: &Expr, conds: &mut Vec<Expr>, bound: &mut Vec<Name>, out: &mut Vec<InductionHyp>) {
    let clean = |x: &Expr, bound: &[Name]| x.free_vars().iter().all(|v| !bound.contains(v));
    match e {
        Expr::Call(g, args) => {
            for a in args {
                self_calls(f, a, conds, bound, out);
            }
            if g == f && args.iter().all(|a| clean(a, bound)) && conds.iter().all(|c| clean(c, bound)) {
                out.push(InductionHyp {
                    conds: conds.clone(),
                    args: args.clone(),
                });
            }
        }
        Expr::If(c, t, el) => {
            self_calls(f, c, conds, bound, out);
            conds.push((**c).clone());
            self_calls(f, t, conds, bound, out);
            conds.pop();
            conds.push(Expr::not((**c).clone()));
            self_calls(f, el, conds, bound, out);
            conds.pop();
        }
        _ => {
            for (i, c) in e.children().into_iter().enumerate() {
                let b = e.binders_for_child(i);
                let n = bound.len();
                bound.extend(b);
                self_calls(f, c, conds, bound, out);
                bound.truncate(n);
            }
        }
    }
}

fn functional_principle(f: &FunDef, eqs: &[Equation]) -> Principle {
    let mut cases = Vec::new();
    for eq in eqs {
        let mut n = 0;
        let pats: Vec<Pattern> = eq.lhs.iter().map(|p| fill_wild(p, &mut n)).collect();
        let mut ihs = Vec::new();
        self_calls(&f.name, &eq.rhs, &mut Vec::new(), &mut Vec::new(), &mut ihs);
        // a precondition may have justified the decrease
        if let Some(pre) = &f.pre {
            let b: HashMap<Name, Expr> = f
                .params
                .iter()
                .zip(&pats)
                .filter_map(|((x, _), p)| Some((x.clone(), p.to_expr()?)))
                .collect();
            let pre = crate::ir::substitute(pre, &b);
            for ih in &mut ihs {
                ih.conds.insert(0, pre.clone());
            }
        }
        cases.push(PrincipleCase { pats, ihs });
    }
    Principle {
        name: format!("{}.induct", f.name.base),
        params: f.params.iter().map(|(_, t)| t.clone()).collect(),
        cases,
        origin: f.origin,
    }
}

/// Two parameters of one datatype, both strictly smaller at every self-call.
fn lockstep(f: &FunDef, cert: &TerminationCert) -> bool {
    if f.params.len() != 2 || cert.component.len() != 1 {
        return false;
    }
    let (d0, d1) = (f.params[0].1.datatype(), f.params[1].1.datatype());
    if d0.is_none() || d0 != d1 {
        return false;
    }
    let m = &cert.matrix;
    let col = |i: usize| {
        m.columns
            .iter()
            .position(|c| c.kind == MeasureKind::Size && c.position_of(&f.name) == Some(i))
    };
    let (Some(c0), Some(c1)) = (col(0), col(1)) else {
        return false;
    };
    !m.rows.is_empty() && (0..m.rows.len()).all(|r| m.entries[r][c0] == Entry::Strict && m.entries[r][c1] == Entry::Strict)
}

enum NatRole {
    Plus,
    Times,
}

fn nat_role(sig: &NatSig, f: &FunDef, eqs: &[Equation]) -> Option<NatRole> {
    let nat = Type::Data(sig.datatype.clone(), Vec::new());
    if f.params.len() != 2 || f.params.iter().any(|(_, t)| *t != nat) || f.ret != nat || eqs.len() != 2 {
        return None;
    }
    let zero_eq = eqs.iter().find(|e| matches!(&e.lhs[0], Pattern::Ctor(c, _) if *c == sig.zero))?;
    let succ_eq = eqs.iter().find(|e| matches!(&e.lhs[0], Pattern::Ctor(c, _) if *c == sig.succ))?;
    let Pattern::Var(n0) = &zero_eq.lhs[1] else {
        return None;
    };
    let (Pattern::Ctor(_, sp), Pattern::Var(n1)) = (&succ_eq.lhs[0], &succ_eq.lhs[1]) else {
        return None;
    };
    let [Pattern::Var(p)] = sp.as_slice() else {
        return None;
    };
    let rec = Expr::Call(f.name.clone(), vec![Expr::Var(p.clone()), Expr::Var(n1.clone())]);
    if zero_eq.rhs == Expr::Var(n0.clone()) && succ_eq.rhs == Expr::Ctor(sig.succ.clone(), vec![rec.clone()]) {
        return Some(NatRole::Plus);
    }
    let plus = sig.plus.as_ref()?;
    if zero_eq.rhs == Expr::Ctor(sig.zero.clone(), Vec::new())
        && succ_eq.rhs == Expr::Call(plus.clone(), vec![Expr::Var(n1.clone()), rec])
    {
        return Some(NatRole::Times);
    }
    None
}

fn types_unify(a: &FunDef, b: &FunDef) -> bool {
    let mut u = Unifier::default();
    let ma = u.instantiate(&a.typarams);
    let mb = u.instantiate(&b.typarams);
    u.unify(&a.fun_type().subst(&ma), &b.fun_type().subst(&mb)).is_ok()
}

/// Proves or assumes `user(args) == library(args)` and registers it as a rule.
pub fn register_mapping(
    program: &CoreProgram,
    rules: &mut RuleSet,
    user: &FunDef,
    library: &Name,
    mode: MappingMode,
    limits: &Limits,
) -> Result<MappingTheorem, MappingFailure> {
    let fail = |message: String, residual| MappingFailure {
        user: user.name.clone(),
        library: library.clone(),
        message,
        residual,
    };
    let lib = program
        .fun(library)
        .filter(|l| l.origin == Origin::Base)
        .ok_or_else(|| fail(format!("{library} is not a base library function"), Vec::new()))?;
    if !types_unify(user, lib) {
        return Err(fail(format!("type {} does not unify with {}", user.fun_type(), lib.fun_type()), Vec::new()));
    }
    let status = match mode {
        MappingMode::Assume => MappingStatus::Axiom,
        MappingMode::Prove => {
            let args: Vec<Expr> = user.params.iter().map(|(n, _)| Expr::Var(n.clone())).collect();
            let seq = Sequent {
                fixed: user.params.clone(),
                facts: user.pre.iter().cloned().map(Fact::ground).collect(),
                goal: Expr::eq(Expr::Call(user.name.clone(), args.clone()), Expr::Call(library.clone(), args)),
            };
            let on: Vec<Name> = user
                .params
                .iter()
                .filter(|(_, t)| t.datatype().is_some())
                .map(|(n, _)| n.clone())
                .take(1)
                .collect();
            match prove_sequent(program, rules, &seq, &Strategy::Default { induct_on: on }, limits) {
                ProofResult::Proved(p) => MappingStatus::Proved(p),
                ProofResult::Unknown { reason, residual } => {
                    return Err(fail(format!("equivalence not proved ({reason})"), residual));
                }
            }
        }
    };
    let m = MappingTheorem {
        user: user.name.clone(),
        library: library.clone(),
        status,
    };
    rules.add_mapping(program, m.clone());
    Ok(m)
}
