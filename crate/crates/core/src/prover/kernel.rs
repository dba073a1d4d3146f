//! The inference kernel. Every primitive step is recomputed here from the
//! sequent it applies to; `check_trace` replays whole proofs with it.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::ir::typeck::{pattern_env, type_of};
use crate::ir::{alpha_eq, substitute, CoreProgram, Expr, FreshNames, Name, Pattern, Prim, Type};
use crate::vcgen::post_goal;

use super::arith::{check_certificate, literal_constraints, negated_goal, Certificate, Lin, Source};
use super::rules::{head_eq, Rule, RuleSet};
use super::{Builtin, Fact, Proof, RuleId, Sequent, Split, Step, Target};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace step {step}: {message}")]
pub struct TraceError {
    /// Pre-order index of the failing node or step.
    pub step: usize,
    pub message: String,
}

pub const BUILTINS: [Builtin; 11] = [
    Builtin::Beta,
    Builtin::ApplyFun,
    Builtin::Proj,
    Builtin::If,
    Builtin::Match,
    Builtin::Let,
    Builtin::Arith,
    Builtin::EqRefl,
    Builtin::EqCtor,
    Builtin::Bool,
    Builtin::NatEq,
];

pub(crate) enum PatMatch {
    Yes,
    No,
    /// Undecided; carries the subterm that would have to be a constructor.
    Stuck(Expr),
}

fn match_all(ps: &[Pattern], es: &[Expr], out: &mut HashMap<Name, Expr>) -> PatMatch {
    let mut stuck = None;
    for (p, e) in ps.iter().zip(es) {
        match match_pat(p, e, out) {
            PatMatch::No => return PatMatch::No,
            PatMatch::Stuck(s) => {
                stuck.get_or_insert(s);
            }
            PatMatch::Yes => {}
        }
    }
    match stuck {
        Some(s) => PatMatch::Stuck(s),
        None => PatMatch::Yes,
    }
}

pub(crate) fn match_pat(p: &Pattern, e: &Expr, out: &mut HashMap<Name, Expr>) -> PatMatch {
    match p {
        Pattern::Wild => PatMatch::Yes,
        Pattern::Var(v) => {
            out.insert(v.clone(), e.clone());
            PatMatch::Yes
        }
        Pattern::Ctor(c, ps) => match e {
            Expr::Ctor(d, _) if c != d => PatMatch::No,
            Expr::Ctor(_, es) if es.len() == ps.len() => match_all(ps, es, out),
            _ => PatMatch::Stuck(e.clone()),
        },
        Pattern::Tuple(ps) => match e {
            Expr::Tuple(es) if es.len() == ps.len() => match_all(ps, es, out),
            _ => {
                let es: Vec<Expr> = (0..ps.len()).map(|i| Expr::Proj(Box::new(e.clone()), i)).collect();
                match_all(ps, &es, out)
            }
        },
        Pattern::Int(k) => match e {
            Expr::Int(j) if j == k => PatMatch::Yes,
            Expr::Int(_) => PatMatch::No,
            _ => PatMatch::Stuck(e.clone()),
        },
        Pattern::Bool(b) => match e {
            Expr::Bool(c) if c == b => PatMatch::Yes,
            Expr::Bool(_) => PatMatch::No,
            _ => PatMatch::Stuck(e.clone()),
        },
    }
}

fn refutable(p: &Pattern) -> bool {
    match p {
        Pattern::Wild | Pattern::Var(_) => false,
        Pattern::Tuple(ps) => ps.iter().any(refutable),
        _ => true,
    }
}

fn lookup_pair(env: &[(Name, Name)], a: &Name, b: &Name) -> bool {
    for (x, y) in env.iter().rev() {
        if x == a || y == b {
            return x == a && y == b;
        }
    }
    a == b
}

fn match_binders(p: &Pattern, q: &Pattern, env: &mut Vec<(Name, Name)>) -> bool {
    match (p, q) {
        (Pattern::Wild, Pattern::Wild) => true,
        (Pattern::Var(x), Pattern::Var(y)) => {
            env.push((x.clone(), y.clone()));
            true
        }
        (Pattern::Ctor(c, ps), Pattern::Ctor(d, qs)) => {
            c == d && ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| match_binders(p, q, env))
        }
        (Pattern::Tuple(ps), Pattern::Tuple(qs)) => {
            ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| match_binders(p, q, env))
        }
        _ => p == q,
    }
}

/// First-order matching of `p` against `t`, modulo bound-variable names.
pub fn match_expr(p: &Expr, t: &Expr, vars: &[Name], sigma: &mut HashMap<Name, Expr>, env: &mut Vec<(Name, Name)>) -> bool {
    match (p, t) {
        (Expr::Var(v), _) if vars.contains(v) && !env.iter().any(|(a, _)| a == v) => {
            if t.free_vars().iter().any(|x| env.iter().any(|(_, b)| b == x)) {
                return false;
            }
            match sigma.get(v) {
                Some(u) => alpha_eq(u, t),
                None => {
                    sigma.insert(v.clone(), t.clone());
                    true
                }
            }
        }
        (Expr::Var(x), Expr::Var(y)) => lookup_pair(env, x, y),
        (Expr::Lambda(ps, a), Expr::Lambda(qs, b)) => {
            if ps.len() != qs.len() {
                return false;
            }
            let n = env.len();
            env.extend(ps.iter().zip(qs).map(|(p, q)| (p.0.clone(), q.0.clone())));
            let r = match_expr(a, b, vars, sigma, env);
            env.truncate(n);
            r
        }
        (Expr::Let(x, v, a), Expr::Let(y, w, b)) => {
            if !match_expr(v, w, vars, sigma, env) {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = match_expr(a, b, vars, sigma, env);
            env.pop();
            r
        }
        (Expr::Match(s, cs), Expr::Match(u, ds)) => {
            if cs.len() != ds.len() || !match_expr(s, u, vars, sigma, env) {
                return false;
            }
            cs.iter().zip(ds).all(|((p1, a), (p2, b))| {
                let n = env.len();
                let r = match_binders(p1, p2, env) && match_expr(a, b, vars, sigma, env);
                env.truncate(n);
                r
            })
        }
        _ => {
            head_eq(p, t) && {
                let (xs, ys) = (p.children(), t.children());
                xs.len() == ys.len() && xs.into_iter().zip(ys).all(|(a, b)| match_expr(a, b, vars, sigma, env))
            }
        }
    }
}

fn conjuncts(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Prim(Prim::And, a) if a.len() == 2 => {
            conjuncts(&a[0], out);
            conjuncts(&a[1], out);
        }
        _ => out.push(e.clone()),
    }
}

pub(crate) fn goal_conjuncts(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    conjuncts(e, &mut out);
    out
}

fn subterm<'e>(e: &'e Expr, path: &[usize], bound: &mut Vec<Name>) -> Option<&'e Expr> {
    match path.split_first() {
        None => Some(e),
        Some((&i, rest)) => {
            let c = *e.children().get(i)?;
            bound.extend(e.binders_for_child(i));
            subterm(c, rest, bound)
        }
    }
}

fn replace_at(e: &Expr, path: &[usize], new: Expr) -> Option<Expr> {
    let mut out = e.clone();
    let mut cur = &mut out;
    for &i in path {
        cur = cur.children_mut().into_iter().nth(i)?;
    }
    *cur = new;
    Some(out)
}

fn fact_parts(f: &Fact) -> Vec<&Expr> {
    f.premises.iter().chain(std::iter::once(&f.concl)).collect()
}

pub struct Kernel<'a> {
    pub program: &'a CoreProgram,
    pub rules: &'a RuleSet,
    names: FreshNames,
}

impl<'a> Kernel<'a> {
    pub fn new(program: &'a CoreProgram, rules: &'a RuleSet) -> Self {
        Kernel {
            program,
            rules,
            names: program.fresh_names(),
        }
    }

    /// Fresh-name supply determined by the sequent alone.
    pub fn fresh_for(&self, seq: &Sequent) -> FreshNames {
        let mut names = BTreeSet::new();
        for (n, _) in &seq.fixed {
            names.insert(n.clone());
        }
        for f in &seq.facts {
            names.extend(f.vars.iter().map(|(n, _)| n.clone()));
            for p in fact_parts(f) {
                p.all_names(&mut names);
            }
        }
        seq.goal.all_names(&mut names);
        let mut fresh = self.names.clone();
        fresh.observe(names.iter());
        fresh
    }

    pub fn type_env(&self, seq: &Sequent) -> HashMap<Name, Type> {
        seq.fixed.iter().cloned().collect()
    }

    pub fn is_int(&self, env: &HashMap<Name, Type>, e: &Expr) -> bool {
        matches!(type_of(self.program, env, e), Ok(Type::Int))
    }

    pub fn builtin(&self, b: Builtin, e: &Expr) -> Option<Expr> {
        match b {
            Builtin::Beta => match e {
                Expr::Apply(f, args) => match &**f {
                    Expr::Lambda(ps, body) if ps.len() == args.len() => {
                        let m = ps.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
                        Some(substitute(body, &m))
                    }
                    _ => None,
                },
                _ => None,
            },
            Builtin::ApplyFun => match e {
                Expr::Apply(f, args) => match &**f {
                    Expr::Fun(g) => Some(Expr::Call(g.clone(), args.clone())),
                    _ => None,
                },
                _ => None,
            },
            Builtin::Proj => match e {
                Expr::Proj(t, k) => match &**t {
                    Expr::Tuple(es) => es.get(*k).cloned(),
                    _ => None,
                },
                _ => None,
            },
            Builtin::If => match e {
                Expr::If(c, t, f) => match (&**c, &**t, &**f) {
                    (Expr::Bool(true), _, _) => Some((**t).clone()),
                    (Expr::Bool(false), _, _) => Some((**f).clone()),
                    (_, t, f) if alpha_eq(t, f) => Some(t.clone()),
                    (c, Expr::Bool(true), Expr::Bool(false)) => Some(c.clone()),
                    (c, Expr::Bool(false), Expr::Bool(true)) => Some(Expr::not(c.clone())),
                    _ => None,
                },
                _ => None,
            },
            Builtin::Match => match e {
                Expr::Match(s, cs) => {
                    for (p, rhs) in cs {
                        let mut b = HashMap::new();
                        match match_pat(p, s, &mut b) {
                            PatMatch::Yes => return Some(substitute(rhs, &b)),
                            PatMatch::No => continue,
                            PatMatch::Stuck(_) => return None,
                        }
                    }
                    None
                }
                _ => None,
            },
            Builtin::Let => match e {
                Expr::Let(x, v, b) => Some(substitute(b, &HashMap::from([(x.clone(), (**v).clone())]))),
                _ => None,
            },
            Builtin::Arith => arith(e),
            Builtin::EqRefl => match e {
                Expr::Prim(op, a) if a.len() == 2 && alpha_eq(&a[0], &a[1]) => match op {
                    Prim::Eq | Prim::Le | Prim::Ge | Prim::Implies => Some(Expr::Bool(true)),
                    Prim::Ne | Prim::Lt | Prim::Gt => Some(Expr::Bool(false)),
                    _ => None,
                },
                _ => None,
            },
            Builtin::EqCtor => match e {
                Expr::Prim(Prim::Eq, a) if a.len() == 2 => match (&a[0], &a[1]) {
                    (Expr::Ctor(c, _), Expr::Ctor(d, _)) if c != d => Some(Expr::Bool(false)),
                    (Expr::Ctor(_, xs), Expr::Ctor(_, ys)) | (Expr::Tuple(xs), Expr::Tuple(ys)) if xs.len() == ys.len() => {
                        Some(Expr::conj(xs.iter().zip(ys).map(|(x, y)| Expr::eq(x.clone(), y.clone())).collect()))
                    }
                    _ => None,
                },
                _ => None,
            },
            Builtin::Bool => boolean(e),
            Builtin::NatEq => match e {
                Expr::Prim(Prim::Eq, a) if a.len() == 2 => {
                    let sig = self.rules.nat_for(&a[0]).or_else(|| self.rules.nat_for(&a[1]))?;
                    let (p, q) = (sig.normalize(&a[0]), sig.normalize(&a[1]));
                    let constant = |m: &super::arith::Poly| m.keys().all(|k| k.is_empty());
                    if p == q {
                        Some(Expr::Bool(true))
                    } else if constant(&p) && constant(&q) {
                        Some(Expr::Bool(false))
                    } else {
                        None
                    }
                }
                _ => None,
            },
        }
    }

    /// Equation `i` of `f` at `e`, if its patterns match, every earlier
    /// equation is excluded, and unfolding cannot run away.
    pub fn equation(&self, f: &Name, i: usize, e: &Expr) -> Option<Expr> {
        let Expr::Call(g, args) = e else {
            return None;
        };
        if g != f {
            return None;
        }
        let fr = self.rules.equations(f)?;
        let eq = fr.equations.get(i)?;
        if args.len() != eq.lhs.len() {
            return None;
        }
        let mut b = HashMap::new();
        if !matches!(match_all(&eq.lhs, args, &mut b), PatMatch::Yes) {
            return None;
        }
        for earlier in &fr.equations[..i] {
            if !matches!(match_all(&earlier.lhs, args, &mut HashMap::new()), PatMatch::No) {
                return None;
            }
        }
        if fr.recursive && !eq.lhs.iter().any(refutable) && !args.iter().all(|a| a.is_value_shape()) {
            return None;
        }
        Some(substitute(&eq.rhs, &b))
    }

    pub fn fact_rule(&self, seq: &Sequent, i: usize) -> Option<Rule> {
        let f = seq.facts.get(i)?;
        Rule::orient(
            RuleId::Fact(i),
            f.vars.iter().map(|(n, _)| n.clone()).collect(),
            f.premises.clone(),
            &f.concl,
            true,
        )
    }

    /// A premise holds outright or is one of the plain facts.
    pub fn discharged(&self, seq: &Sequent, p: &Expr) -> bool {
        goal_conjuncts(p).iter().all(|c| {
            matches!(c, Expr::Bool(true)) || seq.facts.iter().any(|f| f.is_plain() && alpha_eq(&f.concl, c))
        })
    }

    pub fn apply_rule(&self, seq: &Sequent, rule: &Rule, e: &Expr, bound: &[Name]) -> Option<Expr> {
        let mut sigma = HashMap::new();
        if !match_expr(&rule.lhs, e, &rule.vars, &mut sigma, &mut Vec::new()) {
            return None;
        }
        if rule.vars.iter().any(|v| !sigma.contains_key(v)) {
            return None;
        }
        let shadowed = |x: &Expr| x.free_vars().iter().any(|v| !rule.vars.contains(v) && bound.contains(v));
        if shadowed(&rule.lhs) || shadowed(&rule.rhs) {
            return None;
        }
        for p in &rule.premises {
            let q = substitute(p, &sigma);
            if q.free_vars().iter().any(|v| bound.contains(v)) || !self.discharged(seq, &q) {
                return None;
            }
        }
        Some(substitute(&rule.rhs, &sigma))
    }

    pub fn rule_for(&self, seq: &Sequent, id: &RuleId) -> Option<Rule> {
        match id {
            RuleId::Fact(i) => self.fact_rule(seq, *i),
            RuleId::Lemma(n) => self.rules.lemma(n).cloned(),
            RuleId::Mapping(n) => self.rules.mapping_rule(n).cloned(),
            RuleId::Builtin(_) | RuleId::Equation(..) => None,
        }
    }

    /// Rewrites `e` with rule `id`; `cached` spares recomputing fact rules.
    pub fn try_rule(&self, seq: &Sequent, target: Target, e: &Expr, bound: &[Name], id: &RuleId, cached: Option<&Rule>) -> Option<Expr> {
        match id {
            RuleId::Builtin(b) => self.builtin(*b, e),
            RuleId::Equation(f, i) => self.equation(f, *i, e),
            RuleId::Fact(j) if target == Target::Fact(*j) => None,
            _ => match cached {
                Some(r) => self.apply_rule(seq, r, e, bound),
                None => self.apply_rule(seq, &self.rule_for(seq, id)?, e, bound),
            },
        }
    }

    pub fn apply_step(&self, seq: &Sequent, step: &Step) -> Result<Sequent, String> {
        match step {
            Step::Rewrite { target, path, rule, result } => {
                let got = self.rewrite_at(seq, *target, path, rule)?;
                if got != *result {
                    return Err(format!("{rule} at {path:?} yields {got}, trace records {result}"));
                }
                let mut out = seq.clone();
                match target {
                    Target::Goal => {
                        out.goal = replace_at(&seq.goal, path, got).ok_or("bad path")?;
                    }
                    Target::Fact(i) => {
                        let f = &mut out.facts[*i];
                        let (&part, rest) = path.split_first().ok_or("empty fact path")?;
                        if part < f.premises.len() {
                            f.premises[part] = replace_at(&f.premises[part], rest, got).ok_or("bad path")?;
                        } else {
                            f.concl = replace_at(&f.concl, rest, got).ok_or("bad path")?;
                        }
                        f.premises.retain(|p| *p != Expr::Bool(true));
                        let used: BTreeSet<Name> = fact_parts(f).iter().flat_map(|p| p.free_vars()).collect();
                        f.vars.retain(|(v, _)| used.contains(v));
                    }
                }
                Ok(out)
            }
            Step::IntroImp => match &seq.goal {
                Expr::Prim(Prim::Implies, a) if a.len() == 2 => {
                    let mut out = seq.clone();
                    out.facts.push(Fact::ground(a[0].clone()));
                    out.goal = a[1].clone();
                    Ok(out)
                }
                g => Err(format!("goal {g} is not an implication")),
            },
            Step::SplitFact(i) => match seq.facts.get(*i) {
                Some(f) if super::is_prim(&f.concl, Prim::And) => {
                    let Expr::Prim(_, a) = &f.concl else { unreachable!() };
                    let part = |c: &Expr| {
                        let mut used = c.free_vars();
                        f.premises.iter().for_each(|p| used.extend(p.free_vars()));
                        Fact {
                            vars: f.vars.iter().filter(|(n, _)| used.contains(n)).cloned().collect(),
                            premises: f.premises.clone(),
                            concl: c.clone(),
                        }
                    };
                    let mut out = seq.clone();
                    out.facts[*i] = part(&a[0]);
                    out.facts.insert(*i + 1, part(&a[1]));
                    Ok(out)
                }
                _ => Err(format!("fact {i} is not a conjunction")),
            },
            Step::Instantiate { fact, terms } => {
                let f = seq.facts.get(*fact).ok_or_else(|| format!("no fact {fact}"))?;
                if f.vars.is_empty() || f.vars.len() != terms.len() {
                    return Err(format!("fact {fact} does not take {} terms", terms.len()));
                }
                let env = self.type_env(seq);
                let mut m = HashMap::new();
                for ((n, t), e) in f.vars.iter().zip(terms) {
                    if !e.free_vars().iter().all(|v| env.contains_key(v)) {
                        return Err(format!("{e} is not closed under the fixed variables"));
                    }
                    match type_of(self.program, &env, e) {
                        Ok(u) if &u == t => {}
                        _ => return Err(format!("{e} does not have type {t}")),
                    }
                    m.insert(n.clone(), e.clone());
                }
                let mut out = seq.clone();
                out.facts.push(Fact {
                    vars: Vec::new(),
                    premises: f.premises.iter().map(|p| substitute(p, &m)).collect(),
                    concl: substitute(&f.concl, &m),
                });
                Ok(out)
            }
            Step::DropFact(i) => {
                if *i >= seq.facts.len() {
                    return Err(format!("no fact {i}"));
                }
                let mut out = seq.clone();
                out.facts.remove(*i);
                Ok(out)
            }
            Step::UsePost { fun, args } => self.use_post(seq, fun, args),
        }
    }

    pub fn rewrite_at(&self, seq: &Sequent, target: Target, path: &[usize], rule: &RuleId) -> Result<Expr, String> {
        let mut bound = Vec::new();
        let e = match target {
            Target::Goal => subterm(&seq.goal, path, &mut bound),
            Target::Fact(i) => {
                let f = seq.facts.get(i).ok_or_else(|| format!("no fact {i}"))?;
                bound.extend(f.vars.iter().map(|(n, _)| n.clone()));
                let (&part, rest) = path.split_first().ok_or("empty fact path")?;
                let parts = fact_parts(f);
                subterm(parts.get(part).ok_or("bad fact part")?, rest, &mut bound)
            }
        }
        .ok_or_else(|| format!("no subterm at {path:?}"))?;
        self.try_rule(seq, target, e, &bound, rule, None)
            .ok_or_else(|| format!("{rule} does not apply to {e}"))
    }

    pub fn use_post(&self, seq: &Sequent, fun: &Name, args: &[Expr]) -> Result<Sequent, String> {
        if !self.rules.proven_posts.contains(fun) {
            return Err(format!("postcondition of {fun} is not proved"));
        }
        let f = self.program.fun(fun).ok_or("unknown function")?;
        let post = post_goal(f).ok_or("no postcondition")?;
        if args.len() != f.params.len() {
            return Err("arity".into());
        }
        let fixed: BTreeSet<&Name> = seq.fixed.iter().map(|(n, _)| n).collect();
        if args.iter().flat_map(|a| a.free_vars()).any(|v| !fixed.contains(&v)) {
            return Err("arguments mention unfixed variables".into());
        }
        let env = self.type_env(seq);
        let mut inst = HashMap::new();
        for ((_, t), a) in f.params.iter().zip(args) {
            let ok = type_of(self.program, &env, a).is_ok_and(|u| match_type(t, &u, &f.typarams, &mut inst));
            if !ok {
                return Err(format!("{a} does not fit parameter type {t}"));
            }
        }
        let m: HashMap<Name, Expr> = f.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
        let mut out = seq.clone();
        out.facts.push(Fact {
            vars: Vec::new(),
            premises: f.pre.iter().map(|p| substitute(p, &m)).collect(),
            concl: substitute(&post, &m),
        });
        Ok(out)
    }

    pub fn split_conj(&self, seq: &Sequent) -> Result<Vec<Sequent>, String> {
        let cs = goal_conjuncts(&seq.goal);
        if cs.len() < 2 {
            return Err("goal is not a conjunction".into());
        }
        Ok(cs
            .into_iter()
            .map(|g| Sequent {
                goal: g,
                ..seq.clone()
            })
            .collect())
    }

    fn closed_under_fixed(&self, seq: &Sequent, e: &Expr) -> bool {
        e.free_vars().iter().all(|v| seq.fixed.iter().any(|(n, _)| n == v))
    }

    pub fn cases(&self, seq: &Sequent, split: &Split) -> Result<Vec<Sequent>, String> {
        let env = self.type_env(seq);
        let with_fact = |e: Expr| {
            let mut s = seq.clone();
            s.facts.push(Fact::ground(e));
            s
        };
        match split {
            Split::Bool(c) => {
                if !self.closed_under_fixed(seq, c) || type_of(self.program, &env, c) != Ok(Type::Bool) {
                    return Err(format!("cannot split on {c}"));
                }
                Ok(vec![with_fact(c.clone()), with_fact(Expr::not(c.clone()))])
            }
            Split::Int(s, ks) => {
                if !self.closed_under_fixed(seq, s) || !self.is_int(&env, s) || ks.is_empty() {
                    return Err(format!("cannot split on {s}"));
                }
                let mut out: Vec<Sequent> = ks.iter().map(|k| with_fact(Expr::eq(s.clone(), Expr::Int(k.clone())))).collect();
                let mut rest = seq.clone();
                for k in ks {
                    rest.facts.push(Fact::ground(Expr::not(Expr::eq(s.clone(), Expr::Int(k.clone())))));
                }
                out.push(rest);
                Ok(out)
            }
            Split::Ctor(s) => {
                if !self.closed_under_fixed(seq, s) {
                    return Err(format!("cannot split on {s}"));
                }
                let Ok(Type::Data(d, targs)) = type_of(self.program, &env, s) else {
                    return Err(format!("{s} does not have a datatype"));
                };
                let dt = self.program.datatype(&d).ok_or("unknown datatype")?;
                let mut fresh = self.fresh_for(seq);
                let mut out = Vec::new();
                for c in &dt.ctors {
                    let tys = self.program.ctor_fields_at(&c.name, &targs).ok_or("constructor")?;
                    let fields: Vec<(Name, Type)> =
                        c.fields.iter().zip(tys).map(|((n, _), t)| (fresh.fresh_var(n), t)).collect();
                    let value = Expr::Ctor(c.name.clone(), fields.iter().map(|(n, _)| Expr::Var(n.clone())).collect());
                    match s {
                        Expr::Var(x) => {
                            let m = HashMap::from([(x.clone(), value)]);
                            let mut fixed = Vec::new();
                            for (n, t) in &seq.fixed {
                                if n == x {
                                    fixed.extend(fields.iter().cloned());
                                } else {
                                    fixed.push((n.clone(), t.clone()));
                                }
                            }
                            out.push(Sequent {
                                fixed,
                                facts: seq.facts.iter().map(|f| subst_fact(f, &m)).collect(),
                                goal: substitute(&seq.goal, &m),
                            });
                        }
                        _ => {
                            let mut n = with_fact(Expr::eq(s.clone(), value));
                            n.fixed.extend(fields);
                            out.push(n);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Instantiates an induction principle at the fixed variables `vars`.
    /// Plain facts become premises of the induction predicate and every
    /// other fixed variable is generalized.
    pub fn induct(&self, seq: &Sequent, principle: &str, vars: &[Name]) -> Result<Vec<Sequent>, String> {
        let pr = self.rules.principle(principle).ok_or_else(|| format!("unknown induction rule {principle}"))?;
        if vars.len() != pr.params.len() {
            return Err(format!("{principle} takes {} variables", pr.params.len()));
        }
        let mut xs: Vec<(Name, Type)> = Vec::new();
        for (v, pt) in vars.iter().zip(&pr.params) {
            let (_, t) = seq
                .fixed
                .iter()
                .find(|(n, _)| n == v)
                .ok_or_else(|| format!("{v} is not a fixed variable"))?;
            if t.datatype().is_none() || t.datatype() != pt.datatype() {
                return Err(format!("{v}: {t} is not inductable with {principle}"));
            }
            if xs.iter().any(|(n, _)| n == v) {
                return Err(format!("{v} named twice"));
            }
            xs.push((v.clone(), t.clone()));
        }
        let is_x = |n: &Name| xs.iter().any(|(x, _)| x == n);
        let others: Vec<(Name, Type)> = seq.fixed.iter().filter(|(n, _)| !is_x(n)).cloned().collect();
        let plain: Vec<Expr> = seq.facts.iter().filter(|f| f.is_plain()).map(|f| f.concl.clone()).collect();
        let kept: Vec<Fact> = seq
            .facts
            .iter()
            .filter(|f| {
                !f.is_plain() && {
                    let own: Vec<&Name> = f.vars.iter().map(|(n, _)| n).collect();
                    fact_parts(f)
                        .iter()
                        .flat_map(|p| p.free_vars())
                        .all(|v| own.contains(&&v) || !seq.fixed.iter().any(|(n, _)| *n == v))
                }
            })
            .cloned()
            .collect();
        let mut fresh = self.fresh_for(seq);
        let mut out = Vec::new();
        for case in &pr.cases {
            let mut ren: HashMap<Name, Expr> = HashMap::new();
            let mut pats = Vec::new();
            for p in &case.pats {
                let mut m = HashMap::new();
                for b in p.bound() {
                    let b2 = fresh.fresh(&b);
                    m.insert(b.clone(), b2.clone());
                    ren.insert(b, Expr::Var(b2));
                }
                pats.push(p.rename(&m));
            }
            let mut sub_x = HashMap::new();
            let mut fixed = Vec::new();
            for (n, t) in &seq.fixed {
                match xs.iter().position(|(x, _)| x == n) {
                    Some(k) => {
                        let penv = pattern_env(self.program, &pats[k], t).map_err(|e| e.0)?;
                        for b in pats[k].bound() {
                            let bt = penv.get(&b).cloned().ok_or("pattern binder type")?;
                            fixed.push((b, bt));
                        }
                        sub_x.insert(n.clone(), pats[k].to_expr().ok_or("wildcard in principle")?);
                    }
                    None => fixed.push((n.clone(), t.clone())),
                }
            }
            let mut facts = kept.clone();
            facts.extend(plain.iter().map(|e| Fact::ground(substitute(e, &sub_x))));
            for ih in &case.ihs {
                let ys: Vec<(Name, Type)> = others.iter().map(|(n, t)| (fresh.fresh(n), t.clone())).collect();
                let mut sub = HashMap::new();
                for ((x, _), a) in xs.iter().zip(&ih.args) {
                    sub.insert(x.clone(), substitute(a, &ren));
                }
                for ((y, _), (y2, _)) in others.iter().zip(&ys) {
                    sub.insert(y.clone(), Expr::Var(y2.clone()));
                }
                let mut premises: Vec<Expr> = ih.conds.iter().map(|c| substitute(c, &ren)).collect();
                premises.extend(plain.iter().map(|e| substitute(e, &sub)));
                let concl = substitute(&seq.goal, &sub);
                let mut used = BTreeSet::new();
                for e in premises.iter().chain(std::iter::once(&concl)) {
                    used.extend(e.free_vars());
                }
                facts.push(Fact {
                    vars: ys.into_iter().filter(|(n, _)| used.contains(n)).collect(),
                    premises,
                    concl,
                });
            }
            out.push(Sequent {
                fixed,
                facts,
                goal: substitute(&seq.goal, &sub_x),
            });
        }
        Ok(out)
    }

    /// Constraint lists for linear arithmetic, recomputed from the sequent.
    pub fn arith_inputs(&self, seq: &Sequent) -> (Vec<(Source, Lin)>, Vec<Vec<Lin>>) {
        let env = self.type_env(seq);
        let is_int = |e: &Expr| self.is_int(&env, e);
        let mut facts = Vec::new();
        for (i, f) in seq.facts.iter().enumerate() {
            if f.is_plain() {
                if let Some(cs) = literal_constraints(&f.concl, &is_int) {
                    for (k, l) in cs.into_iter().enumerate() {
                        facts.push((Source::Fact(i, k), l));
                    }
                }
            }
        }
        (facts, negated_goal(&seq.goal, &is_int))
    }

    pub fn check_linarith(&self, seq: &Sequent, certs: &[Certificate]) -> Result<(), String> {
        let (facts, branches) = self.arith_inputs(seq);
        if certs.len() != branches.len() {
            return Err(format!("{} certificates for {} cases", certs.len(), branches.len()));
        }
        for (k, (branch, cert)) in branches.iter().zip(certs).enumerate() {
            let lookup = |s: Source| match s {
                Source::Fact(..) => facts.iter().find(|(t, _)| *t == s).map(|(_, l)| l.clone()),
                Source::Goal(j) => branch.get(j).cloned(),
            };
            if !check_certificate(cert, &lookup) {
                return Err(format!("certificate {k} does not refute"));
            }
        }
        Ok(())
    }

    fn check_node(&self, seq: &Sequent, proof: &Proof, n: &mut usize) -> Result<(), TraceError> {
        let here = *n;
        *n += 1;
        let fail = |message: String| Err(TraceError { step: here, message });
        match proof {
            Proof::Open => fail("open goal".into()),
            Proof::Steps(steps, rest) => {
                let mut s = seq.clone();
                for st in steps {
                    let i = *n;
                    *n += 1;
                    s = self.apply_step(&s, st).map_err(|message| TraceError { step: i, message })?;
                }
                self.check_node(&s, rest, n)
            }
            Proof::CloseTrue => match seq.goal {
                Expr::Bool(true) => Ok(()),
                _ => fail(format!("goal {} is not true", seq.goal)),
            },
            Proof::CloseFalse(i) => match seq.facts.get(*i) {
                Some(f) if f.is_plain() && f.concl == Expr::Bool(false) => Ok(()),
                _ => fail(format!("fact {i} is not false")),
            },
            Proof::Linarith(certs) => self.check_linarith(seq, certs).or_else(fail),
            Proof::SplitConj(ps) => {
                let subs = self.split_conj(seq).or_else(|m| fail(m).map(|_| Vec::new()))?;
                self.check_children(&subs, ps, here, n)
            }
            Proof::Cases(split, ps) => {
                let subs = self.cases(seq, split).or_else(|m| fail(m).map(|_| Vec::new()))?;
                self.check_children(&subs, ps, here, n)
            }
            Proof::Induct { principle, vars, cases } => {
                let subs = self.induct(seq, principle, vars).or_else(|m| fail(m).map(|_| Vec::new()))?;
                self.check_children(&subs, cases, here, n)
            }
        }
    }

    fn check_children(&self, subs: &[Sequent], ps: &[Proof], here: usize, n: &mut usize) -> Result<(), TraceError> {
        if subs.len() != ps.len() {
            return Err(TraceError {
                step: here,
                message: format!("{} subgoals but {} proofs", subs.len(), ps.len()),
            });
        }
        for (s, p) in subs.iter().zip(ps) {
            self.check_node(s, p, n)?;
        }
        Ok(())
    }
}

/// One-way match of a declared type against an actual one, binding the
/// declared type variables in `vars` consistently.
fn match_type(decl: &Type, actual: &Type, vars: &[Name], inst: &mut HashMap<Name, Type>) -> bool {
    match (decl, actual) {
        (Type::Var(v), _) if vars.contains(v) => match inst.get(v) {
            Some(t) => t == actual,
            None => {
                inst.insert(v.clone(), actual.clone());
                true
            }
        },
        (Type::Data(a, xs), Type::Data(b, ys)) => a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_type(x, y, vars, inst)),
        (Type::Tuple(xs), Type::Tuple(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_type(x, y, vars, inst)),
        (Type::Fun(xs, r), Type::Fun(ys, s)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_type(x, y, vars, inst)) && match_type(r, s, vars, inst)
        }
        _ => decl == actual,
    }
}

pub(crate) fn subst_fact(f: &Fact, m: &HashMap<Name, Expr>) -> Fact {
    Fact {
        vars: f.vars.clone(),
        premises: f.premises.iter().map(|p| substitute(p, m)).collect(),
        concl: substitute(&f.concl, m),
    }
}

fn arith(e: &Expr) -> Option<Expr> {
    let Expr::Prim(op, a) = e else {
        return None;
    };
    let lit = |x: &Expr| match x {
        Expr::Int(n) => Some(n.clone()),
        _ => None,
    };
    if let (Prim::Neg, [x]) = (op, a.as_slice()) {
        return lit(x).map(|n| Expr::Int(-n));
    }
    let [x, y] = a.as_slice() else {
        return None;
    };
    if let (Some(m), Some(n)) = (lit(x), lit(y)) {
        return Some(match op {
            Prim::Add => Expr::Int(m + n),
            Prim::Sub => Expr::Int(m - n),
            Prim::Mul => Expr::Int(m * n),
            Prim::Eq => Expr::Bool(m == n),
            Prim::Ne => Expr::Bool(m != n),
            Prim::Lt => Expr::Bool(m < n),
            Prim::Le => Expr::Bool(m <= n),
            Prim::Gt => Expr::Bool(m > n),
            Prim::Ge => Expr::Bool(m >= n),
            _ => return None,
        });
    }
    let is = |x: &Expr, k: i64| lit(x) == Some(BigInt::from(k));
    match op {
        Prim::Add if is(x, 0) => Some(y.clone()),
        Prim::Add | Prim::Sub if is(y, 0) => Some(x.clone()),
        Prim::Mul if is(x, 1) => Some(y.clone()),
        Prim::Mul if is(y, 1) => Some(x.clone()),
        Prim::Mul if is(x, 0) || is(y, 0) => Some(Expr::Int(BigInt::zero())),
        _ => None,
    }
}

fn boolean(e: &Expr) -> Option<Expr> {
    let Expr::Prim(op, a) = e else {
        return None;
    };
    let t = Expr::Bool(true);
    let f = Expr::Bool(false);
    match (op, a.as_slice()) {
        (Prim::Not, [Expr::Bool(b)]) => Some(Expr::Bool(!b)),
        (Prim::Not, [Expr::Prim(Prim::Not, x)]) => Some(x[0].clone()),
        (Prim::And, [x, y]) => match (x, y) {
            (Expr::Bool(true), y) => Some(y.clone()),
            (x, Expr::Bool(true)) => Some(x.clone()),
            (Expr::Bool(false), _) | (_, Expr::Bool(false)) => Some(f),
            _ => None,
        },
        (Prim::Or, [x, y]) => match (x, y) {
            (Expr::Bool(true), _) | (_, Expr::Bool(true)) => Some(t),
            (Expr::Bool(false), y) => Some(y.clone()),
            (x, Expr::Bool(false)) => Some(x.clone()),
            _ => None,
        },
        (Prim::Implies, [x, y]) => match (x, y) {
            (Expr::Bool(true), y) => Some(y.clone()),
            (Expr::Bool(false), _) | (_, Expr::Bool(true)) => Some(t),
            (x, Expr::Bool(false)) => Some(Expr::not(x.clone())),
            _ => None,
        },
        (Prim::Eq, [x, y]) => match (x, y) {
            (x, Expr::Bool(true)) => Some(x.clone()),
            (Expr::Bool(true), y) => Some(y.clone()),
            (x, Expr::Bool(false)) => Some(Expr::not(x.clone())),
            (Expr::Bool(false), y) => Some(Expr::not(y.clone())),
            _ => None,
        },
        (Prim::Ne, [x, y]) => Some(Expr::not(Expr::eq(x.clone(), y.clone()))),
        _ => None,
    }
}

/// Replays `proof` from `root`; the first invalid step is reported.
pub fn check_trace(program: &CoreProgram, rules: &RuleSet, root: &Sequent, proof: &Proof) -> Result<(), TraceError> {
    let k = Kernel::new(program, rules);
    let mut n = 0;
    k.check_node(root, proof, &mut n)
}
