//! Proof search: simp, clarsimp, auto, induction and hint execution. Every
//! step goes through the kernel, and finished proofs are replayed by
//! `check_trace` before they are reported.

use std::collections::{BTreeSet, HashMap};

use crate::ir::{alpha_eq, CoreProgram, Expr, Name, Pattern, Prim, Type};
use crate::vcgen::{generate_vcs, HintStep, Vc, VcKind};

use super::arith::{refute, Source};
use super::kernel::{check_trace, goal_conjuncts, match_pat, Kernel, PatMatch, BUILTINS};
use super::rules::{Rule, RuleSet};
use super::{Budget, Fact, Limits, Proof, ProofResult, RuleId, Sequent, Split, Step, Target, UnknownReason};

/// Nested case splits tried by `auto` on one goal.
pub const CASE_DEPTH: u32 = 3;
const MAX_POSTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// `auto`, then structural induction on each listed variable followed by `auto`.
    Default { induct_on: Vec<Name> },
    Hint(Vec<HintStep>),
}

/// A proof with open leaves and the sequents at those leaves, in order.
struct Partial {
    proof: Proof,
    open: Vec<Sequent>,
}

impl Partial {
    fn closed(proof: Proof) -> Partial {
        Partial { proof, open: Vec::new() }
    }

    fn open(s: Sequent) -> Partial {
        Partial {
            proof: Proof::Open,
            open: vec![s],
        }
    }
}

struct Search<'a> {
    k: Kernel<'a>,
    budget: Budget,
    induct_depth: u32,
}

type Found = (Vec<usize>, RuleId, Expr);

impl<'a> Search<'a> {
    fn at_node(&mut self, s: &Sequent, target: Target, e: &Expr, bound: &[Name], facts: &[Option<Rule>]) -> Option<(RuleId, Expr)> {
        for b in BUILTINS {
            if let Some(r) = self.k.builtin(b, e) {
                return Some((RuleId::Builtin(b), r));
            }
        }
        for (j, fr) in facts.iter().enumerate() {
            if let Some(rule) = fr {
                if target == Target::Fact(j) {
                    continue;
                }
                if let Some(r) = self.k.apply_rule(s, rule, e, bound) {
                    return Some((rule.id.clone(), r));
                }
            }
        }
        let rules = self.k.rules;
        let head = match e {
            Expr::Call(f, _) => Some(f),
            _ => None,
        };
        if let Some(f) = head {
            if let Some(fr) = rules.equations(f) {
                for i in 0..fr.equations.len() {
                    if let Some(r) = self.k.equation(f, i, e) {
                        return Some((RuleId::Equation(f.clone(), i), r));
                    }
                }
            }
            if let Some(rule) = rules.mapping_rule(f) {
                if let Some(r) = self.k.apply_rule(s, rule, e, bound) {
                    return Some((rule.id.clone(), r));
                }
            }
        }
        for rule in rules.lemmas_for(head) {
            if let Some(r) = self.k.apply_rule(s, rule, e, bound) {
                return Some((rule.id.clone(), r));
            }
        }
        None
    }

    /// Innermost-leftmost, except that conditions and scrutinees are
    /// reduced before the branches they guard.
    fn innermost(
        &mut self,
        s: &Sequent,
        target: Target,
        e: &Expr,
        path: &mut Vec<usize>,
        bound: &mut Vec<Name>,
        facts: &[Option<Rule>],
    ) -> Option<Found> {
        let kids = e.children();
        let first = match e {
            Expr::If(..) | Expr::Match(..) | Expr::Let(..) => 1,
            _ => kids.len(),
        };
        let visit = |this: &mut Self, i: usize, path: &mut Vec<usize>, bound: &mut Vec<Name>| {
            let n = bound.len();
            bound.extend(e.binders_for_child(i));
            path.push(i);
            let r = this.innermost(s, target, kids[i], path, bound, facts);
            path.pop();
            bound.truncate(n);
            r
        };
        for i in 0..first {
            if let Some(r) = visit(self, i, path, bound) {
                return Some(r);
            }
        }
        if let Some((id, r)) = self.at_node(s, target, e, bound, facts) {
            return Some((path.clone(), id, r));
        }
        for i in first..kids.len() {
            if let Some(r) = visit(self, i, path, bound) {
                return Some(r);
            }
        }
        None
    }

    fn find_rewrite(&mut self, s: &Sequent, rewrite_goal: bool) -> Option<Step> {
        let facts: Vec<Option<Rule>> = (0..s.facts.len()).map(|i| self.k.fact_rule(s, i)).collect();
        for (i, f) in s.facts.iter().enumerate() {
            let parts: Vec<&Expr> = f.premises.iter().chain(std::iter::once(&f.concl)).collect();
            for (k, part) in parts.into_iter().enumerate() {
                let mut bound: Vec<Name> = f.vars.iter().map(|(n, _)| n.clone()).collect();
                let mut path = vec![k];
                if let Some((path, rule, result)) = self.innermost(s, Target::Fact(i), part, &mut path, &mut bound, &facts) {
                    return Some(Step::Rewrite {
                        target: Target::Fact(i),
                        path,
                        rule,
                        result,
                    });
                }
            }
        }
        if rewrite_goal {
            let goal = s.goal.clone();
            if let Some((path, rule, result)) = self.innermost(s, Target::Goal, &goal, &mut Vec::new(), &mut Vec::new(), &facts) {
                return Some(Step::Rewrite {
                    target: Target::Goal,
                    path,
                    rule,
                    result,
                });
            }
        }
        None
    }

    fn structural_step(&self, s: &Sequent) -> Option<Step> {
        if super::is_prim(&s.goal, Prim::Implies) {
            return Some(Step::IntroImp);
        }
        for (i, f) in s.facts.iter().enumerate() {
            if super::is_prim(&f.concl, Prim::And) {
                return Some(Step::SplitFact(i));
            }
            if !f.is_plain() {
                continue;
            }
            let dup = s.facts[..i].iter().any(|g| g.is_plain() && alpha_eq(&g.concl, &f.concl));
            if f.concl == Expr::Bool(true) || dup {
                return Some(Step::DropFact(i));
            }
        }
        None
    }

    fn simp(&mut self, seq: &Sequent, rewrite_goal: bool) -> Partial {
        let mut steps = Vec::new();
        let mut s = seq.clone();
        loop {
            if s.goal == Expr::Bool(true) {
                return Partial::closed(Proof::steps(steps, Proof::CloseTrue));
            }
            if let Some(i) = s.facts.iter().position(|f| f.is_plain() && f.concl == Expr::Bool(false)) {
                return Partial::closed(Proof::steps(steps, Proof::CloseFalse(i)));
            }
            if !self.budget.tick() {
                break;
            }
            let step = match self.structural_step(&s) {
                Some(st) => st,
                None => match self.find_rewrite(&s, rewrite_goal) {
                    Some(st) => st,
                    None => break,
                },
            };
            match self.k.apply_step(&s, &step) {
                Ok(next) => {
                    s = next;
                    steps.push(step);
                }
                Err(_) => break,
            }
        }
        Partial {
            proof: Proof::steps(steps, Proof::Open),
            open: vec![s],
        }
    }

    fn clarsimp(&mut self, seq: &Sequent) -> Partial {
        let p = self.simp(seq, false);
        let Some(s) = p.open.first().cloned() else {
            return p;
        };
        match self.k.split_conj(&s) {
            Ok(subs) => Partial {
                proof: p.proof.fill(&mut std::iter::once(Proof::SplitConj(vec![Proof::Open; subs.len()]))),
                open: subs,
            },
            Err(_) => p,
        }
    }

    fn linarith(&mut self, s: &Sequent) -> Option<Proof> {
        if !self.budget.tick() {
            return None;
        }
        let (facts, branches) = self.k.arith_inputs(s);
        let mut certs = Vec::new();
        for b in branches {
            let mut inputs = facts.clone();
            inputs.extend(b.into_iter().enumerate().map(|(k, l)| (Source::Goal(k), l)));
            certs.push(refute(&inputs)?);
        }
        Some(Proof::Linarith(certs))
    }

    /// Postconditions of already verified callees, at calls over fixed variables.
    fn post_steps(&self, s: &Sequent) -> Vec<Step> {
        fn calls(e: &Expr, bound: &mut Vec<Name>, out: &mut Vec<(Name, Vec<Expr>)>) {
            if let Expr::Call(f, a) = e {
                if a.iter().all(|x| x.free_vars().iter().all(|v| !bound.contains(v))) {
                    out.push((f.clone(), a.clone()));
                }
            }
            for (i, c) in e.children().into_iter().enumerate() {
                let n = bound.len();
                bound.extend(e.binders_for_child(i));
                calls(c, bound, out);
                bound.truncate(n);
            }
        }
        let mut found = Vec::new();
        calls(&s.goal, &mut Vec::new(), &mut found);
        for f in s.facts.iter().filter(|f| f.is_plain()) {
            calls(&f.concl, &mut Vec::new(), &mut found);
        }
        let mut steps = Vec::new();
        let mut cur = s.clone();
        for (f, args) in found {
            if steps.len() >= MAX_POSTS || !self.k.rules.proven_posts.contains(&f) {
                continue;
            }
            let Ok(next) = self.k.use_post(&cur, &f, &args) else {
                continue;
            };
            let new = next.facts.last().expect("post fact");
            if cur.facts.iter().any(|g| g.premises == new.premises && alpha_eq(&g.concl, &new.concl)) {
                continue;
            }
            steps.push(Step::UsePost { fun: f, args });
            cur = next;
        }
        steps
    }

    /// Instances of quantified facts at the fixed variables they were
    /// generalized from.
    fn instance_steps(&self, s: &Sequent) -> Vec<Step> {
        let mut steps = Vec::new();
        let mut cur = s.clone();
        for (i, f) in s.facts.iter().enumerate() {
            if f.vars.is_empty() {
                continue;
            }
            let terms: Option<Vec<Expr>> = f
                .vars
                .iter()
                .map(|(n, t)| {
                    s.fixed
                        .iter()
                        .find(|(m, u)| m.base == n.base && u == t && m != n)
                        .map(|(m, _)| Expr::Var(m.clone()))
                })
                .collect();
            let Some(terms) = terms else {
                continue;
            };
            let step = Step::Instantiate { fact: i, terms };
            let Ok(next) = self.k.apply_step(&cur, &step) else {
                continue;
            };
            let new = next.facts.last().expect("instance");
            let known = cur.facts.iter().any(|g| {
                g.vars.is_empty()
                    && g.premises.len() == new.premises.len()
                    && g.premises.iter().zip(&new.premises).all(|(a, b)| alpha_eq(a, b))
                    && alpha_eq(&g.concl, &new.concl)
            });
            if !known {
                steps.push(step);
                cur = next;
            }
        }
        steps
    }

    /// Collects split candidates in traversal order, with a rank: conditions
    /// first, then variables, then compound terms.
    fn split_in(&self, env: &HashMap<Name, Type>, e: &Expr, bound: &mut Vec<Name>, out: &mut Vec<(u8, Split)>) {
        let fixed = |x: &Expr, bound: &[Name]| x.free_vars().iter().all(|v| !bound.contains(v) && env.contains_key(v));
        let stuck_on = |x: Expr, lits: &[&Pattern], bound: &[Name], out: &mut Vec<(u8, Split)>| {
            if !fixed(&x, bound) {
                return;
            }
            let rank = if matches!(x, Expr::Var(_)) { 1 } else { 2 };
            match crate::ir::typeck::type_of(self.k.program, env, &x) {
                Ok(Type::Data(..)) => out.push((rank, Split::Ctor(x))),
                Ok(Type::Bool) => out.push((0, Split::Bool(x))),
                Ok(Type::Int) if !lits.is_empty() => {
                    let mut ks = BTreeSet::new();
                    lits.iter().for_each(|p| int_lits(p, &mut ks));
                    out.push((rank, Split::Int(x, ks.into_iter().collect())));
                }
                _ => {}
            }
        };
        match e {
            Expr::Call(f, args) => {
                if let Some(fr) = self.k.rules.equations(f) {
                    for eq in &fr.equations {
                        let mut stuck = None;
                        let mut no = false;
                        for (p, a) in eq.lhs.iter().zip(args) {
                            match match_pat(p, a, &mut HashMap::new()) {
                                PatMatch::No => no = true,
                                PatMatch::Stuck(x) => stuck = stuck.or(Some(x)),
                                PatMatch::Yes => {}
                            }
                        }
                        if no {
                            continue;
                        }
                        if let Some(x) = stuck {
                            let lits: Vec<&Pattern> = fr.equations.iter().flat_map(|q| q.lhs.iter()).collect();
                            stuck_on(x, &lits, bound, out);
                        }
                        break;
                    }
                }
            }
            Expr::If(c, _, _) if !matches!(**c, Expr::Bool(_)) && fixed(c, bound) => out.push((0, Split::Bool((**c).clone()))),
            Expr::Match(scrut, cs) => {
                for (p, _) in cs {
                    match match_pat(p, scrut, &mut HashMap::new()) {
                        PatMatch::No => continue,
                        PatMatch::Yes => break,
                        PatMatch::Stuck(x) => {
                            let lits: Vec<&Pattern> = cs.iter().map(|(q, _)| q).collect();
                            stuck_on(x, &lits, bound, out);
                            break;
                        }
                    }
                }
            }
            _ => {}
        }
        for (i, c) in e.children().into_iter().enumerate() {
            let n = bound.len();
            bound.extend(e.binders_for_child(i));
            self.split_in(env, c, bound, out);
            bound.truncate(n);
        }
    }

    fn find_split(&self, s: &Sequent) -> Option<Split> {
        let env = self.k.type_env(s);
        let mut out = Vec::new();
        self.split_in(&env, &s.goal, &mut Vec::new(), &mut out);
        for f in s.facts.iter().filter(|f| f.is_plain()) {
            self.split_in(&env, &f.concl, &mut Vec::new(), &mut out);
        }
        let best = out.iter().map(|(r, _)| *r).min()?;
        out.into_iter().find(|(r, _)| *r == best).map(|(_, x)| x)
    }

    fn auto(&mut self, seq: &Sequent, depth: u32) -> Partial {
        let p = self.simp(seq, true);
        let Some(s) = p.open.first().cloned() else {
            return p;
        };
        let rest = self.auto_rest(s, depth);
        Partial {
            proof: p.proof.fill(&mut std::iter::once(rest.proof)),
            open: rest.open,
        }
    }

    fn auto_rest(&mut self, s: Sequent, depth: u32) -> Partial {
        if !self.budget.ok() {
            return Partial::open(s);
        }
        if let Some(pr) = self.linarith(&s) {
            return Partial::closed(pr);
        }
        let mut posts = self.instance_steps(&s);
        let mut s1 = s.clone();
        for st in &posts {
            s1 = self.k.apply_step(&s1, st).expect("instance step");
        }
        posts.extend(self.post_steps(&s1));
        if !posts.is_empty() {
            let mut s2 = s.clone();
            for st in &posts {
                s2 = self.k.apply_step(&s2, st).expect("post step");
            }
            let p = self.simp(&s2, true);
            let Some(s3) = p.open.first().cloned() else {
                return Partial::closed(Proof::steps(posts, p.proof));
            };
            let rest = self.decompose(s3, depth);
            return Partial {
                proof: Proof::steps(posts, p.proof.fill(&mut std::iter::once(rest.proof))),
                open: rest.open,
            };
        }
        self.decompose(s, depth)
    }

    fn decompose(&mut self, s: Sequent, depth: u32) -> Partial {
        if let Some(pr) = self.linarith(&s) {
            return Partial::closed(pr);
        }
        if goal_conjuncts(&s.goal).len() > 1 {
            if let Ok(subs) = self.k.split_conj(&s) {
                return self.each(Proof::SplitConj, subs, |this, g| this.auto(g, depth));
            }
        }
        if depth > 0 && self.budget.ok() {
            if let Some(split) = self.find_split(&s) {
                if let Ok(subs) = self.k.cases(&s, &split) {
                    return self.each(|ps| Proof::Cases(split.clone(), ps), subs, |this, g| this.auto(g, depth - 1));
                }
            }
        }
        Partial::open(s)
    }

    fn each(&mut self, node: impl FnOnce(Vec<Proof>) -> Proof, subs: Vec<Sequent>, mut f: impl FnMut(&mut Self, &Sequent) -> Partial) -> Partial {
        let mut proofs = Vec::new();
        let mut open = Vec::new();
        for g in &subs {
            let p = f(self, g);
            proofs.push(p.proof);
            open.extend(p.open);
        }
        Partial {
            proof: node(proofs),
            open,
        }
    }

    fn induct_partial(&mut self, s: &Sequent, principle: &str, vars: Vec<Name>) -> Result<Partial, String> {
        let subs = self.k.induct(s, principle, &vars)?;
        Ok(Partial {
            proof: Proof::Induct {
                principle: principle.to_string(),
                vars,
                cases: vec![Proof::Open; subs.len()],
            },
            open: subs,
        })
    }

    /// Fixed variables for a principle, matched by datatype in order.
    fn rule_vars(&self, s: &Sequent, principle: &str) -> Result<Vec<Name>, String> {
        let pr = self.k.rules.principle(principle).ok_or_else(|| format!("unknown induction rule {principle}"))?;
        let mut out: Vec<Name> = Vec::new();
        for pt in &pr.params {
            let v = s
                .fixed
                .iter()
                .find(|(n, t)| t.datatype().is_some() && t.datatype() == pt.datatype() && !out.contains(n))
                .ok_or_else(|| format!("no variable of type {pt} for {principle}"))?;
            out.push(v.0.clone());
        }
        Ok(out)
    }

    fn hint_step(&mut self, s: &Sequent, step: &HintStep) -> Result<Partial, String> {
        Ok(match step {
            HintStep::Simp => self.simp(s, true),
            HintStep::Clarsimp => self.clarsimp(s),
            HintStep::Auto => self.auto(s, CASE_DEPTH),
            HintStep::Induct(x) => {
                let (_, t) = s
                    .fixed
                    .iter()
                    .find(|(n, _)| n == x)
                    .ok_or_else(|| format!("{x} is not a variable of the goal"))?;
                let pr = self.k.rules.structural_for(t).ok_or_else(|| format!("{x}: {t} is not inductable"))?;
                let name = pr.name.clone();
                self.induct_partial(s, &name, vec![x.clone()])?
            }
            HintStep::InductRule(r) => {
                let name = self.k.rules.principle_named(r).ok_or_else(|| format!("unknown induction rule {r}"))?.name.clone();
                let vars = self.rule_vars(s, &name)?;
                self.induct_partial(s, &name, vars)?
            }
        })
    }

    fn run_hint(&mut self, seq: &Sequent, steps: &[HintStep]) -> Result<Partial, (String, Vec<Sequent>)> {
        let mut proof = Proof::Open;
        let mut open = vec![(seq.clone(), 0u32)];
        for step in steps {
            let mut fills = Vec::new();
            let mut next = Vec::new();
            let inducts = matches!(step, HintStep::Induct(_) | HintStep::InductRule(_));
            for (g, d) in &open {
                if inducts && *d >= self.induct_depth {
                    return Err(("induction nested too deep".into(), open.into_iter().map(|(g, _)| g).collect()));
                }
                match self.hint_step(g, step) {
                    Ok(p) => {
                        fills.push(p.proof);
                        next.extend(p.open.into_iter().map(|s| (s, d + inducts as u32)));
                    }
                    Err(m) => return Err((format!("{step}: {m}"), open.into_iter().map(|(g, _)| g).collect())),
                }
            }
            proof = proof.fill(&mut fills.into_iter());
            open = next;
        }
        Ok(Partial {
            proof,
            open: open.into_iter().map(|(g, _)| g).collect(),
        })
    }

    fn run_default(&mut self, seq: &Sequent, induct_on: &[Name]) -> Partial {
        let first = self.simp(seq, true);
        let Some(s) = first.open.first().cloned() else {
            return first;
        };
        if let Some(pr) = self.linarith(&s) {
            return Partial::closed(first.proof.fill(&mut std::iter::once(pr)));
        }
        let mut residual = None;
        for v in induct_on {
            if !self.budget.ok() {
                break;
            }
            let Some((_, t)) = seq.fixed.iter().find(|(n, _)| n == v) else {
                continue;
            };
            let Some(pr) = self.k.rules.structural_for(t) else {
                continue;
            };
            let name = pr.name.clone();
            let Ok(ind) = self.induct_partial(seq, &name, vec![v.clone()]) else {
                continue;
            };
            let mut fills = Vec::new();
            let mut open = Vec::new();
            for g in &ind.open {
                let p = self.auto(g, CASE_DEPTH);
                open.extend(p.open);
                fills.push(p.proof);
            }
            if open.is_empty() {
                return Partial::closed(ind.proof.fill(&mut fills.into_iter()));
            }
            residual.get_or_insert(open);
        }
        let last = self.auto(seq, CASE_DEPTH);
        match residual {
            Some(open) if !last.open.is_empty() => Partial {
                proof: Proof::Open,
                open,
            },
            _ => last,
        }
    }
}

impl Sequent {
    pub fn from_vc(vc: &Vc) -> Sequent {
        Sequent {
            fixed: vc.fixed.clone(),
            facts: vc.hypotheses.iter().cloned().map(Fact::ground).collect(),
            goal: vc.goal.clone(),
        }
    }
}

/// Fixed parameters of `vc` measured structurally by its function's
/// termination certificate; empty unless the function is recursive.
pub fn default_induct_vars(program: &CoreProgram, rules: &RuleSet, vc: &Vc) -> Vec<Name> {
    let Some(f) = program.fun(&vc.fun) else {
        return Vec::new();
    };
    rules
        .induct_params
        .get(&vc.fun)
        .map(|ps| {
            ps.iter()
                .filter_map(|&i| f.params.get(i))
                .filter(|(n, t)| t.datatype().is_some() && vc.fixed.iter().any(|(m, _)| m == n))
                .map(|(n, _)| n.clone())
                .collect()
        })
        .unwrap_or_default()
}

pub fn prove(program: &CoreProgram, rules: &RuleSet, vc: &Vc, limits: &Limits) -> ProofResult {
    // match coverage does not depend on the function terminating
    if rules.uncertified.contains(&vc.fun) && vc.kind != VcKind::Exhaustiveness {
        return ProofResult::Unknown {
            reason: UnknownReason::Termination,
            residual: Vec::new(),
        };
    }
    let strategy = match &vc.hint {
        Some(h) => Strategy::Hint(h.steps.clone()),
        None => Strategy::Default {
            induct_on: default_induct_vars(program, rules, vc),
        },
    };
    prove_sequent(program, rules, &Sequent::from_vc(vc), &strategy, limits)
}

pub fn prove_sequent(program: &CoreProgram, rules: &RuleSet, seq: &Sequent, strategy: &Strategy, limits: &Limits) -> ProofResult {
    let mut s = Search {
        k: Kernel::new(program, rules),
        budget: Budget::new(limits),
        induct_depth: limits.induct_depth,
    };
    let (partial, hinted) = match strategy {
        Strategy::Default { induct_on } => (s.run_default(seq, induct_on), false),
        Strategy::Hint(steps) => match s.run_hint(seq, steps) {
            Ok(p) => (p, true),
            Err((_, residual)) => {
                return ProofResult::Unknown {
                    reason: s.budget.exhausted.unwrap_or(UnknownReason::HintFailed),
                    residual,
                }
            }
        },
    };
    if partial.open.is_empty() && partial.proof.count_open() == 0 {
        if check_trace(program, rules, seq, &partial.proof).is_ok() {
            return ProofResult::Proved(partial.proof);
        }
        return ProofResult::Unknown {
            reason: UnknownReason::NoProgress,
            residual: vec![seq.clone()],
        };
    }
    let reason = match s.budget.exhausted {
        Some(r) => r,
        None if hinted => UnknownReason::HintFailed,
        None => UnknownReason::NoProgress,
    };
    ProofResult::Unknown {
        reason,
        residual: partial.open,
    }
}

/// Proves the base library's `.holds` lemmas in file order, registering
/// each proved, non-permutative one as a left-to-right rewrite rule.
pub fn prove_lemmas(program: &CoreProgram, rules: &mut RuleSet, limits: &Limits) -> Vec<(Name, ProofResult)> {
    let mut out = Vec::new();
    for f in program.functions.iter().filter(|f| f.origin == crate::surface::ast::Origin::Base && f.holds) {
        let Ok(vcs) = generate_vcs(program, f) else {
            continue;
        };
        let Some(vc) = vcs.iter().find(|v| v.kind == VcKind::Holds) else {
            continue;
        };
        let r = prove(program, rules, vc, limits);
        if r.is_proved() {
            let vars = f.params.iter().map(|(n, _)| n.clone()).collect();
            let premises = f.pre.iter().cloned().collect();
            if let Some(rule) = Rule::orient(RuleId::Lemma(f.name.clone()), vars, premises, &f.body, false) {
                if !rule.is_permutative() {
                    rules.add_lemma(rule);
                }
            }
        }
        out.push((f.name.clone(), r));
    }
    out
}

fn int_lits(p: &Pattern, out: &mut BTreeSet<num_bigint::BigInt>) {
    match p {
        Pattern::Int(k) => {
            out.insert(k.clone());
        }
        Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps.iter().for_each(|q| int_lits(q, out)),
        _ => {}
    }
}
