//! Verification conditions from contracts, matches and call sites.

pub mod hint;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::ir::typeck::{pattern_env, type_of};
use crate::ir::{substitute, CoreProgram, Expr, FreshNames, FunDef, Name, Pattern, Type};
use crate::patcomp::{check_exhaustive, MatchCoverage};
use crate::surface::SourceSpan;

pub use hint::{parse_hint, HintError, HintStep, ProofHint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VcKind {
    Postcondition,
    Holds,
    Exhaustiveness,
    PreconditionAtCall,
}

impl VcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VcKind::Postcondition => "postcondition",
            VcKind::Holds => "holds",
            VcKind::Exhaustiveness => "exhaustiveness",
            VcKind::PreconditionAtCall => "precondition_at_call",
        }
    }
}

impl fmt::Display for VcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vc {
    pub id: String,
    pub kind: VcKind,
    pub fun: Name,
    /// Universally quantified variables, parameters first.
    pub fixed: Vec<(Name, Type)>,
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub origin: SourceSpan,
    pub hint: Option<ProofHint>,
}

impl fmt::Display for Vc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fixed: Vec<String> = self.fixed.iter().map(|(n, t)| format!("{n}: {t}")).collect();
        write!(f, "{} [{}] {}\n  for all {}\n", self.id, self.kind, self.origin, fixed.join(", "))?;
        for h in &self.hypotheses {
            writeln!(f, "  assume {h}")?;
        }
        write!(f, "  show {}", self.goal)?;
        if let Some(h) = &self.hint {
            write!(f, "\n  hint {}", h.raw)?;
        }
        Ok(())
    }
}

fn ground_metas(t: &Type) -> Type {
    match t {
        Type::Meta(_) => Type::Int,
        Type::Data(n, a) => Type::Data(n.clone(), a.iter().map(ground_metas).collect()),
        Type::Tuple(a) => Type::Tuple(a.iter().map(ground_metas).collect()),
        Type::Fun(p, r) => Type::Fun(p.iter().map(ground_metas).collect(), Box::new(ground_metas(r))),
        other => other.clone(),
    }
}

/// `s` matches `p`, as a Bool expression.
pub fn matches_pred(s: &Expr, p: &Pattern) -> Expr {
    match p {
        Pattern::Wild | Pattern::Var(_) => Expr::Bool(true),
        _ => Expr::Match(
            Box::new(s.clone()),
            vec![(strip(p), Expr::Bool(true)), (Pattern::Wild, Expr::Bool(false))],
        ),
    }
}

fn strip(p: &Pattern) -> Pattern {
    match p {
        Pattern::Var(_) => Pattern::Wild,
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(strip).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(strip).collect()),
        _ => p.clone(),
    }
}

struct Walker<'p> {
    program: &'p CoreProgram,
    fun: &'p FunDef,
    env: Vec<(Name, Type)>,
    path: Vec<Expr>,
    fresh: FreshNames,
    /// Whether the precondition may be assumed (false inside the precondition
    /// itself and in the postcondition, whose path already carries it).
    assume_pre: bool,
    exhaustiveness: Vec<(Vec<(Name, Type)>, Vec<Expr>, Expr, MatchCoverage)>,
    calls: Vec<(Vec<(Name, Type)>, Vec<Expr>, Expr)>,
}

impl Walker<'_> {
    fn env_map(&self) -> HashMap<Name, Type> {
        self.env.iter().cloned().collect()
    }

    fn type_of(&self, e: &Expr) -> Type {
        ground_metas(&type_of(self.program, &self.env_map(), e).unwrap_or(Type::Int))
    }

    fn fixed_for(&self, es: &[&Expr]) -> Vec<(Name, Type)> {
        let mut free = BTreeSet::new();
        for e in es {
            free.extend(e.free_vars());
        }
        let mut out: Vec<(Name, Type)> = self.fun.params.clone();
        for (n, t) in &self.env {
            if free.contains(n) && !out.iter().any(|(m, _)| m == n) {
                out.push((n.clone(), t.clone()));
            }
        }
        out
    }

    fn hyps(&self) -> Vec<Expr> {
        let mut hyps: Vec<Expr> = self.fun.pre.iter().filter(|_| self.assume_pre).cloned().collect();
        hyps.extend(self.path.iter().cloned());
        hyps
    }

    fn walk(&mut self, e: &Expr) {
        match e {
            Expr::Call(g, args) => {
                args.iter().for_each(|a| self.walk(a));
                let callee = self.program.fun(g).expect("callee");
                if let Some(pre) = &callee.pre {
                    let b: HashMap<Name, Expr> =
                        callee.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
                    let goal = substitute(pre, &b);
                    let hyps = self.hyps();
                    let mut all: Vec<&Expr> = hyps.iter().collect();
                    all.push(&goal);
                    let fixed = self.fixed_for(&all);
                    self.calls.push((fixed, hyps, goal));
                }
            }
            Expr::If(c, t, f) => {
                self.walk(c);
                self.path.push((**c).clone());
                self.walk(t);
                self.path.pop();
                self.path.push(Expr::not((**c).clone()));
                self.walk(f);
                self.path.pop();
            }
            Expr::Let(x, v, b) => {
                self.walk(v);
                let t = self.type_of(v);
                self.env.push((x.clone(), t));
                self.path.push(Expr::eq(Expr::Var(x.clone()), (**v).clone()));
                self.walk(b);
                self.path.pop();
                self.env.pop();
            }
            Expr::Lambda(ps, b) => {
                let n = self.env.len();
                self.env.extend(ps.iter().cloned());
                self.walk(b);
                self.env.truncate(n);
            }
            Expr::Match(s, cs) => {
                self.walk(s);
                let t = self.type_of(s);
                let pats: Vec<Pattern> = cs.iter().map(|(p, _)| p.clone()).collect();
                let cov = check_exhaustive(&pats, &t, self.program);
                if !cov.complete {
                    let goal = Expr::disj(pats.iter().map(|p| matches_pred(s, p)).collect());
                    let hyps = self.hyps();
                    let mut all: Vec<&Expr> = hyps.iter().collect();
                    all.push(&goal);
                    let fixed = self.fixed_for(&all);
                    self.exhaustiveness.push((fixed, hyps, goal, cov));
                }
                for (i, (p, rhs)) in cs.iter().enumerate() {
                    // earlier clauses did not match
                    let missed: Vec<Expr> = pats[..i].iter().map(|q| Expr::not(matches_pred(s, q))).collect();
                    let depth = self.path.len();
                    self.path.extend(missed);
                    let filled = self.fill(p);
                    let n = self.env.len();
                    let mut penv: Vec<(Name, Type)> = pattern_env(self.program, &filled, &t)
                        .map(|m| m.into_iter().map(|(k, v)| (k, ground_metas(&v))).collect())
                        .unwrap_or_default();
                    penv.sort_by(|a, b| a.0.cmp(&b.0));
                    self.env.extend(penv);
                    let cond = filled.to_expr().map(|pe| Expr::eq((**s).clone(), pe));
                    let pushed = cond.is_some() && !matches!(p, Pattern::Var(_));
                    if let Some(c) = cond.filter(|_| pushed) {
                        self.path.push(c);
                    }
                    // a variable clause still names the scrutinee
                    if let Pattern::Var(x) = p {
                        self.path.push(Expr::eq(Expr::Var(x.clone()), (**s).clone()));
                    }
                    self.walk(rhs);
                    self.path.truncate(depth);
                    self.env.truncate(n);
                }
            }
            _ => e.children().into_iter().for_each(|c| self.walk(c)),
        }
    }

    fn fill(&mut self, p: &Pattern) -> Pattern {
        match p {
            Pattern::Wild => Pattern::Var(self.fresh.fresh_var("uu")),
            Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| self.fill(q)).collect()),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| self.fill(q)).collect()),
            _ => p.clone(),
        }
    }
}

/// The postcondition instantiated at the call `f(params)`.
pub fn post_goal(f: &FunDef) -> Option<Expr> {
    let (r, q) = f.post.as_ref()?;
    Some(substitute(q, &HashMap::from([(r.clone(), f.call_expr())])))
}

/// Coverage of every match in `f`'s body, in traversal order.
pub fn match_coverage(program: &CoreProgram, f: &FunDef) -> Vec<MatchCoverage> {
    generate_for(program, f, None)
        .map(|w| w.exhaustiveness.into_iter().map(|(_, _, _, c)| c).collect())
        .unwrap_or_default()
}

fn generate_for<'p>(program: &'p CoreProgram, f: &'p FunDef, fresh: Option<FreshNames>) -> Option<Walker<'p>> {
    let mut w = Walker {
        program,
        fun: f,
        env: f.params.clone(),
        path: Vec::new(),
        fresh: fresh.unwrap_or_else(|| program.fresh_names()),
        assume_pre: false,
        exhaustiveness: Vec::new(),
        calls: Vec::new(),
    };
    if let Some(pre) = &f.pre {
        w.walk(pre);
    }
    w.assume_pre = true;
    w.walk(&f.body);
    w.assume_pre = false;
    if let Some((r, q)) = &f.post {
        w.env.push((r.clone(), f.ret.clone()));
        w.path.extend(f.pre.iter().cloned());
        w.path.push(Expr::eq(Expr::Var(r.clone()), f.call_expr()));
        w.walk(q);
    }
    Some(w)
}

/// VC id prefix for a function: its source name.
pub fn vc_prefix(f: &FunDef) -> String {
    f.name.base.to_string()
}

pub fn generate_vcs(program: &CoreProgram, f: &FunDef) -> Result<Vec<Vc>, HintError> {
    let hint = match &f.proof_hint {
        Some(raw) => Some(parse_hint(raw, &f.name, &program.name_table)?),
        None => None,
    };
    let prefix = vc_prefix(f);
    let mut out = Vec::new();
    let hyps: Vec<Expr> = f.pre.iter().cloned().collect();
    let mut push = |kind: VcKind, index: usize, fixed, hypotheses, goal, hint: Option<ProofHint>| {
        out.push(Vc {
            id: format!("{prefix}.{kind}.{index}"),
            kind,
            fun: f.name.clone(),
            fixed,
            hypotheses,
            goal,
            origin: f.span.clone(),
            hint,
        })
    };
    if let Some(goal) = post_goal(f) {
        push(VcKind::Postcondition, 0, f.params.clone(), hyps.clone(), goal, hint.clone());
    }
    if f.holds {
        push(VcKind::Holds, 0, f.params.clone(), hyps.clone(), f.body.clone(), hint.clone());
    }
    let w = generate_for(program, f, None).expect("walker");
    for (i, (fixed, hyps, goal, _)) in w.exhaustiveness.into_iter().enumerate() {
        push(VcKind::Exhaustiveness, i, fixed, hyps, goal, None);
    }
    for (i, (fixed, hyps, goal)) in w.calls.into_iter().enumerate() {
        push(VcKind::PreconditionAtCall, i, fixed, hyps, goal, None);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::elaborate;
    use crate::surface::{parse_program, resolve_names};

    fn prog(src: &str) -> CoreProgram {
        elaborate(&resolve_names(parse_program("t.psc", src).unwrap()).unwrap()).unwrap()
    }

    const HINTS_SRC: &str = r#"def sumReverse[A](xs: List[Nat]) =
  (listSum(xs) == listSum(xs.reverse)).holds

@proof(method = """(induct "<var xs>", auto)""")
def sumConstant[A](xs: List[A], k: Nat) =
  (listSum(xs.map(_ => k)) == length(xs) * k).holds

@proof(method = "(clarsimp, induct rule: list_induct2, auto)")
def mapFstZip[A, B](xs: List[A], ys: List[B]) = {
  require(length(xs) == length(ys))
  xs.zip(ys).map(_._1)
} ensuring { _ == xs }

def g(xs: List[BigInt], ys: List[BigInt]): List[BigInt] =
  if (length(xs) == length(ys)) mapFstZip(xs, ys) else xs
"#;

    #[test]
    fn size_postcondition() {
        let p = prog(
            "sealed abstract class List[A]
case class Cons[A](head: A, tail: List[A]) extends List[A]
case class Nil[A]() extends List[A]
def size[A](l: List[A]): BigInt = (l match {
  case Nil => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)",
        );
        let vcs = generate_vcs(&p, &p.functions[0]).unwrap();
        assert_eq!(vcs.len(), 1);
        assert_eq!(vcs[0].id, "size.postcondition.0");
        assert_eq!(vcs[0].goal.to_string(), "size'0(l'0) >= 0");
    }

    #[test]
    fn hinted_vcs() {
        let p = prog(HINTS_SRC);
        let f = p.find_function("sumReverse").unwrap();
        let v = generate_vcs(&p, f).unwrap();
        assert_eq!(v[0].kind, VcKind::Holds);
        assert!(v[0].goal.to_string().starts_with("listSum'"));
        let f = p.find_function("sumConstant").unwrap();
        let v = generate_vcs(&p, f).unwrap();
        let h = v[0].hint.as_ref().unwrap();
        assert_eq!(h.steps, vec![HintStep::Induct(f.params[0].0.clone()), HintStep::Auto]);
        let f = p.find_function("mapFstZip").unwrap();
        let v = generate_vcs(&p, f).unwrap();
        assert_eq!(v[0].hint.as_ref().unwrap().steps[1], HintStep::InductRule("list_induct2".into()));
        let g = p.find_function("g").unwrap();
        let v = generate_vcs(&p, g).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, VcKind::PreconditionAtCall);
        assert_eq!(v[0].hypotheses.len(), 1);
        assert!(v[0].goal.to_string().contains("length"));
    }

    #[test]
    fn unresolved_var_in_hint() {
        let p = prog(
            r#"@proof(method = """(induct "<var zz>")""")
def f(xs: List[BigInt]) = (length(xs) == length(xs)).holds"#,
        );
        let e = generate_vcs(&p, p.find_function("f").unwrap()).unwrap_err();
        assert!(e.message.contains("zz"));
        assert_eq!(e.offset, 14);
    }

    #[test]
    fn missing_nil_gives_exhaustiveness_vc() {
        let p = prog("def hd(xs: List[BigInt]): BigInt = xs match { case Cons(x, _) => x }");
        let v = generate_vcs(&p, p.find_function("hd").unwrap()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, VcKind::Exhaustiveness);
        assert_eq!(v[0].fixed.len(), 1);
    }
}
