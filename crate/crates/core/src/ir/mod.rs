//! Typed core IR: datatypes, functions with contracts, expressions.

pub mod elab;
pub mod eval;
pub mod typeck;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::surface::ast::Origin;
use crate::surface::{HygienicName, NameKind, NameTable, SourceSpan};

pub use elab::elaborate;
pub use eval::{eval, EvalError, Value};

pub type Name = HygienicName;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Type {
    Var(Name),
    Data(Name, Vec<Type>),
    Int,
    Bool,
    Tuple(Vec<Type>),
    Fun(Vec<Type>, Box<Type>),
    /// Unification variable; never survives elaboration.
    Meta(u32),
}

impl Type {
    pub fn subst(&self, m: &HashMap<Name, Type>) -> Type {
        match self {
            Type::Var(v) => m.get(v).cloned().unwrap_or_else(|| self.clone()),
            Type::Data(n, args) => Type::Data(n.clone(), args.iter().map(|a| a.subst(m)).collect()),
            Type::Tuple(ts) => Type::Tuple(ts.iter().map(|a| a.subst(m)).collect()),
            Type::Fun(ps, r) => Type::Fun(ps.iter().map(|a| a.subst(m)).collect(), Box::new(r.subst(m))),
            Type::Int | Type::Bool | Type::Meta(_) => self.clone(),
        }
    }

    pub fn datatype(&self) -> Option<&Name> {
        match self {
            Type::Data(n, _) => Some(n),
            _ => None,
        }
    }

    pub fn type_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Type::Var(v) => {
                out.insert(v.clone());
            }
            Type::Data(_, ts) | Type::Tuple(ts) => ts.iter().for_each(|t| t.type_vars(out)),
            Type::Fun(ps, r) => {
                ps.iter().for_each(|t| t.type_vars(out));
                r.type_vars(out);
            }
            _ => {}
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Var(v) => write!(f, "{v}"),
            Type::Data(n, args) if args.is_empty() => write!(f, "{n}"),
            Type::Data(n, args) => {
                write!(f, "{n}[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
            Type::Int => write!(f, "Int"),
            Type::Bool => write!(f, "Bool"),
            Type::Tuple(ts) => {
                write!(f, "(")?;
                for (i, a) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Type::Fun(ps, r) => {
                write!(f, "((")?;
                for (i, a) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ") => {r})")
            }
            Type::Meta(n) => write!(f, "?{n}"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Neg,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Implies,
}

impl Prim {
    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub | Prim::Neg => "-",
            Prim::Mul => "*",
            Prim::Eq => "==",
            Prim::Ne => "!=",
            Prim::Lt => "<",
            Prim::Le => "<=",
            Prim::Gt => ">",
            Prim::Ge => ">=",
            Prim::And => "&&",
            Prim::Or => "||",
            Prim::Not => "!",
            Prim::Implies => "==>",
        }
    }

    fn prec(self) -> u8 {
        match self {
            Prim::Implies => 1,
            Prim::Or => 2,
            Prim::And => 3,
            Prim::Eq | Prim::Ne => 4,
            Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => 5,
            Prim::Add | Prim::Sub => 6,
            Prim::Mul => 7,
            Prim::Neg | Prim::Not => 8,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Pattern {
    Wild,
    Var(Name),
    Ctor(Name, Vec<Pattern>),
    Tuple(Vec<Pattern>),
    Int(BigInt),
    Bool(bool),
}

impl Pattern {
    pub fn binders(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps.iter().for_each(|p| p.binders(out)),
            _ => {}
        }
    }

    pub fn bound(&self) -> Vec<Name> {
        let mut v = Vec::new();
        self.binders(&mut v);
        v
    }

    pub fn rename(&self, m: &HashMap<Name, Name>) -> Pattern {
        match self {
            Pattern::Var(v) => Pattern::Var(m.get(v).cloned().unwrap_or_else(|| v.clone())),
            Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|p| p.rename(m)).collect()),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|p| p.rename(m)).collect()),
            _ => self.clone(),
        }
    }

    /// The expression denoted by a wildcard-free pattern.
    pub fn to_expr(&self) -> Option<Expr> {
        Some(match self {
            Pattern::Wild => return None,
            Pattern::Var(v) => Expr::Var(v.clone()),
            Pattern::Ctor(c, ps) => Expr::Ctor(c.clone(), ps.iter().map(|p| p.to_expr()).collect::<Option<_>>()?),
            Pattern::Tuple(ps) => Expr::Tuple(ps.iter().map(|p| p.to_expr()).collect::<Option<_>>()?),
            Pattern::Int(n) => Expr::Int(n.clone()),
            Pattern::Bool(b) => Expr::Bool(*b),
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Wild => write!(f, "_"),
            Pattern::Var(v) => write!(f, "{v}"),
            Pattern::Ctor(c, ps) => {
                write!(f, "{c}(")?;
                comma(f, ps)?;
                write!(f, ")")
            }
            Pattern::Tuple(ps) => {
                write!(f, "(")?;
                comma(f, ps)?;
                write!(f, ")")
            }
            Pattern::Int(n) => write!(f, "{n}"),
            Pattern::Bool(b) => write!(f, "{b}"),
        }
    }
}

fn comma<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Expr {
    Var(Name),
    /// A top-level function used as a value.
    Fun(Name),
    Int(BigInt),
    Bool(bool),
    Ctor(Name, Vec<Expr>),
    Call(Name, Vec<Expr>),
    Apply(Box<Expr>, Vec<Expr>),
    Lambda(Vec<(Name, Type)>, Box<Expr>),
    Tuple(Vec<Expr>),
    Proj(Box<Expr>, usize),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Let(Name, Box<Expr>, Box<Expr>),
    Match(Box<Expr>, Vec<(Pattern, Expr)>),
    Prim(Prim, Vec<Expr>),
}

pub fn int(n: i64) -> Expr {
    Expr::Int(BigInt::from(n))
}

impl Expr {
    pub fn prim2(op: Prim, a: Expr, b: Expr) -> Expr {
        Expr::Prim(op, vec![a, b])
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::prim2(Prim::Eq, a, b)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::prim2(Prim::And, a, b)
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Prim(Prim::Not, vec![a])
    }

    pub fn conj(mut es: Vec<Expr>) -> Expr {
        match es.len() {
            0 => Expr::Bool(true),
            1 => es.pop().unwrap(),
            _ => {
                let last = es.pop().unwrap();
                es.into_iter().rev().fold(last, |acc, e| Expr::and(e, acc))
            }
        }
    }

    pub fn disj(mut es: Vec<Expr>) -> Expr {
        match es.len() {
            0 => Expr::Bool(false),
            1 => es.pop().unwrap(),
            _ => {
                let last = es.pop().unwrap();
                es.into_iter().rev().fold(last, |acc, e| Expr::prim2(Prim::Or, e, acc))
            }
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Fun(_) | Expr::Int(_) | Expr::Bool(_) => vec![],
            Expr::Ctor(_, a) | Expr::Call(_, a) | Expr::Tuple(a) | Expr::Prim(_, a) => a.iter().collect(),
            Expr::Apply(f, a) => std::iter::once(&**f).chain(a.iter()).collect(),
            Expr::Lambda(_, b) => vec![b],
            Expr::Proj(e, _) => vec![e],
            Expr::If(c, t, e) => vec![c, t, e],
            Expr::Let(_, v, b) => vec![v, b],
            Expr::Match(s, cs) => std::iter::once(&**s).chain(cs.iter().map(|(_, e)| e)).collect(),
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Var(_) | Expr::Fun(_) | Expr::Int(_) | Expr::Bool(_) => vec![],
            Expr::Ctor(_, a) | Expr::Call(_, a) | Expr::Tuple(a) | Expr::Prim(_, a) => a.iter_mut().collect(),
            Expr::Apply(f, a) => std::iter::once(&mut **f).chain(a.iter_mut()).collect(),
            Expr::Lambda(_, b) => vec![b],
            Expr::Proj(e, _) => vec![e],
            Expr::If(c, t, e) => vec![c, t, e],
            Expr::Let(_, v, b) => vec![v, b],
            Expr::Match(s, cs) => std::iter::once(&mut **s).chain(cs.iter_mut().map(|(_, e)| e)).collect(),
        }
    }

    /// Names bound by this node for the child at position `i` of `children()`.
    pub fn binders_for_child(&self, i: usize) -> Vec<Name> {
        match self {
            Expr::Lambda(ps, _) => ps.iter().map(|(n, _)| n.clone()).collect(),
            Expr::Let(n, _, _) if i == 1 => vec![n.clone()],
            Expr::Match(_, cs) if i >= 1 => cs[i - 1].0.bound(),
            _ => vec![],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            _ => {
                for (i, c) in self.children().into_iter().enumerate() {
                    let b = self.binders_for_child(i);
                    let n = bound.len();
                    bound.extend(b);
                    c.collect_free(bound, out);
                    bound.truncate(n);
                }
            }
        }
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Var(v) | Expr::Fun(v) => {
                out.insert(v.clone());
            }
            Expr::Lambda(ps, _) => out.extend(ps.iter().map(|(n, _)| n.clone())),
            Expr::Let(n, _, _) => {
                out.insert(n.clone());
            }
            Expr::Match(_, cs) => cs.iter().for_each(|(p, _)| out.extend(p.bound())),
            _ => {}
        }
        for c in self.children() {
            c.all_names(out);
        }
    }

    pub fn calls(&self, out: &mut BTreeSet<Name>) {
        match self {
            Expr::Call(f, _) | Expr::Fun(f) => {
                out.insert(f.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.calls(out);
        }
    }

    pub fn mentions_var(&self, v: &Name) -> bool {
        self.free_vars().contains(v)
    }

    pub fn is_value_shape(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Bool(_) => true,
            Expr::Ctor(_, a) | Expr::Tuple(a) => a.iter().all(|e| e.is_value_shape()),
            _ => false,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Prim(p, a) if a.len() == 2 || matches!(p, Prim::Neg | Prim::Not) => p.prec(),
            Expr::Lambda(..) | Expr::If(..) | Expr::Let(..) | Expr::Match(..) => 0,
            _ => 10,
        }
    }
}

/// Capture-avoiding simultaneous substitution of free variables.
pub fn substitute(e: &Expr, bindings: &HashMap<Name, Expr>) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let mut avoid = BTreeSet::new();
    for v in bindings.values() {
        avoid.extend(v.free_vars());
    }
    let mut names = BTreeSet::new();
    e.all_names(&mut names);
    for v in bindings.values() {
        v.all_names(&mut names);
    }
    let mut fresh = FreshNames::from_names(names.iter());
    subst_rec(e, bindings, &avoid, &mut fresh)
}

/// Substitution with an externally managed fresh-name supply.
pub fn substitute_with(e: &Expr, bindings: &HashMap<Name, Expr>, fresh: &mut FreshNames) -> Expr {
    if bindings.is_empty() {
        return e.clone();
    }
    let mut avoid = BTreeSet::new();
    for v in bindings.values() {
        avoid.extend(v.free_vars());
    }
    let mut names = BTreeSet::new();
    e.all_names(&mut names);
    fresh.observe(names.iter());
    subst_rec(e, bindings, &avoid, fresh)
}

fn subst_rec(e: &Expr, b: &HashMap<Name, Expr>, avoid: &BTreeSet<Name>, fresh: &mut FreshNames) -> Expr {
    match e {
        Expr::Var(v) => b.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Fun(_) | Expr::Int(_) | Expr::Bool(_) => e.clone(),
        Expr::Ctor(c, a) => Expr::Ctor(c.clone(), a.iter().map(|x| subst_rec(x, b, avoid, fresh)).collect()),
        Expr::Call(c, a) => Expr::Call(c.clone(), a.iter().map(|x| subst_rec(x, b, avoid, fresh)).collect()),
        Expr::Tuple(a) => Expr::Tuple(a.iter().map(|x| subst_rec(x, b, avoid, fresh)).collect()),
        Expr::Prim(p, a) => Expr::Prim(*p, a.iter().map(|x| subst_rec(x, b, avoid, fresh)).collect()),
        Expr::Apply(f, a) => Expr::Apply(
            Box::new(subst_rec(f, b, avoid, fresh)),
            a.iter().map(|x| subst_rec(x, b, avoid, fresh)).collect(),
        ),
        Expr::Proj(x, k) => Expr::Proj(Box::new(subst_rec(x, b, avoid, fresh)), *k),
        Expr::If(c, t, f) => Expr::If(
            Box::new(subst_rec(c, b, avoid, fresh)),
            Box::new(subst_rec(t, b, avoid, fresh)),
            Box::new(subst_rec(f, b, avoid, fresh)),
        ),
        Expr::Lambda(ps, body) => {
            let names: Vec<Name> = ps.iter().map(|(n, _)| n.clone()).collect();
            let (ren, inner) = enter_binders(&names, b, avoid, fresh);
            let ps = ps
                .iter()
                .map(|(n, t)| (ren.get(n).cloned().unwrap_or_else(|| n.clone()), t.clone()))
                .collect();
            Expr::Lambda(ps, Box::new(subst_rec(body, &inner, avoid, fresh)))
        }
        Expr::Let(n, v, body) => {
            let v = subst_rec(v, b, avoid, fresh);
            let (ren, inner) = enter_binders(std::slice::from_ref(n), b, avoid, fresh);
            let n2 = ren.get(n).cloned().unwrap_or_else(|| n.clone());
            Expr::Let(n2, Box::new(v), Box::new(subst_rec(body, &inner, avoid, fresh)))
        }
        Expr::Match(s, cs) => {
            let s = subst_rec(s, b, avoid, fresh);
            let cs = cs
                .iter()
                .map(|(p, rhs)| {
                    let (ren, inner) = enter_binders(&p.bound(), b, avoid, fresh);
                    (p.rename(&ren), subst_rec(rhs, &inner, avoid, fresh))
                })
                .collect();
            Expr::Match(Box::new(s), cs)
        }
    }
}

/// Drops shadowed bindings and renames binders that would capture.
fn enter_binders(
    names: &[Name],
    b: &HashMap<Name, Expr>,
    avoid: &BTreeSet<Name>,
    fresh: &mut FreshNames,
) -> (HashMap<Name, Name>, HashMap<Name, Expr>) {
    let mut inner = b.clone();
    let mut ren = HashMap::new();
    for n in names {
        inner.remove(n);
    }
    for n in names {
        if avoid.contains(n) && !inner.is_empty() {
            let n2 = fresh.fresh(n);
            inner.insert(n.clone(), Expr::Var(n2.clone()));
            ren.insert(n.clone(), n2);
        }
    }
    (ren, inner)
}

/// Fresh hygienic names: per base text, one past the largest suffix seen.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    next: HashMap<std::sync::Arc<str>, u32>,
}

impl FreshNames {
    pub fn from_names<'a>(names: impl Iterator<Item = &'a Name>) -> Self {
        let mut f = FreshNames::default();
        f.observe(names);
        f
    }

    pub fn observe<'a>(&mut self, names: impl Iterator<Item = &'a Name>) {
        for n in names {
            let e = self.next.entry(n.base.clone()).or_insert(0);
            *e = (*e).max(n.suffix + 1);
        }
    }

    pub fn fresh(&mut self, like: &Name) -> Name {
        self.fresh_text(&like.base, like.kind)
    }

    pub fn fresh_text(&mut self, base: &str, kind: NameKind) -> Name {
        let e = self.next.entry(std::sync::Arc::from(base)).or_insert(0);
        let n = HygienicName::new(base, *e, kind);
        *e += 1;
        n
    }

    pub fn fresh_var(&mut self, base: &str) -> Name {
        self.fresh_text(base, NameKind::Variable)
    }
}

/// Structural equality up to renaming of bound variables.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    alpha_rec(a, b, &mut Vec::new())
}

fn lookup_pair(env: &[(Name, Name)], a: &Name, b: &Name) -> bool {
    for (x, y) in env.iter().rev() {
        if x == a || y == b {
            return x == a && y == b;
        }
    }
    a == b
}

fn alpha_pat(p: &Pattern, q: &Pattern, env: &mut Vec<(Name, Name)>) -> bool {
    match (p, q) {
        (Pattern::Wild, Pattern::Wild) => true,
        (Pattern::Var(x), Pattern::Var(y)) => {
            env.push((x.clone(), y.clone()));
            true
        }
        (Pattern::Ctor(c, ps), Pattern::Ctor(d, qs)) => {
            c == d && ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| alpha_pat(p, q, env))
        }
        (Pattern::Tuple(ps), Pattern::Tuple(qs)) => {
            ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| alpha_pat(p, q, env))
        }
        (Pattern::Int(a), Pattern::Int(b)) => a == b,
        (Pattern::Bool(a), Pattern::Bool(b)) => a == b,
        _ => false,
    }
}

fn alpha_rec(a: &Expr, b: &Expr, env: &mut Vec<(Name, Name)>) -> bool {
    let all = |xs: &[Expr], ys: &[Expr], env: &mut Vec<(Name, Name)>| {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_rec(x, y, env))
    };
    match (a, b) {
        (Expr::Var(x), Expr::Var(y)) => lookup_pair(env, x, y),
        (Expr::Fun(x), Expr::Fun(y)) => x == y,
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Bool(x), Expr::Bool(y)) => x == y,
        (Expr::Ctor(c, xs), Expr::Ctor(d, ys)) | (Expr::Call(c, xs), Expr::Call(d, ys)) => {
            c == d && all(xs, ys, env)
        }
        (Expr::Tuple(xs), Expr::Tuple(ys)) => all(xs, ys, env),
        (Expr::Prim(p, xs), Expr::Prim(q, ys)) => p == q && all(xs, ys, env),
        (Expr::Apply(f, xs), Expr::Apply(g, ys)) => alpha_rec(f, g, env) && all(xs, ys, env),
        (Expr::Proj(x, i), Expr::Proj(y, j)) => i == j && alpha_rec(x, y, env),
        (Expr::If(c1, t1, e1), Expr::If(c2, t2, e2)) => {
            alpha_rec(c1, c2, env) && alpha_rec(t1, t2, env) && alpha_rec(e1, e2, env)
        }
        (Expr::Lambda(ps, x), Expr::Lambda(qs, y)) => {
            if ps.len() != qs.len() || ps.iter().zip(qs).any(|(p, q)| p.1 != q.1) {
                return false;
            }
            let n = env.len();
            env.extend(ps.iter().zip(qs).map(|(p, q)| (p.0.clone(), q.0.clone())));
            let r = alpha_rec(x, y, env);
            env.truncate(n);
            r
        }
        (Expr::Let(n1, v1, b1), Expr::Let(n2, v2, b2)) => {
            if !alpha_rec(v1, v2, env) {
                return false;
            }
            env.push((n1.clone(), n2.clone()));
            let r = alpha_rec(b1, b2, env);
            env.pop();
            r
        }
        (Expr::Match(s1, c1), Expr::Match(s2, c2)) => {
            if !alpha_rec(s1, s2, env) || c1.len() != c2.len() {
                return false;
            }
            c1.iter().zip(c2).all(|((p, x), (q, y))| {
                let n = env.len();
                let r = alpha_pat(p, q, env) && alpha_rec(x, y, env);
                env.truncate(n);
                r
            })
        }
        _ => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.prec() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Var(v) | Expr::Fun(v) => write!(f, "{v}"),
            Expr::Int(n) if n.sign() == num_bigint::Sign::Minus => write!(f, "({n})"),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Ctor(c, a) | Expr::Call(c, a) => {
                write!(f, "{c}(")?;
                comma(f, a)?;
                write!(f, ")")
            }
            Expr::Apply(g, a) => {
                paren(f, g, 10)?;
                write!(f, "(")?;
                comma(f, a)?;
                write!(f, ")")
            }
            Expr::Lambda(ps, b) => {
                write!(f, "(")?;
                for (i, (n, t)) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}: {t}")?;
                }
                write!(f, ") => {b}")
            }
            Expr::Tuple(a) => {
                write!(f, "(")?;
                comma(f, a)?;
                write!(f, ")")
            }
            Expr::Proj(e, k) => {
                paren(f, e, 10)?;
                write!(f, "._{}", k + 1)
            }
            Expr::If(c, t, e) => write!(f, "if ({c}) {t} else {e}"),
            Expr::Let(n, v, b) => write!(f, "{{ val {n} = {v}; {b} }}"),
            Expr::Match(s, cs) => {
                paren(f, s, 10)?;
                write!(f, " match {{")?;
                for (p, e) in cs {
                    write!(f, " case {p} => {e}")?;
                }
                write!(f, " }}")
            }
            Expr::Prim(p, a) if a.len() == 1 => {
                write!(f, "{}", p.symbol())?;
                paren(f, &a[0], 9)
            }
            Expr::Prim(p, a) => {
                let q = p.prec();
                // left-associative arithmetic, everything else parenthesized
                let (lmin, rmin) = match p {
                    Prim::Add | Prim::Mul | Prim::And | Prim::Or => (q, q + 1),
                    Prim::Sub => (q, q + 1),
                    Prim::Implies => (q + 1, q),
                    _ => (q + 1, q + 1),
                };
                paren(f, &a[0], lmin)?;
                write!(f, " {} ", p.symbol())?;
                paren(f, &a[1], rmin)
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CtorDef {
    pub name: Name,
    pub fields: Vec<(String, Type)>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DataTypeDef {
    pub name: Name,
    pub typarams: Vec<Name>,
    pub ctors: Vec<CtorDef>,
    pub origin: Origin,
    pub span: SourceSpan,
}

impl DataTypeDef {
    pub fn self_type(&self) -> Type {
        Type::Data(self.name.clone(), self.typarams.iter().cloned().map(Type::Var).collect())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunDef {
    pub name: Name,
    pub typarams: Vec<Name>,
    pub params: Vec<(Name, Type)>,
    pub ret: Type,
    pub pre: Option<Expr>,
    pub body: Expr,
    /// Result binder and predicate.
    pub post: Option<(Name, Expr)>,
    pub holds: bool,
    pub proof_hint: Option<String>,
    pub library: Option<String>,
    pub span: SourceSpan,
    pub origin: Origin,
}

impl FunDef {
    pub fn fun_type(&self) -> Type {
        Type::Fun(self.params.iter().map(|(_, t)| t.clone()).collect(), Box::new(self.ret.clone()))
    }

    pub fn call_expr(&self) -> Expr {
        Expr::Call(self.name.clone(), self.params.iter().map(|(n, _)| Expr::Var(n.clone())).collect())
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoreProgram {
    pub datatypes: Vec<DataTypeDef>,
    pub functions: Vec<FunDef>,
    pub name_table: NameTable,
    fun_index: BTreeMap<Name, usize>,
    ctor_index: BTreeMap<Name, (usize, usize)>,
    dt_index: BTreeMap<Name, usize>,
}

impl CoreProgram {
    pub fn new(datatypes: Vec<DataTypeDef>, functions: Vec<FunDef>, name_table: NameTable) -> Self {
        let mut p = CoreProgram {
            datatypes,
            functions,
            name_table,
            ..Default::default()
        };
        p.reindex();
        p
    }

    pub fn reindex(&mut self) {
        self.fun_index = self.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect();
        self.dt_index = self.datatypes.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect();
        self.ctor_index.clear();
        for (i, d) in self.datatypes.iter().enumerate() {
            for (j, c) in d.ctors.iter().enumerate() {
                self.ctor_index.insert(c.name.clone(), (i, j));
            }
        }
    }

    pub fn fun(&self, n: &Name) -> Option<&FunDef> {
        self.fun_index.get(n).map(|&i| &self.functions[i])
    }

    pub fn datatype(&self, n: &Name) -> Option<&DataTypeDef> {
        self.dt_index.get(n).map(|&i| &self.datatypes[i])
    }

    pub fn ctor(&self, n: &Name) -> Option<(&DataTypeDef, &CtorDef)> {
        self.ctor_index.get(n).map(|&(i, j)| (&self.datatypes[i], &self.datatypes[i].ctors[j]))
    }

    pub fn ctor_arity(&self, n: &Name) -> usize {
        self.ctor(n).map(|(_, c)| c.fields.len()).unwrap_or(0)
    }

    /// Field types of constructor `c` when its datatype is instantiated at `args`.
    pub fn ctor_fields_at(&self, c: &Name, args: &[Type]) -> Option<Vec<Type>> {
        let (d, cd) = self.ctor(c)?;
        let m: HashMap<Name, Type> = d.typarams.iter().cloned().zip(args.iter().cloned()).collect();
        Some(cd.fields.iter().map(|(_, t)| t.subst(&m)).collect())
    }

    pub fn user_functions(&self) -> impl Iterator<Item = &FunDef> {
        self.functions.iter().filter(|f| f.origin == Origin::User)
    }

    pub fn find_function(&self, base: &str) -> Option<&FunDef> {
        self.functions
            .iter()
            .find(|f| f.origin == Origin::User && &*f.name.base == base)
            .or_else(|| self.functions.iter().find(|f| &*f.name.base == base))
    }

    /// Every hygienic name in the program, for seeding fresh-name supplies.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for d in &self.datatypes {
            out.insert(d.name.clone());
            out.extend(d.typarams.iter().cloned());
            out.extend(d.ctors.iter().map(|c| c.name.clone()));
        }
        for f in &self.functions {
            out.insert(f.name.clone());
            out.extend(f.typarams.iter().cloned());
            out.extend(f.params.iter().map(|(n, _)| n.clone()));
            f.body.all_names(&mut out);
            if let Some(p) = &f.pre {
                p.all_names(&mut out);
            }
            if let Some((n, e)) = &f.post {
                out.insert(n.clone());
                e.all_names(&mut out);
            }
        }
        out
    }

    pub fn fresh_names(&self) -> FreshNames {
        FreshNames::from_names(self.all_names().iter())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IrError {
    #[error("{span}: type mismatch: {expected} vs {found}")]
    Mismatch {
        span: SourceSpan,
        expected: String,
        found: String,
    },
    #[error("{span}: unknown constructor `{name}`")]
    UnknownConstructor { span: SourceSpan, name: String },
    #[error("{span}: `{name}` expects {expected} arguments, got {found}")]
    Arity {
        span: SourceSpan,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{span}: {message}")]
    Other { span: SourceSpan, message: String },
}

impl IrError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            IrError::Mismatch { span, .. }
            | IrError::UnknownConstructor { span, .. }
            | IrError::Arity { span, .. }
            | IrError::Other { span, .. } => span,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str, n: u32) -> Name {
        HygienicName::new(s, n, NameKind::Variable)
    }

    #[test]
    fn substitute_replaces() {
        let x = v("x", 0);
        let e = Expr::prim2(Prim::Add, Expr::Var(x.clone()), int(1));
        let m = HashMap::from([(x, int(2))]);
        assert_eq!(substitute(&e, &m), Expr::prim2(Prim::Add, int(2), int(1)));
    }

    #[test]
    fn substitute_avoids_capture() {
        let x = v("x", 0);
        let y = v("y", 0);
        let lam = Expr::Lambda(vec![(y.clone(), Type::Int)], Box::new(Expr::Var(x.clone())));
        let m = HashMap::from([(x, Expr::Var(y.clone()))]);
        match substitute(&lam, &m) {
            Expr::Lambda(ps, body) => {
                assert_ne!(ps[0].0, y);
                assert_eq!(ps[0].0.base, y.base);
                assert_eq!(*body, Expr::Var(y));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn substitute_identity() {
        let f = HygienicName::new("size", 0, NameKind::Function);
        let e = Expr::Call(f, vec![Expr::Var(v("xs", 0))]);
        assert_eq!(substitute(&e, &HashMap::new()), e);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Expr::Lambda(vec![(v("y", 0), Type::Int)], Box::new(Expr::Var(v("y", 0))));
        let b = Expr::Lambda(vec![(v("y", 5), Type::Int)], Box::new(Expr::Var(v("y", 5))));
        let c = Expr::Lambda(vec![(v("y", 5), Type::Int)], Box::new(Expr::Var(v("y", 0))));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn display_minimal_parens() {
        let x = Expr::Var(v("x", 0));
        let e = Expr::prim2(Prim::Ge, Expr::prim2(Prim::Add, int(1), x.clone()), int(0));
        assert_eq!(e.to_string(), "1 + x'0 >= 0");
        let e = Expr::prim2(Prim::Sub, x.clone(), Expr::prim2(Prim::Sub, x, int(1)));
        assert_eq!(e.to_string(), "x'0 - (x'0 - 1)");
    }
}
