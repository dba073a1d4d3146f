//! Top-level pattern equations, match coverage, and the evaluator oracle
//! comparing a function body against its equations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::gen::{self, ValueGen};
use crate::ir::eval::{EvalError, Evaluator, Overrides};
use crate::ir::{substitute_with, CoreProgram, Expr, FreshNames, FunDef, Name, Pattern, Type, Value};

pub const DEFAULT_SPLIT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub fun: Name,
    pub lhs: Vec<Pattern>,
    pub rhs: Expr,
    pub index: usize,
}

impl Equation {
    pub fn lhs_binders(&self) -> Vec<Name> {
        let mut v = Vec::new();
        self.lhs.iter().for_each(|p| p.binders(&mut v));
        v
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.fun)?;
        for (i, p) in self.lhs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") = {}", self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub equations: Vec<Equation>,
    /// Set when overlapping clauses could not be made disjoint (literal
    /// patterns over Int); the equations then rely on first-match order.
    pub order_sensitive: bool,
}

pub fn split_equations(fun: &FunDef, program: &CoreProgram) -> Vec<Equation> {
    let mut fresh = program.fresh_names();
    split_with(fun, program, DEFAULT_SPLIT_LIMIT, &mut fresh).equations
}

pub fn split_with(fun: &FunDef, program: &CoreProgram, limit: usize, fresh: &mut FreshNames) -> SplitResult {
    let mut s = Splitter {
        program,
        fresh,
        order_sensitive: false,
        out: Vec::new(),
    };
    let lhs = fun.params.iter().map(|(n, _)| Pattern::Var(n.clone())).collect();
    s.split(lhs, fun.body.clone(), 0, limit);
    let order_sensitive = s.order_sensitive;
    let equations = s
        .out
        .into_iter()
        .enumerate()
        .map(|(index, (lhs, rhs))| Equation {
            fun: fun.name.clone(),
            lhs,
            rhs,
            index,
        })
        .collect();
    SplitResult {
        equations,
        order_sensitive,
    }
}

type Bindings = HashMap<Name, Expr>;

struct Splitter<'a> {
    program: &'a CoreProgram,
    fresh: &'a mut FreshNames,
    order_sensitive: bool,
    out: Vec<(Vec<Pattern>, Expr)>,
}

fn replace_var(p: &Pattern, v: &Name, with: &Pattern) -> Pattern {
    match p {
        Pattern::Var(x) if x == v => with.clone(),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| replace_var(q, v, with)).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| replace_var(q, v, with)).collect()),
        _ => p.clone(),
    }
}

fn strip_binders(p: &Pattern) -> Pattern {
    match p {
        Pattern::Var(_) => Pattern::Wild,
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(strip_binders).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(strip_binders).collect()),
        _ => p.clone(),
    }
}

fn overlap(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Wild | Pattern::Var(_), _) | (_, Pattern::Wild | Pattern::Var(_)) => true,
        (Pattern::Ctor(c, ps), Pattern::Ctor(d, qs)) => c == d && ps.iter().zip(qs).all(|(a, b)| overlap(a, b)),
        (Pattern::Tuple(ps), Pattern::Tuple(qs)) => ps.iter().zip(qs).all(|(a, b)| overlap(a, b)),
        (Pattern::Int(a), Pattern::Int(b)) => a == b,
        (Pattern::Bool(a), Pattern::Bool(b)) => a == b,
        _ => false,
    }
}

impl Splitter<'_> {
    fn fill_wild(&mut self, p: &Pattern) -> Pattern {
        match p {
            Pattern::Wild => Pattern::Var(self.fresh.fresh_var("uu")),
            Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| self.fill_wild(q)).collect()),
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| self.fill_wild(q)).collect()),
            _ => p.clone(),
        }
    }

    /// `p ∩ q`, keeping the binders of `p`. Assumes the two overlap.
    fn meet(&mut self, p: &Pattern, q: &Pattern, b: &mut Bindings) -> Pattern {
        match (p, q) {
            (_, Pattern::Wild | Pattern::Var(_)) => p.clone(),
            (Pattern::Wild, _) => strip_binders(q),
            (Pattern::Var(x), _) => {
                let filled = self.fill_wild(&strip_binders(q));
                b.insert(x.clone(), filled.to_expr().expect("filled pattern"));
                filled
            }
            (Pattern::Ctor(c, ps), Pattern::Ctor(_, qs)) => {
                Pattern::Ctor(c.clone(), ps.iter().zip(qs).map(|(x, y)| self.meet(x, y, b)).collect())
            }
            (Pattern::Tuple(ps), Pattern::Tuple(qs)) => {
                Pattern::Tuple(ps.iter().zip(qs).map(|(x, y)| self.meet(x, y, b)).collect())
            }
            _ => p.clone(),
        }
    }

    /// Disjoint patterns covering `p \ q`; `None` when the complement is not
    /// expressible as patterns.
    fn diff(&mut self, p: &Pattern, q: &Pattern) -> Option<Vec<(Pattern, Bindings)>> {
        if !overlap(p, q) {
            return Some(vec![(p.clone(), Bindings::new())]);
        }
        match (p, q) {
            (_, Pattern::Wild | Pattern::Var(_)) => Some(vec![]),
            (Pattern::Var(x), _) => {
                let pieces = self.diff(&Pattern::Wild, q)?;
                Some(
                    pieces
                        .into_iter()
                        .map(|(r, mut b)| {
                            let filled = self.fill_wild(&r);
                            b.insert(x.clone(), filled.to_expr().expect("filled pattern"));
                            (filled, b)
                        })
                        .collect(),
                )
            }
            (Pattern::Wild, Pattern::Ctor(c, qs)) => {
                let (d, _) = self.program.ctor(c)?;
                let ctors: Vec<(Name, usize)> = d.ctors.iter().map(|k| (k.name.clone(), k.fields.len())).collect();
                let mut out = Vec::new();
                for (k, n) in ctors {
                    let wide = Pattern::Ctor(k.clone(), vec![Pattern::Wild; n]);
                    if &k == c {
                        debug_assert_eq!(n, qs.len());
                        out.extend(self.diff(&wide, q)?);
                    } else {
                        out.push((wide, Bindings::new()));
                    }
                }
                Some(out)
            }
            (Pattern::Wild, Pattern::Tuple(qs)) => self.diff(&Pattern::Tuple(vec![Pattern::Wild; qs.len()]), q),
            (Pattern::Wild, Pattern::Bool(b)) => Some(vec![(Pattern::Bool(!b), Bindings::new())]),
            (Pattern::Wild, Pattern::Int(_)) => None,
            (Pattern::Ctor(c, ps), Pattern::Ctor(_, qs)) => {
                let parts = self.diff_product(ps, qs)?;
                Some(parts.into_iter().map(|(xs, b)| (Pattern::Ctor(c.clone(), xs), b)).collect())
            }
            (Pattern::Tuple(ps), Pattern::Tuple(qs)) => {
                let parts = self.diff_product(ps, qs)?;
                Some(parts.into_iter().map(|(xs, b)| (Pattern::Tuple(xs), b)).collect())
            }
            // equal literals
            _ => Some(vec![]),
        }
    }

    fn diff_product(&mut self, ps: &[Pattern], qs: &[Pattern]) -> Option<Vec<(Vec<Pattern>, Bindings)>> {
        let mut out = Vec::new();
        let mut prefix: Vec<Pattern> = Vec::new();
        let mut prefix_b = Bindings::new();
        for i in 0..ps.len() {
            for (r, b) in self.diff(&ps[i], &qs[i])? {
                let mut xs = prefix.clone();
                xs.push(r);
                xs.extend(ps[i + 1..].iter().cloned());
                let mut all = prefix_b.clone();
                all.extend(b);
                out.push((xs, all));
            }
            let m = self.meet(&ps[i], &qs[i], &mut prefix_b);
            prefix.push(m);
        }
        Some(out)
    }

    /// Makes clause patterns disjoint, preserving first-match semantics.
    fn complete(&mut self, clauses: &[(Pattern, Expr)]) -> Vec<(usize, Pattern, Bindings)> {
        let mut out = Vec::new();
        for (i, (p, _)) in clauses.iter().enumerate() {
            let mut pieces = vec![(p.clone(), Bindings::new())];
            for (q, _) in &clauses[..i] {
                let mut next = Vec::new();
                for (pp, b) in pieces {
                    match self.diff(&pp, q) {
                        Some(rs) => {
                            for (r, b2) in rs {
                                let mut all = b.clone();
                                all.extend(b2);
                                next.push((r, all));
                            }
                        }
                        None => {
                            self.order_sensitive = true;
                            next.push((pp, b));
                        }
                    }
                }
                pieces = next;
            }
            out.extend(pieces.into_iter().map(|(r, b)| (i, r, b)));
        }
        out
    }

    fn split(&mut self, lhs: Vec<Pattern>, rhs: Expr, depth: usize, limit: usize) {
        let mut bound = Vec::new();
        lhs.iter().for_each(|p| p.binders(&mut bound));
        let target: Option<Vec<Name>> = match &rhs {
            Expr::Match(s, _) if depth < limit => match &**s {
                Expr::Var(v) if bound.contains(v) => Some(vec![v.clone()]),
                Expr::Tuple(es) => {
                    let vs: Vec<Name> = es
                        .iter()
                        .filter_map(|e| match e {
                            Expr::Var(v) if bound.contains(v) => Some(v.clone()),
                            _ => None,
                        })
                        .collect();
                    let distinct: BTreeSet<&Name> = vs.iter().collect();
                    (vs.len() == es.len() && distinct.len() == vs.len()).then_some(vs)
                }
                _ => None,
            },
            _ => None,
        };
        let Some(vars) = target else {
            self.out.push((lhs, rhs));
            return;
        };
        let Expr::Match(scrut, clauses) = rhs else { unreachable!() };
        let tuple = matches!(&*scrut, Expr::Tuple(_));
        for (ci, piece, mut b) in self.complete(&clauses) {
            let clause_rhs = &clauses[ci].1;
            let mut new_lhs = lhs.clone();
            let comps: Vec<Pattern> = if tuple {
                match &piece {
                    Pattern::Tuple(ps) => ps.clone(),
                    Pattern::Var(x) => {
                        b.insert(x.clone(), Expr::Tuple(vars.iter().cloned().map(Expr::Var).collect()));
                        vec![Pattern::Wild; vars.len()]
                    }
                    _ => vec![Pattern::Wild; vars.len()],
                }
            } else {
                vec![piece.clone()]
            };
            let free = clause_rhs.free_vars();
            for (v, comp) in vars.iter().zip(comps) {
                match comp {
                    Pattern::Wild => {}
                    Pattern::Var(x) => {
                        b.insert(x, Expr::Var(v.clone()));
                    }
                    shape => {
                        let mentioned = free.contains(v) || b.values().any(|e| e.mentions_var(v));
                        let shape = if mentioned { self.fill_wild(&shape) } else { shape };
                        if mentioned {
                            let e = shape.to_expr().expect("filled pattern");
                            for val in b.values_mut() {
                                *val = crate::ir::substitute(val, &HashMap::from([(v.clone(), e.clone())]));
                            }
                            b.insert(v.clone(), e);
                        }
                        new_lhs = new_lhs.iter().map(|p| replace_var(p, v, &shape)).collect();
                    }
                }
            }
            let new_rhs = substitute_with(clause_rhs, &b, self.fresh);
            self.split(new_lhs, new_rhs, depth + 1, limit);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchCoverage {
    pub complete: bool,
    pub missing: Vec<Pattern>,
    pub redundant: Vec<usize>,
}

/// Constructor heads available at a type: `None` means infinitely many.
fn signature(program: &CoreProgram, t: &Type) -> Option<Vec<(Pattern, Vec<Type>)>> {
    match t {
        Type::Data(n, args) => {
            let d = program.datatype(n)?;
            Some(
                d.ctors
                    .iter()
                    .map(|c| {
                        let fs = program.ctor_fields_at(&c.name, args).unwrap();
                        (Pattern::Ctor(c.name.clone(), vec![Pattern::Wild; fs.len()]), fs)
                    })
                    .collect(),
            )
        }
        Type::Bool => Some(vec![(Pattern::Bool(false), vec![]), (Pattern::Bool(true), vec![])]),
        Type::Tuple(ts) => Some(vec![(Pattern::Tuple(vec![Pattern::Wild; ts.len()]), ts.clone())]),
        _ => None,
    }
}

fn same_head(a: &Pattern, b: &Pattern) -> bool {
    match (a, b) {
        (Pattern::Ctor(c, _), Pattern::Ctor(d, _)) => c == d,
        (Pattern::Tuple(_), Pattern::Tuple(_)) => true,
        (Pattern::Int(x), Pattern::Int(y)) => x == y,
        (Pattern::Bool(x), Pattern::Bool(y)) => x == y,
        _ => false,
    }
}

fn head_args(p: &Pattern) -> &[Pattern] {
    match p {
        Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps,
        _ => &[],
    }
}

fn is_wild(p: &Pattern) -> bool {
    matches!(p, Pattern::Wild | Pattern::Var(_))
}

/// Rows of `m` specialized to head `h` with `arity` sub-patterns.
fn specialize(m: &[Vec<Pattern>], h: &Pattern, arity: usize) -> Vec<Vec<Pattern>> {
    m.iter()
        .filter_map(|row| {
            let first = &row[0];
            let mut out: Vec<Pattern> = if is_wild(first) {
                vec![Pattern::Wild; arity]
            } else if same_head(first, h) {
                head_args(first).to_vec()
            } else {
                return None;
            };
            out.extend(row[1..].iter().cloned());
            Some(out)
        })
        .collect()
}

fn default_rows(m: &[Vec<Pattern>]) -> Vec<Vec<Pattern>> {
    m.iter().filter(|r| is_wild(&r[0])).map(|r| r[1..].to_vec()).collect()
}

fn heads_in_column(m: &[Vec<Pattern>]) -> Vec<Pattern> {
    let mut hs: Vec<Pattern> = Vec::new();
    for r in m {
        if !is_wild(&r[0]) && !hs.iter().any(|h| same_head(h, &r[0])) {
            hs.push(r[0].clone());
        }
    }
    hs
}

fn rebuild(h: &Pattern, args: Vec<Pattern>) -> Pattern {
    match h {
        Pattern::Ctor(c, _) => Pattern::Ctor(c.clone(), args),
        Pattern::Tuple(_) => Pattern::Tuple(args),
        other => other.clone(),
    }
}

/// Whether row `q` matches some value not matched by any row of `m`.
fn useful(program: &CoreProgram, m: &[Vec<Pattern>], q: &[Pattern], types: &[Type]) -> bool {
    if q.is_empty() {
        return m.is_empty();
    }
    let t = &types[0];
    let sig = signature(program, t);
    if !is_wild(&q[0]) {
        let fields = match (&sig, &q[0]) {
            (Some(sig), h) => sig.iter().find(|(k, _)| same_head(k, h)).map(|(_, f)| f.clone()).unwrap_or_default(),
            (None, _) => vec![],
        };
        let arity = head_args(&q[0]).len();
        let mut ts = fields;
        ts.extend(types[1..].iter().cloned());
        let qs: Vec<Pattern> = head_args(&q[0]).iter().cloned().chain(q[1..].iter().cloned()).collect();
        return useful(program, &specialize(m, &q[0], arity), &qs, &ts);
    }
    let used = heads_in_column(m);
    match &sig {
        Some(sig) if sig.iter().all(|(k, _)| used.iter().any(|h| same_head(h, k))) => sig.iter().any(|(k, fs)| {
            let mut ts = fs.clone();
            ts.extend(types[1..].iter().cloned());
            let qs: Vec<Pattern> = vec![Pattern::Wild; fs.len()].into_iter().chain(q[1..].iter().cloned()).collect();
            useful(program, &specialize(m, k, fs.len()), &qs, &ts)
        }),
        _ => useful(program, &default_rows(m), &q[1..], &types[1..]),
    }
}

/// Witness vectors not matched by any row of `m`.
fn missing(program: &CoreProgram, m: &[Vec<Pattern>], types: &[Type], budget: &mut usize) -> Vec<Vec<Pattern>> {
    if types.is_empty() {
        return if m.is_empty() { vec![vec![]] } else { vec![] };
    }
    if *budget == 0 {
        return vec![];
    }
    *budget -= 1;
    let t = &types[0];
    let sig = signature(program, t);
    let used = heads_in_column(m);
    if let Some(sig) = &sig {
        if sig.iter().all(|(k, _)| used.iter().any(|h| same_head(h, k))) {
            let mut out = Vec::new();
            for (k, fs) in sig {
                let mut ts = fs.clone();
                ts.extend(types[1..].iter().cloned());
                for w in missing(program, &specialize(m, k, fs.len()), &ts, budget) {
                    let (args, rest) = w.split_at(fs.len());
                    let mut row = vec![rebuild(k, args.to_vec())];
                    row.extend(rest.iter().cloned());
                    out.push(row);
                }
            }
            return out;
        }
    }
    let rest = missing(program, &default_rows(m), &types[1..], budget);
    let mut out = Vec::new();
    for w in rest {
        match &sig {
            Some(sig) if !used.is_empty() => {
                for (k, _) in sig {
                    if !used.iter().any(|h| same_head(h, k)) {
                        let mut row = vec![k.clone()];
                        row.extend(w.iter().cloned());
                        out.push(row);
                    }
                }
            }
            _ => {
                let mut row = vec![Pattern::Wild];
                row.extend(w.iter().cloned());
                out.push(row);
            }
        }
    }
    out
}

pub fn check_exhaustive(clauses: &[Pattern], scrutinee_type: &Type, program: &CoreProgram) -> MatchCoverage {
    let types = vec![scrutinee_type.clone()];
    let rows: Vec<Vec<Pattern>> = clauses.iter().map(|p| vec![p.clone()]).collect();
    let mut budget = 10_000;
    let missing: Vec<Pattern> = missing(program, &rows, &types, &mut budget)
        .into_iter()
        .map(|mut w| w.remove(0))
        .collect();
    let redundant = (0..clauses.len())
        .filter(|&i| !useful(program, &rows[..i], &rows[i], &types))
        .collect();
    MatchCoverage {
        complete: missing.is_empty(),
        missing,
        redundant,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub inputs: Vec<Value>,
    pub original: Result<Value, EvalError>,
    pub equations: Result<Value, EvalError>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub agreements: usize,
    pub disagreement: Option<Disagreement>,
    pub vacuous: bool,
}

impl OracleVerdict {
    pub fn agrees(&self) -> bool {
        self.disagreement.is_none()
    }
}

pub const ORACLE_DEPTH: u32 = 5;

/// Compares the body of `original` with first-match dispatch over
/// `equations` on seeded random inputs.
pub fn oracle_equivalence(
    program: &CoreProgram,
    original: &FunDef,
    equations: &[Equation],
    samples: usize,
    seed: u64,
    fuel: u64,
) -> OracleVerdict {
    let mut rng = gen::rng(seed);
    let g = ValueGen::new(program, ORACLE_DEPTH);
    let types: Vec<Type> = original.params.iter().map(|(_, t)| t.clone()).collect();
    let mut overrides = Overrides::new();
    overrides.insert(
        original.name.clone(),
        equations.iter().map(|e| (e.lhs.clone(), e.rhs.clone())).collect(),
    );
    let mut agreements = 0;
    for _ in 0..samples {
        let args = g.args(&types, &mut rng);
        let a = Evaluator::new(program, fuel).call(&original.name, args.clone());
        let mut ev = Evaluator::new(program, fuel);
        ev.overrides = overrides.clone();
        let b = ev.call(&original.name, args.clone());
        let same = match (&a, &b) {
            (Err(EvalError::OutOfFuel), Err(EvalError::OutOfFuel)) => true,
            // fuel is counted per call, so either side may run out first
            (Err(EvalError::OutOfFuel), _) | (_, Err(EvalError::OutOfFuel)) => true,
            _ => a == b,
        };
        if !same {
            return OracleVerdict {
                agreements,
                disagreement: Some(Disagreement {
                    inputs: args,
                    original: a,
                    equations: b,
                }),
                vacuous: false,
            };
        }
        agreements += 1;
    }
    OracleVerdict {
        agreements,
        disagreement: None,
        vacuous: samples == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::elaborate;
    use crate::surface::{parse_program, resolve_names};

    pub const SIZE_SRC: &str = "sealed abstract class List[A]
case class Cons[A](head: A, tail: List[A]) extends List[A]
case class Nil[A]() extends List[A]

def size[A](l: List[A]): BigInt = (l match {
  case Nil => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)
";

    fn prog(src: &str) -> CoreProgram {
        elaborate(&resolve_names(parse_program("t.psc", src).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn size_two_equations() {
        let p = prog(SIZE_SRC);
        let eqs = split_equations(&p.functions[0], &p);
        assert_eq!(eqs.len(), 2);
        assert_eq!(eqs[0].to_string(), "size'0(Nil'0()) = 0");
        assert_eq!(eqs[1].to_string(), "size'0(Cons'0(_, xs'0)) = 1 + size'0(xs'0)");
    }

    #[test]
    fn identity_single_equation() {
        let p = prog("def id(x: BigInt): BigInt = x");
        let eqs = split_equations(&p.functions[0], &p);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].lhs, vec![Pattern::Var(p.functions[0].params[0].0.clone())]);
    }

    #[test]
    fn nested_match_gives_nested_patterns() {
        let p = prog(&format!(
            "{SIZE_SRC}\ndef second(xs: List[BigInt]): BigInt = xs match {{\n  case Cons(x, ys) => ys match {{\n    case Cons(y, zs) => y\n    case Nil() => 0\n  }}\n  case Nil() => 0\n}}"
        ));
        let f = p.functions.iter().find(|f| &*f.name.base == "second").unwrap();
        let eqs = split_equations(f, &p);
        assert_eq!(eqs.len(), 3);
        assert!(eqs[0].to_string().starts_with("second'0(Cons'0(x'0, Cons'0(y'0, zs'0)))"));
        let v = oracle_equivalence(&p, f, &eqs, 300, 7, 10_000);
        assert!(v.agrees(), "{v:?}");
    }

    #[test]
    fn overlapping_clauses_are_completed() {
        let p = prog(&format!(
            "{SIZE_SRC}\ndef f(xs: List[BigInt]): BigInt = xs match {{\n  case Cons(x, Cons(y, t)) => 2\n  case ys => size(ys)\n}}"
        ));
        let f = p.functions.iter().find(|f| &*f.name.base == "f").unwrap();
        let eqs = split_equations(f, &p);
        // Cons(x, Cons(y, t)) | Nil | Cons(_, Nil)
        assert_eq!(eqs.len(), 3, "{eqs:#?}");
        let v = oracle_equivalence(&p, f, &eqs, 500, 1, 10_000);
        assert!(v.agrees(), "{v:?}");
    }

    #[test]
    fn swapped_rhs_is_caught() {
        let p = prog(SIZE_SRC);
        let mut eqs = split_equations(&p.functions[0], &p);
        let (a, b) = (eqs[0].rhs.clone(), eqs[1].rhs.clone());
        eqs[0].rhs = b;
        eqs[1].rhs = a;
        let v = oracle_equivalence(&p, &p.functions[0], &eqs, 100, 3, 10_000);
        assert!(!v.agrees());
    }

    #[test]
    fn zero_samples_is_vacuous() {
        let p = prog(SIZE_SRC);
        let eqs = split_equations(&p.functions[0], &p);
        let v = oracle_equivalence(&p, &p.functions[0], &eqs, 0, 3, 10_000);
        assert!(v.vacuous && v.agrees());
    }

    #[test]
    fn coverage_examples() {
        let p = prog(SIZE_SRC);
        let d = &p.datatypes[0];
        let cons = d.ctors[0].name.clone();
        let nil = d.ctors[1].name.clone();
        let t = Type::Data(d.name.clone(), vec![Type::Int]);
        let both = [
            Pattern::Ctor(nil.clone(), vec![]),
            Pattern::Ctor(cons.clone(), vec![Pattern::Wild, Pattern::Wild]),
        ];
        let c = check_exhaustive(&both, &t, &p);
        assert!(c.complete && c.redundant.is_empty());
        let c = check_exhaustive(&both[1..], &t, &p);
        assert_eq!(c.missing, vec![Pattern::Ctor(nil.clone(), vec![])]);
        let c = check_exhaustive(&[Pattern::Wild, Pattern::Ctor(nil, vec![])], &t, &p);
        assert!(c.complete);
        assert_eq!(c.redundant, vec![1]);
    }
}
