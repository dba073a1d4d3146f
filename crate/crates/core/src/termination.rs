//! Lexicographic termination certificates over structural and integer
//! argument measures.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::defgraph::Component;
use crate::ir::{CoreProgram, Expr, Name, Pattern, Prim, Type};
use crate::patcomp::Equation;
use crate::surface::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entry {
    Strict,
    Weak,
    Unknown,
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entry::Strict => "<",
            Entry::Weak => "<=",
            Entry::Unknown => "?",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Total constructor count.
    Size,
    /// Integer value, bounded below by a guard.
    Int,
}

/// One argument position per function of the component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub kind: MeasureKind,
    pub positions: Vec<(Name, usize)>,
}

impl Column {
    pub fn position_of(&self, f: &Name) -> Option<usize> {
        self.positions.iter().find(|(g, _)| g == f).map(|(_, i)| *i)
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.positions.iter().map(|(g, i)| format!("({g}, {i})")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRow {
    pub caller: Name,
    pub equation: usize,
    pub callee: Name,
    /// `None` for a function reference that is not applied.
    pub args: Option<Vec<Expr>>,
    /// Caller arguments as known at the call site.
    pub context: Vec<Pattern>,
    pub guards: Vec<Expr>,
    pub span: SourceSpan,
}

impl fmt::Display for CallRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self.context.iter().map(|p| p.to_string()).collect();
        match &self.args {
            Some(a) => {
                let a: Vec<String> = a.iter().map(|e| e.to_string()).collect();
                write!(f, "{}({}) -> {}({})", self.caller, ctx.join(", "), self.callee, a.join(", "))
            }
            None => write!(f, "{}({}) -> {} (unapplied)", self.caller, ctx.join(", "), self.callee),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecreaseMatrix {
    pub rows: Vec<CallRow>,
    pub columns: Vec<Column>,
    pub entries: Vec<Vec<Entry>>,
    /// Guard-derived lower bound per (row, column), for integer strict entries.
    pub bounds: BTreeMap<(usize, usize), BigInt>,
}

impl DecreaseMatrix {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.columns.iter().enumerate() {
            out.push_str(&format!("  c{j} = {c}{}\n", if c.kind == MeasureKind::Int { " int" } else { "" }));
        }
        for (i, r) in self.rows.iter().enumerate() {
            let es: Vec<String> = self.entries[i].iter().map(|e| format!("{e:>2}")).collect();
            out.push_str(&format!("  r{i} [{}] {r}\n", es.join(" ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowJustification {
    pub row: usize,
    pub strict: usize,
    pub weak_before: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationCert {
    pub component: Vec<Name>,
    /// Column indices into the matrix, in lexicographic priority.
    pub measure: Vec<usize>,
    pub justification: Vec<RowJustification>,
    pub matrix: DecreaseMatrix,
}

impl TerminationCert {
    pub fn measure_columns(&self) -> Vec<&Column> {
        self.measure.iter().map(|&j| &self.matrix.columns[j]).collect()
    }

    pub fn is_vacuous(&self) -> bool {
        self.matrix.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationFailure {
    pub component: Vec<Name>,
    pub residual: Vec<CallRow>,
    pub matrix: DecreaseMatrix,
}

impl fmt::Display for TerminationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.component.iter().map(|n| n.to_string()).collect();
        write!(f, "no lexicographic order for {{{}}}", names.join(", "))?;
        for r in &self.residual {
            write!(f, "; {}: {r}", r.span)?;
        }
        Ok(())
    }
}

fn measure_kind(program: &CoreProgram, t: &Type) -> Option<MeasureKind> {
    match t {
        Type::Int => Some(MeasureKind::Int),
        Type::Data(n, _) if program.datatype(n).is_some() => Some(MeasureKind::Size),
        _ => None,
    }
}

const MAX_COLUMNS: usize = 256;

fn candidate_columns(program: &CoreProgram, funs: &[&crate::ir::FunDef]) -> Vec<Column> {
    let mut out = Vec::new();
    for kind in [MeasureKind::Size, MeasureKind::Int] {
        let choices: Vec<Vec<usize>> = funs
            .iter()
            .map(|f| {
                f.params
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, t))| measure_kind(program, t) == Some(kind))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        // cartesian product, last function varying fastest
        let mut idx = vec![0usize; funs.len()];
        'odometer: loop {
            out.push(Column {
                kind,
                positions: funs.iter().zip(&choices).zip(&idx).map(|((f, c), &k)| (f.name.clone(), c[k])).collect(),
            });
            if out.len() >= MAX_COLUMNS {
                return out;
            }
            for d in (0..funs.len()).rev() {
                idx[d] += 1;
                if idx[d] < choices[d].len() {
                    continue 'odometer;
                }
                idx[d] = 0;
            }
            break;
        }
    }
    out
}

struct RowCollector<'a> {
    members: &'a [Name],
    caller: Name,
    equation: usize,
    span: SourceSpan,
    rows: Vec<CallRow>,
}

fn refine(p: &Pattern, facts: &HashMap<Name, Pattern>, depth: usize) -> Pattern {
    if depth > 32 {
        return p.clone();
    }
    match p {
        Pattern::Var(v) => match facts.get(v) {
            Some(q) => refine(q, facts, depth + 1),
            None => p.clone(),
        },
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| refine(q, facts, depth + 1)).collect()),
        Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| refine(q, facts, depth + 1)).collect()),
        _ => p.clone(),
    }
}

impl RowCollector<'_> {
    fn walk(&mut self, lhs: &[Pattern], e: &Expr, facts: &mut HashMap<Name, Pattern>, guards: &mut Vec<Expr>) {
        match e {
            Expr::Call(g, args) if self.members.contains(g) => {
                self.push(lhs, g, Some(args.clone()), facts, guards);
                args.iter().for_each(|a| self.walk(lhs, a, facts, guards));
            }
            Expr::Fun(g) if self.members.contains(g) => self.push(lhs, g, None, facts, guards),
            Expr::If(c, t, f) => {
                self.walk(lhs, c, facts, guards);
                guards.push((**c).clone());
                self.walk(lhs, t, facts, guards);
                guards.pop();
                guards.push(Expr::not((**c).clone()));
                self.walk(lhs, f, facts, guards);
                guards.pop();
            }
            Expr::Match(s, cs) => {
                self.walk(lhs, s, facts, guards);
                for (p, rhs) in cs {
                    let mut added = Vec::new();
                    match (&**s, p) {
                        (Expr::Var(v), _) if !facts.contains_key(v) => added.push((v.clone(), p.clone())),
                        (Expr::Tuple(es), Pattern::Tuple(ps)) => {
                            for (x, q) in es.iter().zip(ps) {
                                if let Expr::Var(v) = x {
                                    if !facts.contains_key(v) && !matches!(q, Pattern::Wild) {
                                        added.push((v.clone(), q.clone()));
                                    }
                                }
                            }
                        }
                        _ => {}
                    }
                    for (v, q) in &added {
                        facts.insert(v.clone(), q.clone());
                    }
                    self.walk(lhs, rhs, facts, guards);
                    for (v, _) in &added {
                        facts.remove(v);
                    }
                }
            }
            _ => e.children().into_iter().for_each(|c| self.walk(lhs, c, facts, guards)),
        }
    }

    fn push(&mut self, lhs: &[Pattern], g: &Name, args: Option<Vec<Expr>>, facts: &HashMap<Name, Pattern>, guards: &[Expr]) {
        self.rows.push(CallRow {
            caller: self.caller.clone(),
            equation: self.equation,
            callee: g.clone(),
            args,
            context: lhs.iter().map(|p| refine(p, facts, 0)).collect(),
            guards: guards.to_vec(),
            span: self.span.clone(),
        });
    }
}

fn pattern_term_eq(p: &Pattern, e: &Expr) -> bool {
    match (p, e) {
        (Pattern::Var(v), Expr::Var(w)) => v == w,
        (Pattern::Ctor(c, ps), Expr::Ctor(d, es)) | (Pattern::Ctor(c, ps), Expr::Call(d, es)) => {
            c == d && ps.len() == es.len() && ps.iter().zip(es).all(|(a, b)| pattern_term_eq(a, b))
        }
        (Pattern::Tuple(ps), Expr::Tuple(es)) => ps.len() == es.len() && ps.iter().zip(es).all(|(a, b)| pattern_term_eq(a, b)),
        (Pattern::Int(n), Expr::Int(m)) => n == m,
        (Pattern::Bool(a), Expr::Bool(b)) => a == b,
        _ => false,
    }
}

fn strict_subterm(p: &Pattern, e: &Expr) -> bool {
    match p {
        Pattern::Ctor(_, ps) | Pattern::Tuple(ps) => ps.iter().any(|q| pattern_term_eq(q, e) || strict_subterm(q, e)),
        _ => false,
    }
}

/// Lower bound on `v` implied by one guard literal, if any.
fn guard_bound(g: &Expr, v: &Name) -> Option<BigInt> {
    let (neg, g) = match g {
        Expr::Prim(Prim::Not, a) => (true, &a[0]),
        _ => (false, g),
    };
    let Expr::Prim(op, a) = g else { return None };
    if a.len() != 2 {
        return None;
    }
    let is_v = |e: &Expr| matches!(e, Expr::Var(w) if w == v);
    let lit = |e: &Expr| match e {
        Expr::Int(n) => Some(n.clone()),
        Expr::Prim(Prim::Neg, x) => match &x[0] {
            Expr::Int(n) => Some(-n.clone()),
            _ => None,
        },
        _ => None,
    };
    // normalize to `v op c`
    let (op, c) = if is_v(&a[0]) {
        (*op, lit(&a[1])?)
    } else if is_v(&a[1]) {
        let flipped = match op {
            Prim::Lt => Prim::Gt,
            Prim::Le => Prim::Ge,
            Prim::Gt => Prim::Lt,
            Prim::Ge => Prim::Le,
            o => *o,
        };
        (flipped, lit(&a[0])?)
    } else {
        return None;
    };
    let op = if neg {
        match op {
            Prim::Lt => Prim::Ge,
            Prim::Le => Prim::Gt,
            Prim::Gt => Prim::Le,
            Prim::Ge => Prim::Lt,
            Prim::Eq => Prim::Ne,
            Prim::Ne => Prim::Eq,
            o => o,
        }
    } else {
        op
    };
    match op {
        Prim::Ge | Prim::Eq => Some(c),
        Prim::Gt => Some(c + BigInt::one()),
        _ => None,
    }
}

fn guard_literals(g: &Expr, out: &mut Vec<Expr>) {
    match g {
        Expr::Prim(Prim::And, a) => a.iter().for_each(|x| guard_literals(x, out)),
        Expr::Prim(Prim::Not, a) => match &a[0] {
            Expr::Prim(Prim::Or, b) => b.iter().for_each(|x| guard_literals(&Expr::not(x.clone()), out)),
            Expr::Prim(Prim::Not, b) => guard_literals(&b[0], out),
            _ => out.push(g.clone()),
        },
        _ => out.push(g.clone()),
    }
}

fn entry(kind: MeasureKind, lhs: &Pattern, arg: &Expr, guards: &[Expr]) -> (Entry, Option<BigInt>) {
    match kind {
        MeasureKind::Size => {
            if strict_subterm(lhs, arg) {
                (Entry::Strict, None)
            } else if pattern_term_eq(lhs, arg) {
                (Entry::Weak, None)
            } else {
                (Entry::Unknown, None)
            }
        }
        MeasureKind::Int => {
            let Pattern::Var(v) = lhs else {
                return (Entry::Unknown, None);
            };
            if matches!(arg, Expr::Var(w) if w == v) {
                return (Entry::Weak, None);
            }
            let dec = match arg {
                Expr::Prim(Prim::Sub, a) => match (&a[0], &a[1]) {
                    (Expr::Var(w), Expr::Int(k)) if w == v && *k >= BigInt::one() => true,
                    _ => false,
                },
                Expr::Prim(Prim::Add, a) => match (&a[0], &a[1]) {
                    (Expr::Var(w), Expr::Int(k)) if w == v && *k <= -BigInt::one() => true,
                    _ => false,
                },
                _ => false,
            };
            if !dec {
                return (Entry::Unknown, None);
            }
            let mut lits = Vec::new();
            guards.iter().for_each(|g| guard_literals(g, &mut lits));
            match lits.iter().filter_map(|g| guard_bound(g, v)).max() {
                Some(b) => (Entry::Strict, Some(b)),
                None => (Entry::Unknown, None),
            }
        }
    }
}

fn component_funs<'p>(program: &'p CoreProgram, component: &Component) -> Vec<&'p crate::ir::FunDef> {
    component.members.iter().filter_map(|m| program.fun(m)).collect()
}

pub fn decrease_matrix(
    program: &CoreProgram,
    component: &Component,
    equations: &HashMap<Name, Vec<Equation>>,
) -> DecreaseMatrix {
    let funs = component_funs(program, component);
    let mut rows = Vec::new();
    for f in &funs {
        let Some(eqs) = equations.get(&f.name) else { continue };
        for eq in eqs {
            let mut rc = RowCollector {
                members: &component.members,
                caller: f.name.clone(),
                equation: eq.index,
                span: f.span.clone(),
                rows: Vec::new(),
            };
            let mut guards: Vec<Expr> = f.pre.iter().cloned().collect();
            rc.walk(&eq.lhs, &eq.rhs, &mut HashMap::new(), &mut guards);
            rows.extend(rc.rows);
        }
    }
    let columns = candidate_columns(program, &funs);
    let mut entries = Vec::new();
    let mut bounds = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let mut line = Vec::new();
        for (j, c) in columns.iter().enumerate() {
            let e = match (&r.args, c.position_of(&r.caller), c.position_of(&r.callee)) {
                (Some(args), Some(pi), Some(qi)) => {
                    let (e, b) = entry(c.kind, &r.context[pi], &args[qi], &r.guards);
                    if let Some(b) = b {
                        bounds.insert((i, j), b);
                    }
                    e
                }
                _ => Entry::Unknown,
            };
            line.push(e);
        }
        entries.push(line);
    }
    DecreaseMatrix {
        rows,
        columns,
        entries,
        bounds,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexSearch {
    Found(Vec<usize>),
    NoOrderFound { picked: Vec<usize>, residual: Vec<usize> },
}

/// Greedy column selection: each pick must be strict or weak on every
/// remaining row and strict on at least one.
pub fn find_lex_order(m: &DecreaseMatrix) -> LexSearch {
    let mut remaining: Vec<usize> = (0..m.rows.len()).collect();
    let mut picked = Vec::new();
    while !remaining.is_empty() {
        let col = (0..m.columns.len()).find(|&j| {
            !picked.contains(&j)
                && remaining.iter().all(|&i| m.entries[i][j] != Entry::Unknown)
                && remaining.iter().any(|&i| m.entries[i][j] == Entry::Strict)
        });
        match col {
            Some(j) => {
                picked.push(j);
                remaining.retain(|&i| m.entries[i][j] != Entry::Strict);
            }
            None => {
                return LexSearch::NoOrderFound {
                    picked,
                    residual: remaining,
                }
            }
        }
    }
    LexSearch::Found(picked)
}

pub fn certify_termination(
    program: &CoreProgram,
    component: &Component,
    equations: &HashMap<Name, Vec<Equation>>,
) -> Result<TerminationCert, TerminationFailure> {
    let matrix = decrease_matrix(program, component, equations);
    match find_lex_order(&matrix) {
        LexSearch::Found(measure) => {
            let justification = (0..matrix.rows.len())
                .map(|i| {
                    let k = measure.iter().position(|&j| matrix.entries[i][j] == Entry::Strict).unwrap();
                    RowJustification {
                        row: i,
                        strict: measure[k],
                        weak_before: measure[..k].to_vec(),
                    }
                })
                .collect();
            Ok(TerminationCert {
                component: component.members.clone(),
                measure,
                justification,
                matrix,
            })
        }
        LexSearch::NoOrderFound { residual, .. } => Err(TerminationFailure {
            component: component.members.clone(),
            residual: residual.iter().map(|&i| matrix.rows[i].clone()).collect(),
            matrix,
        }),
    }
}

/// Re-checks a certificate against its matrix alone.
pub fn validate_certificate(cert: &TerminationCert) -> Result<(), String> {
    let m = &cert.matrix;
    if cert.justification.len() != m.rows.len() {
        return Err(format!("{} rows but {} justifications", m.rows.len(), cert.justification.len()));
    }
    for j in &cert.measure {
        if *j >= m.columns.len() {
            return Err(format!("measure column {j} out of range"));
        }
    }
    for (i, just) in cert.justification.iter().enumerate() {
        if just.row != i {
            return Err(format!("justification {i} names row {}", just.row));
        }
        let mut decided = false;
        for &j in &cert.measure {
            match m.entries[i][j] {
                Entry::Strict => {
                    if just.strict != j {
                        return Err(format!("row {i}: first strict column is {j}, certificate says {}", just.strict));
                    }
                    decided = true;
                    break;
                }
                Entry::Weak => {
                    if !just.weak_before.contains(&j) {
                        return Err(format!("row {i}: weak column {j} missing from justification"));
                    }
                }
                Entry::Unknown => return Err(format!("row {i}: column {j} is unknown before any strict decrease")),
            }
        }
        if !decided {
            return Err(format!("row {i}: no strict decrease in measure"));
        }
    }
    Ok(())
}

pub fn render_result(r: &Result<TerminationCert, TerminationFailure>) -> String {
    match r {
        Ok(c) if c.is_vacuous() => {
            let names: Vec<String> = c.component.iter().map(|n| n.to_string()).collect();
            format!("{{{}}}: no recursive calls\n", names.join(", "))
        }
        Ok(c) => {
            let names: Vec<String> = c.component.iter().map(|n| n.to_string()).collect();
            let ms: Vec<String> = c.measure_columns().iter().map(|x| x.to_string()).collect();
            format!("{{{}}}: measure [{}]\n{}", names.join(", "), ms.join(", "), c.matrix.render())
        }
        Err(e) => format!("{e}\n{}", e.matrix.render()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defgraph::{call_graph, scc_topo};
    use crate::ir::elaborate;
    use crate::patcomp::split_equations;
    use crate::surface::{parse_program, resolve_names};

    const NAT: &str = "sealed abstract class N
case class Z() extends N
case class S(p: N) extends N
";

    fn certify_all(src: &str) -> Vec<(Vec<String>, Result<TerminationCert, TerminationFailure>)> {
        let p = elaborate(&resolve_names(parse_program("t.psc", src).unwrap()).unwrap()).unwrap();
        let eqs: HashMap<Name, Vec<Equation>> =
            p.functions.iter().map(|f| (f.name.clone(), split_equations(f, &p))).collect();
        scc_topo(&call_graph(&p))
            .components
            .iter()
            .filter(|c| c.members.iter().all(|m| p.fun(m).unwrap().origin == crate::surface::ast::Origin::User))
            .map(|c| {
                (
                    c.members.iter().map(|m| m.base.to_string()).collect(),
                    certify_termination(&p, c, &eqs),
                )
            })
            .collect()
    }

    #[test]
    fn ackermann_order() {
        let src = format!(
            "{NAT}def ack(m: N, n: N): N = m match {{
  case Z() => S(n)
  case S(p) => n match {{
    case Z() => ack(p, S(Z()))
    case S(q) => ack(p, ack(m, q))
  }}
}}"
        );
        let r = certify_all(&src);
        let cert = r[0].1.as_ref().unwrap();
        assert_eq!(cert.matrix.rows.len(), 3);
        let cols: Vec<String> = cert.measure_columns().iter().map(|c| c.to_string()).collect();
        assert_eq!(cols, vec!["(ack'0, 0)", "(ack'0, 1)"]);
        validate_certificate(cert).unwrap();
    }

    #[test]
    fn self_loop_fails() {
        let r = certify_all("def f(x: BigInt): BigInt = f(x)");
        let e = r[0].1.as_ref().unwrap_err();
        assert_eq!(e.residual.len(), 1);
        assert_eq!(e.matrix.entries[0], vec![Entry::Weak]);
    }

    #[test]
    fn even_odd_mutual() {
        let src = format!(
            "{NAT}def even(n: N): Boolean = n match {{
  case Z() => true
  case S(p) => odd(p)
}}
def odd(n: N): Boolean = n match {{
  case Z() => false
  case S(p) => even(p)
}}"
        );
        let r = certify_all(&src);
        assert_eq!(r[0].0, vec!["even", "odd"]);
        let cert = r[0].1.as_ref().unwrap();
        assert_eq!(cert.matrix.rows.len(), 2);
        assert_eq!(cert.measure_columns()[0].positions.len(), 2);
    }

    #[test]
    fn integer_countdown_with_guard() {
        let r = certify_all("def down(n: BigInt): BigInt = if (n <= 0) 0 else down(n - 1)");
        let cert = r[0].1.as_ref().unwrap();
        assert_eq!(cert.matrix.bounds.values().next(), Some(&BigInt::from(1)));
        let r = certify_all("def down(n: BigInt): BigInt = if (n == 5) 0 else down(n - 1)");
        assert!(r[0].1.is_err());
    }

    #[test]
    fn corrupted_certificate_rejected() {
        let src = format!(
            "{NAT}def ack(m: N, n: N): N = m match {{
  case Z() => S(n)
  case S(p) => n match {{
    case Z() => ack(p, S(Z()))
    case S(q) => ack(p, ack(m, q))
  }}
}}"
        );
        let r = certify_all(&src);
        let mut cert = r[0].1.clone().unwrap();
        cert.measure.reverse();
        assert!(validate_certificate(&cert).is_err());
    }
}
