//! Theory documents: datatypes, function equations and VC statements in an
//! Isabelle-like ASCII syntax, for human audit. Equations can be parsed back
//! with [`parse_equation`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::defgraph::{datatype_groups, ComponentOrder};
use crate::ir::{CoreProgram, Expr, Name, Pattern, Prim, Type};
use crate::patcomp::Equation;
use crate::prover::UnknownReason;
use crate::surface::NameKind;
use crate::vcgen::Vc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaStatus {
    Proved,
    Unknown(UnknownReason),
    /// Not attempted in this run.
    Unchecked,
}

impl LemmaStatus {
    fn comment(self) -> String {
        match self {
            LemmaStatus::Proved => "(* proved *)".into(),
            LemmaStatus::Unknown(r) => format!("(* unknown: {r} *)"),
            LemmaStatus::Unchecked => "(* unchecked *)".into(),
        }
    }
}

fn tyvar_name(i: usize) -> String {
    let c = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        format!("'{c}")
    } else {
        format!("'{c}{}", i / 26)
    }
}

fn tyvar_index(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('\'')?;
    let mut cs = rest.chars();
    let c = cs.next().filter(|c| c.is_ascii_lowercase())?;
    let tail: String = cs.collect();
    let k = if tail.is_empty() { 0 } else { tail.parse::<usize>().ok()? };
    Some(k * 26 + (c as u8 - b'a') as usize)
}

/// Type names follow the lower-case convention of the theory language.
fn type_name(n: &Name) -> String {
    let mut cs = n.base.chars();
    let first: String = cs.next().map(|c| c.to_lowercase().collect()).unwrap_or_default();
    format!("{first}{}_{}", cs.as_str(), n.suffix)
}

struct Printer<'a> {
    tyvars: &'a [Name],
}

// precedences: --> 1, | 2, & 3, ~ 4, relations 5, + - 6, * 7, application 9
fn prec(op: Prim) -> (u8, u8, u8) {
    // (level, left context, right context)
    match op {
        Prim::Implies => (1, 2, 1),
        Prim::Or => (2, 3, 2),
        Prim::And => (3, 4, 3),
        Prim::Eq | Prim::Ne | Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => (5, 6, 6),
        Prim::Add | Prim::Sub => (6, 6, 7),
        Prim::Mul => (7, 7, 8),
        Prim::Not | Prim::Neg => (4, 4, 4),
    }
}

fn op_text(op: Prim) -> &'static str {
    match op {
        Prim::Implies => "-->",
        Prim::Or => "|",
        Prim::And => "&",
        Prim::Eq => "=",
        Prim::Ne => "~=",
        Prim::Lt => "<",
        Prim::Le => "<=",
        Prim::Gt => ">",
        Prim::Ge => ">=",
        Prim::Add => "+",
        Prim::Sub => "-",
        Prim::Mul => "*",
        Prim::Not => "~",
        Prim::Neg => "-",
    }
}

impl Printer<'_> {
    fn ty(&self, t: &Type) -> String {
        self.ty_at(t, 0)
    }

    // contexts: 0 top, 1 tuple component, 2 type argument
    fn ty_at(&self, t: &Type, ctx: u8) -> String {
        let paren = |s: String, need: bool| if need { format!("({s})") } else { s };
        match t {
            Type::Int => "int".into(),
            Type::Bool => "bool".into(),
            Type::Var(v) => match self.tyvars.iter().position(|x| x == v) {
                Some(i) => tyvar_name(i),
                None => format!("'{}", v.rendered()),
            },
            Type::Meta(k) => format!("'m{k}"),
            Type::Data(d, args) => match args.len() {
                0 => type_name(d),
                1 => format!("{} {}", self.ty_at(&args[0], 2), type_name(d)),
                _ => {
                    let a: Vec<String> = args.iter().map(|x| self.ty_at(x, 0)).collect();
                    format!("({}) {}", a.join(", "), type_name(d))
                }
            },
            Type::Tuple(ts) => {
                let a: Vec<String> = ts.iter().map(|x| self.ty_at(x, 1)).collect();
                paren(a.join(" * "), ctx >= 1)
            }
            Type::Fun(ps, r) => {
                let lhs = if ps.len() == 1 {
                    self.ty_at(&ps[0], 1)
                } else {
                    let a: Vec<String> = ps.iter().map(|x| self.ty_at(x, 0)).collect();
                    format!("[{}]", a.join(", "))
                };
                paren(format!("{lhs} => {}", self.ty_at(r, 0)), ctx >= 1)
            }
        }
    }

    fn pat(&self, p: &Pattern, atom: bool) -> String {
        match p {
            Pattern::Wild => "_".into(),
            Pattern::Var(n) => n.rendered(),
            Pattern::Int(k) => int_text(k),
            Pattern::Bool(b) => bool_text(*b),
            Pattern::Tuple(ps) => {
                let a: Vec<String> = ps.iter().map(|q| self.pat(q, false)).collect();
                format!("({})", a.join(", "))
            }
            Pattern::Ctor(c, ps) if ps.is_empty() => c.rendered(),
            Pattern::Ctor(c, ps) => {
                let mut s = c.rendered();
                for q in ps {
                    s.push(' ');
                    s.push_str(&self.pat(q, true));
                }
                if atom {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }

    fn apply(&self, head: String, args: &[Expr], ctx: u8) -> String {
        if args.is_empty() {
            return head;
        }
        let mut s = head;
        for a in args {
            s.push(' ');
            s.push_str(&self.expr(a, 10));
        }
        if ctx >= 10 {
            format!("({s})")
        } else {
            s
        }
    }

    fn expr(&self, e: &Expr, ctx: u8) -> String {
        match e {
            Expr::Var(n) | Expr::Fun(n) => n.rendered(),
            Expr::Int(k) => int_text(k),
            Expr::Bool(b) => bool_text(*b),
            Expr::Ctor(c, args) => self.apply(c.rendered(), args, ctx),
            Expr::Call(f, args) => self.apply(f.rendered(), args, ctx),
            Expr::Apply(f, args) => self.apply(self.expr(f, 10), args, ctx),
            Expr::Lambda(ps, b) => {
                let bs: Vec<String> = ps.iter().map(|(n, t)| format!("({}::{})", n.rendered(), self.ty(t))).collect();
                format!("(%{}. {})", bs.join(" "), self.expr(b, 0))
            }
            Expr::Tuple(es) => {
                let a: Vec<String> = es.iter().map(|x| self.expr(x, 0)).collect();
                format!("({})", a.join(", "))
            }
            Expr::Proj(x, k) => {
                let f = match k {
                    0 => "fst".to_string(),
                    1 => "snd".to_string(),
                    _ => format!("proj{}", k + 1),
                };
                self.apply(f, std::slice::from_ref(x), ctx)
            }
            Expr::If(c, t, f) => format!("(if {} then {} else {})", self.expr(c, 0), self.expr(t, 0), self.expr(f, 0)),
            Expr::Let(x, v, b) => format!("(let {} = {} in {})", x.rendered(), self.expr(v, 0), self.expr(b, 0)),
            Expr::Match(s, cs) => {
                let arms: Vec<String> = cs.iter().map(|(p, b)| format!("{} => {}", self.pat(p, false), self.expr(b, 3))).collect();
                format!("(case {} of {})", self.expr(s, 0), arms.join(" | "))
            }
            Expr::Prim(op, a) => {
                let (p, l, r) = prec(*op);
                let s = match (op, a.as_slice()) {
                    (Prim::Not | Prim::Neg, [x]) => {
                        let inner = format!("{} {}", op_text(*op), self.expr(x, l));
                        return if *op == Prim::Neg || ctx > p { format!("({inner})") } else { inner };
                    }
                    (_, [x, y]) => format!("{} {} {}", self.expr(x, l), op_text(*op), self.expr(y, r)),
                    _ => {
                        let parts: Vec<String> = a.iter().map(|x| self.expr(x, 10)).collect();
                        format!("{} {}", op_text(*op), parts.join(" "))
                    }
                };
                if ctx > p {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }
}

fn int_text(k: &BigInt) -> String {
    if k.sign() == num_bigint::Sign::Minus {
        format!("({k})")
    } else {
        k.to_string()
    }
}

fn bool_text(b: bool) -> String {
    if b { "True" } else { "False" }.to_string()
}

/// One equation as it appears inside a `fun` block, without quotes.
pub fn render_equation(program: &CoreProgram, eq: &Equation) -> String {
    let tyvars = program.fun(&eq.fun).map(|f| f.typarams.clone()).unwrap_or_default();
    let p = Printer { tyvars: &tyvars };
    let mut s = eq.fun.rendered();
    for q in &eq.lhs {
        s.push(' ');
        s.push_str(&p.pat(q, true));
    }
    format!("{s} = {}", p.expr(&eq.rhs, 0))
}

pub fn render_vc(program: &CoreProgram, vc: &Vc) -> String {
    let tyvars = program.fun(&vc.fun).map(|f| f.typarams.clone()).unwrap_or_default();
    let p = Printer { tyvars: &tyvars };
    let mut parts: Vec<String> = vc.hypotheses.iter().map(|h| p.expr(h, 0)).collect();
    parts.push(p.expr(&vc.goal, 0));
    parts.join(" ==> ")
}

fn lemma_name(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Renders the program and its VCs. Datatypes come in dependency order,
/// then functions by component, then one lemma per VC in the given order.
pub fn emit_theory(
    name: &str,
    program: &CoreProgram,
    order: &ComponentOrder,
    equations: &BTreeMap<Name, Vec<Equation>>,
    lemmas: &[(Vc, LemmaStatus)],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "theory {}\nimports Main\nbegin\n", lemma_name(name));
    for group in datatype_groups(&program.datatypes) {
        for (i, d) in group.iter().filter_map(|n| program.datatype(n)).enumerate() {
            let p = Printer { tyvars: &d.typarams };
            let params = match d.typarams.len() {
                0 => String::new(),
                1 => format!("{} ", tyvar_name(0)),
                k => format!("({}) ", (0..k).map(tyvar_name).collect::<Vec<_>>().join(", ")),
            };
            // base cases first, as in the usual theory-language listings
            let recursive = |c: &&crate::ir::CtorDef| c.fields.iter().any(|(_, t)| mentions_any(t, &group));
            let (rec, base): (Vec<_>, Vec<_>) = d.ctors.iter().partition(recursive);
            let ctors: Vec<String> = base
                .into_iter()
                .chain(rec)
                .map(|c| {
                    let mut s = c.name.rendered();
                    for (_, t) in &c.fields {
                        let ts = p.ty_at(t, 2);
                        if ts.contains(' ') && !ts.starts_with('(') {
                            let _ = write!(s, " \"{ts}\"");
                        } else {
                            let _ = write!(s, " {ts}");
                        }
                    }
                    s
                })
                .collect();
            let kw = if i == 0 { "datatype" } else { "     and" };
            let _ = writeln!(out, "{kw} {params}{} = {}", type_name(&d.name), ctors.join(" | "));
        }
        out.push('\n');
    }
    for c in &order.components {
        let funs: Vec<_> = c.members.iter().filter_map(|m| program.fun(m)).collect();
        if funs.is_empty() {
            continue;
        }
        for (i, f) in funs.iter().enumerate() {
            let p = Printer { tyvars: &f.typarams };
            let kw = if i == 0 { "fun" } else { "and" };
            let end = if i + 1 == funs.len() { " where" } else { "" };
            let _ = writeln!(out, "{kw} {} :: \"{}\"{end}", f.name.rendered(), p.ty(&curried(f.fun_type())));
        }
        let eqs: Vec<String> = funs
            .iter()
            .flat_map(|f| equations.get(&f.name).into_iter().flatten())
            .map(|e| format!("\"{}\"", render_equation(program, e)))
            .collect();
        let _ = writeln!(out, "{}\n", eqs.join(" |\n"));
    }
    for (vc, status) in lemmas {
        let _ = writeln!(out, "lemma {}: \"{}\" {}", lemma_name(&vc.id), render_vc(program, vc), status.comment());
    }
    if !lemmas.is_empty() {
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

fn mentions_any(t: &Type, names: &[Name]) -> bool {
    match t {
        Type::Data(d, args) => names.contains(d) || args.iter().any(|a| mentions_any(a, names)),
        Type::Tuple(ts) => ts.iter().any(|a| mentions_any(a, names)),
        Type::Fun(ps, r) => ps.iter().any(|a| mentions_any(a, names)) || mentions_any(r, names),
        _ => false,
    }
}

fn curried(t: Type) -> Type {
    match t {
        Type::Fun(ps, r) if ps.len() > 1 => ps.into_iter().rev().fold(*r, |acc, p| Type::Fun(vec![p], Box::new(acc))),
        t => t,
    }
}

// ---- reading equations back ----

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at {pos}: {message}")]
pub struct ReparseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    TyVar(String),
    Int(BigInt),
    Sym(&'static str),
}

const SYMS: [&str; 23] = [
    "-->", "==>", "=>", "~=", "<=", ">=", "::", "(", ")", "[", "]", ",", "|", "&", "~", "=", "<", ">", "+", "-", "*", "%", ".",
];

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ReparseError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '-' && out.last().is_some_and(|(_, t)| *t == Tok::Sym("(")) && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Int(s[start..i].parse().expect("digits"))));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '\'' {
            i += 1;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let w = s[start..i].to_string();
            out.push((start, if c == '\'' { Tok::TyVar(w) } else { Tok::Ident(w) }));
            continue;
        }
        match SYMS.iter().find(|sym| s[i..].starts_with(**sym)) {
            Some(sym) => {
                out.push((i, Tok::Sym(sym)));
                i += sym.len();
            }
            None => {
                return Err(ReparseError {
                    pos: i,
                    message: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    names: &'a HashMap<String, Name>,
    program: &'a CoreProgram,
    tyvars: &'a [Name],
}

type R<T> = Result<T, ReparseError>;

impl Reader<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn err<T>(&self, message: impl Into<String>) -> R<T> {
        Err(ReparseError {
            pos: self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(usize::MAX),
            message: message.into(),
        })
    }

    fn is(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == w)
    }

    fn eat(&mut self, s: &str) -> R<()> {
        if self.is(s) || self.is_word(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {s}"))
        }
    }

    fn name(&mut self) -> R<Name> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                self.resolve(&w)
            }
            _ => self.err("expected a name"),
        }
    }

    fn resolve(&self, w: &str) -> R<Name> {
        if let Some(n) = self.names.get(w) {
            return Ok(n.clone());
        }
        let (base, suffix) = w.rsplit_once('_').ok_or_else(|| ReparseError {
            pos: 0,
            message: format!("{w} has no suffix"),
        })?;
        let k = suffix.parse().map_err(|_| ReparseError {
            pos: 0,
            message: format!("{w} has no numeric suffix"),
        })?;
        Ok(Name::new(base, k, NameKind::Variable))
    }

    fn ty(&mut self) -> R<Type> {
        let lhs = if self.is("[") {
            self.pos += 1;
            let mut ps = vec![self.ty()?];
            while self.is(",") {
                self.pos += 1;
                ps.push(self.ty()?);
            }
            self.eat("]")?;
            self.eat("=>")?;
            return Ok(Type::Fun(ps, Box::new(self.ty()?)));
        } else {
            self.ty_product()?
        };
        if self.is("=>") {
            self.pos += 1;
            return Ok(Type::Fun(vec![lhs], Box::new(self.ty()?)));
        }
        Ok(lhs)
    }

    fn ty_product(&mut self) -> R<Type> {
        let mut ts = vec![self.ty_app()?];
        while self.is("*") {
            self.pos += 1;
            ts.push(self.ty_app()?);
        }
        Ok(if ts.len() == 1 { ts.pop().expect("one") } else { Type::Tuple(ts) })
    }

    fn ty_app(&mut self) -> R<Type> {
        let mut args = match self.peek().cloned() {
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let mut ts = vec![self.ty()?];
                while self.is(",") {
                    self.pos += 1;
                    ts.push(self.ty()?);
                }
                self.eat(")")?;
                ts
            }
            Some(Tok::TyVar(v)) => {
                self.pos += 1;
                let t = match tyvar_index(&v).and_then(|i| self.tyvars.get(i)) {
                    Some(n) => Type::Var(n.clone()),
                    None => return self.err(format!("unknown type variable {v}")),
                };
                vec![t]
            }
            Some(Tok::Ident(w)) if w == "int" || w == "bool" => {
                self.pos += 1;
                vec![if w == "int" { Type::Int } else { Type::Bool }]
            }
            Some(Tok::Ident(_)) => vec![],
            _ => return self.err("expected a type"),
        };
        // postfix datatype applications
        while let Some(Tok::Ident(w)) = self.peek().cloned() {
            let Some(d) = self.program.datatypes.iter().find(|d| type_name(&d.name) == w) else {
                break;
            };
            self.pos += 1;
            args = vec![Type::Data(d.name.clone(), std::mem::take(&mut args))];
        }
        match args.len() {
            1 => Ok(args.pop().expect("one")),
            _ => self.err("malformed type"),
        }
    }

    fn pat(&mut self, atom: bool) -> R<Pattern> {
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                Ok(Pattern::Int(k))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                if let Some(Tok::Int(k)) = self.peek().cloned() {
                    if k.sign() == num_bigint::Sign::Minus {
                        self.pos += 1;
                        self.eat(")")?;
                        return Ok(Pattern::Int(k));
                    }
                }
                let mut ps = vec![self.pat(false)?];
                while self.is(",") {
                    self.pos += 1;
                    ps.push(self.pat(false)?);
                }
                self.eat(")")?;
                Ok(if ps.len() == 1 { ps.pop().expect("one") } else { Pattern::Tuple(ps) })
            }
            Some(Tok::Ident(w)) if w == "_" => {
                self.pos += 1;
                Ok(Pattern::Wild)
            }
            Some(Tok::Ident(w)) if w == "True" || w == "False" => {
                self.pos += 1;
                Ok(Pattern::Bool(w == "True"))
            }
            Some(Tok::Ident(_)) => {
                let n = self.name()?;
                if self.program.ctor(&n).is_some() {
                    let mut args = Vec::new();
                    while !atom && self.starts_pat() {
                        args.push(self.pat(true)?);
                    }
                    Ok(Pattern::Ctor(n, args))
                } else {
                    Ok(Pattern::Var(n))
                }
            }
            _ => self.err("expected a pattern"),
        }
    }

    fn starts_pat(&self) -> bool {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Sym("(")) => true,
            Some(Tok::Ident(w)) => !matches!(w.as_str(), "of" | "then" | "else" | "in"),
            _ => false,
        }
    }

    fn expr(&mut self, min: u8) -> R<Expr> {
        let mut lhs = if self.is("~") {
            self.pos += 1;
            Expr::Prim(Prim::Not, vec![self.expr(4)?])
        } else {
            self.app()?
        };
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(s)) => match *s {
                    "-->" => Prim::Implies,
                    "|" => Prim::Or,
                    "&" => Prim::And,
                    "=" => Prim::Eq,
                    "~=" => Prim::Ne,
                    "<" => Prim::Lt,
                    "<=" => Prim::Le,
                    ">" => Prim::Gt,
                    ">=" => Prim::Ge,
                    "+" => Prim::Add,
                    "-" => Prim::Sub,
                    "*" => Prim::Mul,
                    _ => break,
                },
                _ => break,
            };
            let (p, _, r) = prec(op);
            if p < min {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(r)?;
            lhs = Expr::Prim(op, vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Sym("(")) => true,
            Some(Tok::Ident(w)) => !matches!(w.as_str(), "of" | "then" | "else" | "in"),
            _ => false,
        }
    }

    fn app(&mut self) -> R<Expr> {
        if let Some(Tok::Ident(w)) = self.peek().cloned() {
            if let Some(k) = match w.as_str() {
                "fst" => Some(0),
                "snd" => Some(1),
                _ => w.strip_prefix("proj").and_then(|d| d.parse::<usize>().ok()).map(|d| d - 1),
            } {
                self.pos += 1;
                let x = self.atom()?;
                return Ok(Expr::Proj(Box::new(x), k));
            }
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(match head {
            Expr::Fun(f) => {
                let arity = self.program.fun(&f).map(|d| d.params.len()).unwrap_or(0);
                if args.len() == arity {
                    Expr::Call(f, args)
                } else if args.is_empty() {
                    Expr::Fun(f)
                } else {
                    Expr::Apply(Box::new(Expr::Fun(f)), args)
                }
            }
            Expr::Ctor(c, none) if none.is_empty() => Expr::Ctor(c, args),
            h if args.is_empty() => h,
            h => Expr::Apply(Box::new(h), args),
        })
    }

    fn atom(&mut self) -> R<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                Ok(Expr::Int(k))
            }
            Some(Tok::Ident(w)) => {
                if w == "True" || w == "False" {
                    self.pos += 1;
                    return Ok(Expr::Bool(w == "True"));
                }
                let n = self.name()?;
                if self.program.ctor(&n).is_some() {
                    Ok(Expr::Ctor(n, Vec::new()))
                } else if self.program.fun(&n).is_some() {
                    Ok(Expr::Fun(n))
                } else {
                    Ok(Expr::Var(n))
                }
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.paren_body()?;
                self.eat(")")?;
                Ok(e)
            }
            _ => self.err("expected an expression"),
        }
    }

    fn paren_body(&mut self) -> R<Expr> {
        if let Some(Tok::Int(k)) = self.peek().cloned() {
            if k.sign() == num_bigint::Sign::Minus {
                self.pos += 1;
                return Ok(Expr::Int(k));
            }
        }
        if self.is_word("if") {
            self.pos += 1;
            let c = self.expr(0)?;
            self.eat("then")?;
            let t = self.expr(0)?;
            self.eat("else")?;
            let f = self.expr(0)?;
            return Ok(Expr::If(Box::new(c), Box::new(t), Box::new(f)));
        }
        if self.is_word("let") {
            self.pos += 1;
            let x = self.name()?;
            self.eat("=")?;
            let v = self.expr(0)?;
            self.eat("in")?;
            let b = self.expr(0)?;
            return Ok(Expr::Let(x, Box::new(v), Box::new(b)));
        }
        if self.is_word("case") {
            self.pos += 1;
            let s = self.expr(0)?;
            self.eat("of")?;
            let mut arms = Vec::new();
            loop {
                let p = self.pat(false)?;
                self.eat("=>")?;
                let b = self.expr(3)?;
                arms.push((p, b));
                if self.is("|") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            return Ok(Expr::Match(Box::new(s), arms));
        }
        if self.is("%") {
            self.pos += 1;
            let mut ps = Vec::new();
            while self.is("(") {
                self.pos += 1;
                let n = self.name()?;
                self.eat("::")?;
                let t = self.ty()?;
                self.eat(")")?;
                ps.push((n, t));
            }
            self.eat(".")?;
            let b = self.expr(0)?;
            return Ok(Expr::Lambda(ps, Box::new(b)));
        }
        if self.is("-") {
            self.pos += 1;
            let x = self.expr(4)?;
            return Ok(Expr::Prim(Prim::Neg, vec![x]));
        }
        let mut es = vec![self.expr(0)?];
        while self.is(",") {
            self.pos += 1;
            es.push(self.expr(0)?);
        }
        Ok(if es.len() == 1 { es.pop().expect("one") } else { Expr::Tuple(es) })
    }
}

/// Parses one rendered equation back into its function, patterns and body.
pub fn parse_equation(program: &CoreProgram, text: &str) -> Result<(Name, Vec<Pattern>, Expr), ReparseError> {
    let names: HashMap<String, Name> = program.all_names().into_iter().map(|n| (n.rendered(), n)).collect();
    let toks = lex(text)?;
    let fname = match toks.first() {
        Some((_, Tok::Ident(w))) => names.get(w).cloned(),
        _ => None,
    }
    .ok_or(ReparseError {
        pos: 0,
        message: "expected a function name".into(),
    })?;
    let f = program.fun(&fname).ok_or(ReparseError {
        pos: 0,
        message: format!("{fname} is not a function"),
    })?;
    let mut r = Reader {
        toks,
        pos: 1,
        names: &names,
        program,
        tyvars: &f.typarams,
    };
    let mut lhs = Vec::new();
    while !r.is("=") {
        lhs.push(r.pat(true)?);
    }
    r.eat("=")?;
    let rhs = r.expr(0)?;
    if r.pos != r.toks.len() {
        return r.err("trailing input");
    }
    Ok((fname, lhs, rhs))
}
