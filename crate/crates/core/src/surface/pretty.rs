//! Source printer for surface programs. Output re-parses to the same AST up
//! to spans and the names of bound variables.

use std::fmt::Write;

use super::ast::*;
use super::SourceSpan;

pub fn pretty_program(p: &SurfaceProgram) -> String {
    let mut pr = Printer {
        out: String::new(),
        fresh: 0,
    };
    let mut decls: Vec<(u32, u32, bool, usize)> = Vec::new();
    for (i, d) in p.datatypes.iter().enumerate() {
        if d.origin == Origin::User {
            decls.push((d.span.line, d.span.column, true, i));
        }
    }
    for (i, f) in p.functions.iter().enumerate() {
        if f.origin == Origin::User {
            decls.push((f.span.line, f.span.column, false, i));
        }
    }
    decls.sort();
    for (_, _, is_data, i) in decls {
        if is_data {
            pr.datatype(&p.datatypes[i]);
        } else {
            pr.function(&p.functions[i]);
        }
        pr.out.push('\n');
    }
    pr.out
}

struct Printer {
    out: String,
    fresh: u32,
}

fn typarams(ps: &[Ident]) -> String {
    if ps.is_empty() {
        String::new()
    } else {
        format!(
            "[{}]",
            ps.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join(", ")
        )
    }
}

pub fn type_text(t: &SType) -> String {
    match t {
        SType::Named(id, args) if args.is_empty() => id.text.clone(),
        SType::Named(id, args) => format!(
            "{}[{}]",
            id.text,
            args.iter().map(type_text).collect::<Vec<_>>().join(", ")
        ),
        SType::Tuple(ts) => format!(
            "({})",
            ts.iter().map(type_text).collect::<Vec<_>>().join(", ")
        ),
        SType::Fun(ps, r) => format!(
            "(({}) => {})",
            ps.iter().map(type_text).collect::<Vec<_>>().join(", "),
            type_text(r)
        ),
    }
}

impl Printer {
    fn datatype(&mut self, d: &SDataType) {
        let _ = writeln!(
            self.out,
            "sealed abstract class {}{}",
            d.name.text,
            typarams(&d.typarams)
        );
        for c in &d.ctors {
            let fields = c
                .fields
                .iter()
                .map(|(n, t)| format!("{}: {}", n.text, type_text(t)))
                .collect::<Vec<_>>()
                .join(", ");
            let pargs = if c.parent_args.is_empty() {
                String::new()
            } else {
                format!(
                    "[{}]",
                    c.parent_args.iter().map(type_text).collect::<Vec<_>>().join(", ")
                )
            };
            let _ = writeln!(
                self.out,
                "case class {}{}({}) extends {}{}",
                c.name.text,
                typarams(&c.typarams),
                fields,
                d.name.text,
                pargs
            );
        }
    }

    fn function(&mut self, f: &SFun) {
        if let Some(a) = &f.proof {
            let _ = writeln!(self.out, "@proof(method = \"\"\"{}\"\"\")", a.text);
        }
        if let Some(a) = &f.library {
            let _ = writeln!(self.out, "@library(\"{}\")", a.text);
        }
        let params = f
            .params
            .iter()
            .map(|(n, t)| format!("{}: {}", n.text, type_text(t)))
            .collect::<Vec<_>>()
            .join(", ");
        let ret = f
            .ret
            .as_ref()
            .map(|t| format!(": {}", type_text(t)))
            .unwrap_or_default();
        let _ = write!(
            self.out,
            "def {}{}({}){} = ",
            f.name.text,
            typarams(&f.typarams),
            params,
            ret
        );
        let mut body = String::new();
        if let Some(r) = &f.require {
            body.push_str("{ require(");
            body.push_str(&self.expr(r));
            body.push_str("); ");
            body.push_str(&self.expr(&f.body));
            body.push_str(" }");
        } else {
            body.push('(');
            body.push_str(&self.expr(&f.body));
            body.push(')');
        }
        if f.holds {
            body = format!("{body}.holds");
        }
        if let Some(e) = &f.ensuring {
            body = format!("({body}) ensuring ({})", self.expr(e));
        }
        self.out.push_str(&body);
        self.out.push('\n');
    }

    fn pattern(&mut self, p: &SPattern) -> String {
        match &p.kind {
            SPatternKind::Wild => "_".into(),
            SPatternKind::Bind(id) => id.text.clone(),
            SPatternKind::Ctor(id, ps) => format!(
                "{}({})",
                id.text,
                ps.iter().map(|q| self.pattern(q)).collect::<Vec<_>>().join(", ")
            ),
            SPatternKind::Tuple(ps) => format!(
                "({})",
                ps.iter().map(|q| self.pattern(q)).collect::<Vec<_>>().join(", ")
            ),
            SPatternKind::Int(n) => {
                if n.sign() == num_bigint::Sign::Minus {
                    format!("-{}", -n)
                } else {
                    n.to_string()
                }
            }
            SPatternKind::Bool(b) => b.to_string(),
        }
    }

    fn targs(ts: &[SType]) -> String {
        if ts.is_empty() {
            String::new()
        } else {
            format!("[{}]", ts.iter().map(type_text).collect::<Vec<_>>().join(", "))
        }
    }

    fn args(&mut self, args: &[SExpr]) -> String {
        args.iter().map(|a| self.expr(a)).collect::<Vec<_>>().join(", ")
    }

    fn expr(&mut self, e: &SExpr) -> String {
        use SExprKind::*;
        match &e.kind {
            Ident(id, t) => format!("{}{}", id.text, Self::targs(t)),
            Int(n) => {
                if n.sign() == num_bigint::Sign::Minus {
                    format!("(-{})", -n)
                } else {
                    n.to_string()
                }
            }
            Bool(b) => b.to_string(),
            Call(f, t, args) => format!("{}{}({})", f.text, Self::targs(t), self.args(args)),
            Apply(f, args) => format!("({})({})", self.expr(f), self.args(args)),
            Method(r, m, args) => {
                if args.is_empty() {
                    format!("({}).{}", self.expr(r), m.text)
                } else {
                    format!("({}).{}({})", self.expr(r), m.text, self.args(args))
                }
            }
            Proj(r, k) => format!("({})._{}", self.expr(r), k + 1),
            Lambda(ps, body) => {
                let params = ps
                    .iter()
                    .map(|p| {
                        let name = if p.name.text.starts_with("_$") {
                            self.fresh += 1;
                            format!("uu{}", self.fresh)
                        } else {
                            p.name.text.clone()
                        };
                        match &p.ty {
                            Some(t) => format!("{}: {}", name, type_text(t)),
                            None => name,
                        }
                    })
                    .collect::<Vec<_>>();
                // placeholder bodies refer to the renamed params
                let mut renamed = (**body).clone();
                for (p, new) in ps.iter().zip(&params) {
                    if p.name.text.starts_with("_$") {
                        let new = new.split(':').next().unwrap().to_string();
                        rename_refs(&mut renamed, &p.name.text, &new);
                    }
                }
                format!("(({}) => {})", params.join(", "), self.expr(&renamed))
            }
            Tuple(es) => format!("({})", self.args(es)),
            If(c, t, f) => format!(
                "(if ({}) {} else {})",
                self.expr(c),
                self.expr(t),
                self.expr(f)
            ),
            Block(stmts, last) => {
                let mut s = String::from("{ ");
                for st in stmts {
                    match st {
                        Stmt::Val(n, t, v) => {
                            let ty = t.as_ref().map(|t| format!(": {}", type_text(t))).unwrap_or_default();
                            let _ = write!(s, "val {}{} = {}; ", n.text, ty, self.expr(v));
                        }
                        Stmt::Require(c) => {
                            let _ = write!(s, "require({}); ", self.expr(c));
                        }
                    }
                }
                s.push_str(&self.expr(last));
                s.push_str(" }");
                s
            }
            Match(scrut, cases) => {
                let mut s = format!("({} match {{ ", self.expr(scrut));
                for c in cases {
                    let _ = write!(s, "case {} => {} ", self.pattern(&c.pattern), self.expr(&c.body));
                }
                s.push_str("})");
                s
            }
            Binary(op, l, r) => format!("({} {} {})", self.expr(l), op.symbol(), self.expr(r)),
            Unary(UnOp::Not, x) => format!("(!{})", self.expr(x)),
            Unary(UnOp::Neg, x) => format!("(-{})", self.expr(x)),
            Ensuring(a, b) => format!("({}) ensuring ({})", self.expr(a), self.expr(b)),
            Placeholder(_) => "_".into(),
        }
    }
}

fn rename_refs(e: &mut SExpr, from: &str, to: &str) {
    use SExprKind::*;
    match &mut e.kind {
        Ident(id, _) if id.text == from => id.text = to.to_string(),
        Ident(..) | Int(_) | Bool(_) | Placeholder(_) => {}
        Call(f, _, args) => {
            if f.text == from {
                f.text = to.to_string();
            }
            args.iter_mut().for_each(|a| rename_refs(a, from, to));
        }
        Apply(f, args) => {
            rename_refs(f, from, to);
            args.iter_mut().for_each(|a| rename_refs(a, from, to));
        }
        Method(r, _, args) => {
            rename_refs(r, from, to);
            args.iter_mut().for_each(|a| rename_refs(a, from, to));
        }
        Proj(r, _) => rename_refs(r, from, to),
        Lambda(ps, b) => {
            if ps.iter().all(|p| p.name.text != from) {
                rename_refs(b, from, to);
            }
        }
        Tuple(es) => es.iter_mut().for_each(|a| rename_refs(a, from, to)),
        If(c, t, f) => {
            rename_refs(c, from, to);
            rename_refs(t, from, to);
            rename_refs(f, from, to);
        }
        Block(stmts, last) => {
            for s in stmts {
                match s {
                    Stmt::Val(_, _, v) | Stmt::Require(v) => rename_refs(v, from, to),
                }
            }
            rename_refs(last, from, to);
        }
        Match(s, cases) => {
            rename_refs(s, from, to);
            cases.iter_mut().for_each(|c| rename_refs(&mut c.body, from, to));
        }
        Binary(_, l, r) => {
            rename_refs(l, from, to);
            rename_refs(r, from, to);
        }
        Unary(_, x) => rename_refs(x, from, to),
        Ensuring(a, b) => {
            rename_refs(a, from, to);
            rename_refs(b, from, to);
        }
    }
}

/// Erases spans and renames bound variables canonically, so that two resolved
/// programs compare equal iff they are alpha-equivalent.
pub fn canonical_form(p: &SurfaceProgram) -> SurfaceProgram {
    let mut q = p.clone();
    let dummy = SourceSpan::synthetic(&std::sync::Arc::from("<canonical>"));
    let mut c = Canon {
        map: Default::default(),
        next: 0,
        dummy,
    };
    for d in &mut q.datatypes {
        c.ident(&mut d.name);
        d.span = c.dummy.clone();
        for t in &mut d.typarams {
            c.ident(t);
        }
        for k in &mut d.ctors {
            k.span = c.dummy.clone();
            c.ident(&mut k.name);
            c.ident(&mut k.parent);
            for t in &mut k.typarams {
                c.ident(t);
            }
            for (n, t) in &mut k.fields {
                c.ident(n);
                c.ty(t);
            }
            for t in &mut k.parent_args {
                c.ty(t);
            }
        }
    }
    for f in &mut q.functions {
        f.span = c.dummy.clone();
        c.ident(&mut f.name);
        for t in &mut f.typarams {
            c.ident(t);
        }
        for (n, t) in &mut f.params {
            c.ident(n);
            c.ty(t);
        }
        if let Some(t) = &mut f.ret {
            c.ty(t);
        }
        if let Some(r) = &mut f.require {
            c.expr(r);
        }
        c.expr(&mut f.body);
        if let Some(e) = &mut f.ensuring {
            c.expr(e);
        }
        if let Some(a) = &mut f.proof {
            a.span = c.dummy.clone();
        }
        if let Some(a) = &mut f.library {
            a.span = c.dummy.clone();
        }
    }
    q.name_table = Default::default();
    q
}

struct Canon {
    map: std::collections::HashMap<super::HygienicName, String>,
    next: u32,
    dummy: SourceSpan,
}

impl Canon {
    fn ident(&mut self, id: &mut Ident) {
        id.span = self.dummy.clone();
        if let Some(n) = &id.resolved {
            if matches!(n.kind, super::NameKind::Variable | super::NameKind::Typevar) {
                let next = &mut self.next;
                let s = self
                    .map
                    .entry(n.clone())
                    .or_insert_with(|| {
                        *next += 1;
                        format!("v{next}")
                    })
                    .clone();
                id.text = s;
                id.resolved = None;
            }
        }
    }

    fn ty(&mut self, t: &mut SType) {
        match t {
            SType::Named(id, args) => {
                self.ident(id);
                args.iter_mut().for_each(|a| self.ty(a));
            }
            SType::Tuple(ts) => ts.iter_mut().for_each(|a| self.ty(a)),
            SType::Fun(ps, r) => {
                ps.iter_mut().for_each(|a| self.ty(a));
                self.ty(r);
            }
        }
    }

    fn pattern(&mut self, p: &mut SPattern) {
        p.span = self.dummy.clone();
        match &mut p.kind {
            SPatternKind::Bind(id) => self.ident(id),
            SPatternKind::Ctor(id, ps) => {
                self.ident(id);
                ps.iter_mut().for_each(|q| self.pattern(q));
            }
            SPatternKind::Tuple(ps) => ps.iter_mut().for_each(|q| self.pattern(q)),
            _ => {}
        }
    }

    fn expr(&mut self, e: &mut SExpr) {
        use SExprKind::*;
        e.span = self.dummy.clone();
        match &mut e.kind {
            Ident(id, t) => {
                self.ident(id);
                t.iter_mut().for_each(|x| self.ty(x));
            }
            Int(_) | Bool(_) => {}
            Placeholder(id) => self.ident(id),
            Call(f, t, args) => {
                self.ident(f);
                t.iter_mut().for_each(|x| self.ty(x));
                args.iter_mut().for_each(|a| self.expr(a));
            }
            Apply(f, args) => {
                self.expr(f);
                args.iter_mut().for_each(|a| self.expr(a));
            }
            Method(r, m, args) => {
                self.expr(r);
                self.ident(m);
                args.iter_mut().for_each(|a| self.expr(a));
            }
            Proj(r, _) => self.expr(r),
            Lambda(ps, b) => {
                for p in ps.iter_mut() {
                    self.ident(&mut p.name);
                    p.synthetic = false;
                    if let Some(t) = &mut p.ty {
                        self.ty(t);
                    }
                }
                self.expr(b);
            }
            Tuple(es) => es.iter_mut().for_each(|a| self.expr(a)),
            If(c, t, f) => {
                self.expr(c);
                self.expr(t);
                self.expr(f);
            }
            Block(stmts, last) => {
                for s in stmts.iter_mut() {
                    match s {
                        Stmt::Val(n, t, v) => {
                            self.expr(v);
                            self.ident(n);
                            if let Some(t) = t {
                                self.ty(t);
                            }
                        }
                        Stmt::Require(v) => self.expr(v),
                    }
                }
                self.expr(last);
            }
            Match(s, cases) => {
                self.expr(s);
                for c in cases.iter_mut() {
                    c.span = self.dummy.clone();
                    self.pattern(&mut c.pattern);
                    self.expr(&mut c.body);
                }
            }
            Binary(_, l, r) => {
                self.expr(l);
                self.expr(r);
            }
            Unary(_, x) => self.expr(x),
            Ensuring(a, b) => {
                self.expr(a);
                self.expr(b);
            }
        }
    }
}
