//! Surface AST to typed core IR.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;

use super::typeck::Unifier;
use super::{CoreProgram, CtorDef, DataTypeDef, Expr, FunDef, IrError, Name, Pattern, Prim, Type};
use crate::surface::ast::*;
use crate::surface::{NameKind, SourceSpan};

#[derive(Clone)]
struct Sig {
    typarams: Vec<Name>,
    params: Vec<Type>,
    ret: Type,
}

struct Elab<'a> {
    u: Unifier,
    locals: HashMap<Name, Type>,
    sigs: &'a HashMap<Name, Sig>,
    ctors: &'a HashMap<Name, Sig>,
    arity: &'a HashMap<Name, usize>,
    /// functions in lookup priority order (user first), for `+`/`*` on datatypes
    fun_order: &'a [Name],
    /// metas standing for not-yet-inferred return types, shared with the caller
    shared_ret: Option<(Name, Vec<Type>, Type)>,
}

fn other(span: &SourceSpan, message: impl Into<String>) -> IrError {
    IrError::Other {
        span: span.clone(),
        message: message.into(),
    }
}

fn conv_type(t: &SType, arity: &HashMap<Name, usize>) -> Result<Type, IrError> {
    match t {
        SType::Named(id, args) => match &id.resolved {
            None => match id.text.as_str() {
                "BigInt" | "Int" => Ok(Type::Int),
                "Boolean" => Ok(Type::Bool),
                _ => Err(other(&id.span, format!("unknown type `{}`", id.text))),
            },
            Some(n) if n.kind == NameKind::Typevar => {
                if !args.is_empty() {
                    return Err(other(&id.span, "type variables take no arguments"));
                }
                Ok(Type::Var(n.clone()))
            }
            Some(n) => {
                let want = arity.get(n).copied().unwrap_or(0);
                if want != args.len() {
                    return Err(IrError::Arity {
                        span: id.span.clone(),
                        name: id.text.clone(),
                        expected: want,
                        found: args.len(),
                    });
                }
                Ok(Type::Data(
                    n.clone(),
                    args.iter().map(|a| conv_type(a, arity)).collect::<Result<_, _>>()?,
                ))
            }
        },
        SType::Tuple(ts) => Ok(Type::Tuple(ts.iter().map(|a| conv_type(a, arity)).collect::<Result<_, _>>()?)),
        SType::Fun(ps, r) => Ok(Type::Fun(
            ps.iter().map(|a| conv_type(a, arity)).collect::<Result<_, _>>()?,
            Box::new(conv_type(r, arity)?),
        )),
    }
}

fn datatype(d: &SDataType, arity: &HashMap<Name, usize>) -> Result<DataTypeDef, IrError> {
    let typarams: Vec<Name> = d.typarams.iter().map(|t| t.name().clone()).collect();
    let mut ctors = Vec::new();
    for c in &d.ctors {
        if c.parent_args.len() != typarams.len() {
            return Err(IrError::Arity {
                span: c.span.clone(),
                name: d.name.text.clone(),
                expected: typarams.len(),
                found: c.parent_args.len(),
            });
        }
        // the constructor's own type parameters must be passed straight through
        let mut m = HashMap::new();
        for (pa, dt) in c.parent_args.iter().zip(&typarams) {
            match pa {
                SType::Named(id, args)
                    if args.is_empty()
                        && matches!(&id.resolved, Some(n) if n.kind == NameKind::Typevar) =>
                {
                    m.insert(id.name().clone(), Type::Var(dt.clone()));
                }
                _ => return Err(other(&c.span, "constructor must extend its parent at type parameters")),
            }
        }
        for tp in &c.typarams {
            if !m.contains_key(tp.name()) {
                return Err(other(&tp.span, format!("type parameter `{}` not passed to parent", tp.text)));
            }
        }
        let mut fields = Vec::new();
        for (fname, ft) in &c.fields {
            let t = conv_type(ft, arity)?.subst(&m);
            let mut vs = BTreeSet::new();
            t.type_vars(&mut vs);
            if vs.iter().any(|v| !typarams.contains(v)) {
                return Err(other(&fname.span, "field type mentions undeclared type parameter"));
            }
            fields.push((fname.text.clone(), t));
        }
        ctors.push(CtorDef {
            name: c.name.name().clone(),
            fields,
        });
    }
    Ok(DataTypeDef {
        name: d.name.name().clone(),
        typarams,
        ctors,
        origin: d.origin,
        span: d.span.clone(),
    })
}

fn referenced_functions(f: &SFun) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut visit = |e: &SExpr| match &e.kind {
        SExprKind::Ident(id, _) | SExprKind::Call(id, _, _) | SExprKind::Method(_, id, _) => {
            if let Some(n) = &id.resolved {
                if n.kind == NameKind::Function {
                    out.insert(n.clone());
                }
            }
        }
        _ => {}
    };
    crate::surface::parser::walk(&f.body, &mut visit);
    if let Some(r) = &f.require {
        crate::surface::parser::walk(r, &mut visit);
    }
    out
}

pub fn elaborate(p: &SurfaceProgram) -> Result<CoreProgram, IrError> {
    let mut arity = HashMap::new();
    for d in &p.datatypes {
        arity.insert(d.name.name().clone(), d.typarams.len());
    }
    let datatypes: Vec<DataTypeDef> = p
        .datatypes
        .iter()
        .map(|d| datatype(d, &arity))
        .collect::<Result<_, _>>()?;
    let mut ctors = HashMap::new();
    for d in &datatypes {
        for c in &d.ctors {
            ctors.insert(
                c.name.clone(),
                Sig {
                    typarams: d.typarams.clone(),
                    params: c.fields.iter().map(|(_, t)| t.clone()).collect(),
                    ret: d.self_type(),
                },
            );
        }
    }

    let mut fun_order: Vec<Name> = p
        .functions
        .iter()
        .filter(|f| f.origin == Origin::User)
        .map(|f| f.name.name().clone())
        .collect();
    fun_order.extend(
        p.functions
            .iter()
            .filter(|f| f.origin == Origin::Base)
            .map(|f| f.name.name().clone()),
    );

    // signatures of annotated functions
    let mut sigs: HashMap<Name, Sig> = HashMap::new();
    let mut pending = Vec::new();
    for (i, f) in p.functions.iter().enumerate() {
        let params = f
            .params
            .iter()
            .map(|(_, t)| conv_type(t, &arity))
            .collect::<Result<Vec<_>, _>>()?;
        let ret = match &f.ret {
            Some(t) => Some(conv_type(t, &arity)?),
            None if f.holds => Some(Type::Bool),
            None => None,
        };
        match ret {
            Some(ret) => {
                sigs.insert(
                    f.name.name().clone(),
                    Sig {
                        typarams: f.typarams.iter().map(|t| t.name().clone()).collect(),
                        params,
                        ret,
                    },
                );
            }
            None => pending.push(i),
        }
    }

    let mut results: HashMap<usize, FunDef> = HashMap::new();
    // infer missing return types in dependency order
    while !pending.is_empty() {
        let pos = pending.iter().position(|&i| {
            let f = &p.functions[i];
            referenced_functions(f)
                .iter()
                .all(|g| g == f.name.name() || sigs.contains_key(g))
        });
        let Some(pos) = pos else {
            let f = &p.functions[pending[0]];
            return Err(other(&f.span, format!("cannot infer the result type of `{}`; add an annotation", f.name.text)));
        };
        let i = pending.remove(pos);
        let fd = function(&p.functions[i], &sigs, &ctors, &arity, &fun_order, None)?;
        sigs.insert(
            fd.name.clone(),
            Sig {
                typarams: fd.typarams.clone(),
                params: fd.params.iter().map(|(_, t)| t.clone()).collect(),
                ret: fd.ret.clone(),
            },
        );
        results.insert(i, fd);
    }
    for (i, f) in p.functions.iter().enumerate() {
        if results.contains_key(&i) {
            continue;
        }
        let ret = sigs[f.name.name()].ret.clone();
        results.insert(i, function(f, &sigs, &ctors, &arity, &fun_order, Some(ret))?);
    }
    let functions = (0..p.functions.len()).map(|i| results.remove(&i).unwrap()).collect();
    Ok(CoreProgram::new(datatypes, functions, p.name_table.clone()))
}

fn function(
    f: &SFun,
    sigs: &HashMap<Name, Sig>,
    ctors: &HashMap<Name, Sig>,
    arity: &HashMap<Name, usize>,
    fun_order: &[Name],
    ret: Option<Type>,
) -> Result<FunDef, IrError> {
    let mut e = Elab {
        u: Unifier::default(),
        locals: HashMap::new(),
        sigs,
        ctors,
        arity,
        fun_order,
        shared_ret: None,
    };
    let params: Vec<(Name, Type)> = f
        .params
        .iter()
        .map(|(n, t)| Ok((n.name().clone(), conv_type(t, arity)?)))
        .collect::<Result<_, IrError>>()?;
    for (n, t) in &params {
        e.locals.insert(n.clone(), t.clone());
    }
    let ret = match ret {
        Some(r) => r,
        None => {
            let m = e.u.fresh();
            let ps = params.iter().map(|(_, t)| t.clone()).collect();
            e.shared_ret = Some((f.name.name().clone(), ps, m.clone()));
            m
        }
    };
    let pre = match &f.require {
        Some(r) => {
            let (x, t) = e.expr(r, Some(&Type::Bool))?;
            e.expect(&t, &Type::Bool, &r.span)?;
            Some(x)
        }
        None => None,
    };
    let (body, bt) = e.expr(&f.body, Some(&ret))?;
    e.expect(&bt, &ret, &f.body.span)?;
    if f.holds {
        e.expect(&ret, &Type::Bool, &f.body.span)?;
    }
    let post = match &f.ensuring {
        Some(post) => {
            let want = Type::Fun(vec![ret.clone()], Box::new(Type::Bool));
            let (x, t) = e.expr(post, Some(&want))?;
            e.expect(&t, &want, &post.span)?;
            match x {
                Expr::Lambda(ps, b) if ps.len() == 1 => Some((ps[0].0.clone(), *b)),
                _ => return Err(other(&post.span, "`ensuring` takes a one-parameter lambda")),
            }
        }
        None => None,
    };
    let ret = e.u.default_zonk(&ret);
    Ok(FunDef {
        name: f.name.name().clone(),
        typarams: f.typarams.iter().map(|t| t.name().clone()).collect(),
        params,
        ret,
        pre: pre.map(|x| e.zonk_expr(x)),
        body: e.zonk_expr(body),
        post: post.map(|(n, b)| (n, e.zonk_expr(b))),
        holds: f.holds,
        proof_hint: f.proof.as_ref().map(|a| a.text.clone()),
        library: f.library.as_ref().map(|a| a.text.clone()),
        span: f.span.clone(),
        origin: f.origin,
    })
}

impl Elab<'_> {
    fn expect(&mut self, found: &Type, expected: &Type, span: &SourceSpan) -> Result<(), IrError> {
        self.u.unify(expected, found).map_err(|(a, b)| IrError::Mismatch {
            span: span.clone(),
            expected: a.to_string(),
            found: b.to_string(),
        })
    }

    fn zonk_expr(&self, e: Expr) -> Expr {
        match e {
            Expr::Lambda(ps, b) => Expr::Lambda(
                ps.into_iter().map(|(n, t)| (n, self.u.default_zonk(&t))).collect(),
                Box::new(self.zonk_expr(*b)),
            ),
            mut other => {
                for c in other.children_mut() {
                    let x = std::mem::replace(c, Expr::Bool(false));
                    *c = self.zonk_expr(x);
                }
                other
            }
        }
    }

    fn instantiate(&mut self, sig: &Sig, targs: &[SType], span: &SourceSpan) -> Result<(Vec<Type>, Type), IrError> {
        let m: HashMap<Name, Type> = if targs.is_empty() {
            self.u.instantiate(&sig.typarams)
        } else {
            if targs.len() != sig.typarams.len() {
                return Err(IrError::Arity {
                    span: span.clone(),
                    name: "type arguments".into(),
                    expected: sig.typarams.len(),
                    found: targs.len(),
                });
            }
            let ts = targs.iter().map(|t| conv_type(t, self.arity)).collect::<Result<Vec<_>, _>>()?;
            sig.typarams.iter().cloned().zip(ts).collect()
        };
        Ok((sig.params.iter().map(|t| t.subst(&m)).collect(), sig.ret.subst(&m)))
    }

    fn fun_sig(&mut self, n: &Name, targs: &[SType], span: &SourceSpan) -> Result<(Vec<Type>, Type), IrError> {
        if let Some(sig) = self.sigs.get(n) {
            let sig = sig.clone();
            return self.instantiate(&sig, targs, span);
        }
        // self-reference while the return type is still being inferred
        if let Some((f, ps, r)) = &self.shared_ret {
            if f == n {
                return Ok((ps.clone(), r.clone()));
            }
        }
        Err(other(span, format!("unknown function `{n}`")))
    }

    fn args(&mut self, ps: &[Type], args: &[SExpr], name: &str, span: &SourceSpan) -> Result<Vec<Expr>, IrError> {
        if ps.len() != args.len() {
            return Err(IrError::Arity {
                span: span.clone(),
                name: name.to_string(),
                expected: ps.len(),
                found: args.len(),
            });
        }
        let mut out = Vec::new();
        for (p, a) in ps.iter().zip(args) {
            let want = self.u.zonk(p);
            let (x, t) = self.expr(a, Some(&want))?;
            self.expect(&t, p, &a.span)?;
            out.push(x);
        }
        Ok(out)
    }

    fn apply_value(&mut self, f: Expr, ft: Type, args: &[SExpr], span: &SourceSpan) -> Result<(Expr, Type), IrError> {
        let ft = self.u.resolve(&ft);
        let (ps, r) = match ft {
            Type::Fun(ps, r) => (ps, *r),
            Type::Meta(_) => {
                let ps: Vec<Type> = args.iter().map(|_| self.u.fresh()).collect();
                let r = self.u.fresh();
                self.expect(&ft, &Type::Fun(ps.clone(), Box::new(r.clone())), span)?;
                (ps, r)
            }
            other_t => {
                return Err(IrError::Mismatch {
                    span: span.clone(),
                    expected: "function".into(),
                    found: self.u.zonk(&other_t).to_string(),
                })
            }
        };
        let xs = self.args(&ps, args, "function value", span)?;
        Ok((Expr::Apply(Box::new(f), xs), r))
    }

    fn call(&mut self, id: &Ident, targs: &[SType], args: &[SExpr], span: &SourceSpan) -> Result<(Expr, Type), IrError> {
        let n = id.name().clone();
        match n.kind {
            NameKind::Variable => {
                let t = self.locals.get(&n).cloned().ok_or_else(|| other(span, format!("unbound `{}`", id.text)))?;
                self.apply_value(Expr::Var(n), t, args, span)
            }
            NameKind::Function => {
                let (ps, r) = self.fun_sig(&n, targs, span)?;
                let xs = self.args(&ps, args, &id.text, span)?;
                Ok((Expr::Call(n, xs), r))
            }
            NameKind::Constructor => {
                let sig = self
                    .ctors
                    .get(&n)
                    .cloned()
                    .ok_or_else(|| IrError::UnknownConstructor {
                        span: span.clone(),
                        name: id.text.clone(),
                    })?;
                let (ps, r) = self.instantiate(&sig, targs, span)?;
                let xs = self.args(&ps, args, &id.text, span)?;
                Ok((Expr::Ctor(n, xs), r))
            }
            _ => Err(other(span, format!("`{}` is not a term", id.text))),
        }
    }

    fn arith_fun(&mut self, base: &str, t: &Type) -> Option<Name> {
        for n in self.fun_order {
            if &*n.base != base {
                continue;
            }
            let sig = self.sigs.get(n)?;
            if sig.typarams.is_empty() && sig.params.len() == 2 && sig.params[0] == *t && sig.params[1] == *t && sig.ret == *t {
                return Some(n.clone());
            }
        }
        None
    }

    fn expr(&mut self, e: &SExpr, expected: Option<&Type>) -> Result<(Expr, Type), IrError> {
        let span = &e.span;
        match &e.kind {
            SExprKind::Int(n) => Ok((Expr::Int(n.clone()), Type::Int)),
            SExprKind::Bool(b) => Ok((Expr::Bool(*b), Type::Bool)),
            SExprKind::Ident(id, targs) => {
                let n = id.name().clone();
                match n.kind {
                    NameKind::Variable => {
                        let t = self.locals.get(&n).cloned().ok_or_else(|| other(span, format!("unbound `{}`", id.text)))?;
                        Ok((Expr::Var(n), t))
                    }
                    NameKind::Function => {
                        let (ps, r) = self.fun_sig(&n, targs, span)?;
                        Ok((Expr::Fun(n), Type::Fun(ps, Box::new(r))))
                    }
                    NameKind::Constructor => self.call(id, targs, &[], span),
                    _ => Err(other(span, format!("`{}` is not a term", id.text))),
                }
            }
            SExprKind::Call(id, targs, args) => self.call(id, targs, args, span),
            SExprKind::Apply(f, args) => {
                let (fx, ft) = self.expr(f, None)?;
                self.apply_value(fx, ft, args, span)
            }
            SExprKind::Method(recv, m, args) => {
                let mut all = vec![(**recv).clone()];
                all.extend(args.iter().cloned());
                self.call(m, &[], &all, span)
            }
            SExprKind::Proj(r, k) => {
                let (x, t) = self.expr(r, None)?;
                match self.u.resolve(&t) {
                    Type::Tuple(ts) if *k < ts.len() => Ok((Expr::Proj(Box::new(x), *k), ts[*k].clone())),
                    Type::Meta(_) => Err(other(span, "cannot infer the tuple type of a projection")),
                    other_t => Err(IrError::Mismatch {
                        span: span.clone(),
                        expected: format!("tuple with at least {} components", k + 1),
                        found: self.u.zonk(&other_t).to_string(),
                    }),
                }
            }
            SExprKind::Lambda(ps, body) => {
                let exp = expected.map(|t| self.u.resolve(t));
                let (eps, er) = match exp {
                    Some(Type::Fun(eps, er)) if eps.len() == ps.len() => (Some(eps), Some(*er)),
                    _ => (None, None),
                };
                let mut typed = Vec::new();
                for (i, p) in ps.iter().enumerate() {
                    let t = match &p.ty {
                        Some(st) => {
                            let t = conv_type(st, self.arity)?;
                            if let Some(eps) = &eps {
                                self.expect(&t, &eps[i], &p.name.span)?;
                            }
                            t
                        }
                        None => match &eps {
                            Some(eps) => eps[i].clone(),
                            None => self.u.fresh(),
                        },
                    };
                    self.locals.insert(p.name.name().clone(), t.clone());
                    typed.push((p.name.name().clone(), t));
                }
                let er = er.map(|t| self.u.zonk(&t));
                let (b, bt) = self.expr(body, er.as_ref())?;
                if let Some(er) = &er {
                    self.expect(&bt, er, &body.span)?;
                }
                let ft = Type::Fun(typed.iter().map(|(_, t)| t.clone()).collect(), Box::new(bt));
                Ok((Expr::Lambda(typed, Box::new(b)), ft))
            }
            SExprKind::Tuple(es) => {
                let exp = expected.map(|t| self.u.resolve(t));
                let mut xs = Vec::new();
                let mut ts = Vec::new();
                for (i, a) in es.iter().enumerate() {
                    let want = match &exp {
                        Some(Type::Tuple(ets)) if ets.len() == es.len() => Some(self.u.zonk(&ets[i])),
                        _ => None,
                    };
                    let (x, t) = self.expr(a, want.as_ref())?;
                    xs.push(x);
                    ts.push(t);
                }
                Ok((Expr::Tuple(xs), Type::Tuple(ts)))
            }
            SExprKind::If(c, t, f) => {
                let (cx, ct) = self.expr(c, Some(&Type::Bool))?;
                self.expect(&ct, &Type::Bool, &c.span)?;
                let (tx, tt) = self.expr(t, expected)?;
                let (fx, ft) = self.expr(f, expected)?;
                self.expect(&ft, &tt, span)?;
                Ok((Expr::If(Box::new(cx), Box::new(tx), Box::new(fx)), tt))
            }
            SExprKind::Block(stmts, last) => self.block(stmts, last, expected),
            SExprKind::Match(s, cases) => {
                let (sx, st) = self.expr(s, None)?;
                let r = match expected {
                    Some(t) => t.clone(),
                    None => self.u.fresh(),
                };
                let mut cs = Vec::new();
                for c in cases {
                    let p = self.pattern(&c.pattern, &st)?;
                    let want = self.u.zonk(&r);
                    let (x, t) = self.expr(&c.body, Some(&want))?;
                    self.expect(&t, &r, &c.body.span)?;
                    cs.push((p, x));
                }
                Ok((Expr::Match(Box::new(sx), cs), r))
            }
            SExprKind::Binary(op, l, r) => self.binary(*op, l, r, span),
            SExprKind::Unary(UnOp::Neg, x) => {
                let (a, t) = self.expr(x, Some(&Type::Int))?;
                self.expect(&t, &Type::Int, &x.span)?;
                Ok((Expr::Prim(Prim::Neg, vec![a]), Type::Int))
            }
            SExprKind::Unary(UnOp::Not, x) => {
                let (a, t) = self.expr(x, Some(&Type::Bool))?;
                self.expect(&t, &Type::Bool, &x.span)?;
                Ok((Expr::Prim(Prim::Not, vec![a]), Type::Bool))
            }
            SExprKind::Ensuring(..) => Err(other(span, "`ensuring` is only allowed on a function body")),
            SExprKind::Placeholder(_) => Err(other(span, "`_` placeholder outside of an argument position")),
        }
    }

    fn block(&mut self, stmts: &[Stmt], last: &SExpr, expected: Option<&Type>) -> Result<(Expr, Type), IrError> {
        match stmts.split_first() {
            None => self.expr(last, expected),
            Some((Stmt::Require(c), _)) => Err(other(&c.span, "`require` must come first in a function body")),
            Some((Stmt::Val(n, ty, v), rest)) => {
                let want = match ty {
                    Some(t) => Some(conv_type(t, self.arity)?),
                    None => None,
                };
                let (vx, vt) = self.expr(v, want.as_ref())?;
                if let Some(w) = &want {
                    self.expect(&vt, w, &v.span)?;
                }
                self.locals.insert(n.name().clone(), vt);
                let (bx, bt) = self.block(rest, last, expected)?;
                Ok((Expr::Let(n.name().clone(), Box::new(vx), Box::new(bx)), bt))
            }
        }
    }

    fn binary(&mut self, op: BinOp, l: &SExpr, r: &SExpr, span: &SourceSpan) -> Result<(Expr, Type), IrError> {
        let int2 = |s: &mut Self, p: Prim, res: Type| -> Result<(Expr, Type), IrError> {
            let (a, at) = s.expr(l, Some(&Type::Int))?;
            s.expect(&at, &Type::Int, &l.span)?;
            let (b, bt) = s.expr(r, Some(&Type::Int))?;
            s.expect(&bt, &Type::Int, &r.span)?;
            Ok((Expr::prim2(p, a, b), res))
        };
        let bool2 = |s: &mut Self, p: Prim| -> Result<(Expr, Type), IrError> {
            let (a, at) = s.expr(l, Some(&Type::Bool))?;
            s.expect(&at, &Type::Bool, &l.span)?;
            let (b, bt) = s.expr(r, Some(&Type::Bool))?;
            s.expect(&bt, &Type::Bool, &r.span)?;
            Ok((Expr::prim2(p, a, b), Type::Bool))
        };
        match op {
            BinOp::Add | BinOp::Mul => {
                let (a, at) = self.expr(l, None)?;
                let at = self.u.zonk(&at);
                if let Type::Data(..) = at {
                    let base = if op == BinOp::Add { "plus" } else { "times" };
                    let f = self.arith_fun(base, &at).ok_or_else(|| IrError::Mismatch {
                        span: span.clone(),
                        expected: "Int".into(),
                        found: at.to_string(),
                    })?;
                    let (b, bt) = self.expr(r, Some(&at))?;
                    self.expect(&bt, &at, &r.span)?;
                    return Ok((Expr::Call(f, vec![a, b]), at));
                }
                self.expect(&at, &Type::Int, &l.span)?;
                let (b, bt) = self.expr(r, Some(&Type::Int))?;
                self.expect(&bt, &Type::Int, &r.span)?;
                let p = if op == BinOp::Add { Prim::Add } else { Prim::Mul };
                Ok((Expr::prim2(p, a, b), Type::Int))
            }
            BinOp::Sub => int2(self, Prim::Sub, Type::Int),
            BinOp::Lt => int2(self, Prim::Lt, Type::Bool),
            BinOp::Le => int2(self, Prim::Le, Type::Bool),
            BinOp::Gt => int2(self, Prim::Gt, Type::Bool),
            BinOp::Ge => int2(self, Prim::Ge, Type::Bool),
            BinOp::Eq | BinOp::Ne => {
                let (a, at) = self.expr(l, None)?;
                let want = self.u.zonk(&at);
                let (b, bt) = self.expr(r, Some(&want))?;
                self.expect(&bt, &at, span)?;
                let p = if op == BinOp::Eq { Prim::Eq } else { Prim::Ne };
                Ok((Expr::prim2(p, a, b), Type::Bool))
            }
            BinOp::And => bool2(self, Prim::And),
            BinOp::Or => bool2(self, Prim::Or),
            BinOp::Implies => bool2(self, Prim::Implies),
        }
    }

    fn pattern(&mut self, p: &SPattern, t: &Type) -> Result<Pattern, IrError> {
        match &p.kind {
            SPatternKind::Wild => Ok(Pattern::Wild),
            SPatternKind::Int(n) => {
                self.expect(t, &Type::Int, &p.span)?;
                Ok(Pattern::Int(n.clone()))
            }
            SPatternKind::Bool(b) => {
                self.expect(t, &Type::Bool, &p.span)?;
                Ok(Pattern::Bool(*b))
            }
            SPatternKind::Bind(id) => {
                let n = id.name().clone();
                if n.kind == NameKind::Constructor {
                    return self.ctor_pattern(id, &[], t, &p.span);
                }
                self.locals.insert(n.clone(), t.clone());
                Ok(Pattern::Var(n))
            }
            SPatternKind::Ctor(id, ps) => self.ctor_pattern(id, ps, t, &p.span),
            SPatternKind::Tuple(ps) => {
                let ts: Vec<Type> = ps.iter().map(|_| self.u.fresh()).collect();
                self.expect(t, &Type::Tuple(ts.clone()), &p.span)?;
                let qs = ps
                    .iter()
                    .zip(&ts)
                    .map(|(q, qt)| self.pattern(q, qt))
                    .collect::<Result<_, _>>()?;
                Ok(Pattern::Tuple(qs))
            }
        }
    }

    fn ctor_pattern(&mut self, id: &Ident, ps: &[SPattern], t: &Type, span: &SourceSpan) -> Result<Pattern, IrError> {
        let n = id.name().clone();
        let sig = self.ctors.get(&n).cloned().ok_or_else(|| IrError::UnknownConstructor {
            span: span.clone(),
            name: id.text.clone(),
        })?;
        let (fields, ret) = self.instantiate(&sig, &[], span)?;
        self.expect(t, &ret, span)?;
        if fields.len() != ps.len() {
            return Err(IrError::Arity {
                span: span.clone(),
                name: id.text.clone(),
                expected: fields.len(),
                found: ps.len(),
            });
        }
        let qs = ps
            .iter()
            .zip(&fields)
            .map(|(q, ft)| self.pattern(q, ft))
            .collect::<Result<_, _>>()?;
        Ok(Pattern::Ctor(n, qs))
    }
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_program, resolve_names};

    pub const SIZE_SRC: &str = "sealed abstract class List[A]
case class Cons[A](head: A, tail: List[A]) extends List[A]
case class Nil[A]() extends List[A]

def size[A](l: List[A]): BigInt = (l match {
  case Nil => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)
";

    fn elab(src: &str) -> Result<CoreProgram, IrError> {
        let p = resolve_names(parse_program("t.psc", src).unwrap()).unwrap();
        elaborate(&p)
    }

    #[test]
    fn size_datatype() {
        let p = elab(SIZE_SRC).unwrap();
        assert_eq!(p.datatypes.len(), 1);
        let d = &p.datatypes[0];
        assert_eq!(d.typarams.len(), 1);
        let names: Vec<&str> = d.ctors.iter().map(|c| &*c.name.base).collect();
        assert_eq!(names, ["Cons", "Nil"]);
        let a = Type::Var(d.typarams[0].clone());
        assert_eq!(d.ctors[0].fields[0].1, a);
        assert_eq!(d.ctors[0].fields[1].1, d.self_type());
        assert!(d.ctors[1].fields.is_empty());
        let f = &p.functions[0];
        assert_eq!(f.ret, Type::Int);
        assert!(f.post.is_some());
    }

    #[test]
    fn if_branch_mismatch() {
        let err = elab("def f(): BigInt = if (true) 1 else false").unwrap_err();
        match err {
            IrError::Mismatch { expected, found, .. } => {
                let mut pair = [expected, found];
                pair.sort();
                assert_eq!(pair, ["Bool".to_string(), "Int".to_string()]);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn placeholder_lambda_types_from_context() {
        let p = elab("def sumConstant[A](xs: List[A], k: Nat) = (listSum(xs.map(_ => k)) == length(xs) * k).holds")
            .unwrap();
        let f = p.user_functions().next().unwrap();
        let mut lam = None;
        fn find(e: &Expr, out: &mut Option<Expr>) {
            if let Expr::Lambda(..) = e {
                *out = Some(e.clone());
            }
            e.children().into_iter().for_each(|c| find(c, out));
        }
        find(&f.body, &mut lam);
        match lam.unwrap() {
            Expr::Lambda(ps, _) => {
                assert_eq!(ps[0].1, Type::Var(f.typarams[0].clone()));
            }
            _ => unreachable!(),
        }
        // `*` on Nat resolves to the base `times`
        let mut calls = BTreeSet::new();
        f.body.calls(&mut calls);
        assert!(calls.iter().any(|c| &*c.base == "times"));
    }

    #[test]
    fn arity_and_unknown() {
        assert!(matches!(
            elab("sealed abstract class T\ncase class A(x: BigInt) extends T\ndef f(): T = A(1, 2)"),
            Err(IrError::Arity { .. })
        ));
    }
}
