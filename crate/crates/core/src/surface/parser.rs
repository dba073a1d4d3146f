//! Recursive-descent parser for the surface grammar.
//!
//! The grammar is a purely functional Scala fragment: `sealed abstract class`
//! families with `case class` children, and `def`s whose bodies may carry
//! `require`, `ensuring` and `.holds` contract wrappers. See `docs/grammar.md`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{SourceSpan, SurfaceError};

/// Parses a complete program from source text.
pub fn parse_program(file: &str, source: &str) -> Result<SurfaceProgram, SurfaceError> {
    parse_with_origin(file, source, Origin::User)
}

pub(crate) fn parse_with_origin(
    file: &str,
    source: &str,
    origin: Origin,
) -> Result<SurfaceProgram, SurfaceError> {
    let file: Arc<str> = Arc::from(file);
    let tokens = tokenize(&file, source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        file,
        placeholder_counter: 0,
        origin,
    };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: Arc<str>,
    placeholder_counter: u32,
    origin: Origin,
}

struct AbstractClass {
    name: Ident,
    typarams: Vec<Ident>,
    span: SourceSpan,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    fn span(&self) -> SourceSpan {
        match self.tokens.get(self.pos) {
            Some(t) => t.span.clone(),
            None => match self.tokens.last() {
                Some(t) => SourceSpan {
                    column: t.span.column + t.span.length,
                    length: 1,
                    ..t.span.clone()
                },
                None => SourceSpan::synthetic(&self.file),
            },
        }
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos.saturating_sub(1))
            .map(|t| t.span.clone())
            .unwrap_or_else(|| SourceSpan::synthetic(&self.file))
    }

    /// An argument list must open on the line of its callee; a `(` starting
    /// a new line begins the next statement.
    fn at_args(&self) -> bool {
        self.at(&Tok::LParen) && self.span().line == self.prev_span().line
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == Some(tok)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SurfaceError::Syntax {
            span: self.span(),
            found: self
                .peek()
                .map(|t| t.to_string())
                .unwrap_or_else(|| "end of input".into()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if self.at(&tok) {
            let s = self.span();
            self.pos += 1;
            Ok(s)
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let id = Ident::new(s.clone(), self.span());
                self.pos += 1;
                Ok(id)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn program(&mut self) -> PResult<SurfaceProgram> {
        let mut abstracts: Vec<AbstractClass> = Vec::new();
        let mut ctors: Vec<SCtor> = Vec::new();
        let mut functions = Vec::new();
        while self.peek().is_some() {
            let mut proof = None;
            let mut library = None;
            while self.at(&Tok::At) {
                let at = self.span();
                self.pos += 1;
                let name = self.ident()?;
                match name.text.as_str() {
                    "proof" => {
                        self.expect(Tok::LParen)?;
                        let key = self.ident()?;
                        if key.text != "method" {
                            return Err(SurfaceError::Syntax {
                                span: key.span,
                                found: format!("identifier `{}`", key.text),
                                expected: vec!["`method`".into()],
                            });
                        }
                        self.expect(Tok::Assign)?;
                        let text = self.string()?;
                        self.expect(Tok::RParen)?;
                        proof = Some(Annotation {
                            text,
                            span: at.to(&self.prev_span()),
                        });
                    }
                    "library" => {
                        self.expect(Tok::LParen)?;
                        let text = self.string()?;
                        self.expect(Tok::RParen)?;
                        library = Some(Annotation {
                            text,
                            span: at.to(&self.prev_span()),
                        });
                    }
                    other => {
                        return Err(SurfaceError::Unsupported {
                            span: name.span.clone(),
                            message: format!("unknown annotation `@{other}`"),
                        })
                    }
                }
            }
            match self.peek() {
                Some(Tok::Def) => functions.push(self.fundef(proof, library)?),
                Some(Tok::Sealed) | Some(Tok::Abstract) if proof.is_none() && library.is_none() => {
                    abstracts.push(self.abstract_class()?)
                }
                Some(Tok::Case) if proof.is_none() && library.is_none() => {
                    ctors.push(self.case_class()?)
                }
                _ if proof.is_some() || library.is_some() => return self.error(&["`def`"]),
                _ => return self.error(&["`sealed`", "`case`", "`def`", "`@`"]),
            }
        }
        let mut datatypes: Vec<SDataType> = abstracts
            .into_iter()
            .map(|a| SDataType {
                name: a.name,
                typarams: a.typarams,
                ctors: Vec::new(),
                span: a.span,
                origin: self.origin,
            })
            .collect();
        let index: BTreeMap<String, usize> = datatypes
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.text.clone(), i))
            .collect();
        for c in ctors {
            match index.get(&c.parent.text) {
                Some(&i) => datatypes[i].ctors.push(c),
                None if c.parent.text == c.name.text => {
                    // stand-alone case class: its own single-constructor type
                    datatypes.push(SDataType {
                        name: Ident::new(c.name.text.clone(), c.name.span.clone()),
                        typarams: c.typarams.clone(),
                        span: c.span.clone(),
                        ctors: vec![c],
                        origin: self.origin,
                    });
                }
                None => {
                    return Err(SurfaceError::Unresolved {
                        span: c.parent.span.clone(),
                        name: c.parent.text.clone(),
                    })
                }
            }
        }
        for d in &datatypes {
            if d.ctors.is_empty() {
                return Err(SurfaceError::Unsupported {
                    span: d.span.clone(),
                    message: format!("datatype `{}` has no case classes", d.name.text),
                });
            }
        }
        Ok(SurfaceProgram {
            datatypes,
            functions,
            name_table: Default::default(),
            resolved: false,
        })
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(&["string literal"]),
        }
    }

    fn typarams(&mut self) -> PResult<Vec<Ident>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LBracket) {
            loop {
                out.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(out)
    }

    fn typeargs(&mut self) -> PResult<Vec<SType>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LBracket) {
            loop {
                out.push(self.ty()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(out)
    }

    fn abstract_class(&mut self) -> PResult<AbstractClass> {
        let start = self.span();
        self.eat(&Tok::Sealed);
        self.expect(Tok::Abstract)?;
        self.expect(Tok::Class)?;
        let name = self.ident()?;
        let typarams = self.typarams()?;
        Ok(AbstractClass {
            name,
            typarams,
            span: start.to(&self.prev_span()),
        })
    }

    fn case_class(&mut self) -> PResult<SCtor> {
        let start = self.expect(Tok::Case)?;
        let is_object = if self.eat(&Tok::Object) {
            true
        } else {
            self.expect(Tok::Class)?;
            false
        };
        let name = self.ident()?;
        let typarams = if is_object { Vec::new() } else { self.typarams()? };
        let mut fields = Vec::new();
        if !is_object {
            self.expect(Tok::LParen)?;
            if !self.at(&Tok::RParen) {
                loop {
                    // tolerate `val` field modifiers
                    self.eat(&Tok::Val);
                    let f = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let t = self.ty()?;
                    fields.push((f, t));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        let (parent, parent_args) = if self.eat(&Tok::Extends) {
            let p = self.ident()?;
            let args = self.typeargs()?;
            (p, args)
        } else {
            (Ident::new(name.text.clone(), name.span.clone()), Vec::new())
        };
        if self.at(&Tok::LBrace) {
            return Err(SurfaceError::Unsupported {
                span: self.span(),
                message: "classes with members are not supported".into(),
            });
        }
        Ok(SCtor {
            name,
            typarams,
            fields,
            parent,
            parent_args,
            span: start.to(&self.prev_span()),
        })
    }

    fn ty(&mut self) -> PResult<SType> {
        let start = self.pos;
        let simple = self.simple_ty()?;
        if self.eat(&Tok::Arrow) {
            let ret = self.ty()?;
            let params = match simple {
                SType::Tuple(ts) if self.tokens[start].tok == Tok::LParen => ts,
                other => vec![other],
            };
            return Ok(SType::Fun(params, Box::new(ret)));
        }
        Ok(simple)
    }

    fn simple_ty(&mut self) -> PResult<SType> {
        if self.eat(&Tok::LParen) {
            let mut ts = Vec::new();
            if !self.at(&Tok::RParen) {
                loop {
                    ts.push(self.ty()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            if ts.len() == 1 && !self.at(&Tok::Arrow) {
                return Ok(ts.pop().unwrap());
            }
            return Ok(SType::Tuple(ts));
        }
        let name = self.ident()?;
        let args = self.typeargs()?;
        Ok(SType::Named(name, args))
    }

    fn fundef(&mut self, proof: Option<Annotation>, library: Option<Annotation>) -> PResult<SFun> {
        let start = self.expect(Tok::Def)?;
        let name = self.ident()?;
        let typarams = self.typarams()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            if !self.at(&Tok::RParen) {
                loop {
                    let p = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let t = self.ty()?;
                    params.push((p, t));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        let ret = if self.eat(&Tok::Colon) {
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::Assign)?;
        let body = self.expr()?;
        let span = start.to(&name.span);
        let (body, ensuring, holds, require) = self.split_contracts(body)?;
        Ok(SFun {
            name,
            typarams,
            params,
            ret,
            require,
            body,
            ensuring,
            holds,
            proof,
            library,
            span,
            origin: self.origin,
        })
    }

    /// Peels `ensuring`, `.holds` and a leading `require` off a function body.
    #[allow(clippy::type_complexity)]
    fn split_contracts(
        &mut self,
        body: SExpr,
    ) -> PResult<(SExpr, Option<SExpr>, bool, Option<SExpr>)> {
        let mut body = body;
        let mut ensuring = None;
        if let SExprKind::Ensuring(inner, pred) = body.kind {
            ensuring = Some(*pred);
            body = *inner;
        }
        let mut holds = false;
        if let SExprKind::Method(recv, m, args) = &body.kind {
            if m.text == "holds" && args.is_empty() {
                holds = true;
                body = (**recv).clone();
            }
        }
        let mut require = None;
        if let SExprKind::Block(stmts, last) = &body.kind {
            if let Some(Stmt::Require(c)) = stmts.first() {
                require = Some(c.clone());
                let rest: Vec<Stmt> = stmts[1..].to_vec();
                body = if rest.is_empty() {
                    (**last).clone()
                } else {
                    SExpr {
                        kind: SExprKind::Block(rest, last.clone()),
                        span: body.span.clone(),
                    }
                };
            }
        }
        if holds && ensuring.is_none() {
            if let SExprKind::Method(recv, m, args) = &body.kind {
                if m.text == "holds" && args.is_empty() {
                    body = (**recv).clone();
                }
            }
        }
        // contract wrappers anywhere else are rejected
        check_no_nested_contracts(&body)?;
        if let Some(r) = &require {
            check_no_nested_contracts(r)?;
        }
        Ok((body, ensuring, holds, require))
    }

    fn fresh_placeholder(&mut self, span: SourceSpan) -> Ident {
        let id = Ident::new(format!("_${}", self.placeholder_counter), span);
        self.placeholder_counter += 1;
        id
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<SExpr> {
        if let Some(lam) = self.try_lambda()? {
            return Ok(lam);
        }
        let start = self.span();
        let mut e = self.match_level()?;
        while self.eat(&Tok::Ensuring) {
            let pred = self.ensuring_arg()?;
            e = SExpr {
                kind: SExprKind::Ensuring(Box::new(e), Box::new(pred)),
                span: start.to(&self.prev_span()),
            };
        }
        Ok(e)
    }

    fn ensuring_arg(&mut self) -> PResult<SExpr> {
        let arg = if self.at(&Tok::LBrace) {
            let b = self.block()?;
            match b.kind {
                SExprKind::Block(stmts, last) if stmts.is_empty() => *last,
                other => SExpr {
                    kind: other,
                    span: b.span,
                },
            }
        } else {
            self.expect(Tok::LParen)?;
            let e = self.expr()?;
            self.expect(Tok::RParen)?;
            e
        };
        let arg = self.close_placeholders(arg, false);
        if !matches!(&arg.kind, SExprKind::Lambda(ps, _) if ps.len() == 1) {
            return Err(SurfaceError::Unsupported {
                span: arg.span.clone(),
                message: "`ensuring` expects a one-argument predicate".into(),
            });
        }
        Ok(arg)
    }

    /// Recognizes `x => e`, `_ => e` and `(x: T, y) => e`.
    fn try_lambda(&mut self) -> PResult<Option<SExpr>> {
        let start = self.span();
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(_)), Some(Tok::Arrow)) => {
                let name = self.ident()?;
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                let span = start.to(&body.span);
                return Ok(Some(SExpr {
                    kind: SExprKind::Lambda(
                        vec![LambdaParam {
                            name,
                            ty: None,
                            synthetic: false,
                        }],
                        Box::new(body),
                    ),
                    span,
                }));
            }
            (Some(Tok::Underscore), Some(Tok::Arrow)) => {
                let sp = self.span();
                self.pos += 2;
                let name = self.fresh_placeholder(sp);
                let body = self.expr()?;
                let span = start.to(&body.span);
                return Ok(Some(SExpr {
                    kind: SExprKind::Lambda(
                        vec![LambdaParam {
                            name,
                            ty: None,
                            synthetic: true,
                        }],
                        Box::new(body),
                    ),
                    span,
                }));
            }
            (Some(Tok::LParen), _) => {}
            _ => return Ok(None),
        }
        // find the matching paren and check for `=>`
        let mut depth = 0usize;
        let mut k = self.pos;
        while k < self.tokens.len() {
            match self.tokens[k].tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                _ => {}
            }
            k += 1;
        }
        if k + 1 >= self.tokens.len() || self.tokens[k + 1].tok != Tok::Arrow {
            return Ok(None);
        }
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let (name, synthetic) = if self.at(&Tok::Underscore) {
                    let sp = self.span();
                    self.pos += 1;
                    (self.fresh_placeholder(sp), true)
                } else {
                    (self.ident()?, false)
                };
                let ty = if self.eat(&Tok::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                params.push(LambdaParam {
                    name,
                    ty,
                    synthetic,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        let span = start.to(&body.span);
        Ok(Some(SExpr {
            kind: SExprKind::Lambda(params, Box::new(body)),
            span,
        }))
    }

    fn match_level(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let mut e = self.implies()?;
        while self.eat(&Tok::Match) {
            self.expect(Tok::LBrace)?;
            let mut cases = Vec::new();
            while self.at(&Tok::Case) {
                cases.push(self.case_clause()?);
            }
            if cases.is_empty() {
                return self.error(&["`case`"]);
            }
            self.expect(Tok::RBrace)?;
            e = SExpr {
                kind: SExprKind::Match(Box::new(e), cases),
                span: start.to(&self.prev_span()),
            };
        }
        Ok(e)
    }

    fn case_clause(&mut self) -> PResult<SCase> {
        let start = self.expect(Tok::Case)?;
        let pattern = self.pattern()?;
        if self.at(&Tok::If) {
            return Err(SurfaceError::Unsupported {
                span: self.span(),
                message: "pattern guards are not supported".into(),
            });
        }
        self.expect(Tok::Arrow)?;
        // a clause body runs until the next `case` or the closing brace
        let body = self.clause_body()?;
        Ok(SCase {
            pattern,
            span: start.to(&body.span),
            body,
        })
    }

    fn clause_body(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let mut stmts = Vec::new();
        loop {
            if self.at(&Tok::Val) {
                stmts.push(self.val_stmt()?);
                self.eat(&Tok::Semi);
                continue;
            }
            break;
        }
        let e = self.expr()?;
        self.eat(&Tok::Semi);
        if stmts.is_empty() {
            Ok(e)
        } else {
            Ok(SExpr {
                span: start.to(&e.span),
                kind: SExprKind::Block(stmts, Box::new(e)),
            })
        }
    }

    fn pattern(&mut self) -> PResult<SPattern> {
        let start = self.span();
        let kind = match self.peek().cloned() {
            Some(Tok::Underscore) => {
                self.pos += 1;
                SPatternKind::Wild
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                SPatternKind::Int(n)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Int(n)) => {
                        self.pos += 1;
                        SPatternKind::Int(-n)
                    }
                    _ => return self.error(&["integer"]),
                }
            }
            Some(Tok::True) => {
                self.pos += 1;
                SPatternKind::Bool(true)
            }
            Some(Tok::False) => {
                self.pos += 1;
                SPatternKind::Bool(false)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let mut ps = Vec::new();
                loop {
                    ps.push(self.pattern()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                if ps.len() == 1 {
                    return Ok(ps.pop().unwrap());
                }
                SPatternKind::Tuple(ps)
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident()?;
                // optional type arguments on constructor patterns are ignored
                if self.at(&Tok::LBracket) {
                    self.typeargs()?;
                }
                if self.eat(&Tok::LParen) {
                    let mut ps = Vec::new();
                    if !self.at(&Tok::RParen) {
                        loop {
                            ps.push(self.pattern()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    SPatternKind::Ctor(name, ps)
                } else {
                    SPatternKind::Bind(name)
                }
            }
            _ => return self.error(&["pattern"]),
        };
        Ok(SPattern {
            kind,
            span: start.to(&self.prev_span()),
        })
    }

    fn implies(&mut self) -> PResult<SExpr> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            let span = lhs.span.to(&rhs.span);
            return Ok(SExpr {
                kind: SExprKind::Binary(BinOp::Implies, Box::new(lhs), Box::new(rhs)),
                span,
            });
        }
        Ok(lhs)
    }

    fn binary_level(
        &mut self,
        ops: &[(Tok, BinOp)],
        next: fn(&mut Self) -> PResult<SExpr>,
    ) -> PResult<SExpr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.at(tok) {
                    self.pos += 1;
                    let rhs = next(self)?;
                    let span = lhs.span.to(&rhs.span);
                    lhs = SExpr {
                        kind: SExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)),
                        span,
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or(&mut self) -> PResult<SExpr> {
        self.binary_level(&[(Tok::OrOr, BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> PResult<SExpr> {
        self.binary_level(&[(Tok::AndAnd, BinOp::And)], Self::equality)
    }

    fn equality(&mut self) -> PResult<SExpr> {
        self.binary_level(
            &[(Tok::EqEq, BinOp::Eq), (Tok::NotEq, BinOp::Ne)],
            Self::relational,
        )
    }

    fn relational(&mut self) -> PResult<SExpr> {
        self.binary_level(
            &[
                (Tok::Le, BinOp::Le),
                (Tok::Lt, BinOp::Lt),
                (Tok::Ge, BinOp::Ge),
                (Tok::Gt, BinOp::Gt),
            ],
            Self::additive,
        )
    }

    fn additive(&mut self) -> PResult<SExpr> {
        self.binary_level(
            &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
            Self::multiplicative,
        )
    }

    fn multiplicative(&mut self) -> PResult<SExpr> {
        self.binary_level(&[(Tok::Star, BinOp::Mul)], Self::prefix)
    }

    fn prefix(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let op = match self.peek() {
            Some(Tok::Bang) => UnOp::Not,
            Some(Tok::Minus) => UnOp::Neg,
            _ => return self.postfix(),
        };
        self.pos += 1;
        let e = self.prefix()?;
        // fold negative literals
        if let (UnOp::Neg, SExprKind::Int(n)) = (op, &e.kind) {
            return Ok(SExpr {
                kind: SExprKind::Int(-n.clone()),
                span: start.to(&e.span),
            });
        }
        Ok(SExpr {
            span: start.to(&e.span),
            kind: SExprKind::Unary(op, Box::new(e)),
        })
    }

    fn args(&mut self) -> PResult<Vec<SExpr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let a = self.expr()?;
                args.push(self.close_placeholders(a, true));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let mut e = self.primary()?;
        loop {
            if self.eat(&Tok::Dot) {
                let name = match self.peek() {
                    Some(Tok::Ensuring) => {
                        let id = Ident::new("ensuring", self.span());
                        self.pos += 1;
                        id
                    }
                    _ => self.ident()?,
                };
                if let Some(k) = name.text.strip_prefix('_').and_then(|d| d.parse::<usize>().ok()) {
                    if k == 0 {
                        return Err(SurfaceError::Syntax {
                            span: name.span,
                            found: "`_0`".into(),
                            expected: vec!["tuple projection `_1`, `_2`, ...".into()],
                        });
                    }
                    e = SExpr {
                        kind: SExprKind::Proj(Box::new(e), k - 1),
                        span: start.to(&name.span),
                    };
                    continue;
                }
                if name.text == "ensuring" {
                    let pred = self.ensuring_arg()?;
                    e = SExpr {
                        kind: SExprKind::Ensuring(Box::new(e), Box::new(pred)),
                        span: start.to(&self.prev_span()),
                    };
                    continue;
                }
                if self.at(&Tok::LBracket) {
                    self.typeargs()?;
                }
                let args = if self.at_args() {
                    self.args()?
                } else {
                    Vec::new()
                };
                e = SExpr {
                    kind: SExprKind::Method(Box::new(e), name, args),
                    span: start.to(&self.prev_span()),
                };
            } else if self.at_args() && !matches!(e.kind, SExprKind::Int(_)) {
                let args = self.args()?;
                e = SExpr {
                    kind: SExprKind::Apply(Box::new(e), args),
                    span: start.to(&self.prev_span()),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<SExpr> {
        let start = self.span();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(SExpr {
                    kind: SExprKind::Int(n),
                    span: start,
                })
            }
            Some(Tok::True) | Some(Tok::False) => {
                let b = self.at(&Tok::True);
                self.pos += 1;
                Ok(SExpr {
                    kind: SExprKind::Bool(b),
                    span: start,
                })
            }
            Some(Tok::Underscore) => {
                self.pos += 1;
                let id = self.fresh_placeholder(start.clone());
                Ok(SExpr {
                    kind: SExprKind::Placeholder(id),
                    span: start,
                })
            }
            Some(Tok::If) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let c = self.expr()?;
                self.expect(Tok::RParen)?;
                let t = self.expr()?;
                self.expect(Tok::Else)?;
                let f = self.expr()?;
                Ok(SExpr {
                    span: start.to(&f.span),
                    kind: SExprKind::If(Box::new(c), Box::new(t), Box::new(f)),
                })
            }
            Some(Tok::LBrace) => self.block(),
            Some(Tok::LParen) => {
                self.pos += 1;
                let mut es = Vec::new();
                if !self.at(&Tok::RParen) {
                    loop {
                        es.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                let span = start.to(&self.prev_span());
                match es.len() {
                    0 => Err(SurfaceError::Unsupported {
                        span,
                        message: "the unit value is not supported".into(),
                    }),
                    1 => {
                        let mut e = es.pop().unwrap();
                        e.span = span;
                        Ok(e)
                    }
                    _ => Ok(SExpr {
                        kind: SExprKind::Tuple(es),
                        span,
                    }),
                }
            }
            Some(Tok::Ident(name)) => {
                let id = self.ident()?;
                let targs = self.typeargs()?;
                if name == "BigInt" && self.at(&Tok::LParen) {
                    self.expect(Tok::LParen)?;
                    let neg = self.eat(&Tok::Minus);
                    let n = match self.peek().cloned() {
                        Some(Tok::Int(n)) => {
                            self.pos += 1;
                            n
                        }
                        _ => return self.error(&["integer"]),
                    };
                    self.expect(Tok::RParen)?;
                    return Ok(SExpr {
                        kind: SExprKind::Int(if neg { -n } else { n }),
                        span: start.to(&self.prev_span()),
                    });
                }
                if self.at_args() {
                    let args = self.args()?;
                    return Ok(SExpr {
                        kind: SExprKind::Call(id, targs, args),
                        span: start.to(&self.prev_span()),
                    });
                }
                Ok(SExpr {
                    span: start.to(&self.prev_span()),
                    kind: SExprKind::Ident(id, targs),
                })
            }
            Some(Tok::Require) => Err(SurfaceError::Unsupported {
                span: start,
                message: "`require` must be the first statement of a function body".into(),
            }),
            Some(Tok::Val) => Err(SurfaceError::Unsupported {
                span: start,
                message: "`val` is only allowed inside a block".into(),
            }),
            _ => self.error(&["expression"]),
        }
    }

    fn val_stmt(&mut self) -> PResult<Stmt> {
        self.expect(Tok::Val)?;
        let name = self.ident()?;
        let ty = if self.eat(&Tok::Colon) {
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::Assign)?;
        let e = self.expr()?;
        Ok(Stmt::Val(name, ty, e))
    }

    fn block(&mut self) -> PResult<SExpr> {
        let start = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Val) => {
                    stmts.push(self.val_stmt()?);
                }
                Some(Tok::Require) => {
                    self.pos += 1;
                    self.expect(Tok::LParen)?;
                    let c = self.expr()?;
                    self.expect(Tok::RParen)?;
                    stmts.push(Stmt::Require(c));
                }
                _ => break,
            }
            self.eat(&Tok::Semi);
        }
        let e = self.expr()?;
        self.eat(&Tok::Semi);
        self.expect(Tok::RBrace)?;
        let span = start.to(&self.prev_span());
        if stmts.is_empty() {
            let mut e = e;
            e.span = span;
            return Ok(e);
        }
        Ok(SExpr {
            kind: SExprKind::Block(stmts, Box::new(e)),
            span,
        })
    }

    /// Turns an argument containing `_` placeholders into a lambda. A bare `_`
    /// argument is left alone when `keep_bare` is set so that it expands at
    /// the enclosing argument instead, as in `map(xs, f(_))`.
    fn close_placeholders(&mut self, e: SExpr, keep_bare: bool) -> SExpr {
        if keep_bare && matches!(e.kind, SExprKind::Placeholder(_)) {
            return e;
        }
        let mut params = Vec::new();
        let body = replace_placeholders(e, &mut params);
        if params.is_empty() {
            return body;
        }
        let span = body.span.clone();
        SExpr {
            kind: SExprKind::Lambda(
                params
                    .into_iter()
                    .map(|name| LambdaParam {
                        name,
                        ty: None,
                        synthetic: true,
                    })
                    .collect(),
                Box::new(body),
            ),
            span,
        }
    }
}

fn replace_placeholders(e: SExpr, params: &mut Vec<Ident>) -> SExpr {
    use SExprKind::*;
    let span = e.span.clone();
    let go = |e: SExpr, params: &mut Vec<super::ast::Ident>| replace_placeholders(e, params);
    let gob = |e: Box<SExpr>, params: &mut Vec<super::ast::Ident>| Box::new(replace_placeholders(*e, params));
    let kind = match e.kind {
        Placeholder(id) => {
            params.push(id.clone());
            Ident(id, Vec::new())
        }
        // nested lambdas already own their placeholders
        k @ (Lambda(..) | Ident(..) | Int(_) | Bool(_)) => k,
        Call(f, t, args) => {
            let args = args
                .into_iter()
                .map(|a| {
                    if matches!(a.kind, Placeholder(_)) {
                        go(a, params)
                    } else {
                        a
                    }
                })
                .collect();
            Call(f, t, args)
        }
        Apply(f, args) => {
            let f = gob(f, params);
            let args = args
                .into_iter()
                .map(|a| {
                    if matches!(a.kind, Placeholder(_)) {
                        go(a, params)
                    } else {
                        a
                    }
                })
                .collect();
            Apply(f, args)
        }
        Method(r, m, args) => {
            let r = gob(r, params);
            let args = args
                .into_iter()
                .map(|a| {
                    if matches!(a.kind, Placeholder(_)) {
                        go(a, params)
                    } else {
                        a
                    }
                })
                .collect();
            Method(r, m, args)
        }
        Proj(r, k) => Proj(gob(r, params), k),
        Tuple(es) => Tuple(es.into_iter().map(|x| go(x, params)).collect()),
        If(c, t, f) => {
            let c = gob(c, params);
            let t = gob(t, params);
            If(c, t, gob(f, params))
        }
        Block(s, last) => Block(s, last),
        Match(s, cases) => Match(gob(s, params), cases),
        Binary(op, l, r) => {
            let l = gob(l, params);
            Binary(op, l, gob(r, params))
        }
        Unary(op, x) => Unary(op, gob(x, params)),
        Ensuring(a, b) => Ensuring(a, b),
    };
    SExpr { kind, span }
}

fn check_no_nested_contracts(e: &SExpr) -> PResult<()> {
    let mut err = None;
    walk(e, &mut |x| {
        if err.is_some() {
            return;
        }
        match &x.kind {
            SExprKind::Ensuring(..) => {
                err = Some(SurfaceError::Unsupported {
                    span: x.span.clone(),
                    message: "`ensuring` is only allowed around a function body".into(),
                })
            }
            SExprKind::Method(_, m, args) if m.text == "holds" && args.is_empty() => {
                err = Some(SurfaceError::Unsupported {
                    span: x.span.clone(),
                    message: "`.holds` is only allowed around a function body".into(),
                })
            }
            SExprKind::Block(stmts, _) => {
                for s in stmts {
                    if let Stmt::Require(c) = s {
                        err = Some(SurfaceError::Unsupported {
                            span: c.span.clone(),
                            message: "`require` must be the first statement of a function body"
                                .into(),
                        });
                    }
                }
            }
            _ => {}
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Pre-order traversal over every sub-expression.
pub fn walk(e: &SExpr, f: &mut dyn FnMut(&SExpr)) {
    use SExprKind::*;
    f(e);
    match &e.kind {
        Ident(..) | Int(_) | Bool(_) | Placeholder(_) => {}
        Call(_, _, args) => args.iter().for_each(|a| walk(a, f)),
        Apply(g, args) => {
            walk(g, f);
            args.iter().for_each(|a| walk(a, f));
        }
        Method(r, _, args) => {
            walk(r, f);
            args.iter().for_each(|a| walk(a, f));
        }
        Proj(r, _) => walk(r, f),
        Lambda(_, b) => walk(b, f),
        Tuple(es) => es.iter().for_each(|a| walk(a, f)),
        If(c, t, e) => {
            walk(c, f);
            walk(t, f);
            walk(e, f);
        }
        Block(stmts, last) => {
            for s in stmts {
                match s {
                    Stmt::Val(_, _, e) | Stmt::Require(e) => walk(e, f),
                }
            }
            walk(last, f);
        }
        Match(s, cases) => {
            walk(s, f);
            cases.iter().for_each(|c| walk(&c.body, f));
        }
        Binary(_, l, r) => {
            walk(l, f);
            walk(r, f);
        }
        Unary(_, x) => walk(x, f),
        Ensuring(a, b) => {
            walk(a, f);
            walk(b, f);
        }
    }
}

#[allow(dead_code)]
fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SIZE_SRC: &str = r#"
sealed abstract class List[A]
case class Cons[A](head: A, tail: List[A]) extends List[A]
case class Nil[A]() extends List[A]

def size[A](l: List[A]): BigInt = (l match {
  case Nil => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)
"#;

    #[test]
    fn size_shape() {
        let p = parse_program("size.psc", SIZE_SRC).unwrap();
        assert_eq!(p.datatypes.len(), 1);
        let ctors: Vec<_> = p.datatypes[0].ctors.iter().map(|c| c.name.text.as_str()).collect();
        assert_eq!(ctors, ["Cons", "Nil"]);
        assert_eq!(p.functions.len(), 1);
        let f = &p.functions[0];
        assert_eq!(f.name.text, "size");
        assert!(f.ensuring.is_some());
        assert!(matches!(f.body.kind, SExprKind::Match(..)));
    }

    #[test]
    fn zip_property_shape() {
        let src = r#"
@proof(method = "(clarsimp, induct rule: list_induct2, auto)")
def mapFstZip[A, B](xs: List[A], ys: List[B]) = {
  require(length(xs) == length(ys))
  xs.zip(ys).map(_._1)
} ensuring { _ == xs }
"#;
        let p = parse_program("hints.psc", src).unwrap();
        let f = &p.functions[0];
        assert!(f.require.is_some());
        assert!(f.ensuring.is_some());
        assert_eq!(
            f.proof.as_ref().unwrap().text,
            "(clarsimp, induct rule: list_induct2, auto)"
        );
        match &f.body.kind {
            SExprKind::Method(recv, m, args) => {
                assert_eq!(m.text, "map");
                assert!(matches!(recv.kind, SExprKind::Method(..)));
                assert!(matches!(args[0].kind, SExprKind::Lambda(..)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn holds_wrapper() {
        let src = "def sumReverse[A](xs: List[Nat]) =\n  (listSum(xs) == listSum(xs.reverse)).holds";
        let p = parse_program("t.psc", src).unwrap();
        assert!(p.functions[0].holds);
        assert!(matches!(
            p.functions[0].body.kind,
            SExprKind::Binary(BinOp::Eq, ..)
        ));
    }

    #[test]
    fn empty_match_rejected() {
        let err = parse_program("t.psc", "def f(x: BigInt): BigInt = x match { }").unwrap_err();
        match err {
            SurfaceError::Syntax { expected, .. } => assert!(expected.contains(&"`case`".into())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn guards_rejected() {
        let err = parse_program(
            "t.psc",
            "def f(x: BigInt): BigInt = x match { case y if y > 0 => 1 case _ => 0 }",
        )
        .unwrap_err();
        assert!(matches!(err, SurfaceError::Unsupported { .. }));
    }

    #[test]
    fn unfinished_def_is_a_syntax_error() {
        assert!(matches!(
            parse_program("t.psc", "def f(x"),
            Err(SurfaceError::Syntax { .. })
        ));
    }

    #[test]
    fn placeholder_binds_at_argument() {
        let p = parse_program("t.psc", "def f(xs: List[BigInt]) = map(xs, _ + 1)").unwrap();
        match &p.functions[0].body.kind {
            SExprKind::Call(_, _, args) => match &args[1].kind {
                SExprKind::Lambda(ps, _) => assert_eq!(ps.len(), 1),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bare_placeholder_expands_outward() {
        let p = parse_program("t.psc", "def f(xs: List[BigInt]) = map(xs, g(_))").unwrap();
        match &p.functions[0].body.kind {
            SExprKind::Call(_, _, args) => match &args[1].kind {
                SExprKind::Lambda(ps, body) => {
                    assert_eq!(ps.len(), 1);
                    assert!(matches!(body.kind, SExprKind::Call(..)));
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fun_types() {
        let p = parse_program(
            "t.psc",
            "sealed abstract class T\ncase class Bad(f: Bad => BigInt) extends T\ncase class Two(g: (BigInt, BigInt) => Boolean) extends T",
        )
        .unwrap();
        assert!(matches!(p.datatypes[0].ctors[0].fields[0].1, SType::Fun(ref ps, _) if ps.len() == 1));
        assert!(matches!(p.datatypes[0].ctors[1].fields[0].1, SType::Fun(ref ps, _) if ps.len() == 2));
    }

    #[test]
    fn paren_on_next_line_starts_a_statement() {
        let src = "def f(x: BigInt): BigInt = {\n  val y = (x)\n  (y + 1)\n}";
        let p = parse_program("t.psc", src).unwrap();
        match &p.functions[0].body.kind {
            SExprKind::Block(stmts, last) => {
                assert_eq!(stmts.len(), 1);
                assert!(matches!(last.kind, SExprKind::Binary(..)));
            }
            other => panic!("{other:?}"),
        }
    }
}
