//! Hygienic renaming.
//!
//! Every binder gets a `HygienicName` whose suffix counts occurrences of the
//! same base text in document order: top-level declarations first, then the
//! binders inside each declaration. The bundled base library, when a program
//! needs it, is appended after the user declarations and numbered after them.

use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::parser::parse_with_origin;
use super::{HygienicName, NameKind, SourceSpan, SurfaceError};

pub const BASE_LIBRARY: &str = include_str!("../../lib/base.psc");
pub const BASE_FILE: &str = "<base>";

/// Per-program lookup tables produced by resolution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameTable {
    /// User-visible top-level names (datatypes, constructors, functions).
    pub toplevel: BTreeMap<String, Vec<HygienicName>>,
    /// For each function, the variable binders it introduces, by source text.
    /// Placeholder binders introduced by `_` are not listed.
    pub locals: BTreeMap<HygienicName, BTreeMap<String, Vec<HygienicName>>>,
    /// Whether the bundled base library was linked in.
    pub uses_base: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarLookup {
    Found(HygienicName),
    Unresolved,
    Ambiguous(Vec<HygienicName>),
}

impl NameTable {
    /// Resolves a `<var x>` reference inside function `fun`.
    pub fn lookup_var(&self, fun: &HygienicName, text: &str) -> VarLookup {
        match self.locals.get(fun).and_then(|m| m.get(text)) {
            None => VarLookup::Unresolved,
            Some(v) if v.len() == 1 => VarLookup::Found(v[0].clone()),
            Some(v) if v.is_empty() => VarLookup::Unresolved,
            Some(v) => VarLookup::Ambiguous(v.clone()),
        }
    }
}

/// Parses the bundled base library.
pub fn parse_base() -> SurfaceProgram {
    parse_with_origin(BASE_FILE, BASE_LIBRARY, Origin::Base).expect("base library parses")
}

/// Resolves all identifiers, linking the base library when the program
/// refers to names it does not define or carries `@library` annotations.
pub fn resolve_names(program: SurfaceProgram) -> Result<SurfaceProgram, SurfaceError> {
    let wants_base = program.functions.iter().any(|f| f.library.is_some());
    if !wants_base {
        match resolve_impl(program.clone(), None) {
            Ok(p) => return Ok(p),
            Err(SurfaceError::Unresolved { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    resolve_impl(program, Some(parse_base()))
}

/// Resolves without ever linking the base library.
pub fn resolve_standalone(program: SurfaceProgram) -> Result<SurfaceProgram, SurfaceError> {
    resolve_impl(program, None)
}

#[derive(Default)]
struct Scope {
    types: HashMap<String, HygienicName>,
    terms: HashMap<String, HygienicName>,
    /// constructor name -> field count
    ctor_arity: HashMap<String, usize>,
}

struct Resolver {
    counters: HashMap<String, u32>,
    user: Scope,
    base: Scope,
    locals: Vec<HashMap<String, HygienicName>>,
    typevars: Vec<HashMap<String, HygienicName>>,
    origin: Origin,
    current_locals: BTreeMap<String, Vec<HygienicName>>,
}

fn base_text(text: &str) -> &str {
    if text.starts_with("_$") {
        "uu"
    } else {
        text
    }
}

impl Resolver {
    fn fresh(&mut self, text: &str, kind: NameKind) -> HygienicName {
        let base = base_text(text);
        let c = self.counters.entry(base.to_string()).or_insert(0);
        let n = HygienicName::new(base, *c, kind);
        *c += 1;
        n
    }

    fn scope(&self) -> &Scope {
        match self.origin {
            Origin::User => &self.user,
            Origin::Base => &self.base,
        }
    }

    fn lookup_type(&self, id: &Ident) -> Option<HygienicName> {
        for frame in self.typevars.iter().rev() {
            if let Some(n) = frame.get(&id.text) {
                return Some(n.clone());
            }
        }
        if let Some(n) = self.scope().types.get(&id.text) {
            return Some(n.clone());
        }
        if self.origin == Origin::User {
            return self.base.types.get(&id.text).cloned();
        }
        None
    }

    fn lookup_global_term(&self, text: &str) -> Option<HygienicName> {
        if let Some(n) = self.scope().terms.get(text) {
            return Some(n.clone());
        }
        if self.origin == Origin::User {
            return self.base.terms.get(text).cloned();
        }
        None
    }

    fn lookup_term(&self, id: &Ident) -> Option<HygienicName> {
        for frame in self.locals.iter().rev() {
            if let Some(n) = frame.get(&id.text) {
                return Some(n.clone());
            }
        }
        self.lookup_global_term(&id.text)
    }

    fn is_ctor(&self, text: &str) -> bool {
        matches!(self.lookup_global_term(text), Some(n) if n.kind == NameKind::Constructor)
            && self.locals.iter().all(|f| !f.contains_key(text))
    }

    fn unresolved(id: &Ident) -> SurfaceError {
        SurfaceError::Unresolved {
            span: id.span.clone(),
            name: id.text.clone(),
        }
    }

    fn bind_local(&mut self, id: &mut Ident, synthetic: bool) -> HygienicName {
        let n = self.fresh(&id.text, NameKind::Variable);
        id.resolved = Some(n.clone());
        self.locals
            .last_mut()
            .expect("local frame")
            .insert(id.text.clone(), n.clone());
        if !synthetic && !id.text.starts_with("_$") {
            self.current_locals
                .entry(id.text.clone())
                .or_default()
                .push(n.clone());
        }
        n
    }

    fn ty(&mut self, t: &mut SType) -> Result<(), SurfaceError> {
        match t {
            SType::Named(id, args) => {
                for a in args.iter_mut() {
                    self.ty(a)?;
                }
                if matches!(id.text.as_str(), "BigInt" | "Int" | "Boolean") && args.is_empty() {
                    return Ok(());
                }
                id.resolved = Some(self.lookup_type(id).ok_or_else(|| Self::unresolved(id))?);
                Ok(())
            }
            SType::Tuple(ts) => ts.iter_mut().try_for_each(|t| self.ty(t)),
            SType::Fun(ps, r) => {
                for p in ps.iter_mut() {
                    self.ty(p)?;
                }
                self.ty(r)
            }
        }
    }

    fn typarams(&mut self, ps: &mut [Ident]) -> Result<(), SurfaceError> {
        let mut frame = HashMap::new();
        for p in ps.iter_mut() {
            if frame.contains_key(&p.text) {
                return Err(SurfaceError::Duplicate {
                    span: p.span.clone(),
                    name: p.text.clone(),
                });
            }
            let n = self.fresh(&p.text, NameKind::Typevar);
            p.resolved = Some(n.clone());
            frame.insert(p.text.clone(), n);
        }
        self.typevars.push(frame);
        Ok(())
    }

    fn pattern(&mut self, p: &mut SPattern, seen: &mut Vec<String>) -> Result<(), SurfaceError> {
        match &mut p.kind {
            SPatternKind::Wild | SPatternKind::Int(_) | SPatternKind::Bool(_) => Ok(()),
            SPatternKind::Bind(id) => {
                if self.is_ctor(&id.text) {
                    id.resolved = self.lookup_global_term(&id.text);
                    return Ok(());
                }
                if seen.contains(&id.text) {
                    return Err(SurfaceError::Duplicate {
                        span: id.span.clone(),
                        name: id.text.clone(),
                    });
                }
                seen.push(id.text.clone());
                self.bind_local(id, false);
                Ok(())
            }
            SPatternKind::Ctor(id, ps) => {
                match self.lookup_global_term(&id.text) {
                    Some(n) if n.kind == NameKind::Constructor => id.resolved = Some(n),
                    _ => return Err(Self::unresolved(id)),
                }
                ps.iter_mut().try_for_each(|q| self.pattern(q, seen))
            }
            SPatternKind::Tuple(ps) => ps.iter_mut().try_for_each(|q| self.pattern(q, seen)),
        }
    }

    fn expr(&mut self, e: &mut SExpr) -> Result<(), SurfaceError> {
        match &mut e.kind {
            SExprKind::Int(_) | SExprKind::Bool(_) => Ok(()),
            SExprKind::Placeholder(id) => Err(SurfaceError::Unsupported {
                span: id.span.clone(),
                message: "`_` placeholder outside of an argument position".into(),
            }),
            SExprKind::Ident(id, targs) => {
                for t in targs.iter_mut() {
                    self.ty(t)?;
                }
                id.resolved = Some(self.lookup_term(id).ok_or_else(|| Self::unresolved(id))?);
                Ok(())
            }
            SExprKind::Call(id, targs, args) => {
                for t in targs.iter_mut() {
                    self.ty(t)?;
                }
                id.resolved = Some(self.lookup_term(id).ok_or_else(|| Self::unresolved(id))?);
                args.iter_mut().try_for_each(|a| self.expr(a))
            }
            SExprKind::Apply(f, args) => {
                self.expr(f)?;
                args.iter_mut().try_for_each(|a| self.expr(a))
            }
            SExprKind::Method(recv, m, args) => {
                self.expr(recv)?;
                match self.lookup_global_term(&m.text) {
                    Some(n) if n.kind == NameKind::Function => m.resolved = Some(n),
                    _ => return Err(Self::unresolved(m)),
                }
                args.iter_mut().try_for_each(|a| self.expr(a))
            }
            SExprKind::Proj(r, _) => self.expr(r),
            SExprKind::Lambda(params, body) => {
                self.locals.push(HashMap::new());
                for p in params.iter_mut() {
                    if let Some(t) = &mut p.ty {
                        self.ty(t)?;
                    }
                    let synthetic = p.synthetic;
                    self.bind_local(&mut p.name, synthetic);
                }
                let r = self.expr(body);
                self.locals.pop();
                r
            }
            SExprKind::Tuple(es) => es.iter_mut().try_for_each(|a| self.expr(a)),
            SExprKind::If(c, t, f) => {
                self.expr(c)?;
                self.expr(t)?;
                self.expr(f)
            }
            SExprKind::Block(stmts, last) => {
                let depth = self.locals.len();
                for s in stmts.iter_mut() {
                    match s {
                        Stmt::Val(id, ty, v) => {
                            if let Some(t) = ty {
                                self.ty(t)?;
                            }
                            self.expr(v)?;
                            self.locals.push(HashMap::new());
                            self.bind_local(id, false);
                        }
                        Stmt::Require(c) => self.expr(c)?,
                    }
                }
                let r = self.expr(last);
                self.locals.truncate(depth);
                r
            }
            SExprKind::Match(s, cases) => {
                self.expr(s)?;
                for c in cases.iter_mut() {
                    self.locals.push(HashMap::new());
                    let mut seen = Vec::new();
                    let r = self
                        .pattern(&mut c.pattern, &mut seen)
                        .and_then(|_| self.expr(&mut c.body));
                    self.locals.pop();
                    r?;
                }
                Ok(())
            }
            SExprKind::Binary(_, l, r) => {
                self.expr(l)?;
                self.expr(r)
            }
            SExprKind::Unary(_, x) => self.expr(x),
            SExprKind::Ensuring(a, b) => {
                self.expr(a)?;
                self.expr(b)
            }
        }
    }

    fn declare(
        scope: &mut Scope,
        id: &Ident,
        name: HygienicName,
        types: bool,
    ) -> Result<(), SurfaceError> {
        let table = if types { &mut scope.types } else { &mut scope.terms };
        if table.contains_key(&id.text) {
            return Err(SurfaceError::Duplicate {
                span: id.span.clone(),
                name: id.text.clone(),
            });
        }
        table.insert(id.text.clone(), name);
        Ok(())
    }
}

fn span_key(s: &SourceSpan) -> (u32, u32) {
    (s.line, s.column)
}

enum Decl {
    Data(usize),
    Fun(usize),
}

fn resolve_impl(
    mut program: SurfaceProgram,
    base: Option<SurfaceProgram>,
) -> Result<SurfaceProgram, SurfaceError> {
    let uses_base = base.is_some();
    if let Some(b) = base {
        program.datatypes.extend(b.datatypes);
        program.functions.extend(b.functions);
    }
    let mut r = Resolver {
        counters: HashMap::new(),
        user: Scope::default(),
        base: Scope::default(),
        locals: Vec::new(),
        typevars: Vec::new(),
        origin: Origin::User,
        current_locals: BTreeMap::new(),
    };

    // document order: user declarations, then base declarations
    let mut order: Vec<(Origin, (u32, u32), Decl)> = Vec::new();
    for (i, d) in program.datatypes.iter().enumerate() {
        order.push((d.origin, span_key(&d.span), Decl::Data(i)));
    }
    for (i, f) in program.functions.iter().enumerate() {
        order.push((f.origin, span_key(&f.span), Decl::Fun(i)));
    }
    order.sort_by_key(|(o, k, _)| (*o == Origin::Base, *k));

    // pass 1: top-level names
    for (origin, _, decl) in &order {
        match decl {
            Decl::Data(i) => {
                let d = &mut program.datatypes[*i];
                let n = r.fresh(&d.name.text, NameKind::Datatype);
                let scope = if *origin == Origin::User { &mut r.user } else { &mut r.base };
                Resolver::declare(scope, &d.name, n.clone(), true)?;
                d.name.resolved = Some(n);
                let mut ctor_names = Vec::new();
                for c in d.ctors.iter_mut() {
                    let n = r.counters.entry(c.name.text.clone()).or_insert(0);
                    let cn = HygienicName::new(&c.name.text, *n, NameKind::Constructor);
                    *n += 1;
                    c.name.resolved = Some(cn.clone());
                    ctor_names.push((c.name.clone(), cn, c.fields.len()));
                }
                let scope = if *origin == Origin::User { &mut r.user } else { &mut r.base };
                for (id, cn, arity) in ctor_names {
                    Resolver::declare(scope, &id, cn, false)?;
                    scope.ctor_arity.insert(id.text.clone(), arity);
                }
            }
            Decl::Fun(i) => {
                let f = &mut program.functions[*i];
                let n = r.fresh(&f.name.text, NameKind::Function);
                let scope = if *origin == Origin::User { &mut r.user } else { &mut r.base };
                Resolver::declare(scope, &f.name, n.clone(), false)?;
                f.name.resolved = Some(n);
            }
        }
    }

    let mut table = NameTable {
        uses_base,
        ..Default::default()
    };
    for (origin, _, decl) in &order {
        if *origin == Origin::User {
            let (text, name) = match decl {
                Decl::Data(i) => {
                    let d = &program.datatypes[*i];
                    for c in &d.ctors {
                        table
                            .toplevel
                            .entry(c.name.text.clone())
                            .or_default()
                            .push(c.name.name().clone());
                    }
                    (d.name.text.clone(), d.name.name().clone())
                }
                Decl::Fun(i) => {
                    let f = &program.functions[*i];
                    (f.name.text.clone(), f.name.name().clone())
                }
            };
            table.toplevel.entry(text).or_default().push(name);
        }
    }

    // pass 2: declaration bodies
    for (origin, _, decl) in &order {
        r.origin = *origin;
        match decl {
            Decl::Data(i) => {
                let d = &mut program.datatypes[*i];
                r.typarams(&mut d.typarams)?;
                r.typevars.pop();
                // the parent name resolves to the datatype itself
                let dn = d.name.name().clone();
                for c in d.ctors.iter_mut() {
                    r.typarams(&mut c.typarams)?;
                    for (_, t) in c.fields.iter_mut() {
                        r.ty(t)?;
                    }
                    for t in c.parent_args.iter_mut() {
                        r.ty(t)?;
                    }
                    c.parent.resolved = Some(dn.clone());
                    r.typevars.pop();
                    let mut seen = Vec::new();
                    for (fname, _) in &c.fields {
                        if seen.contains(&fname.text) {
                            return Err(SurfaceError::Duplicate {
                                span: fname.span.clone(),
                                name: fname.text.clone(),
                            });
                        }
                        seen.push(fname.text.clone());
                    }
                }
            }
            Decl::Fun(i) => {
                let f = &mut program.functions[*i];
                r.current_locals = BTreeMap::new();
                r.typarams(&mut f.typarams)?;
                for (_, t) in f.params.iter_mut() {
                    r.ty(t)?;
                }
                if let Some(t) = &mut f.ret {
                    r.ty(t)?;
                }
                r.locals.push(HashMap::new());
                let mut seen: Vec<String> = Vec::new();
                for (p, _) in f.params.iter_mut() {
                    if seen.contains(&p.text) {
                        return Err(SurfaceError::Duplicate {
                            span: p.span.clone(),
                            name: p.text.clone(),
                        });
                    }
                    seen.push(p.text.clone());
                    r.bind_local(p, false);
                }
                if let Some(req) = &mut f.require {
                    r.expr(req)?;
                }
                r.expr(&mut f.body)?;
                if let Some(post) = &mut f.ensuring {
                    r.expr(post)?;
                }
                r.locals.pop();
                r.typevars.pop();
                let locals = std::mem::take(&mut r.current_locals);
                table.locals.insert(f.name.name().clone(), locals);
            }
        }
    }
    program.name_table = table;
    program.resolved = true;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_program;

    const SIZE_SRC: &str = r#"
sealed abstract class List[A]
case class Cons[A](head: A, tail: List[A]) extends List[A]
case class Nil[A]() extends List[A]

def size[A](l: List[A]): BigInt = (l match {
  case Nil => BigInt(0)
  case Cons(_, xs) => 1 + size(xs)
}) ensuring(_ >= 0)
"#;

    #[test]
    fn size_numbering() {
        let p = resolve_names(parse_program("size.psc", SIZE_SRC).unwrap()).unwrap();
        assert!(!p.name_table.uses_base);
        let f = &p.functions[0];
        assert_eq!(f.name.name().internal(), "size'0");
        assert_eq!(f.params[0].0.name().internal(), "l'0");
        // re-running gives identical names
        let q = resolve_names(parse_program("size.psc", SIZE_SRC).unwrap()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn shared_parameter_names_get_distinct_suffixes() {
        let src = "def f(xs: BigInt): BigInt = xs\ndef g(xs: BigInt): BigInt = xs";
        let p = resolve_names(parse_program("t.psc", src).unwrap()).unwrap();
        let a = p.functions[0].params[0].0.name().clone();
        let b = p.functions[1].params[0].0.name().clone();
        assert_ne!(a, b);
        assert_eq!(a.base, b.base);
    }

    #[test]
    fn undefined_reference() {
        let src = "def f(x: BigInt): BigInt = foo(x)";
        let err = resolve_names(parse_program("t.psc", src).unwrap()).unwrap_err();
        assert!(matches!(err, SurfaceError::Unresolved { ref name, .. } if name == "foo"));
    }

    #[test]
    fn duplicate_definition() {
        let src = "def f(x: BigInt): BigInt = x\ndef f(y: BigInt): BigInt = y";
        let err = resolve_names(parse_program("t.psc", src).unwrap()).unwrap_err();
        assert!(matches!(err, SurfaceError::Duplicate { .. }));
    }

    #[test]
    fn nonlinear_pattern_rejected() {
        let src = "def f(p: (BigInt, BigInt)): BigInt = p match { case (x, x) => x }";
        let err = resolve_names(parse_program("t.psc", src).unwrap()).unwrap_err();
        assert!(matches!(err, SurfaceError::Duplicate { .. }));
    }

    #[test]
    fn base_library_linked_on_demand() {
        let src = "def f[A](xs: List[A]): Nat = length(xs)";
        let p = resolve_names(parse_program("t.psc", src).unwrap()).unwrap();
        assert!(p.name_table.uses_base);
        assert_eq!(p.functions[0].name.name().internal(), "f'0");
    }

    #[test]
    fn var_table_lookup() {
        let src = "def f(xs: BigInt, k: BigInt): BigInt = { val xs2 = xs; k }";
        let p = resolve_names(parse_program("t.psc", src).unwrap()).unwrap();
        let f = p.functions[0].name.name().clone();
        assert!(matches!(p.name_table.lookup_var(&f, "xs"), VarLookup::Found(_)));
        assert_eq!(p.name_table.lookup_var(&f, "zz"), VarLookup::Unresolved);
    }

    #[test]
    fn shadowed_binder_is_ambiguous() {
        let src = "def f(xs: BigInt): BigInt = xs match { case xs => xs }";
        let p = resolve_names(parse_program("t.psc", src).unwrap()).unwrap();
        let f = p.functions[0].name.name().clone();
        assert!(matches!(p.name_table.lookup_var(&f, "xs"), VarLookup::Ambiguous(v) if v.len() == 2));
    }
}
