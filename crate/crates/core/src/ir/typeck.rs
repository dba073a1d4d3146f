//! Unification and type synthesis over core expressions.

use std::collections::HashMap;

use super::{CoreProgram, Expr, Name, Pattern, Prim, Type};

#[derive(Debug, Default, Clone)]
pub struct Unifier {
    slots: Vec<Option<Type>>,
}

impl Unifier {
    pub fn fresh(&mut self) -> Type {
        self.slots.push(None);
        Type::Meta(self.slots.len() as u32 - 1)
    }

    pub fn resolve(&self, t: &Type) -> Type {
        match t {
            Type::Meta(m) => match &self.slots[*m as usize] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            _ => t.clone(),
        }
    }

    /// Fully substitutes solved metas.
    pub fn zonk(&self, t: &Type) -> Type {
        match self.resolve(t) {
            Type::Data(n, a) => Type::Data(n, a.iter().map(|x| self.zonk(x)).collect()),
            Type::Tuple(a) => Type::Tuple(a.iter().map(|x| self.zonk(x)).collect()),
            Type::Fun(p, r) => Type::Fun(p.iter().map(|x| self.zonk(x)).collect(), Box::new(self.zonk(&r))),
            other => other,
        }
    }

    /// Replaces unsolved metas by `Int`.
    pub fn default_zonk(&self, t: &Type) -> Type {
        match self.resolve(t) {
            Type::Meta(_) => Type::Int,
            Type::Data(n, a) => Type::Data(n, a.iter().map(|x| self.default_zonk(x)).collect()),
            Type::Tuple(a) => Type::Tuple(a.iter().map(|x| self.default_zonk(x)).collect()),
            Type::Fun(p, r) => Type::Fun(
                p.iter().map(|x| self.default_zonk(x)).collect(),
                Box::new(self.default_zonk(&r)),
            ),
            other => other,
        }
    }

    fn occurs(&self, m: u32, t: &Type) -> bool {
        match self.resolve(t) {
            Type::Meta(k) => k == m,
            Type::Data(_, a) | Type::Tuple(a) => a.iter().any(|x| self.occurs(m, x)),
            Type::Fun(p, r) => p.iter().any(|x| self.occurs(m, x)) || self.occurs(m, &r),
            _ => false,
        }
    }

    pub fn unify(&mut self, a: &Type, b: &Type) -> Result<(), (Type, Type)> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        let fail = |s: &Self| Err((s.zonk(&a), s.zonk(&b)));
        match (&a, &b) {
            (Type::Meta(x), Type::Meta(y)) if x == y => Ok(()),
            (Type::Meta(x), t) | (t, Type::Meta(x)) => {
                if self.occurs(*x, t) {
                    return fail(self);
                }
                self.slots[*x as usize] = Some(t.clone());
                Ok(())
            }
            (Type::Int, Type::Int) | (Type::Bool, Type::Bool) => Ok(()),
            (Type::Var(x), Type::Var(y)) if x == y => Ok(()),
            (Type::Data(n, xs), Type::Data(m, ys)) if n == m && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    if self.unify(x, y).is_err() {
                        return fail(self);
                    }
                }
                Ok(())
            }
            (Type::Tuple(xs), Type::Tuple(ys)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    if self.unify(x, y).is_err() {
                        return fail(self);
                    }
                }
                Ok(())
            }
            (Type::Fun(xs, r), Type::Fun(ys, s)) if xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    if self.unify(x, y).is_err() {
                        return fail(self);
                    }
                }
                if self.unify(r, s).is_err() {
                    return fail(self);
                }
                Ok(())
            }
            _ => fail(self),
        }
    }

    pub fn instantiate(&mut self, typarams: &[Name]) -> HashMap<Name, Type> {
        typarams.iter().map(|p| (p.clone(), self.fresh())).collect()
    }
}

/// Type synthesis for core expressions under a variable environment.
/// Polymorphic calls and constructors are instantiated with fresh metas.
pub struct Synth<'p> {
    pub program: &'p CoreProgram,
    pub u: Unifier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthError(pub String);

impl<'p> Synth<'p> {
    pub fn new(program: &'p CoreProgram) -> Self {
        Synth {
            program,
            u: Unifier::default(),
        }
    }

    fn unify(&mut self, a: &Type, b: &Type) -> Result<(), SynthError> {
        self.u
            .unify(a, b)
            .map_err(|(x, y)| SynthError(format!("cannot unify {x} with {y}")))
    }

    pub fn ctor_type(&mut self, c: &Name) -> Result<(Vec<Type>, Type), SynthError> {
        let (d, cd) = self
            .program
            .ctor(c)
            .ok_or_else(|| SynthError(format!("unknown constructor {c}")))?;
        let m = self.u.instantiate(&d.typarams);
        let fields = cd.fields.iter().map(|(_, t)| t.subst(&m)).collect();
        Ok((fields, d.self_type().subst(&m)))
    }

    pub fn fun_type(&mut self, f: &Name) -> Result<(Vec<Type>, Type), SynthError> {
        let fd = self
            .program
            .fun(f)
            .ok_or_else(|| SynthError(format!("unknown function {f}")))?;
        let m = self.u.instantiate(&fd.typarams);
        Ok((fd.params.iter().map(|(_, t)| t.subst(&m)).collect(), fd.ret.subst(&m)))
    }

    pub fn pattern(&mut self, p: &Pattern, t: &Type, env: &mut HashMap<Name, Type>) -> Result<(), SynthError> {
        match p {
            Pattern::Wild => Ok(()),
            Pattern::Var(v) => {
                env.insert(v.clone(), t.clone());
                Ok(())
            }
            Pattern::Ctor(c, ps) => {
                let (fields, ret) = self.ctor_type(c)?;
                self.unify(&ret, t)?;
                if fields.len() != ps.len() {
                    return Err(SynthError(format!("arity mismatch for {c}")));
                }
                for (q, ft) in ps.iter().zip(&fields) {
                    self.pattern(q, ft, env)?;
                }
                Ok(())
            }
            Pattern::Tuple(ps) => {
                let ts: Vec<Type> = ps.iter().map(|_| self.u.fresh()).collect();
                self.unify(&Type::Tuple(ts.clone()), t)?;
                for (q, ft) in ps.iter().zip(&ts) {
                    self.pattern(q, ft, env)?;
                }
                Ok(())
            }
            Pattern::Int(_) => self.unify(t, &Type::Int),
            Pattern::Bool(_) => self.unify(t, &Type::Bool),
        }
    }

    pub fn expr(&mut self, e: &Expr, env: &HashMap<Name, Type>) -> Result<Type, SynthError> {
        match e {
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| SynthError(format!("unbound variable {v}"))),
            Expr::Fun(f) => {
                let (ps, r) = self.fun_type(f)?;
                Ok(Type::Fun(ps, Box::new(r)))
            }
            Expr::Int(_) => Ok(Type::Int),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Ctor(c, args) => {
                let (fields, ret) = self.ctor_type(c)?;
                self.args(&fields, args, env)?;
                Ok(ret)
            }
            Expr::Call(f, args) => {
                let (ps, ret) = self.fun_type(f)?;
                self.args(&ps, args, env)?;
                Ok(ret)
            }
            Expr::Apply(g, args) => {
                let gt = self.expr(g, env)?;
                let ps: Vec<Type> = args.iter().map(|_| self.u.fresh()).collect();
                let r = self.u.fresh();
                self.unify(&gt, &Type::Fun(ps.clone(), Box::new(r.clone())))?;
                self.args(&ps, args, env)?;
                Ok(r)
            }
            Expr::Lambda(ps, body) => {
                let mut env2 = env.clone();
                for (n, t) in ps {
                    env2.insert(n.clone(), t.clone());
                }
                let r = self.expr(body, &env2)?;
                Ok(Type::Fun(ps.iter().map(|(_, t)| t.clone()).collect(), Box::new(r)))
            }
            Expr::Tuple(es) => Ok(Type::Tuple(
                es.iter().map(|x| self.expr(x, env)).collect::<Result<_, _>>()?,
            )),
            Expr::Proj(x, k) => {
                let t = self.expr(x, env)?;
                match self.u.resolve(&t) {
                    Type::Tuple(ts) if *k < ts.len() => Ok(ts[*k].clone()),
                    other => Err(SynthError(format!("projection _{} on {}", k + 1, self.u.zonk(&other)))),
                }
            }
            Expr::If(c, t, f) => {
                let ct = self.expr(c, env)?;
                self.unify(&ct, &Type::Bool)?;
                let a = self.expr(t, env)?;
                let b = self.expr(f, env)?;
                self.unify(&a, &b)?;
                Ok(a)
            }
            Expr::Let(n, v, b) => {
                let vt = self.expr(v, env)?;
                let mut env2 = env.clone();
                env2.insert(n.clone(), vt);
                self.expr(b, &env2)
            }
            Expr::Match(s, cs) => {
                let st = self.expr(s, env)?;
                let r = self.u.fresh();
                for (p, rhs) in cs {
                    let mut env2 = env.clone();
                    self.pattern(p, &st, &mut env2)?;
                    let t = self.expr(rhs, &env2)?;
                    self.unify(&r, &t)?;
                }
                Ok(r)
            }
            Expr::Prim(op, args) => {
                let ts: Vec<Type> = args.iter().map(|a| self.expr(a, env)).collect::<Result<_, _>>()?;
                match op {
                    Prim::Add | Prim::Sub | Prim::Mul | Prim::Neg => {
                        for t in &ts {
                            self.unify(t, &Type::Int)?;
                        }
                        Ok(Type::Int)
                    }
                    Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => {
                        for t in &ts {
                            self.unify(t, &Type::Int)?;
                        }
                        Ok(Type::Bool)
                    }
                    Prim::Eq | Prim::Ne => {
                        if ts.len() == 2 {
                            self.unify(&ts[0], &ts[1])?;
                        }
                        Ok(Type::Bool)
                    }
                    Prim::And | Prim::Or | Prim::Not | Prim::Implies => {
                        for t in &ts {
                            self.unify(t, &Type::Bool)?;
                        }
                        Ok(Type::Bool)
                    }
                }
            }
        }
    }

    fn args(&mut self, ps: &[Type], args: &[Expr], env: &HashMap<Name, Type>) -> Result<(), SynthError> {
        if ps.len() != args.len() {
            return Err(SynthError("arity mismatch".into()));
        }
        for (p, a) in ps.iter().zip(args) {
            let t = self.expr(a, env)?;
            self.unify(p, &t)?;
        }
        Ok(())
    }
}

/// Synthesizes the type of `e`; unsolved metas remain as `Meta`.
pub fn type_of(program: &CoreProgram, env: &HashMap<Name, Type>, e: &Expr) -> Result<Type, SynthError> {
    let mut s = Synth::new(program);
    let t = s.expr(e, env)?;
    Ok(s.u.zonk(&t))
}

/// Types of the variables bound by `p` when matched against a value of type `t`.
pub fn pattern_env(program: &CoreProgram, p: &Pattern, t: &Type) -> Result<HashMap<Name, Type>, SynthError> {
    let mut s = Synth::new(program);
    let mut env = HashMap::new();
    s.pattern(p, t, &mut env)?;
    Ok(env.into_iter().map(|(k, v)| (k, s.u.zonk(&v))).collect())
}
