//! Call-by-value evaluator with fuel, used as the semantic oracle.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{CoreProgram, Expr, Name, Pattern, Prim};

pub const DEFAULT_FUEL: u64 = 10_000;
const MAX_DEPTH: usize = 4_000;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Ctor(Name, Vec<Value>),
    Tuple(Vec<Value>),
    Closure(Arc<Closure>),
}

#[derive(PartialEq, Eq, Debug)]
pub enum Closure {
    Lambda {
        params: Vec<Name>,
        body: Expr,
        env: Vec<(Name, Value)>,
    },
    Fun(Name),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    /// Expression denoting a first-order value.
    pub fn to_expr(&self) -> Option<Expr> {
        Some(match self {
            Value::Int(n) => Expr::Int(n.clone()),
            Value::Bool(b) => Expr::Bool(*b),
            Value::Ctor(c, vs) => Expr::Ctor(c.clone(), vs.iter().map(|v| v.to_expr()).collect::<Option<_>>()?),
            Value::Tuple(vs) => Expr::Tuple(vs.iter().map(|v| v.to_expr()).collect::<Option<_>>()?),
            Value::Closure(c) => match &**c {
                Closure::Fun(f) => Expr::Fun(f.clone()),
                Closure::Lambda { .. } => return None,
            },
        })
    }

    /// Number of constructor nodes, the structural size used by termination.
    pub fn size(&self) -> usize {
        match self {
            Value::Ctor(_, vs) => 1 + vs.iter().map(|v| v.size()).sum::<usize>(),
            Value::Tuple(vs) => vs.iter().map(|v| v.size()).sum(),
            _ => 0,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Ctor(c, vs) => {
                write!(f, "{}(", c.base)?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Value::Tuple(vs) => {
                write!(f, "(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Value::Closure(_) => write!(f, "<closure>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("out of fuel")]
    OutOfFuel,
    #[error("match failure on {0}")]
    MatchFailure(Value),
    #[error("evaluation error: {0}")]
    Stuck(String),
}

pub type Env = HashMap<Name, Value>;

/// Alternative definitions by first-match equations, keyed by function.
pub type Overrides = HashMap<Name, Vec<(Vec<Pattern>, Expr)>>;

pub struct Evaluator<'p> {
    pub program: &'p CoreProgram,
    pub fuel: u64,
    pub overrides: Overrides,
    depth: usize,
}

impl<'p> Evaluator<'p> {
    pub fn new(program: &'p CoreProgram, fuel: u64) -> Self {
        Evaluator {
            program,
            fuel,
            overrides: HashMap::new(),
            depth: 0,
        }
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        if self.fuel == 0 || self.depth >= MAX_DEPTH {
            return Err(EvalError::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    pub fn call(&mut self, f: &Name, args: Vec<Value>) -> Result<Value, EvalError> {
        self.tick()?;
        self.depth += 1;
        let r = self.call_inner(f, args);
        self.depth -= 1;
        r
    }

    fn call_inner(&mut self, f: &Name, args: Vec<Value>) -> Result<Value, EvalError> {
        if let Some(eqs) = self.overrides.get(f) {
            let eqs = eqs.clone();
            for (lhs, rhs) in &eqs {
                let mut env = Env::new();
                if lhs.len() == args.len() && lhs.iter().zip(&args).all(|(p, v)| match_pattern(p, v, &mut env)) {
                    return self.expr(&env, rhs);
                }
            }
            let witness = if args.len() == 1 {
                args.into_iter().next().unwrap()
            } else {
                Value::Tuple(args)
            };
            return Err(EvalError::MatchFailure(witness));
        }
        let fd = self
            .program
            .fun(f)
            .ok_or_else(|| EvalError::Stuck(format!("unknown function {f}")))?;
        if fd.params.len() != args.len() {
            return Err(EvalError::Stuck(format!("arity mismatch calling {f}")));
        }
        let env: Env = fd.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
        self.expr(&env, &fd.body)
    }

    pub fn apply(&mut self, fv: &Value, args: Vec<Value>) -> Result<Value, EvalError> {
        match fv {
            Value::Closure(c) => match &**c {
                Closure::Fun(f) => self.call(f, args),
                Closure::Lambda { params, body, env } => {
                    self.tick()?;
                    if params.len() != args.len() {
                        return Err(EvalError::Stuck("closure arity mismatch".into()));
                    }
                    let mut e: Env = env.iter().cloned().collect();
                    for (p, a) in params.iter().zip(args) {
                        e.insert(p.clone(), a);
                    }
                    self.depth += 1;
                    let r = self.expr(&e, body);
                    self.depth -= 1;
                    r
                }
            },
            other => Err(EvalError::Stuck(format!("applying non-function {other}"))),
        }
    }

    pub fn expr(&mut self, env: &Env, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::Stuck(format!("unbound variable {v}"))),
            Expr::Fun(f) => Ok(Value::Closure(Arc::new(Closure::Fun(f.clone())))),
            Expr::Int(n) => Ok(Value::Int(n.clone())),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Ctor(c, args) => Ok(Value::Ctor(c.clone(), self.exprs(env, args)?)),
            Expr::Call(f, args) => {
                let vs = self.exprs(env, args)?;
                self.call(f, vs)
            }
            Expr::Apply(g, args) => {
                let gv = self.expr(env, g)?;
                let vs = self.exprs(env, args)?;
                self.apply(&gv, vs)
            }
            Expr::Lambda(ps, body) => {
                let fv = body.free_vars();
                let mut captured: Vec<(Name, Value)> = env
                    .iter()
                    .filter(|(k, _)| fv.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                captured.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(Value::Closure(Arc::new(Closure::Lambda {
                    params: ps.iter().map(|(n, _)| n.clone()).collect(),
                    body: (**body).clone(),
                    env: captured,
                })))
            }
            Expr::Tuple(es) => Ok(Value::Tuple(self.exprs(env, es)?)),
            Expr::Proj(x, k) => match self.expr(env, x)? {
                Value::Tuple(mut vs) if *k < vs.len() => Ok(vs.swap_remove(*k)),
                other => Err(EvalError::Stuck(format!("projection on {other}"))),
            },
            Expr::If(c, t, f) => match self.expr(env, c)? {
                Value::Bool(true) => self.expr(env, t),
                Value::Bool(false) => self.expr(env, f),
                other => Err(EvalError::Stuck(format!("if on {other}"))),
            },
            Expr::Let(n, v, b) => {
                let val = self.expr(env, v)?;
                let mut env2 = env.clone();
                env2.insert(n.clone(), val);
                self.expr(&env2, b)
            }
            Expr::Match(s, cs) => {
                let sv = self.expr(env, s)?;
                for (p, rhs) in cs {
                    let mut env2 = env.clone();
                    if match_pattern(p, &sv, &mut env2) {
                        return self.expr(&env2, rhs);
                    }
                }
                Err(EvalError::MatchFailure(sv))
            }
            Expr::Prim(op, args) => self.prim(env, *op, args),
        }
    }

    fn exprs(&mut self, env: &Env, es: &[Expr]) -> Result<Vec<Value>, EvalError> {
        es.iter().map(|e| self.expr(env, e)).collect()
    }

    fn prim(&mut self, env: &Env, op: Prim, args: &[Expr]) -> Result<Value, EvalError> {
        let boolv = |v: Value| match v {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::Stuck(format!("expected boolean, got {other}"))),
        };
        match op {
            Prim::And => {
                if !boolv(self.expr(env, &args[0])?)? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(boolv(self.expr(env, &args[1])?)?))
            }
            Prim::Or => {
                if boolv(self.expr(env, &args[0])?)? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(boolv(self.expr(env, &args[1])?)?))
            }
            Prim::Implies => {
                if !boolv(self.expr(env, &args[0])?)? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(boolv(self.expr(env, &args[1])?)?))
            }
            Prim::Not => Ok(Value::Bool(!boolv(self.expr(env, &args[0])?)?)),
            Prim::Eq => {
                let a = self.expr(env, &args[0])?;
                let b = self.expr(env, &args[1])?;
                Ok(Value::Bool(a == b))
            }
            Prim::Ne => {
                let a = self.expr(env, &args[0])?;
                let b = self.expr(env, &args[1])?;
                Ok(Value::Bool(a != b))
            }
            _ => {
                let vs = self.exprs(env, args)?;
                let mut ns = Vec::new();
                for v in vs {
                    match v {
                        Value::Int(n) => ns.push(n),
                        other => return Err(EvalError::Stuck(format!("expected integer, got {other}"))),
                    }
                }
                Ok(match op {
                    Prim::Add => Value::Int(&ns[0] + &ns[1]),
                    Prim::Sub => Value::Int(&ns[0] - &ns[1]),
                    Prim::Mul => Value::Int(&ns[0] * &ns[1]),
                    Prim::Neg => Value::Int(-&ns[0]),
                    Prim::Lt => Value::Bool(ns[0] < ns[1]),
                    Prim::Le => Value::Bool(ns[0] <= ns[1]),
                    Prim::Gt => Value::Bool(ns[0] > ns[1]),
                    Prim::Ge => Value::Bool(ns[0] >= ns[1]),
                    _ => unreachable!(),
                })
            }
        }
    }
}

pub fn match_pattern(p: &Pattern, v: &Value, env: &mut Env) -> bool {
    match (p, v) {
        (Pattern::Wild, _) => true,
        (Pattern::Var(n), _) => {
            env.insert(n.clone(), v.clone());
            true
        }
        (Pattern::Ctor(c, ps), Value::Ctor(d, vs)) => {
            c == d && ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| match_pattern(p, v, env))
        }
        (Pattern::Tuple(ps), Value::Tuple(vs)) => {
            ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| match_pattern(p, v, env))
        }
        (Pattern::Int(n), Value::Int(m)) => n == m,
        (Pattern::Bool(a), Value::Bool(b)) => a == b,
        _ => false,
    }
}

/// Evaluates `fun` applied to `args` with a budget of `fuel` calls.
pub fn eval(program: &CoreProgram, fun: &Name, args: Vec<Value>, fuel: u64) -> Result<Value, EvalError> {
    Evaluator::new(program, fuel).call(fun, args)
}

pub fn eval_expr(program: &CoreProgram, env: &Env, e: &Expr, fuel: u64) -> Result<Value, EvalError> {
    Evaluator::new(program, fuel).expr(env, e)
}

pub fn is_zero(v: &Value) -> bool {
    matches!(v, Value::Int(n) if n.is_zero())
}
