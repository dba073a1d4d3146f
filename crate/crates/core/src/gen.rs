//! Seeded random well-typed values, for the evaluator-based oracles.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ir::eval::Closure;
use crate::ir::{CoreProgram, Name, Type, Value};
use crate::surface::NameKind;

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Replaces type variables by `Int`.
pub fn monomorphize(t: &Type) -> Type {
    match t {
        Type::Var(_) | Type::Meta(_) => Type::Int,
        Type::Data(n, a) => Type::Data(n.clone(), a.iter().map(monomorphize).collect()),
        Type::Tuple(a) => Type::Tuple(a.iter().map(monomorphize).collect()),
        Type::Fun(p, r) => Type::Fun(p.iter().map(monomorphize).collect(), Box::new(monomorphize(r))),
        other => other.clone(),
    }
}

pub struct ValueGen<'p> {
    pub program: &'p CoreProgram,
    pub int_range: (i64, i64),
    pub max_depth: u32,
}

impl<'p> ValueGen<'p> {
    pub fn new(program: &'p CoreProgram, max_depth: u32) -> Self {
        ValueGen {
            program,
            int_range: (-10, 10),
            max_depth,
        }
    }

    fn recursive_fields(&self, dt: &Name, fields: &[Type]) -> usize {
        fields
            .iter()
            .filter(|t| matches!(t, Type::Data(n, _) if n == dt))
            .count()
    }

    /// A value of type `t` whose structures nest at most `depth` levels.
    pub fn value(&self, t: &Type, depth: u32, rng: &mut Rng8) -> Value {
        match t {
            Type::Int | Type::Var(_) | Type::Meta(_) => Value::Int(BigInt::from(rng.gen_range(self.int_range.0..=self.int_range.1))),
            Type::Bool => Value::Bool(rng.gen_bool(0.5)),
            Type::Tuple(ts) => Value::Tuple(ts.iter().map(|x| self.value(x, depth, rng)).collect()),
            Type::Fun(ps, r) => self.function(ps, r, rng),
            Type::Data(n, args) => {
                let d = self.program.datatype(n).expect("known datatype");
                let mut choices: Vec<usize> = (0..d.ctors.len()).collect();
                if depth == 0 {
                    // only constructors with the fewest recursive fields
                    let costs: Vec<usize> = d
                        .ctors
                        .iter()
                        .map(|c| {
                            let fs: Vec<Type> = c.fields.iter().map(|(_, t)| t.clone()).collect();
                            self.recursive_fields(n, &fs)
                        })
                        .collect();
                    let min = *costs.iter().min().unwrap_or(&0);
                    choices.retain(|&i| costs[i] == min);
                }
                let ci = choices[rng.gen_range(0..choices.len())];
                let c = &d.ctors[ci];
                let fields = self.program.ctor_fields_at(&c.name, args).unwrap();
                let sub = depth.saturating_sub(1);
                Value::Ctor(c.name.clone(), fields.iter().map(|ft| self.value(ft, sub, rng)).collect())
            }
        }
    }

    /// A simple closure: identity when the types allow it, else a constant.
    pub fn function(&self, ps: &[Type], r: &Type, rng: &mut Rng8) -> Value {
        let params: Vec<Name> = (0..ps.len())
            .map(|i| crate::surface::HygienicName::new("g", 900_000 + i as u32, NameKind::Variable))
            .collect();
        let same: Vec<usize> = ps.iter().enumerate().filter(|(_, t)| monomorphize(t) == monomorphize(r)).map(|(i, _)| i).collect();
        let body = if !same.is_empty() && rng.gen_bool(0.5) {
            crate::ir::Expr::Var(params[same[rng.gen_range(0..same.len())]].clone())
        } else {
            let v = self.value(r, 2, rng);
            match v.to_expr() {
                Some(e) => e,
                None => return v,
            }
        };
        Value::Closure(Arc::new(Closure::Lambda {
            params,
            body,
            env: Vec::new(),
        }))
    }

    pub fn args(&self, types: &[Type], rng: &mut Rng8) -> Vec<Value> {
        types
            .iter()
            .map(|t| {
                let d = rng.gen_range(0..=self.max_depth);
                self.value(&monomorphize(t), d, rng)
            })
            .collect()
    }
}

/// Random ground instantiation for a set of typed variables.
pub fn instantiate(
    program: &CoreProgram,
    vars: &[(Name, Type)],
    depth: u32,
    rng: &mut Rng8,
) -> HashMap<Name, Value> {
    let g = ValueGen::new(program, depth);
    vars.iter()
        .map(|(n, t)| {
            let d = rng.gen_range(0..=depth);
            (n.clone(), g.value(&monomorphize(t), d, rng))
        })
        .collect()
}
