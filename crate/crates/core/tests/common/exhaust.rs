//! Random small matches and brute-force coverage by enumeration.

use psv::gen::Rng8;
use psv::ir::eval::{match_pattern, Env, Value};
use psv::ir::{CoreProgram, Pattern, Type};
use psv::surface::{HygienicName, NameKind};
use rand::Rng;

/// All values of `t` with constructor nesting at most `depth`.
pub fn values(p: &CoreProgram, t: &Type, depth: u32) -> Vec<Value> {
    match t {
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Tuple(ts) => {
            let mut out = vec![vec![]];
            for t in ts {
                let vs = values(p, t, depth);
                out = out
                    .into_iter()
                    .flat_map(|pre: Vec<Value>| {
                        vs.iter().map(move |v| {
                            let mut x = pre.clone();
                            x.push(v.clone());
                            x
                        })
                    })
                    .collect();
            }
            out.into_iter().map(Value::Tuple).collect()
        }
        Type::Data(_, args) => {
            if depth == 0 {
                return vec![];
            }
            let d = p.datatype(t.datatype().unwrap()).unwrap();
            let mut out = Vec::new();
            for c in &d.ctors {
                let fs = p.ctor_fields_at(&c.name, args).unwrap();
                let field_vals = values(p, &Type::Tuple(fs), depth - 1);
                for fv in field_vals {
                    let Value::Tuple(xs) = fv else { unreachable!() };
                    out.push(Value::Ctor(c.name.clone(), xs));
                }
            }
            out
        }
        other => panic!("no enumeration for {other}"),
    }
}

pub struct MatchGen<'p> {
    pub program: &'p CoreProgram,
    next_var: u32,
}

impl<'p> MatchGen<'p> {
    pub fn new(program: &'p CoreProgram) -> Self {
        MatchGen { program, next_var: 0 }
    }

    /// A pattern of `t` nesting constructors at most `depth` deep.
    pub fn pattern(&mut self, t: &Type, depth: u32, r: &mut Rng8) -> Pattern {
        let roll = r.gen_range(0..10);
        if roll < 2 || (depth == 0 && !matches!(t, Type::Tuple(_))) {
            return if roll == 0 {
                self.next_var += 1;
                Pattern::Var(HygienicName::new("v", 800_000 + self.next_var, NameKind::Variable))
            } else {
                Pattern::Wild
            };
        }
        match t {
            Type::Bool => Pattern::Bool(r.gen_bool(0.5)),
            Type::Tuple(ts) => Pattern::Tuple(ts.iter().map(|x| self.pattern(x, depth, r)).collect()),
            Type::Data(_, args) => {
                let d = self.program.datatype(t.datatype().unwrap()).unwrap();
                let c = &d.ctors[r.gen_range(0..d.ctors.len())];
                let fs = self.program.ctor_fields_at(&c.name, args).unwrap();
                Pattern::Ctor(c.name.clone(), fs.iter().map(|f| self.pattern(f, depth - 1, r)).collect())
            }
            _ => Pattern::Wild,
        }
    }

    pub fn clauses(&mut self, t: &Type, r: &mut Rng8) -> Vec<Pattern> {
        let n = r.gen_range(1..=4);
        (0..n).map(|_| self.pattern(t, 2, r)).collect()
    }
}

pub struct Brute {
    pub complete: bool,
    pub redundant: Vec<usize>,
}

/// Coverage and redundancy by enumerating every value up to depth 3;
/// patterns of depth 2 cannot distinguish deeper values.
pub fn brute(p: &CoreProgram, clauses: &[Pattern], t: &Type) -> Brute {
    let vs = values(p, t, 3);
    let first = |v: &Value| clauses.iter().position(|c| match_pattern(c, v, &mut Env::new()));
    let hits: Vec<Option<usize>> = vs.iter().map(first).collect();
    Brute {
        complete: hits.iter().all(|h| h.is_some()),
        redundant: (0..clauses.len()).filter(|i| !hits.contains(&Some(*i))).collect(),
    }
}
