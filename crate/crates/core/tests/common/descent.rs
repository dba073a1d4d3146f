//! Termination oracles that do not reuse the checker's matrix.

use std::collections::HashMap;

use num_bigint::BigInt;
use psv::defgraph::{call_graph, scc_topo, Component};
use psv::gen::{monomorphize, rng, ValueGen};
use psv::ir::eval::{eval_expr, match_pattern, Env, Value};
use psv::ir::{CoreProgram, Expr, Name};
use psv::patcomp::{split_equations, Equation};
use psv::termination::{certify_termination, MeasureKind, TerminationCert, TerminationFailure};

pub fn equations(p: &CoreProgram) -> HashMap<Name, Vec<Equation>> {
    p.functions.iter().map(|f| (f.name.clone(), split_equations(f, p))).collect()
}

pub fn components(p: &CoreProgram) -> Vec<Component> {
    scc_topo(&call_graph(p)).components
}

pub fn certify(p: &CoreProgram, c: &Component) -> Result<TerminationCert, TerminationFailure> {
    certify_termination(p, c, &equations(p))
}

/// Replaces every argument of every call into the component by the caller's
/// own parameter at that position, removing any decrease.
pub fn remove_decrease(p: &CoreProgram, c: &Component) -> CoreProgram {
    let mut q = p.clone();
    for f in q.functions.iter_mut().filter(|f| c.members.contains(&f.name)) {
        let params: Vec<(Name, psv::ir::Type)> = f.params.clone();
        let callee_params: HashMap<Name, Vec<psv::ir::Type>> = c
            .members
            .iter()
            .map(|m| (m.clone(), p.fun(m).unwrap().params.iter().map(|(_, t)| monomorphize(t)).collect()))
            .collect();
        rewrite_calls(&mut f.body, &|g, args| {
            let tys = callee_params.get(g)?;
            Some(
                tys.iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let same = |(_, pt): &&(Name, psv::ir::Type)| monomorphize(pt) == *t;
                        params
                            .get(i)
                            .filter(|x| same(x))
                            .or_else(|| params.iter().find(|x| same(x)))
                            .map(|(n, _)| Expr::Var(n.clone()))
                            .unwrap_or_else(|| args[i].clone())
                    })
                    .collect(),
            )
        });
    }
    q
}

fn rewrite_calls(e: &mut Expr, f: &dyn Fn(&Name, &[Expr]) -> Option<Vec<Expr>>) {
    if let Expr::Call(g, args) = e {
        if let Some(new) = f(g, args) {
            *args = new;
            return;
        }
    }
    for c in e.children_mut() {
        rewrite_calls(c, f);
    }
}

#[derive(Debug, Default)]
pub struct DescentReport {
    /// Rows exercised by at least one sampled input.
    pub exercised: usize,
    pub rows: usize,
    pub checks: usize,
    pub violations: Vec<String>,
}

/// Samples caller inputs matching each call row and checks that the
/// evaluated callee arguments are lexicographically smaller under the
/// certificate's measure.
pub fn sample_descent(p: &CoreProgram, cert: &TerminationCert, tries: usize, seed: u64) -> DescentReport {
    let mut r = rng(seed);
    let g = ValueGen::new(p, 5);
    let mut rep = DescentReport {
        rows: cert.matrix.rows.len(),
        ..Default::default()
    };
    let measure = |f: &Name, args: &[Value]| -> Option<Vec<BigInt>> {
        cert.measure
            .iter()
            .map(|&j| {
                let col = &cert.matrix.columns[j];
                let v = &args[col.position_of(f)?];
                match col.kind {
                    MeasureKind::Size => Some(BigInt::from(v.size())),
                    MeasureKind::Int => match v {
                        Value::Int(n) => Some(n.clone()),
                        _ => None,
                    },
                }
            })
            .collect()
    };
    for (ri, row) in cert.matrix.rows.iter().enumerate() {
        let Some(call_args) = &row.args else { continue };
        let caller = p.fun(&row.caller).unwrap();
        let types: Vec<_> = caller.params.iter().map(|(_, t)| t.clone()).collect();
        let mut hit = false;
        for _ in 0..tries {
            let args = g.args(&types, &mut r);
            let mut env: Env = caller.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
            if !row.context.iter().zip(&args).all(|(pat, v)| match_pattern(pat, v, &mut env)) {
                continue;
            }
            if !row.guards.iter().all(|c| eval_expr(p, &env, c, 10_000) == Ok(Value::Bool(true))) {
                continue;
            }
            let Ok(callee_args) = call_args.iter().map(|a| eval_expr(p, &env, a, 10_000)).collect::<Result<Vec<_>, _>>() else {
                continue;
            };
            hit = true;
            rep.checks += 1;
            let (Some(before), Some(after)) = (measure(&row.caller, &args), measure(&row.callee, &callee_args)) else {
                rep.violations.push(format!("row {ri}: measure undefined"));
                break;
            };
            if after >= before {
                rep.violations.push(format!("row {ri} ({row}): {before:?} -> {after:?}"));
                break;
            }
            // integer columns must stay above the guard's bound where they decrease
            for (k, &j) in cert.measure.iter().enumerate() {
                if after[k] < before[k] {
                    if let Some(b) = cert.matrix.bounds.get(&(ri, j)) {
                        if before[k] < *b {
                            rep.violations.push(format!("row {ri}: {} below bound {b}", before[k]));
                        }
                    }
                    break;
                }
            }
        }
        rep.exercised += hit as usize;
    }
    rep
}
