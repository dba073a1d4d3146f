//! Call graph, component order and strict positivity of datatypes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ir::{CoreProgram, DataTypeDef, Expr, Name, Type};
use crate::surface::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    pub nodes: Vec<Name>,
    pub edges: Vec<(Name, Name, SourceSpan)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Members in definition order.
    pub members: Vec<Name>,
    pub recursive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComponentOrder {
    pub components: Vec<Component>,
}

impl ComponentOrder {
    pub fn component_of(&self, f: &Name) -> Option<usize> {
        self.components.iter().position(|c| c.members.contains(f))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.components {
            let names: Vec<String> = c.members.iter().map(|n| n.internal()).collect();
            out.push_str(&names.join(", "));
            out.push('\n');
        }
        out
    }
}

fn callees(e: &Expr) -> BTreeSet<Name> {
    let mut s = BTreeSet::new();
    e.calls(&mut s);
    s
}

pub fn call_graph(program: &CoreProgram) -> CallGraph {
    let nodes: Vec<Name> = program.functions.iter().map(|f| f.name.clone()).collect();
    let mut edges = Vec::new();
    for f in &program.functions {
        let mut targets = callees(&f.body);
        if let Some(p) = &f.pre {
            targets.extend(callees(p));
        }
        if let Some((_, q)) = &f.post {
            targets.extend(callees(q));
        }
        // keep definition order for determinism
        for n in &nodes {
            if targets.contains(n) {
                edges.push((f.name.clone(), n.clone(), f.span.clone()));
            }
        }
    }
    CallGraph { nodes, edges }
}

/// Tarjan's algorithm with an explicit stack. Components come out callees
/// first; roots and successors are visited in definition order.
pub fn scc_topo(graph: &CallGraph) -> ComponentOrder {
    let n = graph.nodes.len();
    let index_of: HashMap<&Name, usize> = graph.nodes.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut self_loop = vec![false; n];
    for (a, b, _) in &graph.edges {
        if let (Some(&i), Some(&j)) = (index_of.get(a), index_of.get(b)) {
            if i == j {
                self_loop[i] = true;
            }
            if !succ[i].contains(&j) {
                succ[i].push(j);
            }
        }
    }
    for s in &mut succ {
        s.sort_unstable();
    }

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // frames: (node, next successor position)
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.sort_unstable();
                    let recursive = members.len() > 1 || self_loop[members[0]];
                    out.push(Component {
                        members: members.into_iter().map(|i| graph.nodes[i].clone()).collect(),
                        recursive,
                    });
                }
            }
        }
    }
    ComponentOrder { components: out }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: datatype `{datatype}` occurs negatively in field `{field}` of constructor `{constructor}`: {occurrence}")]
pub struct PositivityError {
    pub datatype: String,
    pub constructor: String,
    pub field: String,
    pub occurrence: String,
    pub span: SourceSpan,
}

fn mentions(t: &Type, out: &mut BTreeSet<Name>) {
    match t {
        Type::Data(n, a) => {
            out.insert(n.clone());
            a.iter().for_each(|x| mentions(x, out));
        }
        Type::Tuple(a) => a.iter().for_each(|x| mentions(x, out)),
        Type::Fun(p, r) => {
            p.iter().for_each(|x| mentions(x, out));
            mentions(r, out);
        }
        _ => {}
    }
}

/// For every datatype parameter, whether it can end up left of an arrow
/// once the datatype is unfolded. Least fixpoint over all declarations.
fn negative_params(datatypes: &[DataTypeDef]) -> HashMap<(Name, usize), bool> {
    let mut table: HashMap<(Name, usize), bool> = HashMap::new();
    for d in datatypes {
        for i in 0..d.typarams.len() {
            table.insert((d.name.clone(), i), false);
        }
    }
    loop {
        let mut changed = false;
        for d in datatypes {
            for (i, tp) in d.typarams.iter().enumerate() {
                if table[&(d.name.clone(), i)] {
                    continue;
                }
                let target = Type::Var(tp.clone());
                let neg = d.ctors.iter().any(|c| {
                    c.fields
                        .iter()
                        .any(|(_, ft)| occurs_negatively(ft, &|t| *t == target, false, &table))
                });
                if neg {
                    table.insert((d.name.clone(), i), true);
                    changed = true;
                }
            }
        }
        if !changed {
            return table;
        }
    }
}

fn occurs_negatively(
    t: &Type,
    is_target: &dyn Fn(&Type) -> bool,
    left: bool,
    table: &HashMap<(Name, usize), bool>,
) -> bool {
    if left && is_target(t) {
        return true;
    }
    match t {
        Type::Data(n, args) => args.iter().enumerate().any(|(i, a)| {
            let l = left || table.get(&(n.clone(), i)).copied().unwrap_or(false);
            occurs_negatively(a, is_target, l, table)
        }),
        Type::Tuple(a) => a.iter().any(|x| occurs_negatively(x, is_target, left, table)),
        Type::Fun(p, r) => {
            p.iter().any(|x| occurs_negatively(x, is_target, true, table))
                || occurs_negatively(r, is_target, left, table)
        }
        _ => false,
    }
}

/// Groups of mutually recursive datatypes, in declaration order.
pub fn datatype_groups(datatypes: &[DataTypeDef]) -> Vec<Vec<Name>> {
    let nodes: Vec<Name> = datatypes.iter().map(|d| d.name.clone()).collect();
    let mut edges = Vec::new();
    for d in datatypes {
        let mut m = BTreeSet::new();
        for c in &d.ctors {
            for (_, t) in &c.fields {
                mentions(t, &mut m);
            }
        }
        for n in &nodes {
            if m.contains(n) {
                edges.push((d.name.clone(), n.clone(), d.span.clone()));
            }
        }
    }
    scc_topo(&CallGraph { nodes, edges })
        .components
        .into_iter()
        .map(|c| c.members)
        .collect()
}

pub fn check_positivity(datatypes: &[DataTypeDef]) -> Result<(), PositivityError> {
    let table = negative_params(datatypes);
    let by_name: BTreeMap<&Name, &DataTypeDef> = datatypes.iter().map(|d| (&d.name, d)).collect();
    for group in datatype_groups(datatypes) {
        let members: BTreeSet<Name> = group.iter().cloned().collect();
        for dn in &group {
            let d = by_name[dn];
            for c in &d.ctors {
                for (fname, ft) in &c.fields {
                    let is_member = |t: &Type| matches!(t, Type::Data(n, _) if members.contains(n));
                    if occurs_negatively(ft, &is_member, false, &table) {
                        return Err(PositivityError {
                            datatype: d.name.base.to_string(),
                            constructor: c.name.base.to_string(),
                            field: fname.clone(),
                            occurrence: ft.to_string(),
                            span: d.span.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{HygienicName, NameKind};

    fn f(s: &str) -> Name {
        HygienicName::new(s, 0, NameKind::Function)
    }

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> CallGraph {
        let span = SourceSpan::synthetic(&std::sync::Arc::from("t"));
        CallGraph {
            nodes: nodes.iter().map(|n| f(n)).collect(),
            edges: edges.iter().map(|(a, b)| (f(a), f(b), span.clone())).collect(),
        }
    }

    #[test]
    fn mutual_pair_before_caller() {
        let g = graph(&["f", "g", "h"], &[("f", "g"), ("g", "f"), ("h", "f")]);
        let o = scc_topo(&g);
        assert_eq!(o.components.len(), 2);
        assert_eq!(o.components[0].members, vec![f("f"), f("g")]);
        assert!(o.components[0].recursive);
        assert_eq!(o.components[1].members, vec![f("h")]);
        assert!(!o.components[1].recursive);
    }

    #[test]
    fn empty_and_self_loop() {
        assert!(scc_topo(&graph(&[], &[])).components.is_empty());
        let o = scc_topo(&graph(&["s"], &[("s", "s")]));
        assert_eq!(o.components.len(), 1);
        assert!(o.components[0].recursive);
    }
}
