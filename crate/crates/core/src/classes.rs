//! Loop classes, maximal loop classes and the essential class.

use std::collections::BTreeSet;
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::net::{symbolic, NetError, Omega, SymbolicPath};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassError {
    #[error("NoEssentialClass")]
    NoEssentialClass,
    #[error("MultipleEssentialClasses: {0:?}")]
    MultipleEssentialClasses(Vec<usize>),
    #[error("DepthExceeded: tail not inside a loop class after {0} levels")]
    DepthExceeded(usize),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    /// Contains at least one edge inside itself.
    Loop,
    Transient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    /// Sorted vector ids.
    pub members: Vec<usize>,
    pub kind: ComponentKind,
    pub maximal: bool,
    pub essential: bool,
}

impl Component {
    pub fn is_loop(&self) -> bool {
        self.kind == ComponentKind::Loop
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Condensation of the characteristic-vector graph. Components are numbered
/// by their smallest member, which makes the numbering deterministic.
#[derive(Debug, Clone)]
pub struct ClassGraph {
    components: Vec<Component>,
    component_of: Vec<usize>,
    essential: usize,
    /// Distinct successor components of each component.
    successors: Vec<BTreeSet<usize>>,
}

impl ClassGraph {
    pub fn build(omega: &Omega) -> Result<ClassGraph, ClassError> {
        let n = omega.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for e in omega.all_edges() {
            g.add_edge(nodes[e.parent], nodes[e.child], ());
        }
        let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut m: Vec<usize> = c.into_iter().map(|v| v.index()).collect();
                m.sort_unstable();
                m
            })
            .collect();
        sccs.sort_by_key(|m| m[0]);

        let mut component_of = vec![0usize; n];
        for (cid, m) in sccs.iter().enumerate() {
            for &v in m {
                component_of[v] = cid;
            }
        }
        let mut successors = vec![BTreeSet::new(); sccs.len()];
        let mut internal = vec![false; sccs.len()];
        for e in omega.all_edges() {
            let (a, b) = (component_of[e.parent], component_of[e.child]);
            if a == b {
                internal[a] = true;
            } else {
                successors[a].insert(b);
            }
        }
        let components: Vec<Component> = sccs
            .into_iter()
            .enumerate()
            .map(|(id, members)| {
                let is_loop = internal[id];
                Component {
                    id,
                    members,
                    kind: if is_loop {
                        ComponentKind::Loop
                    } else {
                        ComponentKind::Transient
                    },
                    maximal: is_loop,
                    essential: is_loop && successors[id].is_empty(),
                }
            })
            .collect();
        let essentials: Vec<usize> = components
            .iter()
            .filter(|c| c.essential)
            .map(|c| c.id)
            .collect();
        let essential = match essentials.as_slice() {
            [] => return Err(ClassError::NoEssentialClass),
            [e] => *e,
            many => return Err(ClassError::MultipleEssentialClasses(many.to_vec())),
        };
        Ok(ClassGraph {
            components,
            component_of,
            essential,
            successors,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, id: usize) -> &Component {
        &self.components[id]
    }

    pub fn component_of(&self, vector: usize) -> usize {
        self.component_of[vector]
    }

    pub fn essential(&self) -> &Component {
        &self.components[self.essential]
    }

    pub fn successors(&self, component: usize) -> &BTreeSet<usize> {
        &self.successors[component]
    }

    /// Maximal loop classes other than the essential class.
    pub fn non_essential_loops(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_loop() && !c.essential)
    }

    /// Component ids reachable from `from` in the condensation (inclusive).
    pub fn reachable(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(c) = stack.pop() {
            for &s in &self.successors[c] {
                if seen.insert(s) {
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// `dump-classes` text, one line per component, member ids 1-based.
    pub fn dump(&self) -> String {
        self.components.iter().map(|c| format!("{c}\n")).collect()
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members.iter().map(|m| (m + 1).to_string()).collect();
        write!(
            f,
            "{}  kind={}  maximal={}  essential={}  members=[{}]",
            self.id + 1,
            match self.kind {
                ComponentKind::Loop => "loop",
                ComponentKind::Transient => "transient",
            },
            self.maximal,
            self.essential,
            members.join(",")
        )
    }
}

/// Where the tail of one symbolic representation of a point ends up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub component: usize,
    pub essential: bool,
    /// First level from which the path stays in `component`.
    pub entered_at: usize,
    pub path: SymbolicPath,
}

pub fn default_classify_depth(omega: &Omega) -> usize {
    4 * omega.len()
}

/// Loop class of the tail of every symbolic representation of `x`.
pub fn classify(
    omega: &Omega,
    graph: &ClassGraph,
    x: &Rat,
    depth: usize,
) -> Result<Vec<Membership>, ClassError> {
    let paths = symbolic(omega, x, depth)?;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let ids = path.vectors();
        let comps: Vec<usize> = ids.iter().map(|&v| graph.component_of(v)).collect();
        // with a periodic tail the class is the one of the cycle
        let last = match path.periodic {
            Some((pre, _)) => comps[pre],
            None => *comps.last().expect("path has a root"),
        };
        if !graph.component(last).is_loop() {
            return Err(ClassError::DepthExceeded(depth));
        }
        let entered_at = comps.iter().position(|&c| c == last).unwrap_or(0);
        out.push(Membership {
            component: last,
            essential: last == graph.essential().id,
            entered_at,
            path,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::IfsSpec;
    use crate::net::{closure, DEFAULT_CAP};
    use crate::rational::{frac, int};

    #[test]
    fn binary_system_is_one_essential_loop() {
        let ifs = IfsSpec {
            ratio: frac(1, 2),
            digits: vec![int(0), frac(1, 2)],
            probs: vec![frac(1, 2), frac(1, 2)],
        }
        .validate()
        .unwrap();
        let omega = closure(&ifs, DEFAULT_CAP).unwrap();
        let g = ClassGraph::build(&omega).unwrap();
        assert_eq!(g.components().len(), 1);
        assert!(g.essential().contains(0));
        let m = classify(&omega, &g, &frac(1, 3), 8).unwrap();
        assert!(m.iter().all(|m| m.essential));
    }
}
