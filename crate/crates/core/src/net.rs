//! Net intervals, characteristic vectors and the finite-type closure.
//!
//! All geometry is exact. A net interval of generation `n` is described in
//! *normalized coordinates*: its left end is `0`, distances are measured in
//! units of `r^n`, and each neighbour `a_i` is the normalized distance from
//! the left end of a covering image `S_σ([0,1])` to the left end of the
//! interval.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ifs::WeightedIfs;
use crate::rational::{fmt_rat, fmt_tuple, pow, Rat};
use crate::transitions::{primitive, RatMatrix, TransitionError};

pub const DEFAULT_CAP: usize = 10_000;
pub const DEFAULT_ENUMERATION_BUDGET: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("CapExceeded: more than {0} reduced characteristic vectors (not verified finite type at this cap)")]
    CapExceeded(usize),
    #[error("BudgetExceeded: enumeration needs more than {0} images")]
    BudgetExceeded(usize),
    #[error("OutOfRange: point {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Reduced characteristic vector `(ℓ, V)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharVector {
    pub ell: Rat,
    pub neighbours: Vec<Rat>,
}

impl CharVector {
    pub fn new(ell: Rat, neighbours: Vec<Rat>) -> Self {
        CharVector { ell, neighbours }
    }

    /// Number of neighbours `m(Δ)`; the size of incident transition matrices.
    pub fn width(&self) -> usize {
        self.neighbours.len()
    }
}

impl fmt::Display for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_rat(&self.ell), fmt_tuple(&self.neighbours))
    }
}

impl fmt::Debug for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Full characteristic vector `(ℓ, V, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullCharVector {
    pub reduced: CharVector,
    pub sibling: usize,
}

/// Characteristic vector of `[0,1]`, `(1, (0), 1)`.
pub fn root() -> FullCharVector {
    FullCharVector {
        reduced: CharVector::new(Rat::one(), vec![Rat::zero()]),
        sibling: 1,
    }
}

/// A child net interval in its parent's normalized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Child {
    pub vector: CharVector,
    /// 1-based index among identical reduced vectors, left to right.
    pub sibling: usize,
    pub lo: Rat,
    pub hi: Rat,
    pub matrix: RatMatrix,
}

/// Children of a net interval with reduced vector `v`, left to right.
pub fn children(ifs: &WeightedIfs, v: &CharVector) -> Result<Vec<Child>, TransitionError> {
    let r = ifs.ratio();
    let ell = &v.ell;
    // candidate images [e, e + r] of the one-letter extensions of every neighbour
    let mut candidates: Vec<Rat> = Vec::new();
    for c in &v.neighbours {
        for d in ifs.digits() {
            let e = d - c;
            if &e < ell && &e + r > Rat::zero() {
                candidates.push(e);
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut cuts = vec![Rat::zero(), ell.clone()];
    for e in &candidates {
        for p in [e.clone(), e + r] {
            if p > Rat::zero() && &p < ell {
                cuts.push(p);
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    let mut out = Vec::with_capacity(cuts.len() - 1);
    let mut seen: HashMap<CharVector, usize> = HashMap::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mut nb: Vec<Rat> = candidates
            .iter()
            .filter(|e| *e <= lo && &(*e + r) >= hi)
            .map(|e| (lo - e) / r)
            .collect();
        nb.sort();
        nb.dedup();
        let vector = CharVector::new((hi - lo) / r, nb);
        let matrix = primitive(ifs, &v.neighbours, lo, &vector.neighbours)?;
        let count = seen.entry(vector.clone()).or_insert(0);
        *count += 1;
        out.push(Child {
            vector,
            sibling: *count,
            lo: lo.clone(),
            hi: hi.clone(),
            matrix,
        });
    }
    Ok(out)
}

/// Parent → child edge of the characteristic-vector graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub parent: usize,
    /// Position among the parent's children, 0-based.
    pub index: usize,
    pub child: usize,
    pub sibling: usize,
    pub lo: Rat,
    pub hi: Rat,
    pub matrix: RatMatrix,
}

/// The set `Ω` of reduced characteristic vectors with all edges.
/// Vector ids are assigned in breadth-first order from the root (id 0).
#[derive(Debug, Clone)]
pub struct Omega {
    vectors: Vec<CharVector>,
    /// `edges[v]` lists the children of `v`, left to right.
    edges: Vec<Vec<Edge>>,
    ratio: Rat,
}

impl Omega {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CharVector] {
        &self.vectors
    }

    pub fn vector(&self, id: usize) -> &CharVector {
        &self.vectors[id]
    }

    pub fn id_of(&self, v: &CharVector) -> Option<usize> {
        self.vectors.iter().position(|w| w == v)
    }

    pub fn children(&self, id: usize) -> &[Edge] {
        &self.edges[id]
    }

    pub fn child_ids(&self, id: usize) -> Vec<usize> {
        self.edges[id].iter().map(|e| e.child).collect()
    }

    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().flatten()
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    /// `dump-omega` text: `id  ell=a/b  V=(…)  children=[ids]`, ids 1-based.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (id, v) in self.vectors.iter().enumerate() {
            let kids: Vec<String> = self.edges[id]
                .iter()
                .map(|e| (e.child + 1).to_string())
                .collect();
            s.push_str(&format!(
                "{}  ell={}  V={}  children=[{}]\n",
                id + 1,
                fmt_rat(&v.ell),
                fmt_tuple(&v.neighbours),
                kids.join(",")
            ));
        }
        s
    }
}

/// Breadth-first closure of `Ω` from the root.
pub fn closure(ifs: &WeightedIfs, cap: usize) -> Result<Omega, NetError> {
    let mut vectors = vec![root().reduced];
    let mut index: HashMap<CharVector, usize> = HashMap::new();
    index.insert(vectors[0].clone(), 0);
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let kids = children(ifs, &vectors[id])?;
        let mut out = Vec::with_capacity(kids.len());
        for (i, c) in kids.into_iter().enumerate() {
            let child = match index.get(&c.vector) {
                Some(&k) => k,
                None => {
                    let k = vectors.len();
                    if k >= cap {
                        return Err(NetError::CapExceeded(cap));
                    }
                    index.insert(c.vector.clone(), k);
                    vectors.push(c.vector);
                    queue.push_back(k);
                    k
                }
            };
            out.push(Edge {
                parent: id,
                index: i,
                child,
                sibling: c.sibling,
                lo: c.lo,
                hi: c.hi,
                matrix: c.matrix,
            });
        }
        debug_assert_eq!(edges.len(), id);
        edges.push(out);
    }
    Ok(Omega {
        vectors,
        edges,
        ratio: ifs.ratio().clone(),
    })
}

/// A net interval found by direct enumeration of `{S_σ(0), S_σ(1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInterval {
    pub level: usize,
    pub lo: Rat,
    pub hi: Rat,
    pub vector: CharVector,
    pub sibling: usize,
}

/// Sorted distinct left ends `S_σ(0)` over all words of length `n`.
pub fn word_positions(ifs: &WeightedIfs, n: usize, budget: usize) -> Result<Vec<Rat>, NetError> {
    let mut pos = vec![Rat::zero()];
    for _ in 0..n {
        if pos.len().saturating_mul(ifs.alphabet_size()) > budget {
            return Err(NetError::BudgetExceeded(budget));
        }
        let mut next: Vec<Rat> = pos
            .iter()
            .flat_map(|p| ifs.digits().iter().map(move |d| ifs.ratio() * p + d))
            .collect();
        next.sort();
        next.dedup();
        pos = next;
    }
    Ok(pos)
}

fn level_from_positions(pos: &[Rat], scale: &Rat) -> Vec<(Rat, Rat, CharVector)> {
    let mut ends: Vec<Rat> = pos
        .iter()
        .flat_map(|p| [p.clone(), p + scale])
        .collect();
    ends.sort();
    ends.dedup();
    ends.windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            // covering images have S_σ(0) in [b - r^n, a]
            let from = pos.partition_point(|p| *p < b - scale);
            let to = pos.partition_point(|p| p <= a);
            let mut nb: Vec<Rat> = pos[from..to].iter().map(|p| (a - p) / scale).collect();
            nb.reverse();
            (a.clone(), b.clone(), CharVector::new((b - a) / scale, nb))
        })
        .collect()
}

/// Net intervals of generation `n` with characteristic vectors computed from
/// first principles, independent of [`children`].
pub fn net_intervals(
    ifs: &WeightedIfs,
    n: usize,
    budget: usize,
) -> Result<Vec<NetInterval>, NetError> {
    let mut parents: Vec<(Rat, Rat)> = vec![(Rat::zero(), Rat::one())];
    let mut current = vec![NetInterval {
        level: 0,
        lo: Rat::zero(),
        hi: Rat::one(),
        vector: root().reduced,
        sibling: 1,
    }];
    let mut pos = vec![Rat::zero()];
    for level in 1..=n {
        if pos.len().saturating_mul(ifs.alphabet_size()) > budget {
            return Err(NetError::BudgetExceeded(budget));
        }
        let mut next: Vec<Rat> = pos
            .iter()
            .flat_map(|p| ifs.digits().iter().map(move |d| ifs.ratio() * p + d))
            .collect();
        next.sort();
        next.dedup();
        pos = next;
        let scale = pow(ifs.ratio(), level);
        let raw = level_from_positions(&pos, &scale);
        let mut out = Vec::with_capacity(raw.len());
        let mut parent_idx = 0usize;
        let mut seen: HashMap<CharVector, usize> = HashMap::new();
        for (lo, hi, vector) in raw {
            while parents[parent_idx].1 <= lo {
                parent_idx += 1;
                seen.clear();
            }
            let count = seen.entry(vector.clone()).or_insert(0);
            *count += 1;
            out.push(NetInterval {
                level,
                lo,
                hi,
                vector,
                sibling: *count,
            });
        }
        parents = out.iter().map(|d| (d.lo.clone(), d.hi.clone())).collect();
        current = out;
    }
    Ok(current)
}

/// One step of a symbolic representation: the vector reached and the edge
/// (position among the parent's children) used to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub vector: usize,
    pub edge: usize,
}

/// Symbolic representation `[x]` truncated at a depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPath {
    /// Steps below the root; `steps[n-1]` is the level-`n` interval.
    pub steps: Vec<Step>,
    /// `(prefix_len, cycle_len)`: from level `prefix_len` on, the steps repeat
    /// with period `cycle_len`.
    pub periodic: Option<(usize, usize)>,
}

impl SymbolicPath {
    /// Vector ids from the root: `(0, γ_1, γ_2, …)`.
    pub fn vectors(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.steps.iter().map(|s| s.vector))
            .collect()
    }

    /// Parent vector and edge index of every step in the periodic cycle.
    pub fn cycle_edges(&self) -> Option<Vec<(usize, usize)>> {
        let (pre, len) = self.periodic?;
        let ids = self.vectors();
        Some(
            (pre..pre + len)
                .map(|lvl| (ids[lvl], self.steps[lvl].edge))
                .collect(),
        )
    }
}

/// Walks `x` down the net-interval tree to `depth`. Points shared by two
/// net intervals have a left and a right representation; both are returned
/// (the left one first) when they differ.
pub fn symbolic(omega: &Omega, x: &Rat, depth: usize) -> Result<Vec<SymbolicPath>, NetError> {
    if x < &Rat::zero() || x > &Rat::one() {
        return Err(NetError::OutOfRange(fmt_rat(x)));
    }
    let left = walk(omega, x, depth, Side::Left);
    let right = walk(omega, x, depth, Side::Right);
    if left == right {
        Ok(vec![left])
    } else {
        Ok(vec![left, right])
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn walk(omega: &Omega, x: &Rat, depth: usize, side: Side) -> SymbolicPath {
    let r = omega.ratio();
    let mut v = 0usize;
    let mut y = x.clone();
    let mut steps = Vec::with_capacity(depth);
    let mut seen: HashMap<(usize, Rat), usize> = HashMap::new();
    let mut periodic = None;
    seen.insert((0, y.clone()), 0);
    for level in 1..=depth {
        let kids = omega.children(v);
        let mut hits = kids.iter().filter(|e| e.lo <= y && y <= e.hi);
        let e = match side {
            Side::Left => hits.next(),
            Side::Right => hits.next_back(),
        }
        .expect("children tile the parent interval");
        y = (&y - &e.lo) / r;
        v = e.child;
        steps.push(Step {
            vector: v,
            edge: e.index,
        });
        if periodic.is_none() {
            if let Some(&prev) = seen.get(&(v, y.clone())) {
                periodic = Some((prev, level - prev));
            } else {
                seen.insert((v, y.clone()), level);
            }
        }
    }
    SymbolicPath { steps, periodic }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::IfsSpec;
    use crate::rational::{frac, int};

    fn halves() -> WeightedIfs {
        IfsSpec {
            ratio: frac(1, 2),
            digits: vec![int(0), frac(1, 2)],
            probs: vec![frac(1, 2), frac(1, 2)],
        }
        .validate()
        .unwrap()
    }

    fn quarter_steps() -> WeightedIfs {
        IfsSpec {
            ratio: frac(1, 2),
            digits: vec![int(0), frac(1, 4), frac(1, 2)],
            probs: vec![frac(1, 3), frac(1, 3), frac(1, 3)],
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn root_vector() {
        let a = root();
        assert_eq!(a, root());
        assert_eq!(a.sibling, 1);
        assert_eq!(a.reduced, CharVector::new(int(1), vec![int(0)]));
    }

    #[test]
    fn children_of_overlapping_halves() {
        let kids = children(&quarter_steps(), &root().reduced).unwrap();
        let got: Vec<CharVector> = kids.iter().map(|c| c.vector.clone()).collect();
        assert_eq!(
            got,
            vec![
                CharVector::new(frac(1, 2), vec![int(0)]),
                CharVector::new(frac(1, 2), vec![int(0), frac(1, 2)]),
                CharVector::new(frac(1, 2), vec![int(0), frac(1, 2)]),
                CharVector::new(frac(1, 2), vec![frac(1, 2)]),
            ]
        );
        assert_eq!(kids.iter().map(|c| c.sibling).collect::<Vec<_>>(), vec![1, 1, 2, 1]);
    }

    #[test]
    fn binary_system_closes_on_the_root() {
        let omega = closure(&halves(), DEFAULT_CAP).unwrap();
        assert_eq!(omega.len(), 1);
        assert_eq!(omega.child_ids(0), vec![0, 0]);
    }

    #[test]
    fn direct_enumeration_level_one() {
        let ivs = net_intervals(&quarter_steps(), 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let ends: Vec<Rat> = ivs.iter().map(|d| d.lo.clone()).chain([int(1)]).collect();
        assert_eq!(ends, vec![int(0), frac(1, 4), frac(1, 2), frac(3, 4), int(1)]);
        assert_eq!(net_intervals(&quarter_steps(), 0, 10).unwrap().len(), 1);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            net_intervals(&quarter_steps(), 8, 20),
            Err(NetError::BudgetExceeded(20))
        ));
    }

    #[test]
    fn symbolic_on_binary_system() {
        let omega = closure(&halves(), DEFAULT_CAP).unwrap();
        let one = symbolic(&omega, &int(1), 5).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].steps.iter().all(|s| s.edge == 1));
        let half = symbolic(&omega, &frac(1, 2), 5).unwrap();
        assert_eq!(half.len(), 2);
        assert!(symbolic(&omega, &frac(3, 2), 2).is_err());
    }
}
