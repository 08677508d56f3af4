//! Generators for the multipoint and multi-interval constructions, checks of
//! their structural requirements, and probability selection.
//!
//! Both constructions start from the maps `S_j(x) = x/R + j/R^2`,
//! `j = 0..R(R-1)`, and keep a subset partitioned into a free family `A`
//! (all with probability `p*`) and blocks `B_i` whose attractors `K_i` carry
//! the non-essential loop classes.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::classes::{ClassError, ClassGraph};
use crate::dimensions::{attainable_set, DimError, DimParams, Disjointness};
use crate::ifs::{IfsSpec, ValidationError, WeightedIfs};
use crate::net::{closure, NetError, Omega};
use crate::rational::{fmt_rat, frac, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("ParityError: the multipoint construction needs an even R >= 4, got {0}")]
    Parity(u64),
    #[error("CongruenceError: the multi-interval construction needs R = 2 mod 6 and R >= 14, got {0}")]
    Congruence(u64),
    #[error("ProbabilityError: {0}")]
    Probability(String),
    #[error("Infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Dim(#[from] DimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstructionKind {
    Multipoint,
    Multiinterval,
}

impl ConstructionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstructionKind::Multipoint => "multipoint",
            ConstructionKind::Multiinterval => "multiinterval",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "multipoint" => Some(ConstructionKind::Multipoint),
            "multiinterval" => Some(ConstructionKind::Multiinterval),
            _ => None,
        }
    }
}

/// Attractor of a family of maps `x -> r x + d` sharing the ratio `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAttractor {
    ratio: Rat,
    /// Sorted translation parts.
    offsets: Vec<Rat>,
}

impl BlockAttractor {
    pub fn new(ratio: Rat, mut offsets: Vec<Rat>) -> Self {
        assert!(!offsets.is_empty(), "a block has at least one map");
        offsets.sort();
        offsets.dedup();
        BlockAttractor { ratio, offsets }
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    pub fn offsets(&self) -> &[Rat] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    fn fixed_point(&self, d: &Rat) -> Rat {
        d / (Rat::one() - &self.ratio)
    }

    /// Convex hull `[lo, hi]` of the attractor.
    pub fn hull(&self) -> (Rat, Rat) {
        (
            self.fixed_point(&self.offsets[0]),
            self.fixed_point(self.offsets.last().expect("non-empty")),
        )
    }

    /// Images of the hull under the block maps have disjoint interiors.
    pub fn satisfies_osc(&self) -> bool {
        let (lo, hi) = self.hull();
        let len = &hi - &lo;
        self.offsets
            .windows(2)
            .all(|w| &w[1] - &w[0] >= &self.ratio * &len)
    }

    /// Whether the open interval `(a, b)` meets the attractor. Decided by
    /// recursive hull refinement; terminates because sub-hulls shrink by `r`.
    pub fn meets_open(&self, a: &Rat, b: &Rat) -> bool {
        let (lo, hi) = self.hull();
        self.meets_rec(a, b, &lo, &hi)
    }

    fn meets_rec(&self, a: &Rat, b: &Rat, lo: &Rat, hi: &Rat) -> bool {
        if b <= lo || a >= hi {
            // a singleton attractor {lo} is met only when a < lo < b
            return false;
        }
        if (a < lo && lo < b) || (a < hi && hi < b) {
            return true;
        }
        if lo == hi {
            return false;
        }
        // (a,b) lies strictly inside (lo,hi): recurse into the sub-hulls
        let (hlo, hhi) = self.hull();
        let s = (hi - lo) / (&hhi - &hlo);
        self.offsets.iter().any(|d| {
            let sub_lo = lo + &s * (&self.ratio * &hlo + d - &hlo);
            let sub_hi = &sub_lo + &s * &self.ratio * (&hhi - &hlo);
            self.meets_rec(a, b, &sub_lo, &sub_hi)
        })
    }

    /// Membership of a rational point. Points of the attractor are detected
    /// once the normalized position repeats.
    pub fn contains(&self, x: &Rat) -> bool {
        let (lo, hi) = self.hull();
        if lo == hi {
            return x == &lo;
        }
        let mut seen = BTreeSet::new();
        let mut frontier = vec![x.clone()];
        // x in K iff x = S_d(y) for some y in K
        while let Some(y) = frontier.pop() {
            if y < lo || y > hi {
                continue;
            }
            if !seen.insert(y.clone()) {
                return true;
            }
            for d in &self.offsets {
                let pre = (&y - d) / &self.ratio;
                if pre >= lo && pre <= hi {
                    frontier.push(pre);
                }
            }
            if seen.len() > 100_000 {
                break;
            }
        }
        false
    }
}

/// One block `B_i`: digit indices `j` (maps `x/R + j/R^2`) and probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub indices: Vec<u64>,
    pub probs: Vec<Rat>,
}

/// Partition of a construction's maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub r_inv: u64,
    /// `B_0, …, B_d` left to right; the first and last are `{S_0}` and
    /// `{S_{R(R-1)}}`.
    pub blocks: Vec<Block>,
    /// Indices of the free family `A`.
    pub free: Vec<u64>,
    pub p_star: Rat,
}

impl ConstructionSpec {
    pub fn attractor(&self, block: usize) -> BlockAttractor {
        let r2 = (self.r_inv * self.r_inv) as i64;
        BlockAttractor::new(
            frac(1, self.r_inv as i64),
            self.blocks[block]
                .indices
                .iter()
                .map(|&j| frac(j as i64, r2))
                .collect(),
        )
    }

    pub fn attractors(&self) -> Vec<BlockAttractor> {
        (0..self.blocks.len()).map(|i| self.attractor(i)).collect()
    }

    /// Index → probability for every kept map.
    pub fn assignment(&self) -> Vec<(u64, Rat)> {
        let mut all: Vec<(u64, Rat)> = self
            .free
            .iter()
            .map(|&j| (j, self.p_star.clone()))
            .chain(
                self.blocks
                    .iter()
                    .flat_map(|b| b.indices.iter().copied().zip(b.probs.iter().cloned())),
            )
            .collect();
        all.sort_by_key(|(j, _)| *j);
        all
    }

    pub fn to_ifs_spec(&self) -> IfsSpec {
        let (idx, probs): (Vec<u64>, Vec<Rat>) = self.assignment().into_iter().unzip();
        IfsSpec::from_indices(self.r_inv, &idx, probs)
    }

    /// Block probabilities flattened left to right, as accepted by the generators.
    pub fn block_probs(&self) -> Vec<Rat> {
        self.blocks.iter().flat_map(|b| b.probs.iter().cloned()).collect()
    }
}

fn free_indices(r_inv: u64, blocks: &[Block]) -> Vec<u64> {
    let r2 = (r_inv * r_inv) as i64;
    let taken: BTreeSet<u64> = blocks.iter().flat_map(|b| b.indices.iter().copied()).collect();
    let ratio = frac(1, r_inv as i64);
    let atts: Vec<BlockAttractor> = blocks
        .iter()
        .map(|b| {
            BlockAttractor::new(
                ratio.clone(),
                b.indices.iter().map(|&j| frac(j as i64, r2)).collect(),
            )
        })
        .collect();
    (0..=r_inv * (r_inv - 1))
        .filter(|j| !taken.contains(j))
        .filter(|&j| {
            let a = frac(j as i64, r2);
            let b = frac(j as i64 + r_inv as i64, r2);
            atts.iter().all(|k| !k.meets_open(&a, &b))
        })
        .collect()
}

fn finish(
    kind: ConstructionKind,
    r_inv: u64,
    blocks: Vec<Block>,
    p_star: Option<Rat>,
) -> Result<(WeightedIfs, ConstructionSpec), ConstructionError> {
    if blocks.iter().flat_map(|b| &b.probs).any(|p| !p.is_positive()) {
        return Err(ConstructionError::Probability(
            "block probabilities must be positive".into(),
        ));
    }
    let free = free_indices(r_inv, &blocks);
    let block_sum: Rat = blocks.iter().flat_map(|b| &b.probs).sum();
    let p_star = match p_star {
        Some(p) => {
            let total = &block_sum + &p * Rat::from_integer((free.len() as i64).into());
            if !total.is_one() {
                return Err(ConstructionError::Probability(format!(
                    "probabilities sum to {}",
                    fmt_rat(&total)
                )));
            }
            p
        }
        None => (Rat::one() - &block_sum) / Rat::from_integer((free.len() as i64).into()),
    };
    if !p_star.is_positive() {
        return Err(ConstructionError::Probability(format!(
            "block probabilities leave p* = {} for the free maps",
            fmt_rat(&p_star)
        )));
    }
    let first = &blocks[0].probs[0];
    let last = &blocks.last().expect("blocks").probs[0];
    if first != last {
        return Err(ConstructionError::Probability(format!(
            "end probabilities differ: {} vs {}",
            fmt_rat(first),
            fmt_rat(last)
        )));
    }
    let min = blocks
        .iter()
        .flat_map(|b| &b.probs)
        .chain(std::iter::once(&p_star))
        .min()
        .expect("non-empty");
    if first > min {
        return Err(ConstructionError::Probability(format!(
            "end probability {} is not the minimum {}",
            fmt_rat(first),
            fmt_rat(min)
        )));
    }
    let spec = ConstructionSpec {
        kind,
        r_inv,
        blocks,
        free,
        p_star,
    };
    let ifs = spec.to_ifs_spec().validate()?;
    Ok((ifs, spec))
}

/// Multipoint construction: `t_i = 2i(R-1)`, `B_i = {S_{t_i}}` for
/// `i = 0..R/2`, with `K_i = {2i/R}`. `block_probs` lists `p_{t_0}..p_{t_{R/2}}`.
pub fn multipoint(
    r_inv: u64,
    block_probs: &[Rat],
    p_star: Option<Rat>,
) -> Result<(WeightedIfs, ConstructionSpec), ConstructionError> {
    if r_inv < 4 || !r_inv.is_multiple_of(2) {
        return Err(ConstructionError::Parity(r_inv));
    }
    let count = (r_inv / 2 + 1) as usize;
    if block_probs.len() != count {
        return Err(ConstructionError::Probability(format!(
            "expected {count} block probabilities, got {}",
            block_probs.len()
        )));
    }
    let blocks = (0..count as u64)
        .map(|i| Block {
            indices: vec![2 * i * (r_inv - 1)],
            probs: vec![block_probs[i as usize].clone()],
        })
        .collect();
    finish(ConstructionKind::Multipoint, r_inv, blocks, p_star)
}

/// Multi-interval construction for `R = 2 mod 6`: `B_0 = {S_0}`,
/// `B_i = {S_{t_i}, S_{s_i}}` with `t_i = (6i-4)(R-1)`, `s_i = 6i(R-1)` for
/// `i = 1..(R-2)/6`, and `B_{(R+4)/6} = {S_{R(R-1)}}`. `block_probs` lists
/// `p_0, p_{t_1}, p_{s_1}, …, p_{t_d}, p_{s_d}, p_{R(R-1)}`.
pub fn multiinterval(
    r_inv: u64,
    block_probs: &[Rat],
    p_star: Option<Rat>,
) -> Result<(WeightedIfs, ConstructionSpec), ConstructionError> {
    if r_inv % 6 != 2 || r_inv < 14 {
        return Err(ConstructionError::Congruence(r_inv));
    }
    let d = (r_inv - 2) / 6;
    let expected = (2 * d + 2) as usize;
    if block_probs.len() != expected {
        return Err(ConstructionError::Probability(format!(
            "expected {expected} block probabilities, got {}",
            block_probs.len()
        )));
    }
    let mut blocks = vec![Block {
        indices: vec![0],
        probs: vec![block_probs[0].clone()],
    }];
    for i in 1..=d {
        let k = (2 * i - 1) as usize;
        blocks.push(Block {
            indices: vec![(6 * i - 4) * (r_inv - 1), 6 * i * (r_inv - 1)],
            probs: vec![block_probs[k].clone(), block_probs[k + 1].clone()],
        });
    }
    blocks.push(Block {
        indices: vec![r_inv * (r_inv - 1)],
        probs: vec![block_probs[expected - 1].clone()],
    });
    finish(ConstructionKind::Multiinterval, r_inv, blocks, p_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    /// Images of `[0,1]` cover `[0,1]`.
    FullSupport,
    /// Every block has one or two maps.
    BlockSize,
    /// No free map and no map of another block meets `K_i` on `(0,1)`.
    Separation,
    /// Every point outside all `K_i` is an essential point.
    EssentialElsewhere,
}

impl Requirement {
    pub fn number(&self) -> u8 {
        match self {
            Requirement::FullSupport => 1,
            Requirement::BlockSize => 2,
            Requirement::Separation => 4,
            Requirement::EssentialElsewhere => 5,
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("RequirementViolation{requirement}: {witness}")]
pub struct RequirementViolation {
    pub requirement: Requirement,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementReport {
    pub results: Vec<(Requirement, Result<(), RequirementViolation>)>,
}

impl RequirementReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|(_, r)| r.is_ok())
    }

    pub fn get(&self, req: Requirement) -> Option<&Result<(), RequirementViolation>> {
        self.results.iter().find(|(r, _)| *r == req).map(|(_, r)| r)
    }

    pub fn into_result(self) -> Result<(), RequirementViolation> {
        self.results.into_iter().try_for_each(|(_, r)| r)
    }
}

impl fmt::Display for RequirementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (req, res) in &self.results {
            match res {
                Ok(()) => writeln!(f, "requirement{req} pass")?,
                Err(e) => writeln!(f, "requirement{req} FAIL {}", e.witness)?,
            }
        }
        Ok(())
    }
}

/// Checks requirements (1), (2), (4) and (5) for a system partitioned as in `spec`.
/// The system's maps must be exactly the maps listed in `spec`.
pub fn verify_requirements(
    ifs: &WeightedIfs,
    spec: &ConstructionSpec,
    cap: usize,
) -> Result<RequirementReport, ConstructionError> {
    let r_inv = spec.r_inv;
    let r2 = (r_inv * r_inv) as i64;
    let mut results = Vec::new();

    // (1)
    let gap = ifs
        .digits()
        .windows(2)
        .position(|w| &w[1] - &w[0] > *ifs.ratio());
    let full = match gap {
        None if ifs.digits()[0].is_zero()
            && ifs.digits().last() == Some(&(Rat::one() - ifs.ratio())) =>
        {
            Ok(())
        }
        None => Err("images do not reach both ends of [0,1]".to_string()),
        Some(i) => Err(format!(
            "gap between images of {} and {}",
            fmt_rat(&ifs.digits()[i]),
            fmt_rat(&ifs.digits()[i + 1])
        )),
    };
    results.push((
        Requirement::FullSupport,
        full.map_err(|w| RequirementViolation {
            requirement: Requirement::FullSupport,
            witness: w,
        }),
    ));

    // (2)
    let size = spec
        .blocks
        .iter()
        .position(|b| !(1..=2).contains(&b.indices.len()))
        .map(|i| RequirementViolation {
            requirement: Requirement::BlockSize,
            witness: format!("block {i} has {} maps", spec.blocks[i].indices.len()),
        });
    results.push((Requirement::BlockSize, size.map_or(Ok(()), Err)));

    // (4)
    let atts = spec.attractors();
    let mut sep = Ok(());
    let open = |j: u64| (frac(j as i64, r2), frac(j as i64 + r_inv as i64, r2));
    'outer: for (i, k) in atts.iter().enumerate() {
        for &j in &spec.free {
            let (a, b) = open(j);
            if k.meets_open(&a, &b) {
                sep = Err(RequirementViolation {
                    requirement: Requirement::Separation,
                    witness: format!("S_{j}((0,1)) meets K_{i}"),
                });
                break 'outer;
            }
        }
        for (bi, block) in spec.blocks.iter().enumerate() {
            if bi == i {
                continue;
            }
            for &j in &block.indices {
                let (a, b) = open(j);
                if k.meets_open(&a, &b) {
                    sep = Err(RequirementViolation {
                        requirement: Requirement::Separation,
                        witness: format!("S_{j}((0,1)) of block {bi} meets K_{i}"),
                    });
                    break 'outer;
                }
            }
        }
    }
    results.push((Requirement::Separation, sep));

    // (5)
    let omega = closure(ifs, cap)?;
    let graph = ClassGraph::build(&omega)?;
    let ess = essential_elsewhere(&omega, &graph, &atts, cap).map_err(|w| RequirementViolation {
        requirement: Requirement::EssentialElsewhere,
        witness: w,
    });
    results.push((Requirement::EssentialElsewhere, ess));
    Ok(RequirementReport { results })
}

/// Product of the net-interval tree with the hull covers of the `K_i`.
/// A state is a vector id plus the pieces of the level-`n` covers that meet
/// the closed interval, each stored as `(block, normalized left end)`.
/// Every point outside `∪K_i` eventually sits in a state with no pieces, so
/// requirement (5) holds iff no non-essential loop class is reachable from
/// such a state.
fn essential_elsewhere(
    omega: &Omega,
    graph: &ClassGraph,
    atts: &[BlockAttractor],
    cap: usize,
) -> Result<(), String> {
    let r = omega.ratio().clone();
    let hulls: Vec<(Rat, Rat)> = atts.iter().map(BlockAttractor::hull).collect();
    let lens: Vec<Rat> = hulls.iter().map(|(lo, hi)| hi - lo).collect();
    type State = (usize, Vec<(usize, Rat)>);
    let start: State = (0, hulls.iter().enumerate().map(|(i, h)| (i, h.0.clone())).collect());
    let mut seen: HashMap<State, ()> = HashMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start, ());
    let mut free_vectors = BTreeSet::new();
    let limit = cap.saturating_mul(64);
    while let Some((v, pieces)) = queue.pop_front() {
        if pieces.is_empty() {
            free_vectors.insert(v);
            continue;
        }
        for e in omega.children(v) {
            let ell = &omega.vector(e.child).ell;
            let mut next: Vec<(usize, Rat)> = Vec::new();
            for (b, o) in &pieces {
                let lo = &hulls[*b].0;
                for d in atts[*b].offsets() {
                    let o2 = (o + &r * lo + d - lo - &e.lo) / &r;
                    if &o2 <= ell && &o2 + &lens[*b] >= Rat::zero() {
                        next.push((*b, o2));
                    }
                }
            }
            next.sort();
            next.dedup();
            let st = (e.child, next);
            if !seen.contains_key(&st) {
                if seen.len() >= limit {
                    return Err(format!("state space exceeds {limit} states"));
                }
                seen.insert(st.clone(), ());
                queue.push_back(st);
            }
        }
    }
    let mut reach = BTreeSet::new();
    for v in free_vectors {
        reach.extend(graph.reachable(graph.component_of(v)));
    }
    match reach
        .iter()
        .map(|&c| graph.component(c))
        .find(|c| c.is_loop() && !c.essential)
    {
        Some(c) => Err(format!(
            "loop class {} (vectors {:?}) is reachable from an interval disjoint from every K_i",
            c.id + 1,
            c.members.iter().map(|m| m + 1).collect::<Vec<_>>()
        )),
        None => Ok(()),
    }
}

/// Global left end and scale `r^n` of one net interval per vector, taken
/// along the breadth-first discovery tree.
fn vector_positions(omega: &Omega) -> Vec<(Rat, Rat)> {
    let mut pos: Vec<Option<(Rat, Rat)>> = vec![None; omega.len()];
    pos[0] = Some((Rat::zero(), Rat::one()));
    for v in 0..omega.len() {
        let (a, scale) = pos[v].clone().expect("parents precede children");
        for e in omega.children(v) {
            if pos[e.child].is_none() {
                pos[e.child] = Some((&a + &scale * &e.lo, &scale * omega.ratio()));
            }
        }
    }
    pos.into_iter().map(|p| p.expect("every vector is reachable")).collect()
}

/// For every non-essential loop class, the index of the block whose
/// attractor holds its points, found by following the class's edges until
/// the net interval is small and picking the nearest hull.
pub fn locate_classes(
    omega: &Omega,
    graph: &ClassGraph,
    spec: &ConstructionSpec,
) -> Vec<(usize, Option<usize>)> {
    let pos = vector_positions(omega);
    let hulls: Vec<(Rat, Rat)> = spec.attractors().iter().map(BlockAttractor::hull).collect();
    graph
        .non_essential_loops()
        .map(|c| {
            let mut v = c.members[0];
            let (mut a, mut scale) = pos[v].clone();
            for _ in 0..8 {
                let e = omega
                    .children(v)
                    .iter()
                    .find(|e| c.contains(e.child))
                    .expect("loop classes have internal edges");
                a = &a + &scale * &e.lo;
                scale = &scale * omega.ratio();
                v = e.child;
            }
            let b = &a + &scale * &omega.vector(v).ell;
            let dist = |h: &(Rat, Rat)| -> Rat {
                if b < h.0 {
                    &h.0 - &b
                } else if a > h.1 {
                    &a - &h.1
                } else {
                    Rat::zero()
                }
            };
            let best = hulls
                .iter()
                .enumerate()
                .min_by(|x, y| dist(x.1).cmp(&dist(y.1)))
                .map(|(i, _)| i);
            (c.id, best)
        })
        .collect()
}

/// Attainable local dimensions carried by one block attractor `K_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockComponent {
    pub block: usize,
    /// Loop-class ids, 0-based.
    pub classes: Vec<usize>,
    pub interval: crate::dimensions::Interval,
}

impl fmt::Display for BlockComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.classes.iter().map(|c| (c + 1).to_string()).collect();
        let kind = if self.interval.width() == 0.0 { "exact-point" } else { "exact-interval" };
        write!(
            f,
            "set=K{} kind={} value={} classes=[{}]",
            self.block,
            kind,
            self.interval,
            ids.join(",")
        )
    }
}

/// Groups the non-essential components of `dims` by the block carrying them.
pub fn block_components(
    omega: &Omega,
    graph: &ClassGraph,
    spec: &ConstructionSpec,
    dims: &crate::dimensions::DimensionSet,
) -> Vec<BlockComponent> {
    let located = locate_classes(omega, graph, spec);
    (0..spec.blocks.len())
        .filter_map(|b| {
            let classes: Vec<usize> = located
                .iter()
                .filter(|(_, k)| *k == Some(b))
                .map(|(c, _)| *c)
                .collect();
            let interval = classes
                .iter()
                .filter_map(|c| dims.component_for_class(*c))
                .map(|c| c.inner)
                .reduce(|a, b| a.hull(&b))?;
            Some(BlockComponent {
                block: b,
                classes,
                interval,
            })
        })
        .collect()
}

/// Ranks requested for the interior blocks; equal ranks ask for equal
/// probabilities, larger ranks for smaller probabilities (larger local
/// dimensions). Each entry has one rank per map of the block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Targets(pub Vec<Vec<u32>>);

impl Targets {
    /// Pairwise distinct ranks `1, 2, …` for every interior map.
    pub fn distinct(kind: ConstructionKind, r_inv: u64) -> Targets {
        match kind {
            ConstructionKind::Multipoint => {
                Targets((1..r_inv as u32 / 2).map(|i| vec![i]).collect())
            }
            ConstructionKind::Multiinterval => {
                let d = ((r_inv - 2) / 6) as u32;
                Targets((0..d).map(|i| vec![2 * i + 1, 2 * i + 2]).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub ifs: WeightedIfs,
    pub spec: ConstructionSpec,
    pub disjointness: Disjointness,
    /// Number of distinct dimension components found.
    pub groups: usize,
    /// True when every requested distinct rank yields its own component.
    pub separated: bool,
}

/// Number of groups left after merging blocks whose rank ranges share a value.
fn merged_rank_ranges(targets: &[Vec<u32>]) -> usize {
    let mut ranges: Vec<(u32, u32)> = targets
        .iter()
        .map(|t| (*t.iter().min().unwrap_or(&0), *t.iter().max().unwrap_or(&0)))
        .collect();
    ranges.sort_unstable();
    let mut count = 0;
    let mut end: Option<u32> = None;
    for (lo, hi) in ranges {
        match end {
            Some(e) if lo <= e => end = Some(e.max(hi)),
            _ => {
                count += 1;
                end = Some(hi);
            }
        }
    }
    count
}

/// Picks block probabilities on a halving schedule below the essential-class
/// threshold, then certifies separation with outer intervals.
pub fn select_probabilities(
    kind: ConstructionKind,
    r_inv: u64,
    targets: &Targets,
    params: Option<DimParams>,
    cap: usize,
) -> Result<Selection, ConstructionError> {
    let interior = match kind {
        ConstructionKind::Multipoint => {
            if r_inv < 4 || !r_inv.is_multiple_of(2) {
                return Err(ConstructionError::Parity(r_inv));
            }
            (r_inv / 2 - 1) as usize
        }
        ConstructionKind::Multiinterval => {
            if r_inv % 6 != 2 || r_inv < 14 {
                return Err(ConstructionError::Congruence(r_inv));
            }
            ((r_inv - 2) / 6) as usize
        }
    };
    let per_block = if kind == ConstructionKind::Multipoint { 1 } else { 2 };
    if targets.0.len() != interior || targets.0.iter().any(|t| t.len() != per_block) {
        return Err(ConstructionError::Probability(format!(
            "expected {interior} targets with {per_block} rank(s) each"
        )));
    }
    // p* >= 1/#maps bounds the essential class above by log(#maps)/log(R);
    // probabilities below 1/#maps give block dimensions beyond that bound.
    let total_maps = (r_inv * (r_inv - 1) + 1) as i64;
    let max_rank = targets.0.iter().flatten().copied().max().unwrap_or(0);
    let rank_groups = merged_rank_ranges(&targets.0);
    let mut base = frac(1, 2 * total_maps);
    for _attempt in 0..8 {
        let prob = |rank: u32| &base / Rat::from_integer((1i64 << rank).into());
        let end = prob(max_rank + 1);
        let mut flat = vec![end.clone()];
        for t in &targets.0 {
            flat.extend(t.iter().map(|&k| prob(k)));
        }
        flat.push(end);
        let (ifs, spec) = match kind {
            ConstructionKind::Multipoint => multipoint(r_inv, &flat, None)?,
            ConstructionKind::Multiinterval => multiinterval(r_inv, &flat, None)?,
        };
        let omega = closure(&ifs, cap)?;
        let graph = ClassGraph::build(&omega)?;
        let p = params.unwrap_or_else(|| DimParams::for_ifs(&ifs));
        let ds = attainable_set(&omega, &graph, &p)?;
        // the two ends share one group and the essential class adds another
        let wanted = rank_groups + 2;
        let separated = ds.groups.len() == wanted && ds.disjointness == Disjointness::Disjoint;
        if separated || rank_groups < interior {
            return Ok(Selection {
                ifs,
                spec,
                disjointness: ds.disjointness,
                groups: ds.groups.len(),
                separated: separated && rank_groups == interior,
            });
        }
        base /= Rat::from_integer(2.into());
    }
    Err(ConstructionError::Infeasible(
        "outer intervals still overlap after 8 halvings".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn singleton_attractor_meets() {
        let k = BlockAttractor::new(frac(1, 4), vec![frac(6, 16)]);
        assert_eq!(k.hull(), (frac(1, 2), frac(1, 2)));
        assert!(k.meets_open(&frac(5, 16), &frac(9, 16)));
        assert!(!k.meets_open(&frac(8, 16), &frac(12, 16)));
        assert!(!k.meets_open(&frac(4, 16), &frac(8, 16)));
    }

    #[test]
    fn cantor_attractor_meets() {
        // K_1 of the R = 14 construction: maps x/14 + 26/196 and x/14 + 78/196
        let k = BlockAttractor::new(frac(1, 14), vec![frac(26, 196), frac(78, 196)]);
        assert_eq!(k.hull(), (frac(2, 14), frac(6, 14)));
        assert!(k.satisfies_osc());
        // the gap between the level-one pieces [28,32] and [80,84] (in 1/196)
        assert!(!k.meets_open(&frac(32, 196), &frac(46, 196)));
        assert!(!k.meets_open(&frac(66, 196), &frac(80, 196)));
        assert!(k.meets_open(&frac(31, 196), &frac(45, 196)));
        // inside a level-one piece but in a level-two gap
        let a = frac(28, 196) + frac(4, 196 * 14);
        let b = frac(28, 196) + frac(10, 196 * 14);
        assert!(!k.meets_open(&a, &b));
        assert!(k.contains(&frac(2, 14)));
        assert!(k.contains(&frac(32, 196)));
        assert!(!k.contains(&frac(40, 196)));
    }

    #[test]
    fn multipoint_indices_for_r6() {
        let p = frac(1, 1000);
        let (_, spec) = multipoint(6, &[p.clone(), p.clone(), p.clone(), p], None).unwrap();
        let t: Vec<u64> = spec.blocks.iter().map(|b| b.indices[0]).collect();
        assert_eq!(t, vec![0, 10, 20, 30]);
        let expected: Vec<u64> = (1..=6).chain(12..=18).chain(24..=29).collect();
        assert_eq!(spec.free, expected);
    }

    #[test]
    fn parity_and_congruence_errors() {
        assert!(matches!(
            multipoint(5, &[], None),
            Err(ConstructionError::Parity(5))
        ));
        assert!(matches!(
            multiinterval(8, &[], None),
            Err(ConstructionError::Congruence(8))
        ));
    }

    #[test]
    fn end_probability_must_be_minimal() {
        let r = multipoint(4, &[frac(2, 164), frac(1, 164), frac(2, 164)], None);
        assert!(matches!(r, Err(ConstructionError::Probability(_))));
        let r = multipoint(4, &[frac(1, 164), frac(2, 164), frac(3, 164)], None);
        assert!(matches!(r, Err(ConstructionError::Probability(_))));
        let r = multipoint(4, &[frac(1, 2), frac(1, 2), frac(1, 2)], None);
        assert!(matches!(r, Err(ConstructionError::Probability(_))));
    }

    #[test]
    fn explicit_p_star_must_balance() {
        let bp = [frac(1, 164), frac(2, 164), frac(1, 164)];
        assert!(multipoint(4, &bp, Some(frac(20, 164))).is_ok());
        assert!(multipoint(4, &bp, Some(frac(19, 164))).is_err());
        let _ = int(0);
    }
}
