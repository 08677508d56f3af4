//! Local dimensions at periodic points and attainable-dimension sets per
//! loop class.
//!
//! For a loop class whose points are not all periodic, two brackets are
//! reported:
//!
//! * the *inner* interval `I`, spanned by local dimensions of periodic points
//!   with short periods; its endpoints are attained;
//! * the *outer* interval `O_L`. Along any admissible path the entry-sum norm
//!   is submultiplicative and the minimum row sum is supermultiplicative, so
//!   splitting a long path into blocks of length `L` bounds every attainable
//!   local dimension in the class by the extreme block values.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::classes::{ClassGraph, Component};
use crate::ifs::WeightedIfs;
use crate::net::Omega;
use crate::rational::{fmt_rat, ln_abs, Rat};
use crate::transitions::{product, spectral_radius, ScaledMatrix, SpectralRadius, TransitionError};

pub const DEFAULT_PATH_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimError {
    #[error("BudgetExceeded: {needed} paths exceed the budget of {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("InvalidCycle: {0}")]
    InvalidCycle(String),
    #[error("NotLoopClass: component {0} has no internal edge")]
    NotLoopClass(usize),
    #[error("OverlapError: images of the block attractor overlap")]
    Overlap,
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Closed real interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.9},{:.9}]", self.lo, self.hi)
    }
}

/// Path-length parameters for cycle enumeration and outer bracketing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimParams {
    /// Block length for the outer interval.
    pub l: usize,
    /// Maximal cycle length for the inner interval.
    pub lc: usize,
    pub tol: f64,
    pub path_budget: u64,
}

impl DimParams {
    /// `L = 8, Lc = 6` for contraction `1/R` with `R <= 8`; `L = 4, Lc = 3` above.
    pub fn for_ifs(ifs: &WeightedIfs) -> Self {
        let small = ifs.ratio_f64() >= 1.0 / 8.0;
        DimParams {
            l: if small { 8 } else { 4 },
            lc: if small { 6 } else { 3 },
            tol: crate::transitions::DEFAULT_TOL,
            path_budget: DEFAULT_PATH_BUDGET,
        }
    }
}

/// Local dimension at a periodic point.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDim {
    pub value: f64,
    pub length: usize,
    pub spectral_radius: SpectralRadius,
    /// `log(sp)/log(r)` (or `/(β log r)`) when the radius is rational.
    pub expr: Option<String>,
}

fn log_expr(value: &Rat, beta: usize, ratio: &Rat) -> String {
    if beta == 1 {
        format!("log({})/log({})", fmt_rat(value), fmt_rat(ratio))
    } else {
        format!("log({})/({}*log({}))", fmt_rat(value), beta, fmt_rat(ratio))
    }
}

/// `log sp(T(θ)) / (β log r)` for a cycle given as `(parent vector, edge index)`
/// pairs; the last edge must return to the first parent.
pub fn periodic_dim(omega: &Omega, cycle: &[(usize, usize)], tol: f64) -> Result<PeriodicDim, DimError> {
    if cycle.is_empty() {
        return Err(DimError::InvalidCycle("empty cycle".into()));
    }
    let mut mats = Vec::with_capacity(cycle.len());
    for (i, &(v, e)) in cycle.iter().enumerate() {
        let edge = omega
            .children(v)
            .get(e)
            .ok_or_else(|| DimError::InvalidCycle(format!("vector {} has no child {e}", v + 1)))?;
        let next = cycle[(i + 1) % cycle.len()].0;
        if edge.child != next {
            return Err(DimError::InvalidCycle(format!(
                "edge {} -> {} does not continue at {}",
                v + 1,
                edge.child + 1,
                next + 1
            )));
        }
        mats.push(&edge.matrix);
    }
    let t = product(mats)?;
    let sp = spectral_radius(&t, tol)?;
    let beta = cycle.len();
    let ln_r = ln_abs(omega.ratio());
    Ok(PeriodicDim {
        value: sp.ln / (beta as f64 * ln_r),
        length: beta,
        expr: sp.exact.as_ref().map(|v| log_expr(v, beta, omega.ratio())),
        spectral_radius: sp,
    })
}

struct ClassEdges {
    /// For each vector id, the internal edges as `(edge index, child, matrix)`.
    out: Vec<Vec<(usize, usize, ScaledMatrix)>>,
    members: Vec<usize>,
}

fn class_edges(omega: &Omega, class: &Component) -> ClassEdges {
    let mut out = vec![Vec::new(); omega.len()];
    for &v in &class.members {
        for e in omega.children(v) {
            if class.contains(e.child) {
                out[v].push((e.index, e.child, e.matrix.to_scaled()));
            }
        }
    }
    ClassEdges {
        out,
        members: class.members.clone(),
    }
}

/// Number of admissible paths of each length `1..=len` inside the class.
fn path_counts(edges: &ClassEdges, len: usize) -> u64 {
    let mut count: Vec<u64> = vec![0; edges.out.len()];
    for &v in &edges.members {
        count[v] = 1;
    }
    let mut total = 0u64;
    for _ in 0..len {
        let mut next = vec![0u64; edges.out.len()];
        for &v in &edges.members {
            for (_, w, _) in &edges.out[v] {
                next[*w] = next[*w].saturating_add(count[v]);
            }
        }
        count = next;
        total = total.saturating_add(count.iter().fold(0u64, |a, b| a.saturating_add(*b)));
    }
    total
}

/// Depth-first walk over every path of length `1..=max_len` starting with the
/// first edge `(start, first)`; `visit(depth, end, product)` sees every prefix.
fn walk_paths<F>(
    edges: &ClassEdges,
    start: usize,
    first: usize,
    max_len: usize,
    visit: &mut F,
) -> Result<(), DimError>
where
    F: FnMut(usize, usize, &ScaledMatrix) -> Result<(), DimError>,
{
    fn rec<F>(
        edges: &ClassEdges,
        v: usize,
        acc: &ScaledMatrix,
        depth: usize,
        max_len: usize,
        visit: &mut F,
    ) -> Result<(), DimError>
    where
        F: FnMut(usize, usize, &ScaledMatrix) -> Result<(), DimError>,
    {
        visit(depth, v, acc)?;
        if depth == max_len {
            return Ok(());
        }
        for (_, w, m) in &edges.out[v] {
            rec(edges, *w, &acc.mul(m), depth + 1, max_len, visit)?;
        }
        Ok(())
    }
    let (_, w, m) = &edges.out[start][first];
    rec(edges, *w, m, 1, max_len, visit)
}

/// Extremal periodic dimensions found among cycles of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDims {
    pub interval: Interval,
    pub cycles: u64,
}

/// Interval spanned by the local dimensions of all periodic points whose
/// period is a cycle of length `<= max_len` inside the class. Parallel edges
/// between the same vectors are distinct cycles.
pub fn cycle_dims(
    omega: &Omega,
    class: &Component,
    max_len: usize,
    params: &DimParams,
) -> Result<CycleDims, DimError> {
    if !class.is_loop() {
        return Err(DimError::NotLoopClass(class.id));
    }
    let edges = class_edges(omega, class);
    let needed = path_counts(&edges, max_len);
    if needed > params.path_budget {
        return Err(DimError::BudgetExceeded {
            needed,
            budget: params.path_budget,
        });
    }
    let ln_r = ln_abs(omega.ratio());
    let starts: Vec<(usize, usize)> = edges
        .members
        .iter()
        .flat_map(|&v| (0..edges.out[v].len()).map(move |i| (v, i)))
        .collect();
    let partial: Result<Vec<(f64, f64, u64)>, DimError> = starts
        .par_iter()
        .map(|&(v, i)| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut n = 0u64;
            walk_paths(&edges, v, i, max_len, &mut |depth, end, acc| {
                if end == v {
                    let sp = acc.spectral_radius(params.tol)?;
                    let d = sp.ln / (depth as f64 * ln_r);
                    lo = lo.min(d);
                    hi = hi.max(d);
                    n += 1;
                }
                Ok(())
            })?;
            Ok((lo, hi, n))
        })
        .collect();
    let (lo, hi, cycles) = partial?
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0), |a, b| {
            (a.0.min(b.0), a.1.max(b.1), a.2 + b.2)
        });
    if cycles == 0 {
        return Err(DimError::InvalidCycle(format!(
            "no cycle of length <= {max_len} in component {}",
            class.id + 1
        )));
    }
    Ok(CycleDims {
        interval: Interval::new(lo, hi),
        cycles,
    })
}

/// Positive weight vectors `w_v` on the vectors of a class. For any such
/// family and any path `θ` from `u` to `v`,
/// `min_i (T(θ) w_v)_i / (w_u)_i` is supermultiplicative and
/// `max_i (T(θ) w_v)_i / (w_u)_i` submultiplicative along concatenation, and
/// both are comparable to `‖T(θ)‖` up to constants fixed by `w`.
type Weights = Vec<Vec<f64>>;

/// Candidate row weights (right Perron-type vectors) and column weights
/// (left ones) for a class.
fn candidate_weights(omega: &Omega, edges: &ClassEdges) -> (Vec<Weights>, Vec<Weights>) {
    let n = omega.len();
    let width = |v: usize| omega.vector(v).width();
    let ones: Weights = (0..n)
        .map(|v| if edges.members.contains(&v) { vec![1.0; width(v)] } else { Vec::new() })
        .collect();
    let mut right = vec![ones.clone()];
    let mut left = vec![ones];
    let mut offset = vec![0usize; n];
    let mut total = 0;
    for &v in &edges.members {
        offset[v] = total;
        total += width(v);
    }
    // Perron vectors of the aggregated class matrix with entrywise powers
    for q in [1.0f64, 0.5, 2.0, 4.0] {
        let mut agg = vec![0.0f64; total * total];
        for &v in &edges.members {
            for (_, w, m) in &edges.out[v] {
                let k = (m.ln_scale * q).exp();
                for i in 0..m.m.rows {
                    for j in 0..m.m.cols {
                        let x = m.m.get(i, j);
                        if x > 0.0 {
                            agg[(offset[v] + i) * total + offset[*w] + j] += k * x.powf(q);
                        }
                    }
                }
            }
        }
        let mx = agg.iter().copied().fold(0.0, f64::max);
        if mx <= 0.0 {
            continue;
        }
        agg.iter_mut().for_each(|a| *a /= mx);
        let transposed: Vec<f64> = (0..total * total)
            .map(|k| agg[(k % total) * total + k / total])
            .collect();
        for (mat, out) in [(&agg, &mut right), (&transposed, &mut left)] {
            let x = perron_vector(mat, total);
            let w: Weights = (0..n)
                .map(|v| {
                    if edges.members.contains(&v) {
                        (0..width(v)).map(|i| x[offset[v] + i].max(1e-9)).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            out.push(w);
        }
    }
    (right, left)
}

/// Approximate Perron vector of a non-negative `n x n` matrix, scaled to max 1.
fn perron_vector(m: &[f64], n: usize) -> Vec<f64> {
    let shift = 0.25 * m.iter().sum::<f64>() / n as f64;
    let mut x = vec![1.0f64; n];
    for _ in 0..2000 {
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                m[i * n..(i + 1) * n].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + shift * x[i]
            })
            .collect();
        let norm = y.iter().copied().fold(0.0, f64::max);
        y.iter_mut().for_each(|t| *t /= norm);
        x = y;
    }
    x
}

/// `ln min_i (T w_end)_i / (w_start)_i` and `ln max_i …`.
fn ln_row_bounds(acc: &ScaledMatrix, w_start: &[f64], w_end: &[f64]) -> (f64, f64) {
    let m = &acc.m;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..m.rows {
        let row = &m.data[i * m.cols..(i + 1) * m.cols];
        let t: f64 = row.iter().zip(w_end).map(|(a, b)| a * b).sum::<f64>() / w_start[i];
        lo = lo.min(t);
        hi = hi.max(t);
    }
    (lo.ln() + acc.ln_scale, hi.ln() + acc.ln_scale)
}

/// `ln min_j (y_startᵀ T)_j / (y_end)_j` and `ln max_j …`.
fn ln_col_bounds(acc: &ScaledMatrix, y_start: &[f64], y_end: &[f64]) -> (f64, f64) {
    let m = &acc.m;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..m.cols {
        let t: f64 = (0..m.rows).map(|i| y_start[i] * m.data[i * m.cols + j]).sum::<f64>() / y_end[j];
        lo = lo.min(t);
        hi = hi.max(t);
    }
    (lo.ln() + acc.ln_scale, hi.ln() + acc.ln_scale)
}

/// Outer bracket `O_L` from all admissible paths `θ` of length `len` inside
/// the class: `[max_θ log σ(θ), min_θ log ρ(θ)] / (L log r)`, where `σ` is
/// the entry-sum norm or a weighted maximal row (column) ratio and `ρ` a
/// weighted minimal row (column) ratio; unit weights give the minimal row
/// sum. The tightest bracket over a few weight families is reported.
pub fn outer_interval(
    omega: &Omega,
    class: &Component,
    len: usize,
    params: &DimParams,
) -> Result<Interval, DimError> {
    if !class.is_loop() {
        return Err(DimError::NotLoopClass(class.id));
    }
    let edges = class_edges(omega, class);
    let needed = path_counts(&edges, len);
    if needed > params.path_budget {
        return Err(DimError::BudgetExceeded {
            needed,
            budget: params.path_budget,
        });
    }
    let (right, left) = candidate_weights(omega, &edges);
    let k = right.len() + left.len();
    let starts: Vec<(usize, usize)> = edges
        .members
        .iter()
        .flat_map(|&v| (0..edges.out[v].len()).map(move |i| (v, i)))
        .collect();
    // per weight family: (max ln upper, min ln lower); slot k is the entry-sum norm
    let fold = |a: Vec<(f64, f64)>, b: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        a.iter().zip(&b).map(|(x, y)| (x.0.max(y.0), x.1.min(y.1))).collect()
    };
    let init = vec![(f64::NEG_INFINITY, f64::INFINITY); k + 1];
    let partial: Result<Vec<Vec<(f64, f64)>>, DimError> = starts
        .par_iter()
        .map(|&(v, i)| {
            let mut acc_b = init.clone();
            walk_paths(&edges, v, i, len, &mut |depth, end, acc| {
                if depth == len {
                    let rows = right.iter().map(|w| ln_row_bounds(acc, &w[v], &w[end]));
                    let cols = left.iter().map(|y| ln_col_bounds(acc, &y[v], &y[end]));
                    for (c, (lo, hi)) in rows.chain(cols).enumerate() {
                        acc_b[c].0 = acc_b[c].0.max(hi);
                        acc_b[c].1 = acc_b[c].1.min(lo);
                    }
                    acc_b[k].0 = acc_b[k].0.max(acc.ln_entry_sum());
                }
                Ok(())
            })?;
            Ok(acc_b)
        })
        .collect();
    let bounds = partial?.into_iter().fold(init.clone(), fold);
    let best_upper_growth = bounds.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let best_lower_growth = bounds[..k].iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let scale = len as f64 * ln_abs(omega.ratio());
    Ok(Interval::new(best_upper_growth / scale, best_lower_growth / scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimKind {
    ExactPoint,
    ExactInterval,
    Bracketed,
}

impl DimKind {
    pub fn name(&self) -> &'static str {
        match self {
            DimKind::ExactPoint => "exact-point",
            DimKind::ExactInterval => "exact-interval",
            DimKind::Bracketed => "bracketed-interval",
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, DimKind::Bracketed)
    }
}

/// Attainable local dimensions of one maximal loop class.
#[derive(Debug, Clone, PartialEq)]
pub struct DimComponent {
    pub class: usize,
    pub essential: bool,
    pub kind: DimKind,
    pub inner: Interval,
    pub outer: Interval,
    pub expr: Option<String>,
    /// Transition probabilities of the class when all its matrices are 1x1
    /// self-maps of a single vector (one entry per edge); else the single
    /// `r^dim` of a periodic class.
    pub weights: Option<Vec<f64>>,
}

impl fmt::Display for DimComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "class={} kind={} inner={} outer={}",
            self.class + 1,
            self.kind.name(),
            self.inner,
            self.outer
        )?;
        if let Some(e) = &self.expr {
            write!(f, " expr={e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disjointness {
    /// Outer intervals of distinct components are pairwise disjoint.
    Disjoint,
    /// Inner intervals of two distinct components meet.
    Overlapping,
    /// Outer intervals meet but inner intervals do not.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSet {
    pub components: Vec<DimComponent>,
    /// Indices into `components`; exact components whose values touch share
    /// a group.
    pub groups: Vec<Vec<usize>>,
    pub disjointness: Disjointness,
    pub params: DimParams,
}

impl DimensionSet {
    pub fn essential(&self) -> &DimComponent {
        self.components
            .iter()
            .find(|c| c.essential)
            .expect("a dimension set always has an essential component")
    }

    /// Inner and outer hulls of a group.
    pub fn group_hulls(&self, group: usize) -> (Interval, Interval) {
        let g = &self.groups[group];
        let pick = |f: fn(&DimComponent) -> Interval| {
            g.iter()
                .map(|&i| f(&self.components[i]))
                .reduce(|a, b| a.hull(&b))
                .expect("groups are non-empty")
        };
        (pick(|c| c.inner), pick(|c| c.outer))
    }

    pub fn component_for_class(&self, class: usize) -> Option<&DimComponent> {
        self.components.iter().find(|c| c.class == class)
    }

    /// `dimset` text, one line per component.
    pub fn dump(&self) -> String {
        let mut s: String = self.components.iter().map(|c| format!("{c}\n")).collect();
        s.push_str(&format!(
            "groups={} disjoint={}\n",
            self.groups.len(),
            match self.disjointness {
                Disjointness::Disjoint => "true",
                Disjointness::Overlapping => "false",
                Disjointness::Undetermined => "undetermined",
            }
        ));
        s
    }
}

/// Groups components whose exact value sets touch; their union is again a
/// point or an interval. Bracketed components stay alone.
fn merge_exact(components: &[DimComponent]) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Vec<usize>, Interval)> = Vec::new();
    for (i, c) in components.iter().enumerate() {
        if !c.kind.is_exact() {
            groups.push((vec![i], c.inner));
            continue;
        }
        let mut members = vec![i];
        let mut hull = c.inner;
        let mut k = 0;
        while k < groups.len() {
            let (g, iv) = &groups[k];
            if components[g[0]].kind.is_exact() && touches(iv, &hull) {
                hull = hull.hull(iv);
                members.extend(g.iter().copied());
                groups.remove(k);
                k = 0;
            } else {
                k += 1;
            }
        }
        members.sort_unstable();
        groups.push((members, hull));
    }
    let mut out: Vec<Vec<usize>> = groups.into_iter().map(|(g, _)| g).collect();
    out.sort();
    out
}

fn touches(a: &Interval, b: &Interval) -> bool {
    a.lo <= b.hi + 1e-12 && b.lo <= a.hi + 1e-12
}

/// Follows the unique internal edge of every vector when the class is a
/// single cycle.
fn simple_cycle(omega: &Omega, class: &Component) -> Option<Vec<(usize, usize)>> {
    let internal = |v: usize| -> Vec<usize> {
        omega
            .children(v)
            .iter()
            .filter(|e| class.contains(e.child))
            .map(|e| e.index)
            .collect()
    };
    if class.members.iter().any(|&v| internal(v).len() != 1) {
        return None;
    }
    let start = class.members[0];
    let mut cycle = Vec::new();
    let mut v = start;
    loop {
        let e = internal(v)[0];
        cycle.push((v, e));
        v = omega.children(v)[e].child;
        if v == start {
            return Some(cycle);
        }
    }
}

/// Attainable local dimensions, one component per maximal loop class.
pub fn attainable_set(
    omega: &Omega,
    graph: &ClassGraph,
    params: &DimParams,
) -> Result<DimensionSet, DimError> {
    let ln_r = ln_abs(omega.ratio());
    let mut components = Vec::new();
    for class in graph.components().iter().filter(|c| c.is_loop()) {
        let comp = if let Some(cycle) = simple_cycle(omega, class) {
            let pd = periodic_dim(omega, &cycle, params.tol)?;
            DimComponent {
                class: class.id,
                essential: class.essential,
                kind: DimKind::ExactPoint,
                inner: Interval::point(pd.value),
                outer: Interval::point(pd.value),
                expr: pd.expr,
                weights: Some(vec![(pd.value * ln_r).exp()]),
            }
        } else if let Some(probs) = scalar_self_maps(omega, class) {
            let dims: Vec<f64> = probs.iter().map(|p| ln_abs(p) / ln_r).collect();
            let lo = dims.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = dims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pmax = probs.iter().max().expect("loop class has an edge");
            let pmin = probs.iter().min().expect("loop class has an edge");
            let iv = Interval::new(lo, hi);
            DimComponent {
                class: class.id,
                essential: class.essential,
                kind: if pmax == pmin {
                    DimKind::ExactPoint
                } else {
                    DimKind::ExactInterval
                },
                inner: iv,
                outer: iv,
                expr: Some(if pmax == pmin {
                    log_expr(pmax, 1, omega.ratio())
                } else {
                    format!(
                        "[{},{}]",
                        log_expr(pmax, 1, omega.ratio()),
                        log_expr(pmin, 1, omega.ratio())
                    )
                }),
                weights: Some(probs.iter().map(crate::rational::to_f64).collect()),
            }
        } else {
            let inner = cycle_dims(omega, class, params.lc, params)?.interval;
            let outer = outer_interval(omega, class, params.l, params)?;
            DimComponent {
                class: class.id,
                essential: class.essential,
                kind: DimKind::Bracketed,
                inner,
                outer,
                expr: None,
                weights: None,
            }
        };
        components.push(comp);
    }

    let groups = merge_exact(&components);
    let disjointness = classify_disjointness(&components, &groups);
    Ok(DimensionSet {
        components,
        groups,
        disjointness,
        params: *params,
    })
}

fn classify_disjointness(components: &[DimComponent], groups: &[Vec<usize>]) -> Disjointness {
    let hull = |g: &Vec<usize>, outer: bool| {
        g.iter()
            .map(|&i| if outer { components[i].outer } else { components[i].inner })
            .reduce(|a, b| a.hull(&b))
            .expect("groups are non-empty")
    };
    let mut outers_meet = false;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if hull(&groups[i], false).intersects(&hull(&groups[j], false)) {
                return Disjointness::Overlapping;
            }
            if hull(&groups[i], true).intersects(&hull(&groups[j], true)) {
                outers_meet = true;
            }
        }
    }
    if outers_meet {
        Disjointness::Undetermined
    } else {
        Disjointness::Disjoint
    }
}

/// Probabilities of a singleton class whose internal edges are all 1x1.
fn scalar_self_maps(omega: &Omega, class: &Component) -> Option<Vec<Rat>> {
    if class.members.len() != 1 {
        return None;
    }
    let v = class.members[0];
    let mut probs = Vec::new();
    for e in omega.children(v).iter().filter(|e| e.child == v) {
        if e.matrix.rows() != 1 || e.matrix.cols() != 1 {
            return None;
        }
        probs.push(e.matrix.get(0, 0).clone());
    }
    Some(probs)
}

/// Hausdorff dimension `log(#B)/log(R)` of a block attractor satisfying the
/// open set condition.
pub fn loop_attractor_dim(block: &crate::constructions::BlockAttractor) -> Result<f64, DimError> {
    if !block.satisfies_osc() {
        return Err(DimError::Overlap);
    }
    Ok((block.len() as f64).ln() / -ln_abs(block.ratio()))
}
