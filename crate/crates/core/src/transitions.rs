//! Primitive transition matrices, path products, norms and spectral radii.
//!
//! Exact matrices ([`RatMatrix`]) carry the primitive transition matrices and
//! any product that has to be compared exactly. Long path enumerations use
//! [`ScaledMatrix`], a floating-point mantissa matrix with a separate
//! logarithmic scale so that products of many small probabilities never
//! underflow.

use std::fmt;

use num_traits::{Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::ifs::WeightedIfs;
use crate::rational::{fmt_rat, ln_abs, to_f64, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitionError {
    #[error("DimensionMismatch: {left_cols} columns cannot multiply {right_rows} rows")]
    DimensionMismatch { left_cols: usize, right_rows: usize },
    #[error("StructureViolation: {0}")]
    StructureViolation(String),
    #[error("NotSquare: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("NonConvergence: enclosure wider than {tol} after {iterations} iterations")]
    NonConvergence { tol: f64, iterations: usize },
    #[error("EmptyProduct")]
    EmptyProduct,
}

/// Dense exact matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::from_integer(1.into()));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, TransitionError> {
        if self.cols != other.rows {
            return Err(TransitionError::DimensionMismatch {
                left_cols: self.cols,
                right_rows: other.rows,
            });
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_triangular(&self) -> bool {
        self.is_upper_triangular() || self.is_lower_triangular()
    }

    pub fn max_entry(&self) -> Rat {
        self.data.iter().cloned().max().unwrap_or_else(Rat::zero)
    }

    /// Floating-point copy scaled by the largest entry; returns the mantissa
    /// matrix and `ln` of the scale.
    pub fn to_scaled(&self) -> ScaledMatrix {
        let max = self.max_entry();
        if max.is_zero() {
            return ScaledMatrix {
                m: FMatrix::zeros(self.rows, self.cols),
                ln_scale: 0.0,
            };
        }
        let data = self.data.iter().map(|v| to_f64(&(v / &max))).collect();
        ScaledMatrix {
            m: FMatrix {
                rows: self.rows,
                cols: self.cols,
                data,
            },
            ln_scale: ln_abs(&max),
        }
    }

    /// Every row and every column has a non-zero entry.
    pub fn check_structure(&self) -> Result<(), TransitionError> {
        for i in 0..self.rows {
            if (0..self.cols).all(|j| self.get(i, j).is_zero()) {
                return Err(TransitionError::StructureViolation(format!("row {i} is zero")));
            }
        }
        for j in 0..self.cols {
            if (0..self.rows).all(|i| self.get(i, j).is_zero()) {
                return Err(TransitionError::StructureViolation(format!(
                    "column {j} is zero"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exact rational grid, one bracketed row per line.
impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_rat(self.get(i, j))).collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Primitive transition matrix between a parent net interval and one of its
/// children, both given in the parent's normalized coordinates.
///
/// `parent_neighbours` are the `c_j`, `child_left` is the child's left end
/// `u` relative to the parent, and `child_neighbours` are the child's `a_k`.
/// Entry `(j,k)` is `p_l` when `-c_j + d_l = u - r a_k`.
pub fn primitive(
    ifs: &WeightedIfs,
    parent_neighbours: &[Rat],
    child_left: &Rat,
    child_neighbours: &[Rat],
) -> Result<RatMatrix, TransitionError> {
    let r = ifs.ratio();
    let targets: Vec<Rat> = child_neighbours.iter().map(|a| child_left - r * a).collect();
    let mut t = RatMatrix::zeros(parent_neighbours.len(), child_neighbours.len());
    for (j, c) in parent_neighbours.iter().enumerate() {
        for (l, d) in ifs.digits().iter().enumerate() {
            let e = d - c;
            if let Some(k) = targets.iter().position(|t| *t == e) {
                t.set(j, k, ifs.probs()[l].clone());
            }
        }
    }
    t.check_structure()?;
    Ok(t)
}

/// Left-to-right exact product `M_1 M_2 ... M_n`.
pub fn product<'a>(
    path: impl IntoIterator<Item = &'a RatMatrix>,
) -> Result<RatMatrix, TransitionError> {
    let mut it = path.into_iter();
    let first = it.next().ok_or(TransitionError::EmptyProduct)?;
    it.try_fold(first.clone(), |acc, m| acc.mul(m))
}

/// Sum of all entries; submultiplicative on non-negative matrices.
pub fn entry_sum_norm(m: &RatMatrix) -> Rat {
    m.entries().iter().sum()
}

/// Smallest row sum; supermultiplicative on non-negative matrices.
pub fn min_row_sum(m: &RatMatrix) -> Rat {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).sum::<Rat>())
        .min()
        .unwrap_or_else(Rat::zero)
}

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Perron root of a non-negative square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRadius {
    pub value: f64,
    /// Natural logarithm of `value`, computed without underflow.
    pub ln: f64,
    /// Certified enclosure `[lower, upper]` of the true value.
    pub lower: f64,
    pub upper: f64,
    /// Set when the radius is a rational number known exactly
    /// (1x1 or triangular input).
    pub exact: Option<Rat>,
}

pub fn spectral_radius(m: &RatMatrix, tol: f64) -> Result<SpectralRadius, TransitionError> {
    if !m.is_square() {
        return Err(TransitionError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() == 1 || m.is_triangular() {
        let v = (0..m.rows())
            .map(|i| m.get(i, i).clone())
            .max()
            .unwrap_or_else(Rat::zero);
        let f = to_f64(&v);
        let ln = if v.is_positive() { ln_abs(&v) } else { f64::NEG_INFINITY };
        return Ok(SpectralRadius {
            value: f,
            ln,
            lower: f,
            upper: f,
            exact: Some(v),
        });
    }
    let s = m.to_scaled();
    let mut out = s.spectral_radius(tol)?;
    out.exact = None;
    Ok(out)
}

/// Dense floating-point matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let c = rows.first().map_or(0, |r| r.len());
        FMatrix {
            rows: rows.len(),
            cols: c,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = FMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn entry_sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    fn is_triangular(&self) -> bool {
        let upper = (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == 0.0));
        let lower = (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == 0.0));
        upper || lower
    }

    fn submatrix(&self, idx: &[usize]) -> FMatrix {
        let n = idx.len();
        let mut out = FMatrix::zeros(n, n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * n + b] = self.get(i, j);
            }
        }
        out
    }

    /// Perron root of a non-negative square matrix with a Collatz–Wielandt
    /// enclosure. Reducible inputs are split into irreducible diagonal blocks.
    pub fn spectral_radius(&self, tol: f64) -> Result<(f64, f64, f64), TransitionError> {
        if self.rows != self.cols {
            return Err(TransitionError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 1 || self.is_triangular() {
            let v = (0..n).map(|i| self.get(i, i)).fold(0.0, f64::max);
            return Ok((v, v, v));
        }
        if n == 2 {
            let v = perron_2x2(self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
            return Ok((v, v, v));
        }
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for i in 0..n {
            for j in 0..n {
                if self.get(i, j) > 0.0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut best = (0.0f64, 0.0f64, 0.0f64);
        for comp in tarjan_scc(&g) {
            let mut idx: Vec<usize> = comp.iter().map(|v| v.index()).collect();
            idx.sort_unstable();
            let (v, lo, hi) = match idx.len() {
                1 => {
                    let d = self.get(idx[0], idx[0]);
                    (d, d, d)
                }
                2 => {
                    let (i, j) = (idx[0], idx[1]);
                    let v = perron_2x2(self.get(i, i), self.get(i, j), self.get(j, i), self.get(j, j));
                    (v, v, v)
                }
                _ => power_iteration(&self.submatrix(&idx), tol, DEFAULT_MAX_ITER)?,
            };
            if v > best.0 {
                best = (v, lo, hi);
            } else {
                best.1 = best.1.max(lo);
                best.2 = best.2.max(hi);
            }
        }
        Ok(best)
    }
}

fn perron_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let half = 0.5 * (a - d);
    0.5 * (a + d) + (half * half + b * c).sqrt()
}

/// Power iteration on an irreducible block, shifted by a multiple of the
/// identity so the iteration matrix is primitive.
fn power_iteration(
    m: &FMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64, f64), TransitionError> {
    let n = m.rows;
    let shift = 0.25 * m.entry_sum() / n as f64;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for it in 0..max_iter {
        for i in 0..n {
            let row = &m.data[i * n..(i + 1) * n];
            y[i] = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let ratio = y[i] / x[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if it > 0 && hi - lo <= tol * hi {
            return Ok((0.5 * (lo + hi), lo, hi));
        }
        let mut norm = 0.0f64;
        for i in 0..n {
            x[i] = y[i] + shift * x[i];
            norm = norm.max(x[i]);
        }
        for v in &mut x {
            *v /= norm;
        }
    }
    Err(TransitionError::NonConvergence {
        tol,
        iterations: max_iter,
    })
}

/// Floating-point matrix with a separate natural-log scale:
/// the represented value is `exp(ln_scale) * m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub m: FMatrix,
    pub ln_scale: f64,
}

impl ScaledMatrix {
    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        let mut m = self.m.mul(&other.m);
        let mut ln_scale = self.ln_scale + other.ln_scale;
        let max = m.max_entry();
        if max > 0.0 {
            for v in &mut m.data {
                *v /= max;
            }
            ln_scale += max.ln();
        }
        ScaledMatrix { m, ln_scale }
    }

    pub fn ln_entry_sum(&self) -> f64 {
        self.m.entry_sum().ln() + self.ln_scale
    }

    pub fn ln_min_row_sum(&self) -> f64 {
        self.m.min_row_sum().ln() + self.ln_scale
    }

    pub fn spectral_radius(&self, tol: f64) -> Result<SpectralRadius, TransitionError> {
        let (v, lo, hi) = self.m.spectral_radius(tol)?;
        let k = self.ln_scale.exp();
        Ok(SpectralRadius {
            value: v * k,
            ln: v.ln() + self.ln_scale,
            lower: lo * k,
            upper: hi * k,
            exact: None,
        })
    }
}
