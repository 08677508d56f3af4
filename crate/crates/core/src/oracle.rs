//! Brute-force approximations of the self-similar measure, independent of
//! the net-interval machinery, for cross-checking local dimensions and
//! spectra.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::ifs::WeightedIfs;
use crate::net::{net_intervals, NetError};
use crate::rational::{common_denominator, pow, Rat};

pub const DEFAULT_ATOM_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("BudgetExceeded: more than {0} atoms")]
    BudgetExceeded(usize),
    #[error("Overflow: grid denominator does not fit at depth {0}")]
    Overflow(usize),
    #[error("InsufficientMass: empty window at depth {0}")]
    InsufficientMass(usize),
    #[error("InvalidDepths: {0}")]
    InvalidDepths(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// `μ` pushed through all words of length `n`: atoms at `S_σ(0)` with
/// weight `p_σ`, equal positions merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    pub level: usize,
    pub atoms: Vec<(Rat, Rat)>,
}

impl DiscreteMeasure {
    pub fn total(&self) -> Rat {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Level `n+1` obtained by appending one letter on the right:
    /// `S_σ S_l(0) = S_σ(0) + r^n d_l`.
    pub fn push_forward(&self, ifs: &WeightedIfs) -> DiscreteMeasure {
        let rn = pow(ifs.ratio(), self.level);
        let mut map: BTreeMap<Rat, Rat> = BTreeMap::new();
        for (p, w) in &self.atoms {
            for (d, q) in ifs.digits().iter().zip(ifs.probs()) {
                *map.entry(p + &rn * d).or_insert_with(Rat::zero) += w * q;
            }
        }
        DiscreteMeasure {
            level: self.level + 1,
            atoms: map.into_iter().collect(),
        }
    }
}

/// Level-`n` discrete measure built by prepending letters:
/// `S_l S_σ(0) = r S_σ(0) + d_l`.
pub fn refine(ifs: &WeightedIfs, n: usize, budget: usize) -> Result<DiscreteMeasure, OracleError> {
    let mut atoms = vec![(Rat::zero(), Rat::one())];
    for _ in 0..n {
        if atoms.len().saturating_mul(ifs.alphabet_size()) > budget {
            return Err(OracleError::BudgetExceeded(budget));
        }
        let mut map: BTreeMap<Rat, Rat> = BTreeMap::new();
        for (d, q) in ifs.digits().iter().zip(ifs.probs()) {
            for (p, w) in &atoms {
                *map.entry(ifs.ratio() * p + d).or_insert_with(Rat::zero) += w * q;
            }
        }
        atoms = map.into_iter().collect();
    }
    Ok(DiscreteMeasure { level: n, atoms })
}

/// Integer coordinates `x = X / Q` with `Q = D v^N`, where `r = u/v` and
/// `D` is the common denominator of the digits; every `S_σ(0)` with
/// `|σ| <= N` is a grid point.
#[derive(Debug, Clone)]
pub struct Grid {
    depth: usize,
    denom: i128,
    /// `inc[k][l] = d_l r^k Q`.
    inc: Vec<Vec<i128>>,
    /// `len[k] = r^k Q`, the length of a level-`k` image of `[0,1]`.
    len: Vec<i128>,
    probs: Vec<f64>,
}

fn to_i128(x: &num_bigint::BigInt, depth: usize) -> Result<i128, OracleError> {
    x.to_i128().ok_or(OracleError::Overflow(depth))
}

impl Grid {
    pub fn new(ifs: &WeightedIfs, depth: usize) -> Result<Grid, OracleError> {
        let d = common_denominator(ifs.digits());
        let u = ifs.ratio().numer().clone();
        let v = ifs.ratio().denom().clone();
        let q_big = &d * num_traits::pow(v.clone(), depth);
        // a margin of 2^16 keeps window arithmetic in range
        if q_big.bits() > 100 {
            return Err(OracleError::Overflow(depth));
        }
        let denom = to_i128(&q_big, depth)?;
        let mut len = Vec::with_capacity(depth + 1);
        let mut inc = Vec::with_capacity(depth + 1);
        for k in 0..=depth {
            let lk = &d * num_traits::pow(u.clone(), k) * num_traits::pow(v.clone(), depth - k);
            len.push(to_i128(&lk, depth)?);
            let row: Result<Vec<i128>, OracleError> = ifs
                .digits()
                .iter()
                .map(|dl| {
                    let num = dl.numer() * (&d / dl.denom());
                    to_i128(&(num * &lk / &d), depth)
                })
                .collect();
            inc.push(row?);
        }
        Ok(Grid {
            depth,
            denom,
            inc,
            len,
            probs: ifs.probs().iter().map(crate::rational::to_f64).collect(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn denominator(&self) -> i128 {
        self.denom
    }

    /// `floor(x Q)` or `ceil(x Q)`.
    pub fn scale(&self, x: &Rat, up: bool) -> Result<i128, OracleError> {
        let s = x * Rat::from_integer(self.denom.into());
        let v = if up { s.ceil() } else { s.floor() };
        to_i128(v.numer(), self.depth)
    }

    /// Atom diameter `r^N Q`.
    pub fn atom(&self) -> i128 {
        self.len[self.depth]
    }

    /// `μ_N([lo, hi] / Q)`: images inside the window count fully, images
    /// disjoint from it are dropped, and at depth `N` atoms count by their
    /// left end.
    pub fn mass(&self, lo: i128, hi: i128) -> f64 {
        let k = self.probs.len();
        (0..k)
            .into_par_iter()
            .map(|l| self.mass_rec(1, self.inc[0][l], self.probs[l], lo, hi))
            .collect::<Vec<f64>>()
            .into_iter()
            .sum()
    }

    fn mass_rec(&self, level: usize, pos: i128, w: f64, lo: i128, hi: i128) -> f64 {
        let end = pos + self.len[level];
        if level == self.depth {
            return if lo <= pos && pos <= hi { w } else { 0.0 };
        }
        if end < lo || pos > hi {
            return 0.0;
        }
        if lo <= pos && end <= hi {
            return w;
        }
        let row = &self.inc[level];
        row.iter()
            .zip(&self.probs)
            .map(|(d, p)| self.mass_rec(level + 1, pos + d, w * p, lo, hi))
            .sum()
    }
}

/// `6..=12` when `r >= 1/8`, else `4..=7`.
pub fn default_depths(ifs: &WeightedIfs) -> (usize, usize) {
    if ifs.ratio_f64() >= 1.0 / 8.0 {
        (6, 12)
    } else {
        (4, 7)
    }
}

/// Net-interval generations for [`empirical_lq`]: `3..=6` when `r >= 1/8`,
/// else `1..=3`.
pub fn default_lq_depths(ifs: &WeightedIfs) -> (usize, usize) {
    if ifs.ratio_f64() >= 1.0 / 8.0 {
        (3, 6)
    } else {
        (1, 3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDimEstimate {
    /// Least-squares slope of `log μ(B(x, r^m))` against `log r^m`.
    pub value: f64,
    /// Largest deviation of a consecutive-depth slope from `value`.
    pub spread: f64,
    /// `(m, mass)` samples.
    pub samples: Vec<(usize, f64)>,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn check_depths(lo: usize, hi: usize) -> Result<(), OracleError> {
    if lo >= hi {
        return Err(OracleError::InvalidDepths(format!("{lo}..={hi}")));
    }
    Ok(())
}

/// Local dimension estimate at `x` from windows of radius `r^m`,
/// `m in lo..=hi`, measured with atoms of depth `hi + 2` and windows widened
/// by one atom diameter.
pub fn empirical_local_dim(
    ifs: &WeightedIfs,
    x: &Rat,
    depths: (usize, usize),
) -> Result<LocalDimEstimate, OracleError> {
    let (lo, hi) = depths;
    check_depths(lo, hi)?;
    let grid = Grid::new(ifs, hi + 2)?;
    let mut samples = Vec::new();
    for m in lo..=hi {
        let rho = pow(ifs.ratio(), m);
        let a = grid.scale(&(x - &rho), false)? - grid.atom();
        let b = grid.scale(&(x + &rho), true)? + grid.atom();
        let mass = grid.mass(a, b);
        if mass <= 0.0 {
            return Err(OracleError::InsufficientMass(m));
        }
        samples.push((m, mass));
    }
    let ln_r = crate::rational::ln_abs(ifs.ratio());
    let xs: Vec<f64> = samples.iter().map(|(m, _)| *m as f64 * ln_r).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, w)| w.ln()).collect();
    let value = least_squares(&xs, &ys);
    let spread = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0]) - value).abs())
        .fold(0.0, f64::max);
    Ok(LocalDimEstimate {
        value,
        spread,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqEstimate {
    pub value: f64,
    /// `(n, log Σ μ(Δ)^q)` samples.
    pub samples: Vec<(usize, f64)>,
}

/// Largest dense atom grid used by [`empirical_lq`].
pub const DENSE_GRID_LIMIT: u64 = 1 << 24;

/// Weights of all atoms `S_σ(0)`, `|σ| = depth`, on the dense grid of step
/// `1/(D v^depth)`.
fn dense_atoms(ifs: &WeightedIfs, depth: usize) -> Result<Vec<f64>, OracleError> {
    let d = common_denominator(ifs.digits());
    let u = to_i128(ifs.ratio().numer(), depth)? as u64;
    let v = to_i128(ifs.ratio().denom(), depth)? as u64;
    let dn: Vec<u64> = ifs
        .digits()
        .iter()
        .map(|dl| to_i128(&(dl.numer() * (&d / dl.denom())), depth).map(|x| x as u64))
        .collect::<Result<_, _>>()?;
    let d = to_i128(&d, depth)? as u64;
    let probs: Vec<f64> = ifs.probs().iter().map(crate::rational::to_f64).collect();
    let mut atoms = vec![1.0f64];
    let mut size = 1u64;
    let mut vk = 1u64;
    for _ in 0..depth {
        // positions P/(D v^k) become (u P + d_l D v^(k+1))/(D v^(k+1))
        let vk1 = vk.checked_mul(v).ok_or(OracleError::Overflow(depth))?;
        let next_size = d.checked_mul(vk1).ok_or(OracleError::Overflow(depth))? + 1;
        if next_size > DENSE_GRID_LIMIT {
            return Err(OracleError::BudgetExceeded(DENSE_GRID_LIMIT as usize));
        }
        let mut next = vec![0.0f64; next_size as usize];
        for (pos, w) in atoms.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let base = u * pos as u64;
            for (dl, p) in dn.iter().zip(&probs) {
                next[(base + dl * vk1) as usize] += w * p;
            }
        }
        atoms = next;
        size = next_size;
        vk = vk1;
    }
    debug_assert_eq!(atoms.len() as u64, size);
    Ok(atoms)
}

/// `τ(q)` estimate: slope of `log Σ_Δ μ(Δ)^q` over the net intervals `Δ` of
/// generations `lo..=hi` against `log r^n`. Masses come from the finest atom
/// grid that fits [`DENSE_GRID_LIMIT`] (at least one level below `hi`), each
/// atom counted in the net interval holding its left end.
pub fn empirical_lq(
    ifs: &WeightedIfs,
    q: f64,
    depths: (usize, usize),
    budget: usize,
) -> Result<LqEstimate, OracleError> {
    let (lo, hi) = depths;
    check_depths(lo, hi)?;
    let d = crate::rational::to_f64(&Rat::from_integer(common_denominator(ifs.digits())));
    let v = crate::rational::to_f64(&Rat::from_integer(ifs.ratio().denom().clone()));
    let mut depth = hi + 1;
    while d * v.powi(depth as i32 + 1) < DENSE_GRID_LIMIT as f64 && depth < hi + 4 {
        depth += 1;
    }
    let atoms = dense_atoms(ifs, depth)?;
    let mut prefix = Vec::with_capacity(atoms.len() + 1);
    let mut acc = 0.0f64;
    prefix.push(0.0);
    for w in &atoms {
        acc += w;
        prefix.push(acc);
    }
    let scale = Rat::from_integer((atoms.len() as i64 - 1).into());
    let index = |x: &Rat| -> Result<usize, OracleError> {
        let s = x * &scale;
        Ok(to_i128(s.ceil().numer(), depth)? as usize)
    };
    let mut samples = Vec::new();
    for n in lo..=hi {
        let nets = net_intervals(ifs, n, budget)?;
        let mut terms = Vec::with_capacity(nets.len());
        for (i, dlt) in nets.iter().enumerate() {
            let a = index(&dlt.lo)?;
            // the last interval keeps the atom at 1
            let b = if i + 1 == nets.len() { atoms.len() } else { index(&dlt.hi)? };
            let m = prefix[b] - prefix[a];
            if m > 0.0 {
                terms.push(q * m.ln());
            }
        }
        if terms.is_empty() {
            return Err(OracleError::InsufficientMass(n));
        }
        let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln();
        samples.push((n, lse));
    }
    let ln_r = crate::rational::ln_abs(ifs.ratio());
    let xs: Vec<f64> = samples.iter().map(|(n, _)| *n as f64 * ln_r).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, s)| *s).collect();
    Ok(LqEstimate {
        value: least_squares(&xs, &ys),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::IfsSpec;
    use crate::rational::frac;

    fn three_quarters() -> WeightedIfs {
        IfsSpec::from_indices(
            4,
            &[0, 1, 2, 3, 4, 6, 8, 9, 10, 11, 12],
            [1, 20, 20, 20, 20, 2, 20, 20, 20, 20, 1]
                .iter()
                .map(|&n| frac(n, 164))
                .collect(),
        )
        .validate()
        .unwrap()
    }

    #[test]
    fn level_zero_is_a_point_mass() {
        let m = refine(&three_quarters(), 0, 10).unwrap();
        assert_eq!(m.atoms, vec![(Rat::zero(), Rat::one())]);
    }

    #[test]
    fn level_one_has_one_atom_per_map() {
        let ifs = three_quarters();
        let m = refine(&ifs, 1, 100).unwrap();
        assert_eq!(m.atoms.len(), 11);
        assert!(m.total().is_one());
        for ((p, w), (d, q)) in m.atoms.iter().zip(ifs.digits().iter().zip(ifs.probs())) {
            assert_eq!((p, w), (d, q));
        }
    }

    #[test]
    fn grid_mass_of_everything_is_one() {
        let ifs = three_quarters();
        let g = Grid::new(&ifs, 6).unwrap();
        assert!((g.mass(0, g.denominator()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            refine(&three_quarters(), 8, 1000),
            Err(OracleError::BudgetExceeded(1000))
        ));
    }
}
