#![allow(dead_code)]

use fintype::constructions::{multiinterval, multipoint, ConstructionSpec};
use fintype::ifs::{IfsSpec, WeightedIfs};
use fintype::rational::{frac, Rat};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn r4_system() -> (WeightedIfs, ConstructionSpec) {
    let bp = [frac(1, 164), frac(2, 164), frac(1, 164)];
    multipoint(4, &bp, None).unwrap()
}

pub fn example_51() -> (WeightedIfs, ConstructionSpec) {
    let bp: Vec<Rat> = [1, 3, 3, 7, 5, 1].iter().map(|&n| frac(n, 1150)).collect();
    multiinterval(14, &bp, None).unwrap()
}

/// A random system with ratio `1/R`, `R in 2..=4`, digits on the lattice
/// `(1/(R m)) Z`, no gaps, and `p_0 = p_k` minimal.
pub fn random_system(rng: &mut StdRng) -> WeightedIfs {
    let r: i64 = rng.random_range(2..=4);
    let m: i64 = rng.random_range(2..=3);
    let den = r * m;
    let last = (r - 1) * m;
    let mut digits = vec![0i64];
    while *digits.last().unwrap() < last {
        let cur = *digits.last().unwrap();
        let step = rng.random_range(1..=m).min(last - cur);
        digits.push(cur + step);
    }
    if digits.len() < 2 {
        digits.push(last);
    }
    let mut weights: Vec<i64> = digits.iter().map(|_| rng.random_range(2..=5)).collect();
    let n = weights.len();
    weights[0] = 1;
    weights[n - 1] = 1;
    let total: i64 = weights.iter().sum();
    IfsSpec {
        ratio: frac(1, r),
        digits: digits.iter().map(|&j| frac(j, den)).collect(),
        probs: weights.iter().map(|&w| frac(w, total)).collect(),
    }
    .validate()
    .expect("generated systems satisfy the standing assumptions")
}

pub fn random_systems(count: usize, seed: u64) -> Vec<WeightedIfs> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_system(&mut rng)).collect()
}
