//! `L^q`-spectrum of a measure assembled from closed-form components and an
//! essential-class envelope, its crossings, and the multifractal curve.
//!
//! Sign convention: `τ(q) = liminf log Σ μ(Δ)^q / log r` over net intervals
//! `Δ` of size `r`, so `τ(0) = -dim_B(supp μ)` and `τ(1) = 0`.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::ConstructionSpec;
use crate::dimensions::{DimKind, DimensionSet, Interval};
use crate::rational::{ln_abs, to_f64, Rat};

pub const DEFAULT_QMIN: f64 = -4.0;
pub const DEFAULT_QMAX: f64 = 4.0;
pub const DEFAULT_QSTEP: f64 = 1.0 / 256.0;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("NoCrossing: {0} and {1} do not cross on the grid")]
    NoCrossing(String, String),
    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),
    #[error("MissingComponents: {0}")]
    MissingComponents(String),
}

/// Spectrum of a self-similar measure on a set with the open set condition:
/// `τ(q) = -log Σ p^q / log R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub name: String,
    pub probs: Vec<f64>,
    ln_probs: Vec<f64>,
    /// `log R`, the inverse contraction.
    pub ln_r_inv: f64,
}

impl ClosedForm {
    pub fn new(name: impl Into<String>, probs: &[Rat], r_inv: &Rat) -> Self {
        ClosedForm {
            name: name.into(),
            probs: probs.iter().map(to_f64).collect(),
            ln_probs: probs.iter().map(ln_abs).collect(),
            ln_r_inv: ln_abs(r_inv),
        }
    }

    fn ln_sum_pow(&self, q: f64) -> f64 {
        let m = self
            .ln_probs
            .iter()
            .map(|l| q * l)
            .fold(f64::NEG_INFINITY, f64::max);
        m + self.ln_probs.iter().map(|l| (q * l - m).exp()).sum::<f64>().ln()
    }

    pub fn tau(&self, q: f64) -> f64 {
        -self.ln_sum_pow(q) / self.ln_r_inv
    }

    /// `α(q) = τ'(q)`, the weighted mean of `log p / log(1/R)` with weights `∝ p^q`.
    pub fn alpha(&self, q: f64) -> f64 {
        let lse = self.ln_sum_pow(q);
        self.ln_probs
            .iter()
            .map(|l| (q * l - lse).exp() * l)
            .sum::<f64>()
            / -self.ln_r_inv
    }

    /// `f(α(q)) = qα(q) - τ(q)`.
    pub fn f(&self, q: f64) -> f64 {
        q * self.alpha(q) - self.tau(q)
    }

    /// `[min, max]` of the local dimensions `log p / log(1/R)`.
    pub fn dim_range(&self) -> Interval {
        let d = self.ln_probs.iter().map(|l| l / -self.ln_r_inv);
        Interval::new(
            d.clone().fold(f64::INFINITY, f64::min),
            d.fold(f64::NEG_INFINITY, f64::max),
        )
    }

    /// `log(#maps)/log R`, the similarity dimension.
    pub fn dimension(&self) -> f64 {
        (self.probs.len() as f64).ln() / self.ln_r_inv
    }

    pub fn is_degenerate(&self) -> bool {
        self.ln_probs.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15)
    }

    pub fn same_as(&self, other: &ClosedForm) -> bool {
        let mut a = self.ln_probs.clone();
        let mut b = other.ln_probs.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        a == b && self.ln_r_inv == other.ln_r_inv
    }
}

/// `τ` of a single block with probabilities `probs` and contraction `1/R`.
pub fn tau_component(probs: &[Rat], r_inv: &Rat, q: f64) -> f64 {
    ClosedForm::new("", probs, r_inv).tau(q)
}

/// Bounds on the essential-class spectrum from brackets on its extreme
/// local dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialEnvelope {
    pub dmin: Interval,
    pub dmax: Interval,
}

impl EssentialEnvelope {
    /// `d_min ∈ [outer.lo, inner.lo]`, `d_max ∈ [inner.hi, outer.hi]`.
    pub fn from_brackets(inner: Interval, outer: Interval) -> Self {
        EssentialEnvelope {
            dmin: Interval::new(outer.lo, inner.lo),
            dmax: Interval::new(inner.hi, outer.hi),
        }
    }

    pub fn lower(&self, q: f64) -> f64 {
        if q >= 0.0 {
            self.dmin.lo * q - 1.0
        } else {
            self.dmax.hi * q - 1.0
        }
    }

    pub fn upper(&self, q: f64) -> f64 {
        if q >= 0.0 {
            (self.dmax.hi * q - 1.0).min(self.dmin.hi * q)
        } else {
            (self.dmin.lo * q - 1.0).min(self.dmax.lo * q)
        }
    }

    /// Possible values of the local dimensions, which bound the slope of `τ_E`.
    pub fn slope_range(&self) -> Interval {
        Interval::new(self.dmin.lo, self.dmax.hi)
    }
}

pub fn tau_essential_envelope(q: f64, env: &EssentialEnvelope) -> (f64, f64) {
    (env.lower(q), env.upper(q))
}

/// Everything the spectrum is assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    pub components: Vec<ClosedForm>,
    pub essential: Option<EssentialEnvelope>,
}

impl SpectrumModel {
    /// Components `K_0, …, K_d` of a construction plus the essential envelope.
    pub fn from_construction(spec: &ConstructionSpec, dims: &DimensionSet) -> Self {
        let r_inv = Rat::from_integer(spec.r_inv.into());
        let components = spec
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| ClosedForm::new(format!("K{i}"), &b.probs, &r_inv))
            .collect();
        let e = dims.essential();
        SpectrumModel {
            components,
            essential: Some(EssentialEnvelope::from_brackets(e.inner, e.outer)),
        }
    }

    /// Components read off a dimension set: classes of scalar self-maps and
    /// periodic classes become closed forms; a bracketed essential class
    /// becomes the envelope.
    pub fn from_dimension_set(dims: &DimensionSet, ratio: &Rat) -> Result<Self, SpectraError> {
        let r_inv = Rat::from_integer(1.into()) / ratio;
        let mut components = Vec::new();
        let mut essential = None;
        for c in &dims.components {
            match (&c.weights, c.kind) {
                (Some(w), k) if k != DimKind::Bracketed => {
                    let probs: Vec<Rat> = w
                        .iter()
                        .map(|p| Rat::from_float(*p).expect("finite probability"))
                        .collect();
                    components.push(ClosedForm::new(format!("class{}", c.class + 1), &probs, &r_inv));
                }
                _ if c.essential => {
                    essential = Some(EssentialEnvelope::from_brackets(c.inner, c.outer));
                }
                _ => {
                    return Err(SpectraError::MissingComponents(format!(
                        "class {} has no closed form",
                        c.class + 1
                    )))
                }
            }
        }
        Ok(SpectrumModel {
            components,
            essential,
        })
    }

    fn closed_min(&self, q: f64) -> Option<(usize, f64)> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.tau(q)))
            // first index wins ties
            .fold(None, |best: Option<(usize, f64)>, (i, t)| match best {
                Some((_, b)) if b <= t => best,
                _ => Some((i, t)),
            })
    }

    /// `(lower, upper, active)` at one `q`.
    pub fn evaluate(&self, q: f64) -> (f64, f64, Active) {
        let closed = self.closed_min(q);
        match (closed, &self.essential) {
            (Some((i, t)), None) => (t, t, Active::Component(i)),
            (None, Some(e)) => (e.lower(q), e.upper(q), Active::Essential),
            (Some((i, t)), Some(e)) => {
                let (lo, hi) = (e.lower(q), e.upper(q));
                let active = if t <= lo {
                    Active::Component(i)
                } else if t >= hi {
                    Active::Essential
                } else {
                    Active::Ambiguous(i)
                };
                (t.min(lo), t.min(hi), active)
            }
            (None, None) => (f64::NAN, f64::NAN, Active::Essential),
        }
    }

    pub fn label(&self, a: Active) -> String {
        match a {
            Active::Component(i) => self.components[i].name.clone(),
            Active::Essential => "essential".into(),
            Active::Ambiguous(i) => format!("essential-or-{}", self.components[i].name),
        }
    }
}

/// Which piece attains the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Active {
    Component(usize),
    Essential,
    /// The closed form lies inside the essential envelope.
    Ambiguous(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub model: SpectrumModel,
    pub q: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub active: Vec<Active>,
}

impl SpectrumCurve {
    /// `q,lower,upper,active` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,lower,upper,active\n");
        for i in 0..self.q.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_g(self.q[i]),
                fmt_g(self.lower[i]),
                fmt_g(self.upper[i]),
                self.model.label(self.active[i])
            ));
        }
        s
    }

    /// Distinct definite labels in grid order, skipping ambiguous stretches.
    pub fn active_sequence(&self, qmin: f64, qmax: f64) -> Vec<Active> {
        let mut seq: Vec<Active> = Vec::new();
        for (q, a) in self.q.iter().zip(&self.active) {
            if *q < qmin || *q > qmax || matches!(a, Active::Ambiguous(_)) {
                continue;
            }
            if seq.last() != Some(a) {
                seq.push(*a);
            }
        }
        seq
    }

    pub fn value_at(&self, q: f64) -> (f64, f64, Active) {
        self.model.evaluate(q)
    }
}

/// 12 significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().expect("formatted float parses");
    format!("{v}")
}

fn grid(qmin: f64, qmax: f64, step: f64) -> Result<Vec<f64>, SpectraError> {
    if qmin == qmax && qmin.is_finite() {
        return Ok(vec![qmin]);
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    if !(qmin < qmax) || !(step > 0.0) || !qmin.is_finite() || !qmax.is_finite() {
        return Err(SpectraError::InvalidGrid(format!(
            "qmin={qmin} qmax={qmax} step={step}"
        )));
    }
    let n = ((qmax - qmin) / step).round() as usize;
    if n > 10_000_000 {
        return Err(SpectraError::InvalidGrid(format!("{n} grid points")));
    }
    let mut g: Vec<f64> = (0..=n).map(|i| qmin + i as f64 * step).collect();
    if let Some(last) = g.last_mut() {
        *last = last.min(qmax);
    }
    Ok(g)
}

/// Samples the spectrum on `[qmin, qmax]` with local refinement to `step/16`
/// in every grid cell where the active piece changes.
pub fn tau_mu(model: &SpectrumModel, qmin: f64, qmax: f64, step: f64) -> Result<SpectrumCurve, SpectraError> {
    let coarse = grid(qmin, qmax, step)?;
    let labels: Vec<Active> = coarse.par_iter().map(|&q| model.evaluate(q).2).collect();
    let mut q = coarse.clone();
    for i in 1..coarse.len() {
        if labels[i] != labels[i - 1] {
            let h = (coarse[i] - coarse[i - 1]) / 16.0;
            q.extend((1..16).map(|k| coarse[i - 1] + k as f64 * h));
        }
    }
    q.sort_by(f64::total_cmp);
    q.dedup();
    let vals: Vec<(f64, f64, Active)> = q.par_iter().map(|&x| model.evaluate(x)).collect();
    Ok(SpectrumCurve {
        model: model.clone(),
        lower: vals.iter().map(|v| v.0).collect(),
        upper: vals.iter().map(|v| v.1).collect(),
        active: vals.iter().map(|v| v.2).collect(),
        q,
    })
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (fm <= 0.0) == (fa <= 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Root of `τ_a = τ_b` on `[qmin, qmax]`, located on a grid of `step` and
/// bisected to `1e-10`.
pub fn closed_form_crossing(
    a: &ClosedForm,
    b: &ClosedForm,
    qmin: f64,
    qmax: f64,
    step: f64,
) -> Result<f64, SpectraError> {
    let none = || SpectraError::NoCrossing(a.name.clone(), b.name.clone());
    if a.same_as(b) {
        return Err(none());
    }
    let g = |q: f64| a.tau(q) - b.tau(q);
    let pts = grid(qmin, qmax, step)?;
    for w in pts.windows(2) {
        let (x, y) = (g(w[0]), g(w[1]));
        if x == 0.0 {
            return Ok(w[0]);
        }
        if (x < 0.0) != (y < 0.0) {
            return Ok(bisect(g, w[0], w[1]));
        }
    }
    Err(none())
}

/// A point where the active piece of `τ_μ` changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub left: String,
    pub right: String,
    /// Set when both sides are closed forms.
    pub q: Option<f64>,
    /// Contains the crossing; degenerate when `q` is set.
    pub bracket: Interval,
    /// Lower bound on the jump of `τ_μ'` across the crossing.
    pub slope_gap: f64,
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.q.unwrap_or(0.5 * (self.bracket.lo + self.bracket.hi));
        write!(
            f,
            "q0={} bracket=[{},{}] left={} right={} slope_gap>={}",
            fmt_g(q),
            fmt_g(self.bracket.lo),
            fmt_g(self.bracket.hi),
            self.left,
            self.right,
            fmt_g(self.slope_gap)
        )
    }
}

fn gap(a: &Interval, b: &Interval) -> f64 {
    (a.lo - b.hi).max(b.lo - a.hi).max(0.0)
}

/// Crossings between consecutive definite pieces of the sampled curve.
pub fn crossings(curve: &SpectrumCurve) -> Vec<Crossing> {
    let model = &curve.model;
    let mut out = Vec::new();
    // indices of the definite labels, in grid order
    let definite: Vec<usize> = (0..curve.q.len())
        .filter(|&i| !matches!(curve.active[i], Active::Ambiguous(_)))
        .collect();
    for w in definite.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (la, lb) = (curve.active[i], curve.active[j]);
        if la == lb {
            continue;
        }
        let (qa, qb) = (curve.q[i], curve.q[j]);
        let c = match (la, lb) {
            (Active::Component(a), Active::Component(b)) => {
                let (ca, cb) = (&model.components[a], &model.components[b]);
                let q = bisect(|q| ca.tau(q) - cb.tau(q), qa, qb);
                Crossing {
                    left: ca.name.clone(),
                    right: cb.name.clone(),
                    q: Some(q),
                    bracket: Interval::point(q),
                    slope_gap: (ca.alpha(q) - cb.alpha(q)).abs(),
                }
            }
            (Active::Component(a), Active::Essential) | (Active::Essential, Active::Component(a)) => {
                let env = model.essential.expect("essential label implies an envelope");
                let ca = &model.components[a];
                let r1 = bisect(|q| ca.tau(q) - env.lower(q), qa, qb);
                let r2 = bisect(|q| ca.tau(q) - env.upper(q), qa, qb);
                let bracket = Interval::new(r1.min(r2), r1.max(r2));
                let slopes = Interval::new(
                    ca.alpha(bracket.lo).min(ca.alpha(bracket.hi)),
                    ca.alpha(bracket.lo).max(ca.alpha(bracket.hi)),
                );
                let (left, right) = if matches!(la, Active::Essential) {
                    ("essential".to_string(), ca.name.clone())
                } else {
                    (ca.name.clone(), "essential".to_string())
                };
                Crossing {
                    left,
                    right,
                    q: None,
                    bracket,
                    slope_gap: gap(&slopes, &env.slope_range()),
                }
            }
            _ => continue,
        };
        out.push(c);
    }
    out
}

/// Parametric arc `(q, α(q), f(α(q)))` of one closed-form component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCurve {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

impl ComponentCurve {
    pub fn is_point(&self) -> bool {
        self.points.len() == 1
    }

    pub fn alpha_range(&self) -> Interval {
        let a = self.points.iter().map(|p| p.1);
        Interval::new(
            a.clone().fold(f64::INFINITY, f64::min),
            a.fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn max_f(&self) -> f64 {
        self.points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Legendre transform of a closed form, sampled at `qs`. A component with
/// equal probabilities is the single point `(α, dim)`.
pub fn legendre(c: &ClosedForm, qs: &[f64]) -> ComponentCurve {
    if c.is_degenerate() {
        return ComponentCurve {
            name: c.name.clone(),
            points: vec![(0.0, c.alpha(0.0), c.dimension())],
        };
    }
    ComponentCurve {
        name: c.name.clone(),
        points: qs.iter().map(|&q| (q, c.alpha(q), c.f(q).max(0.0))).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultifractalCurve {
    pub components: Vec<ComponentCurve>,
    /// `f = 1` is attained somewhere in this bracket.
    pub essential: Option<Interval>,
    pub concave: bool,
}

impl MultifractalCurve {
    /// `component,alpha,f` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("component,alpha,f\n");
        for c in &self.components {
            for (_, a, f) in &c.points {
                s.push_str(&format!("{},{},{}\n", c.name, fmt_g(*a), fmt_g(*f)));
            }
        }
        if let Some(e) = &self.essential {
            s.push_str(&format!("essential,{},1\n", fmt_g(e.lo)));
            s.push_str(&format!("essential,{},1\n", fmt_g(e.hi)));
        }
        s
    }
}

/// Union of the component curves with the essential annotation. The global
/// curve is concave only when its pieces form a single connected α-domain.
pub fn assemble_f(model: &SpectrumModel, qs: &[f64]) -> MultifractalCurve {
    let components: Vec<ComponentCurve> = model.components.iter().map(|c| legendre(c, qs)).collect();
    let essential = model
        .essential
        .map(|e| Interval::new(e.dmin.lo, e.dmax.hi));
    let mut domains: Vec<Interval> = components.iter().map(|c| c.alpha_range()).collect();
    domains.extend(essential);
    domains.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut pieces = 0;
    let mut end = f64::NEG_INFINITY;
    for d in domains {
        if d.lo > end + 1e-12 {
            pieces += 1;
        }
        end = end.max(d.hi);
    }
    MultifractalCurve {
        components,
        essential,
        concave: pieces <= 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn k(name: &str, nums: &[i64]) -> ClosedForm {
        let p: Vec<Rat> = nums.iter().map(|&n| frac(n, 1150)).collect();
        ClosedForm::new(name, &p, &int(14))
    }

    #[test]
    fn closed_form_values() {
        let k1 = k("K1", &[3, 3]);
        let want = -(6.0f64 / 1150.0).ln() / 14f64.ln();
        assert!((k1.tau(1.0) - want).abs() < 1e-14);
        let k2 = k("K2", &[5, 7]);
        assert!((k2.tau(0.0) + 2f64.ln() / 14f64.ln()).abs() < 1e-15);
        let k0 = k("K0", &[1]);
        assert!((k0.tau(2.0) + 2.0 * (1.0f64 / 1150.0).ln() / 14f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn alpha_is_the_derivative() {
        let k2 = k("K2", &[5, 7]);
        for q in [-3.0, -0.5, 0.0, 1.0, 2.5] {
            let h = 1e-6;
            let num = (k2.tau(q + h) - k2.tau(q - h)) / (2.0 * h);
            assert!((num - k2.alpha(q)).abs() < 1e-6);
        }
    }

    #[test]
    fn envelope_at_zero() {
        let env = EssentialEnvelope {
            dmin: Interval::new(0.9666, 0.9913),
            dmax: Interval::new(1.009, 1.038),
        };
        assert_eq!(tau_essential_envelope(0.0, &env), (-1.0, -1.0));
        let (lo, hi) = tau_essential_envelope(1.0, &env);
        assert!((lo - (0.9666 - 1.0)).abs() < 1e-15);
        assert!((hi - (1.038f64 - 1.0).min(0.9913)).abs() < 1e-15);
    }

    #[test]
    fn identical_components_never_cross() {
        let a = k("K0", &[1]);
        let b = k("K3", &[1]);
        assert!(matches!(
            closed_form_crossing(&a, &b, -4.0, 4.0, 1.0 / 256.0),
            Err(SpectraError::NoCrossing(..))
        ));
    }

    #[test]
    fn fmt_keeps_twelve_digits() {
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(-0.25), "-0.25");
        assert_eq!(fmt_g(0.0), "0");
    }
}
