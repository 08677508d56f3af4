//! The R = 14 multi-interval measure with block probabilities
//! (1, 3, 3, 7, 5, 1)/1150.

mod common;

use fintype::classes::ClassGraph;
use fintype::constructions::{locate_classes, verify_requirements};
use fintype::dimensions::{attainable_set, cycle_dims, DimKind, DimParams, DimensionSet};
use fintype::net::{closure, Omega};
use fintype::oracle::empirical_lq;
use fintype::rational::frac;
use fintype::spectra::{legendre, tau_mu, SpectrumModel};

use common::example_51;

fn analysed() -> (Omega, ClassGraph, DimensionSet, SpectrumModel) {
    let (ifs, spec) = example_51();
    let omega = closure(&ifs, 10_000).unwrap();
    let graph = ClassGraph::build(&omega).unwrap();
    let dims = attainable_set(&omega, &graph, &DimParams::for_ifs(&ifs)).unwrap();
    let model = SpectrumModel::from_construction(&spec, &dims);
    (omega, graph, dims, model)
}

fn d(n: i64) -> f64 {
    (n as f64 / 1150.0).ln() / (1.0f64 / 14.0).ln()
}

#[test]
fn free_family_and_block_positions() {
    let (ifs, spec) = example_51();
    assert_eq!(spec.free.len(), 113);
    assert_eq!(spec.p_star, frac(10, 1150));
    assert_eq!(ifs.alphabet_size(), 113 + 6);
    assert_eq!(spec.blocks[1].indices, [26, 78]);
    assert_eq!(spec.blocks[2].indices, [104, 156]);
    assert_eq!(spec.attractor(1).hull(), (frac(2, 14), frac(6, 14)));
}

#[test]
fn requirements_hold() {
    let (ifs, spec) = example_51();
    let report = verify_requirements(&ifs, &spec, 10_000).unwrap();
    assert!(report.all_pass(), "{report}");
}

#[test]
fn loop_classes_sit_over_the_blocks() {
    let (ifs, spec) = example_51();
    let omega = closure(&ifs, 10_000).unwrap();
    let graph = ClassGraph::build(&omega).unwrap();
    let located = locate_classes(&omega, &graph, &spec);
    let mut per_block = [0usize; 4];
    for (_, block) in &located {
        per_block[block.expect("every non-essential loop class lies over a block")] += 1;
    }
    // K_0, K_3 are points; each interior block has a left, right and centre class
    assert_eq!(per_block, [1, 3, 3, 1]);
}

#[test]
fn centre_class_of_the_interval_block() {
    let (omega, graph, dims, _) = analysed();
    let c = dims
        .components
        .iter()
        .find(|c| c.kind == DimKind::ExactInterval)
        .expect("one class with two distinct self-maps");
    assert!((c.inner.lo - d(7)).abs() < 1e-12 && (c.inner.hi - d(5)).abs() < 1e-12);
    let class = graph.component(c.class);
    let two = cycle_dims(&omega, class, 2, &dims.params).unwrap().interval;
    assert!((two.lo - d(7)).abs() < 1e-12 && (two.hi - d(5)).abs() < 1e-12);
}

#[test]
fn closed_form_spectra() {
    let (_, _, _, model) = analysed();
    let ln14 = 14f64.ln();
    let k = &model.components;
    assert!((k[1].tau(1.0) + (6.0f64 / 1150.0).ln() / ln14).abs() < 1e-14);
    assert!((k[2].tau(0.0) + 2f64.ln() / ln14).abs() < 1e-15);
    assert!((k[0].tau(2.0) + 2.0 * (1.0f64 / 1150.0).ln() / ln14).abs() < 1e-13);
}

#[test]
fn envelope_sits_inside_the_published_bounds() {
    let (_, _, _, model) = analysed();
    let env = model.essential.unwrap();
    for i in 0..=40 {
        let q = i as f64 / 10.0;
        assert!(env.lower(q) >= 0.9666 * q - 1.0 - 1e-12);
        assert!(env.upper(q) <= (1.038 * q - 1.0).min(0.9913 * q) + 1e-12);
        assert!(env.lower(q) <= env.upper(q));
    }
    assert_eq!((env.lower(0.0), env.upper(0.0)), (-1.0, -1.0));
}

#[test]
fn active_pieces_never_include_the_interval_block() {
    let (_, _, _, model) = analysed();
    let curve = tau_mu(&model, -4.0, 4.0, 1.0 / 64.0).unwrap();
    let labels: Vec<String> = curve
        .active_sequence(-4.0, 4.0)
        .into_iter()
        .map(|a| model.label(a))
        .collect();
    assert!(!labels.iter().any(|l| l == "K2"), "{labels:?}");
}

#[test]
fn degenerate_blocks_are_single_points() {
    let (_, _, _, model) = analysed();
    let qs = [-1.0, 0.0, 1.0];
    let k0 = legendre(&model.components[0], &qs);
    assert!(k0.is_point());
    assert!((k0.points[0].1 - d(1)).abs() < 1e-12 && k0.points[0].2 == 0.0);
    let k1 = legendre(&model.components[1], &qs);
    assert!(k1.is_point());
    assert!((k1.points[0].1 - d(3)).abs() < 1e-12);
    assert!((k1.points[0].2 - 2f64.ln() / 14f64.ln()).abs() < 1e-12);
}

#[test]
fn oracle_box_dimension_and_normalisation() {
    let (ifs, _) = example_51();
    let t0 = empirical_lq(&ifs, 0.0, (1, 3), 20_000_000).unwrap();
    assert!((t0.value + 1.0).abs() < 0.05, "{}", t0.value);
    let t1 = empirical_lq(&ifs, 1.0, (1, 3), 20_000_000).unwrap();
    assert!(t1.value.abs() < 0.05, "{}", t1.value);
}
