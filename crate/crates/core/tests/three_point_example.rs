//! The R = 4 multipoint measure: one interval and two isolated points.

mod common;

use fintype::classes::{classify, ClassGraph};
use fintype::constructions::{
    select_probabilities, verify_requirements, ConstructionKind, ConstructionSpec, Requirement,
    Targets,
};
use fintype::dimensions::{
    attainable_set, cycle_dims, outer_interval, periodic_dim, DimKind, DimParams, Disjointness,
    Interval,
};
use fintype::ifs::IfsSpec;
use fintype::net::{children, closure, root, symbolic, CharVector, NetError, Omega};
use fintype::oracle::{empirical_local_dim, refine};
use fintype::rational::{frac, Rat};
use fintype::spectra::{assemble_f, SpectrumModel};
use fintype::transitions::{product, spectral_radius, DEFAULT_TOL};

use common::r4_system;

fn setup() -> (fintype::ifs::WeightedIfs, ConstructionSpec, Omega, ClassGraph) {
    let (ifs, spec) = r4_system();
    let omega = closure(&ifs, 10_000).unwrap();
    let graph = ClassGraph::build(&omega).unwrap();
    (ifs, spec, omega, graph)
}

fn quarter(v: &[i64]) -> CharVector {
    CharVector::new(frac(1, 4), v.iter().map(|&n| frac(n, 4)).collect())
}

#[test]
fn children_of_root_and_essential_vector() {
    let (ifs, _, omega, _) = setup();
    let kids = children(&ifs, &root().reduced).unwrap();
    assert_eq!(kids.len(), 16);
    let ids: Vec<usize> = kids
        .iter()
        .map(|c| omega.id_of(&c.vector).unwrap() + 1)
        .collect();
    assert_eq!(ids, [2, 3, 4, 5, 5, 6, 7, 8, 9, 10, 4, 5, 5, 6, 11, 12]);

    let v5 = quarter(&[0, 1, 2, 3]);
    let kids = children(&ifs, &v5).unwrap();
    assert_eq!(kids.len(), 4);
    assert!(kids.iter().all(|c| c.vector == v5));
}

#[test]
fn cap_below_twelve_is_exceeded() {
    let (ifs, _) = r4_system();
    assert_eq!(closure(&ifs, 3).unwrap_err(), NetError::CapExceeded(3));
}

#[test]
fn symbolic_representations_of_special_points() {
    let (_, _, omega, _) = setup();
    let at = |x: Rat| -> Vec<Vec<usize>> {
        symbolic(&omega, &x, 6)
            .unwrap()
            .iter()
            .map(|p| p.vectors().iter().map(|v| v + 1).collect())
            .collect()
    };
    assert_eq!(at(frac(0, 1)), [vec![1, 2, 2, 2, 2, 2, 2]]);
    assert_eq!(
        at(frac(1, 2)),
        [vec![1, 8, 8, 8, 8, 8, 8], vec![1, 9, 9, 9, 9, 9, 9]]
    );
    assert_eq!(at(frac(1, 1)), [vec![1, 12, 12, 12, 12, 12, 12]]);
}

#[test]
fn loop_classes_and_membership() {
    let (_, _, omega, graph) = setup();
    let loops: Vec<Vec<usize>> = graph
        .non_essential_loops()
        .filter(|c| c.maximal)
        .map(|c| c.members.iter().map(|v| v + 1).collect())
        .collect();
    assert_eq!(loops, [vec![2], vec![8], vec![9], vec![12]]);
    assert_eq!(graph.essential().members, [4]);

    let class_of = |x: Rat| -> Vec<Vec<usize>> {
        classify(&omega, &graph, &x, 40)
            .unwrap()
            .iter()
            .map(|m| graph.component(m.component).members.iter().map(|v| v + 1).collect())
            .collect()
    };
    assert_eq!(class_of(frac(1, 2)), [vec![8], vec![9]]);
    assert_eq!(class_of(frac(1, 1)), [vec![12]]);
    let third = classify(&omega, &graph, &frac(1, 3), 40).unwrap();
    assert!(third.iter().all(|m| m.essential));
}

#[test]
fn loop_matrix_powers_and_radius() {
    let (_, _, omega, _) = setup();
    let t8 = omega.children(7).iter().find(|e| e.child == 7).unwrap().matrix.clone();
    let sq = product([&t8, &t8]).unwrap();
    let want = fintype::transitions::RatMatrix::from_rows(vec![
        vec![frac(4, 164 * 164), frac(60, 164 * 164)],
        vec![frac(0, 1), frac(1, 164 * 164)],
    ]);
    assert_eq!(sq, want);
    assert_eq!(spectral_radius(&t8, DEFAULT_TOL).unwrap().exact, Some(frac(2, 164)));
}

#[test]
fn doubled_cycle_has_the_same_dimension() {
    let (_, _, omega, _) = setup();
    let once = periodic_dim(&omega, &[(7, 3)], DEFAULT_TOL).unwrap();
    let twice = periodic_dim(&omega, &[(7, 3), (7, 3)], DEFAULT_TOL).unwrap();
    assert!((once.value - twice.value).abs() < 1e-12);
    assert_eq!(once.expr.as_deref(), Some("log(1/82)/log(1/4)"));
}

#[test]
fn essential_brackets_nest() {
    let (ifs, _, omega, graph) = setup();
    let params = DimParams::for_ifs(&ifs);
    let published = Interval::new(0.983436074, 1.017811955 + 1e-9);
    let i1 = cycle_dims(&omega, graph.essential(), 1, &params).unwrap().interval;
    assert!(i1.is_subset_of(&published), "{i1}");
    let o: Vec<Interval> = [2, 4, 8]
        .iter()
        .map(|&l| outer_interval(&omega, graph.essential(), l, &params).unwrap())
        .collect();
    for w in o.windows(2) {
        assert!(w[1].lo >= w[0].lo - 1e-12 && w[1].hi <= w[0].hi + 1e-12, "{} {}", w[0], w[1]);
    }
    assert!(o[2].contains(i1.lo) && o[2].contains(i1.hi));
}

#[test]
fn attainable_set_is_an_interval_and_two_points() {
    let (ifs, _, omega, graph) = setup();
    let dims = attainable_set(&omega, &graph, &DimParams::for_ifs(&ifs)).unwrap();
    assert_eq!(dims.disjointness, Disjointness::Disjoint);
    assert_eq!(dims.groups.len(), 3);
    let points: Vec<f64> = dims
        .components
        .iter()
        .filter(|c| !c.essential)
        .map(|c| {
            assert_eq!(c.kind, DimKind::ExactPoint);
            c.inner.lo
        })
        .collect();
    let a = (164f64).ln() / 4f64.ln();
    let b = (82f64).ln() / 4f64.ln();
    for (got, want) in points.iter().zip([a, b, b, a]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn widening_the_free_family_breaks_separation() {
    let (_, spec) = r4_system();
    let mut free = spec.free.clone();
    free.push(5);
    free.sort_unstable();
    let p_star = frac(160, 164 * 9);
    let mut indices = vec![0u64, 6, 12];
    indices.extend(&free);
    indices.sort_unstable();
    let probs: Vec<Rat> = indices
        .iter()
        .map(|j| match j {
            0 | 12 => frac(1, 164),
            6 => frac(2, 164),
            _ => p_star.clone(),
        })
        .collect();
    let ifs = IfsSpec::from_indices(4, &indices, probs).validate().unwrap();
    let wide = ConstructionSpec {
        free,
        p_star,
        ..spec
    };
    let report = verify_requirements(&ifs, &wide, 10_000).unwrap();
    assert!(report.get(Requirement::Separation).unwrap().is_err(), "{report}");
    assert!(report.get(Requirement::FullSupport).unwrap().is_ok());
}

#[test]
fn automatic_selection_separates_the_skeleton() {
    let kind = ConstructionKind::Multipoint;
    let sel = select_probabilities(kind, 4, &Targets::distinct(kind, 4), None, 10_000).unwrap();
    assert!(sel.separated);
    assert_eq!(sel.disjointness, Disjointness::Disjoint);
    assert_eq!(sel.groups, 3);

    let equal = Targets(vec![vec![1], vec![1]]);
    let sel = select_probabilities(kind, 6, &equal, None, 10_000).unwrap();
    assert!(!sel.separated);
    assert!(sel.groups < equal.0.len() + 2);
}

#[test]
fn equal_block_probabilities_merge_the_points() {
    let e = frac(1, 200);
    let (ifs, _) = fintype::constructions::multipoint(4, &[e.clone(), e.clone(), e], None).unwrap();
    let omega = closure(&ifs, 10_000).unwrap();
    let graph = ClassGraph::build(&omega).unwrap();
    let dims = attainable_set(&omega, &graph, &DimParams::for_ifs(&ifs)).unwrap();
    assert_eq!(dims.groups.len(), 2);
}

#[test]
fn multifractal_curve_has_two_isolated_points() {
    let (ifs, spec, omega, graph) = setup();
    let dims = attainable_set(&omega, &graph, &DimParams::for_ifs(&ifs)).unwrap();
    let model = SpectrumModel::from_construction(&spec, &dims);
    let qs: Vec<f64> = (-8..=8).map(|i| i as f64 / 2.0).collect();
    let f = assemble_f(&model, &qs);
    assert!(f.components.iter().all(|c| c.is_point() && c.max_f() == 0.0));
    assert!(f.essential.is_some());
    assert!(!f.concave);
}

#[test]
fn oracle_level_one_and_essential_point() {
    let (ifs, _) = r4_system();
    let m = refine(&ifs, 1, 1000).unwrap();
    assert_eq!(m.atoms.len(), 11);
    for ((x, w), (d, p)) in m.atoms.iter().zip(ifs.digits().iter().zip(ifs.probs())) {
        assert_eq!((x, w), (d, p));
    }
    assert_eq!(m.total(), frac(1, 1));

    let e = empirical_local_dim(&ifs, &frac(0, 1), (6, 12)).unwrap();
    assert!((e.value - 3.68).abs() < 0.05, "{}", e.value);
    let e = empirical_local_dim(&ifs, &frac(1, 3), (6, 12)).unwrap();
    assert!(Interval::new(0.983436074, 1.017811955).contains(e.value), "{}", e.value);
}
