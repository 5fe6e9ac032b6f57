mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use wikitopics::community::{ami, cpm_quality, element_centric, leiden_cpm, Partition};
use wikitopics::graph::GraphBuilder;

fn best_of(graph: &wikitopics::graph::WeightedGraph, gamma: f64, seeds: u64) -> Partition {
    (0..seeds)
        .map(|s| leiden_cpm(graph, gamma, s))
        .max_by(|a, b| a.quality.total_cmp(&b.quality))
        .unwrap()
}

#[test]
fn two_triangles_match_enumeration() {
    let mut b = GraphBuilder::new(false);
    for (u, v) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)] {
        b.labeled_edge(format!("n{u}"), format!("n{v}"), 1.0).unwrap();
    }
    let g = b.build();
    let best = best_of(&g, 0.5, 10);
    assert!((best.quality - exhaustive_cpm_optimum(&g, 0.5)).abs() < 1e-9);
    assert!((best.quality - 3.0).abs() < 1e-12);
}

#[test]
fn complete_graph_tie_reaches_optimum() {
    let mut b = GraphBuilder::new(false);
    for u in 0..4 {
        for v in u + 1..4 {
            b.labeled_edge(format!("n{u}"), format!("n{v}"), 1.0).unwrap();
        }
    }
    let g = b.build();
    let p = leiden_cpm(&g, 1.0, 3);
    assert!((p.quality - exhaustive_cpm_optimum(&g, 1.0)).abs() < 1e-9);
}

#[test]
fn random_small_graphs_reach_exhaustive_optimum() {
    let mut r = rng(7);
    for case in 0..60 {
        let n = r.random_range(2..=8);
        let g = random_graph(&mut r, n, 0.5, case % 3 == 0);
        let gamma = r.random_range(0.05..1.5);
        let best = best_of(&g, gamma, 10);
        let opt = exhaustive_cpm_optimum(&g, gamma);
        assert!(
            (best.quality - opt).abs() <= 1e-9,
            "case {case}: leiden {} vs optimum {opt}",
            best.quality
        );
    }
}

#[test]
fn quality_matches_definition_and_bounds() {
    let mut r = rng(11);
    for _ in 0..30 {
        let n = r.random_range(1..=12);
        let g = random_graph(&mut r, n, 0.4, true);
        let gamma = r.random_range(0.0..1.0);
        let p = leiden_cpm(&g, gamma, 5);
        assert!((p.quality - cpm_by_definition(&g, p.membership(), gamma)).abs() < 1e-9);
        assert!((p.quality - cpm_quality(&g, &p, gamma)).abs() < 1e-9);
        let one = cpm_quality(&g, &Partition::single_community(n), gamma);
        assert!(p.quality >= 0.0_f64.max(one) - 1e-9);
        let m = p.membership();
        let k = p.community_count();
        assert!(m.iter().all(|&c| c < k));
    }
}

#[test]
fn ami_matches_permutation_average() {
    let mut r = rng(3);
    for _ in 0..60 {
        let n = r.random_range(2..=7);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let pa = Partition::from_membership(&a);
        let pb = Partition::from_membership(&b);
        if pa == pb {
            continue;
        }
        let oracle = ami_brute_force(&a, &b);
        if !oracle.is_finite() {
            continue;
        }
        let got = ami(&pa, &pb).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{a:?} {b:?}: {got} vs {oracle}");
    }
}

#[test]
fn element_centric_matches_dense_affinities() {
    let mut r = rng(5);
    for _ in 0..60 {
        let n = r.random_range(1..=9);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
        let alpha = r.random_range(0.05..0.95);
        let got = element_centric(&Partition::from_membership(&a), &Partition::from_membership(&b), alpha).unwrap();
        let oracle = element_centric_dense(&a, &b, alpha);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }
}

proptest! {
    #[test]
    fn metrics_symmetric_and_label_invariant(
        a in prop::collection::vec(0usize..4, 1..20),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let b: Vec<usize> = a.iter().map(|_| r.random_range(0..4)).collect();
        let relabel: Vec<usize> = b.iter().map(|x| 10 - x).collect();
        let (pa, pb, pr) = (
            Partition::from_membership(&a),
            Partition::from_membership(&b),
            Partition::from_membership(&relabel),
        );
        let x = ami(&pa, &pb).unwrap();
        prop_assert!((x - ami(&pb, &pa).unwrap()).abs() < 1e-12);
        prop_assert!((x - ami(&pa, &pr).unwrap()).abs() < 1e-12);
        let e = element_centric(&pa, &pb, 0.9).unwrap();
        prop_assert!((e - element_centric(&pb, &pa, 0.9).unwrap()).abs() < 1e-12);
        prop_assert!((e - element_centric(&pa, &pr, 0.9).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
        prop_assert_eq!(ami(&pa, &pa).unwrap(), 1.0);
    }

    #[test]
    fn leiden_deterministic(seed in 0u64..1000, gseed in any::<u64>()) {
        let mut r = rng(gseed);
        let g = random_graph(&mut r, 10, 0.3, true);
        prop_assert_eq!(leiden_cpm(&g, 0.3, seed), leiden_cpm(&g, 0.3, seed));
    }
}
