mod common;

use common::*;
use proptest::prelude::*;
use semirec_core::algebra::DualAlgebra;
use semirec_core::closure::{distance_closure, to_distance, transitive_closure};
use semirec_core::powerlaw::fit_tail;
use semirec_core::proximity::item_proximity;
use semirec_core::recommend::{
    neighbourhood, user_based_scores, Algorithm, Recommender, RecommenderConfig, SemiMetricProfile,
};
use semirec_core::relation::IdIndex;
use semirec_core::semimetric::{
    enhance, enhance_with_stats, semimetric_stats, Qualification, ThresholdPolicy,
};
use semirec_core::{BinaryRelation, DistanceGraph, Metric, ProximityGraph};

#[test]
fn triangle_fixture_ratios() {
    let d = DistanceGraph::from_edges(
        IdIndex::new([1, 2, 3]),
        [(0, 1, 2.0), (1, 2, 3.0), (0, 2, 10.0)],
    )
    .unwrap();
    let stats = semimetric_stats(&d, &distance_closure(&d, &Metric).unwrap()).unwrap();
    assert_eq!(stats.len(), 1);
    assert_eq!((stats[0].i, stats[0].j), (0, 2));
    assert_eq!(stats[0].shortest, 5.0);
    assert_eq!(stats[0].s, 2.0);
    assert_eq!(stats[0].b_ij, 1.2);
}

#[test]
fn chain_fixture_ratios() {
    let g = item_proximity(&relation(&toy_pairs()));
    let d = to_distance(&g, &Metric);
    let stats = semimetric_stats(&d, &distance_closure(&d, &Metric).unwrap()).unwrap();
    let chain = stats
        .iter()
        .find(|s| (s.i, s.j) == (0, 3))
        .expect("i1–i4 is semi-metric");
    assert_eq!(chain.direct, f64::INFINITY);
    assert_eq!(chain.shortest, 3.0);
    assert_eq!(chain.s, f64::INFINITY);
    // d̄_i1 = mean{d(i1,i2)=0, d(i1,i3)=2} = 1
    assert_eq!(chain.b_ij, 1.0 / 3.0);
}

#[test]
fn triangle_enhancement_raises_item_score() {
    let labels = IdIndex::new([1, 2, 3]);
    let p = |d: f64| Metric.phi_inv(d);
    let g = ProximityGraph::from_edges_reflexive(
        labels.clone(),
        [(0, 1, p(2.0)), (1, 2, p(3.0)), (0, 2, p(10.0))],
    )
    .unwrap();
    let rel = BinaryRelation::with_index(IdIndex::new([7]), labels, &[(7, 1)]).unwrap();
    let before = semirec_core::recommend::item_based_scores(&g, &rel, 7).unwrap();
    assert_eq!(before.scores[2], 1.0 / 11.0);
    let after =
        semirec_core::recommend::item_based_scores(&enhance(&g, &Metric, 1.1).unwrap(), &rel, 7)
            .unwrap();
    assert_eq!(after.scores[2], 1.0 / 6.0);
}

/// Five users: A's second-nearest neighbour is D until the A–C shortcut
/// through B is inserted.
#[test]
fn inserted_edge_changes_kth_neighbour() {
    let ids = IdIndex::new([1, 2, 3, 4, 5]);
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    let uip = ProximityGraph::from_edges_reflexive(
        ids.clone(),
        [(a, b, 0.9), (b, c, 0.9), (a, d, 0.1), (d, e, 0.5)],
    )
    .unwrap();
    let rel = BinaryRelation::with_index(
        ids,
        IdIndex::new([10, 11, 12, 13, 14]),
        &[(1, 10), (2, 11), (3, 12), (4, 13), (5, 14)],
    )
    .unwrap();
    assert_eq!(neighbourhood(&uip, a, 2), vec![b as u32, d as u32]);
    let before = user_based_scores(&uip, &rel, 1, 2).unwrap();
    assert_eq!((before.scores[2], before.scores[3]), (0.0, 1.0));

    let enhanced = enhance(&uip, &Metric, 1.0).unwrap();
    let expected = 0.81 / (0.9 + 0.9 - 0.81);
    assert!((enhanced.weight(a, c) - expected).abs() < 1e-12);
    assert_eq!(neighbourhood(&enhanced, a, 2), vec![b as u32, c as u32]);
    let after = user_based_scores(&enhanced, &rel, 1, 2).unwrap();
    assert_eq!((after.scores[2], after.scores[3]), (1.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn enhancement_is_bounded_and_monotone(
        (n, edges) in edges_strategy(25, 0.01..1.0),
        t1 in 0.0f64..4.0,
        dt in 0.0f64..4.0,
    ) {
        let g = proximity_graph(n, &edges);
        let direct = to_distance(&g, &Metric);
        let stats = semimetric_stats(&direct, &distance_closure(&direct, &Metric).unwrap()).unwrap();
        let closure = transitive_closure(&g, &Metric).unwrap();
        let low = enhance_with_stats(&g, &stats, &Metric, t1, Qualification::Either).unwrap();
        let high = enhance_with_stats(&g, &stats, &Metric, t1 + dt, Qualification::Either).unwrap();
        let both = enhance_with_stats(&g, &stats, &Metric, t1, Qualification::Both).unwrap();
        prop_assert!(high.inserted <= low.inserted);
        prop_assert!(both.inserted <= low.inserted);
        for i in 0..n {
            for j in 0..n {
                let (p, lo, hi) = (g.weight(i, j), low.graph.weight(i, j), high.graph.weight(i, j));
                prop_assert!(p <= hi && hi <= lo);
                prop_assert!(lo <= closure.weight(i, j) * (1.0 + 1e-9));
                prop_assert_eq!(lo, low.graph.weight(j, i));
            }
        }
        low.graph.validate().unwrap();
    }

    #[test]
    fn semimetric_variants_reduce_to_base_at_infinite_threshold(pairs in relation_pairs(15, 20), k in 1usize..6) {
        let rel = relation(&pairs);
        let users: Vec<usize> = (0..rel.n_users()).collect();
        for (sm, base) in [(Algorithm::ItemSm, Algorithm::ItemProx), (Algorithm::UserSm, Algorithm::UserProx)] {
            let cfg = |algorithm| RecommenderConfig {
                algorithm,
                k_neighbors: k,
                threshold_policy: ThresholdPolicy::Explicit(f64::INFINITY),
                ..RecommenderConfig::default()
            };
            let a = Recommender::new(&rel, cfg(sm)).unwrap();
            let b = Recommender::new(&rel, cfg(base)).unwrap();
            prop_assert_eq!(a.enhancement.as_ref().unwrap().inserted_edges, 0);
            for (x, y) in a.recommend_many(&users).into_iter().zip(b.recommend_many(&users)) {
                let (x, y) = (x.unwrap(), y.unwrap());
                prop_assert_eq!(&x.ranking, &y.ranking);
                let bits = |v: &[f64]| v.iter().map(|s| s.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(&x.scores), bits(&y.scores));
            }
        }
    }

    #[test]
    fn scores_in_range_and_profiles_excluded(pairs in relation_pairs(15, 20), k in 1usize..6) {
        let rel = relation(&pairs);
        let users: Vec<usize> = (0..rel.n_users()).collect();
        for algorithm in Algorithm::ALL {
            let rec = Recommender::new(&rel, RecommenderConfig {
                algorithm,
                k_neighbors: k,
                threshold_policy: ThresholdPolicy::Percentile(0.5),
                ..RecommenderConfig::default()
            }).unwrap();
            let upper = if algorithm.graph() == semirec_core::recommend::GraphKind::Item { 1.0 } else { k as f64 };
            for (u, r) in users.iter().zip(rec.recommend_many(&users)) {
                let r = r.unwrap();
                prop_assert!(r.scores.iter().all(|&s| (0.0..=upper).contains(&s)));
                for &i in &r.ranking {
                    prop_assert!(!rel.contains(*u, i as usize));
                }
                prop_assert_eq!(r.ranking.len() + rel.user_items(*u).len(), rel.n_items());
            }
        }
    }

    #[test]
    fn ranking_invariant_under_scaling(scores in prop::collection::vec(0u32..10, 1..40), c in 1u32..50) {
        let f: Vec<f64> = scores.iter().map(|&s| s as f64).collect();
        let g: Vec<f64> = scores.iter().map(|&s| (s * c) as f64).collect();
        let a = semirec_core::recommend::ScoredRecommendations::from_scores(1, f, vec![], true);
        let b = semirec_core::recommend::ScoredRecommendations::from_scores(1, g, vec![], true);
        prop_assert_eq!(a.ranking, b.ranking);
    }
}

#[test]
fn power_law_cutoff_recovered_from_synthetic_tail() {
    use rand::{Rng, SeedableRng};
    // uniform body below 2, Pareto(alpha = 2.5) tail above
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut samples: Vec<f64> = (0..4000).map(|_| rng.random_range(0.2..2.0)).collect();
    samples.extend(pareto_samples(4000, 2.0, 2.5, 11));
    let fit = fit_tail(&samples).expect("fit");
    assert!((1.0..=3.0).contains(&fit.x_min), "x_min {}", fit.x_min);
    assert!((fit.alpha - 2.5).abs() < 0.3, "alpha {}", fit.alpha);
}

#[test]
fn profile_of_toy_graph_is_stable() {
    let g = item_proximity(&relation(&toy_pairs()));
    let a = SemiMetricProfile::compute(&g, &Metric).unwrap();
    let b = SemiMetricProfile::compute(&g, &Metric).unwrap();
    assert_eq!(a.stats, b.stats);
}
