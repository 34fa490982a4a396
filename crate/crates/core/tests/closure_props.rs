#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use proptest::prelude::*;
use semirec_core::algebra::{hamacher_product, DualAlgebra};
use semirec_core::closure::{
    distance_closure, distance_closure_fixed_point, metric_closure, to_distance,
    transitive_closure, MetricKernel,
};
use semirec_core::{MaxMin, Metric};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_closure_matches_floyd_warshall((n, edges) in edges_strategy(50, 0.01..10.0)) {
        let g = distance_graph(n, &edges);
        let oracle = floyd_warshall(n, &edges);
        for kernel in [MetricKernel::Auto, MetricKernel::Sparse, MetricKernel::Dense] {
            let c = metric_closure(&g, kernel);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(close(c.distance(i, j), oracle[i][j], 1e-9),
                        "{kernel:?} ({i},{j}): {} vs {}", c.distance(i, j), oracle[i][j]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generic_fixed_point_agrees_with_dijkstra((n, edges) in edges_strategy(20, 0.01..10.0)) {
        let g = distance_graph(n, &edges);
        let fp = distance_closure_fixed_point(&g, &Metric).unwrap();
        let dj = metric_closure(&g, MetricKernel::Sparse);
        prop_assert!(fp.to_dense().max_abs_diff(&dj.to_dense()) <= 1e-9);
    }

    #[test]
    fn commutation_square((n, edges) in edges_strategy(30, 0.01..1.0)) {
        let p = proximity_graph(n, &edges);
        let via_proximity = to_distance(&transitive_closure(&p, &Metric).unwrap(), &Metric);
        let via_distance = distance_closure(&to_distance(&p, &Metric), &Metric).unwrap();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (via_proximity.distance(i, j), via_distance.distance(i, j));
                prop_assert!(close(a, b, 1e-9), "({i},{j}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn closure_is_idempotent_and_improving((n, edges) in edges_strategy(25, 0.01..1.0)) {
        let algebras: [&dyn DualAlgebra; 2] = [&Metric, &MaxMin];
        for alg in algebras {
            let p = proximity_graph(n, &edges);
            let once = transitive_closure(&p, alg).unwrap();
            let twice = transitive_closure(&once, alg).unwrap();
            prop_assert!(once.to_dense().max_abs_diff(&twice.to_dense()) <= 1e-12);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(once.weight(i, j) >= p.weight(i, j));
                }
            }

            let d = to_distance(&p, alg);
            let dc = distance_closure(&d, alg).unwrap();
            let dcc = distance_closure(&dc, alg).unwrap();
            prop_assert!(dc.to_dense().max_abs_diff(&dcc.to_dense()) <= 1e-9);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(dc.distance(i, j) <= d.distance(i, j));
                }
            }
        }
    }

    #[test]
    fn closed_graphs_satisfy_their_triangle_inequality((n, edges) in edges_strategy(30, 0.01..1.0)) {
        let p = proximity_graph(n, &edges);
        let dc = metric_closure(&to_distance(&p, &Metric), MetricKernel::Auto);
        let mm = transitive_closure(&p, &MaxMin).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = dc.distance(i, k) + dc.distance(k, j);
                    prop_assert!(dc.distance(i, j) <= via * (1.0 + 1e-12));
                    prop_assert!(mm.weight(i, j) >= mm.weight(i, k).min(mm.weight(k, j)));
                }
            }
        }
    }
}

#[test]
fn hamacher_identity_on_grid() {
    let mut worst: f64 = 0.0;
    for x in 1..=100 {
        for y in 1..=100 {
            let (a, b) = (x as f64 / 100.0, y as f64 / 100.0);
            let lhs = a * b / (a + b - a * b);
            assert_eq!(hamacher_product(a, b), Metric.conjunction(a, b));
            let rhs = Metric.phi_inv(Metric.phi(a) + Metric.phi(b));
            worst = worst
                .max((lhs - rhs).abs())
                .max((hamacher_product(a, b) - lhs).abs());
        }
    }
    assert!(worst <= 1e-12, "worst deviation {worst}");
}

#[test]
fn chain_closure_from_toy_relation() {
    let g = semirec_core::proximity::item_proximity(&relation(&toy_pairs()));
    let d = to_distance(&g, &Metric);
    assert_eq!(d.distance(0, 2), 2.0);
    assert_eq!(d.distance(2, 3), 1.0);
    assert_eq!(d.distance(0, 3), f64::INFINITY);
    assert_eq!(distance_closure(&d, &Metric).unwrap().distance(0, 3), 3.0);
}
