//! Independent reference implementations used by the integration tests and
//! the acceptance harness. Nothing here calls into the code under test except
//! for constructing inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use semirec_core::relation::IdIndex;
use semirec_core::{BinaryRelation, DistanceGraph, ProximityGraph};

/// Exact co-occurrence proximity between items: |users(a) ∩ users(b)| / |users(a) ∪ users(b)|.
/// `None` when neither item has users.
pub fn jaccard_oracle(pairs: &[(u64, u64)], a: u64, b: u64) -> Option<Ratio<u64>> {
    let users_of = |item: u64| -> BTreeSet<u64> {
        pairs.iter().filter(|p| p.1 == item).map(|p| p.0).collect()
    };
    let (ua, ub) = (users_of(a), users_of(b));
    let union = ua.union(&ub).count() as u64;
    if union == 0 {
        return None;
    }
    Some(Ratio::new(ua.intersection(&ub).count() as u64, union))
}

pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// All-pairs shortest paths by Floyd–Warshall on a dense matrix.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        if a != b && w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Relative-or-absolute closeness, treating equal infinities as equal.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Undirected weighted edge lists over `n` vertices.
pub fn edges_strategy(
    max_n: usize,
    weights: std::ops::Range<f64>,
) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2..=max_n).prop_flat_map(move |n| {
        let m = 3 * n;
        (
            Just(n),
            prop::collection::vec((0..n, 0..n, weights.clone()), 0..=m).prop_map(dedup_edges),
        )
    })
}

/// Drops self-loops and keeps one weight per unordered pair.
pub fn dedup_edges(edges: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    let mut seen = BTreeSet::new();
    edges
        .into_iter()
        .filter(|&(a, b, _)| a != b && seen.insert((a.min(b), a.max(b))))
        .collect()
}

pub fn distance_graph(n: usize, edges: &[(usize, usize, f64)]) -> DistanceGraph {
    let active = (0..n).map(|i| (i, i, 0.0));
    DistanceGraph::from_edges(
        IdIndex::identity(n),
        edges.iter().copied().filter(|e| e.0 != e.1).chain(active),
    )
    .unwrap()
}

pub fn proximity_graph(n: usize, edges: &[(usize, usize, f64)]) -> ProximityGraph {
    ProximityGraph::from_edges_reflexive(
        IdIndex::identity(n),
        edges.iter().copied().filter(|e| e.0 != e.1),
    )
    .unwrap()
}

/// Random user–item pairs with ids in `1..=max_users` × `1..=max_items`.
pub fn relation_pairs(max_users: u64, max_items: u64) -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec(
        (1..=max_users, 1..=max_items),
        1..=(max_users * max_items) as usize / 2,
    )
}

pub fn relation(pairs: &[(u64, u64)]) -> BinaryRelation {
    BinaryRelation::from_pairs(pairs).unwrap()
}

/// The 3-user, 4-item relation used by several hand-checked fixtures.
pub fn toy_pairs() -> Vec<(u64, u64)> {
    vec![(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 3), (3, 4)]
}

/// Lower bound on a Pareto tail; samples are `x_min · U^(-1/(alpha-1))`.
pub fn pareto_samples(n: usize, x_min: f64, alpha: f64, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            x_min * u.powf(-1.0 / (alpha - 1.0))
        })
        .collect()
}
