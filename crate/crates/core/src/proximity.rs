//! Co-occurrence proximity graphs.
//!
//! For two entities `a` and `b` on the same side of a binary relation, the
//! proximity is the number of counterparts they share divided by the number of
//! counterparts either one has (the min/max fuzzy ratio, which on binary data
//! is intersection over union). Pairs are found through the inverted index, so
//! cost scales with co-occurrence counts rather than `n²`.

use crate::graph::{ProximityGraph, Row};
use crate::par;
use crate::relation::{BinaryRelation, IdIndex};

/// Item–item graph (IUP): items are close when the same users relate to them.
pub fn item_proximity(relation: &BinaryRelation) -> ProximityGraph {
    co_occurrence(relation.items().clone(), relation.cols(), relation.rows())
}

/// User–user graph (UIP): users are close when they relate to the same items.
pub fn user_proximity(relation: &BinaryRelation) -> ProximityGraph {
    co_occurrence(relation.users().clone(), relation.rows(), relation.cols())
}

/// `profiles[a]` lists the counterparts of entity `a`; `inverted[c]` lists the
/// entities related to counterpart `c`.
fn co_occurrence(labels: IdIndex, profiles: &[Vec<u32>], inverted: &[Vec<u32>]) -> ProximityGraph {
    let n = profiles.len();
    let rows: Vec<Row> = par::map_indices(
        n,
        || (vec![0u32; n], Vec::<u32>::new()),
        |(counts, touched), a| {
            for &c in &profiles[a] {
                for &b in &inverted[c as usize] {
                    if counts[b as usize] == 0 {
                        touched.push(b);
                    }
                    counts[b as usize] += 1;
                }
            }
            touched.sort_unstable();
            let deg_a = profiles[a].len() as u32;
            let row = touched
                .iter()
                .map(|&b| {
                    let shared = counts[b as usize];
                    let union = deg_a + profiles[b as usize].len() as u32 - shared;
                    counts[b as usize] = 0;
                    (b, shared as f64 / union as f64)
                })
                .collect();
            touched.clear();
            row
        },
    );
    ProximityGraph::from_rows(labels, rows)
}
