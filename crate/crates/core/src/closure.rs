//! Transitive closure of proximity graphs, distance closure of distance graphs,
//! and the conversions between the two.
//!
//! The generic closures iterate self-composition to a fixed point. For the
//! metric algebra the distance closure is all-pairs shortest paths, computed by
//! one single-source search per vertex: a binary-heap Dijkstra on sparse
//! graphs and an `O(n²)` array Dijkstra on dense ones.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::algebra::DualAlgebra;
use crate::error::{Error, Result};
use crate::graph::{DenseMatrix, DistanceGraph, ProximityGraph, Row};
use crate::par;

/// Absolute tolerance for fixed-point detection.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;

/// Maps every edge through `phi`. Absent proximity edges stay absent (infinite).
pub fn to_distance(graph: &ProximityGraph, algebra: &dyn DualAlgebra) -> DistanceGraph {
    let rows = graph
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .filter(|e| e.0 as usize != i)
                .map(|&(j, p)| (j, algebra.phi(p)))
                .filter(|e| e.1.is_finite())
                .collect()
        })
        .collect();
    let active = (0..graph.size()).map(|i| graph.has_self_loop(i)).collect();
    DistanceGraph::from_parts(graph.labels().clone(), rows, active)
}

/// Inverse of [`to_distance`].
pub fn to_proximity(graph: &DistanceGraph, algebra: &dyn DualAlgebra) -> ProximityGraph {
    let rows = graph
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out: Row = row
                .iter()
                .map(|&(j, d)| (j, algebra.phi_inv(d)))
                .filter(|e| e.1 > 0.0)
                .collect();
            if graph.is_active(i) {
                let at = out.partition_point(|e| (e.0 as usize) < i);
                out.insert(at, (i as u32, 1.0));
            }
            out
        })
        .collect();
    ProximityGraph::from_rows(graph.labels().clone(), rows)
}

fn fixed_point(
    mut current: DenseMatrix,
    compose: impl Fn(&DenseMatrix) -> DenseMatrix,
) -> Result<DenseMatrix> {
    let budget = current.size().max(2);
    for _ in 0..budget {
        let next = compose(&current);
        let delta = next.max_abs_diff(&current);
        current = next;
        if delta <= FIXED_POINT_TOLERANCE {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence { iterations: budget })
}

/// One composition step `p'_ij = ∨(p_ij, ∨_k ∧(p_ik, p_kj))`.
fn compose_proximity(m: &DenseMatrix, algebra: &dyn DualAlgebra) -> DenseMatrix {
    let n = m.size();
    let rows = par::map_indices(
        n,
        || (),
        |_, i| {
            let mut acc = m.row(i).to_vec();
            for (k, &a) in m.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(m.row(k)) {
                    if b != 0.0 {
                        *slot = algebra.disjunction(*slot, algebra.conjunction(a, b));
                    }
                }
            }
            acc
        },
    );
    assemble(n, rows)
}

/// One composition step `d'_ij = f(d_ij, f_k g(d_ik, d_kj))`.
fn compose_distance(m: &DenseMatrix, algebra: &dyn DualAlgebra) -> DenseMatrix {
    let n = m.size();
    let rows = par::map_indices(
        n,
        || (),
        |_, i| {
            let mut acc = m.row(i).to_vec();
            for (k, &a) in m.row(i).iter().enumerate() {
                if a == f64::INFINITY {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(m.row(k)) {
                    if b != f64::INFINITY {
                        *slot = algebra.td_conorm(*slot, algebra.td_norm(a, b));
                    }
                }
            }
            acc
        },
    );
    assemble(n, rows)
}

fn assemble(n: usize, rows: Vec<Vec<f64>>) -> DenseMatrix {
    let mut out = DenseMatrix::filled(n, 0.0);
    for (dst, src) in out.rows_mut().zip(rows) {
        dst.copy_from_slice(&src);
    }
    out
}

/// Fixed point of proximity self-composition under the algebra's (∨, ∧).
pub fn transitive_closure(
    graph: &ProximityGraph,
    algebra: &dyn DualAlgebra,
) -> Result<ProximityGraph> {
    let closed = fixed_point(graph.to_dense(), |m| compose_proximity(m, algebra))?;
    Ok(ProximityGraph::from_dense(graph.labels().clone(), &closed))
}

/// Distance closure under the algebra's (f, g). Metric algebras use the
/// shortest-path kernels; everything else iterates composition.
pub fn distance_closure(graph: &DistanceGraph, algebra: &dyn DualAlgebra) -> Result<DistanceGraph> {
    if algebra.is_metric() {
        Ok(metric_closure(graph, MetricKernel::Auto))
    } else {
        distance_closure_fixed_point(graph, algebra)
    }
}

/// Distance closure by repeated composition, for any algebra.
pub fn distance_closure_fixed_point(
    graph: &DistanceGraph,
    algebra: &dyn DualAlgebra,
) -> Result<DistanceGraph> {
    let closed = fixed_point(graph.to_dense(), |m| compose_distance(m, algebra))?;
    Ok(DistanceGraph::from_dense(
        graph.labels().clone(),
        &closed,
        graph.active().to_vec(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKernel {
    /// Dense when the average degree exceeds `n / 8`.
    Auto,
    /// Binary-heap Dijkstra over adjacency lists.
    Sparse,
    /// Array Dijkstra over a dense weight matrix.
    Dense,
}

/// All-pairs shortest paths (`f = min`, `g = +`).
pub fn metric_closure(graph: &DistanceGraph, kernel: MetricKernel) -> DistanceGraph {
    let n = graph.size();
    let dense = match kernel {
        MetricKernel::Auto => 2 * graph.edge_count() * 8 > n * n,
        MetricKernel::Sparse => false,
        MetricKernel::Dense => true,
    };
    let rows = if dense {
        let weights = graph.to_dense();
        par::map_indices(n, || DenseScratch::new(n), |s, src| s.run(&weights, src))
    } else {
        par::map_indices(n, || HeapScratch::new(n), |s, src| s.run(graph.rows(), src))
    };
    DistanceGraph::from_parts(graph.labels().clone(), rows, graph.active().to_vec())
}

#[derive(Debug, PartialEq)]
struct Queued {
    dist: f64,
    node: u32,
}

impl Eq for Queued {}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct HeapScratch {
    dist: Vec<f64>,
    reached: Vec<u32>,
    heap: BinaryHeap<Queued>,
}

impl HeapScratch {
    fn new(n: usize) -> Self {
        HeapScratch {
            dist: vec![f64::INFINITY; n],
            reached: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn run(&mut self, adj: &[Row], src: usize) -> Row {
        self.dist[src] = 0.0;
        self.reached.push(src as u32);
        self.heap.push(Queued {
            dist: 0.0,
            node: src as u32,
        });
        while let Some(Queued { dist, node }) = self.heap.pop() {
            if dist > self.dist[node as usize] {
                continue;
            }
            for &(next, w) in &adj[node as usize] {
                let cand = dist + w;
                let slot = &mut self.dist[next as usize];
                if cand < *slot {
                    if *slot == f64::INFINITY {
                        self.reached.push(next);
                    }
                    *slot = cand;
                    self.heap.push(Queued {
                        dist: cand,
                        node: next,
                    });
                }
            }
        }
        self.reached.sort_unstable();
        let row = self
            .reached
            .iter()
            .filter(|&&j| j as usize != src)
            .map(|&j| (j, self.dist[j as usize]))
            .collect();
        for &j in &self.reached {
            self.dist[j as usize] = f64::INFINITY;
        }
        self.reached.clear();
        row
    }
}

struct DenseScratch {
    tentative: Vec<f64>,
    settled: Vec<f64>,
    done: Vec<bool>,
}

impl DenseScratch {
    fn new(n: usize) -> Self {
        DenseScratch {
            tentative: vec![f64::INFINITY; n],
            settled: vec![f64::INFINITY; n],
            done: vec![false; n],
        }
    }

    fn run(&mut self, weights: &DenseMatrix, src: usize) -> Row {
        let n = weights.size();
        // `tentative` holds INFINITY for settled vertices so the argmin scan
        // needs no mask; `settled` holds final distances.
        self.tentative.fill(f64::INFINITY);
        self.settled.fill(f64::INFINITY);
        self.done.fill(false);
        self.tentative[src] = 0.0;
        for _ in 0..n {
            let (u, du) = argmin(&self.tentative);
            if du == f64::INFINITY {
                break;
            }
            self.settled[u] = du;
            self.done[u] = true;
            for ((t, &w), &d) in self
                .tentative
                .iter_mut()
                .zip(weights.row(u))
                .zip(&self.done)
            {
                let cand = du + w;
                *t = if d { f64::INFINITY } else { t.min(cand) };
            }
        }
        self.settled
            .iter()
            .enumerate()
            .filter(|&(j, d)| j != src && d.is_finite())
            .map(|(j, &d)| (j as u32, d))
            .collect()
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}
