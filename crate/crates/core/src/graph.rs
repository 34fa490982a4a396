//! Sparse symmetric weighted graphs: proximity (weights in `[0, 1]`, absent
//! means 0) and distance (weights in `[0, ∞]`, absent means ∞).

use crate::error::{Error, Result};
use crate::relation::IdIndex;

/// Row-major square matrix used by the dense kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn filled(n: usize, value: f64) -> Self {
        DenseMatrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn rows_mut(&mut self) -> std::slice::ChunksExactMut<'_, f64> {
        self.data.chunks_exact_mut(self.n.max(1))
    }

    /// Largest absolute entrywise difference; infinities that agree count as 0.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max)
    }
}

pub(crate) type Row = Vec<(u32, f64)>;

fn weight_in(row: &[(u32, f64)], j: usize) -> Option<f64> {
    row.binary_search_by_key(&(j as u32), |e| e.0)
        .ok()
        .map(|k| row[k].1)
}

fn symmetric_rows(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    valid: impl Fn(f64) -> bool,
) -> Result<Vec<Row>> {
    let mut rows: Vec<Row> = vec![Vec::new(); n];
    for (i, j, w) in edges {
        if i >= n || j >= n {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) outside a graph of size {n}"
            )));
        }
        if !valid(w) {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) has out-of-range weight {w}"
            )));
        }
        rows[i].push((j as u32, w));
        if i != j {
            rows[j].push((i as u32, w));
        }
    }
    for row in &mut rows {
        row.sort_by_key(|e| e.0);
        // last write wins for repeated edges
        let mut dedup: Row = Vec::with_capacity(row.len());
        for &(j, w) in row.iter() {
            match dedup.last_mut() {
                Some(last) if last.0 == j => last.1 = w,
                _ => dedup.push((j, w)),
            }
        }
        *row = dedup;
    }
    Ok(rows)
}

/// Reflexive, symmetric fuzzy graph. Absent entries have weight 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    labels: IdIndex,
    rows: Vec<Row>,
}

impl ProximityGraph {
    /// Builds a graph from undirected edges `(i, j, p)`; zero weights are dropped.
    pub fn from_edges(
        labels: IdIndex,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut rows = symmetric_rows(n, edges, |p| (0.0..=1.0).contains(&p))?;
        for row in &mut rows {
            row.retain(|e| e.1 > 0.0);
        }
        Ok(ProximityGraph { labels, rows })
    }

    /// Like [`from_edges`](Self::from_edges), also setting `p_ii = 1` on every
    /// vertex touched by an edge.
    pub fn from_edges_reflexive(
        labels: IdIndex,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut touched = vec![false; labels.len()];
        for &(i, j, _) in &edges {
            if let Some(t) = touched.get_mut(i) {
                *t = true;
            }
            if let Some(t) = touched.get_mut(j) {
                *t = true;
            }
        }
        let selfs = touched
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| (i, i, 1.0));
        Self::from_edges(labels, edges.iter().copied().chain(selfs))
    }

    pub(crate) fn from_rows(labels: IdIndex, rows: Vec<Row>) -> Self {
        debug_assert_eq!(labels.len(), rows.len());
        ProximityGraph { labels, rows }
    }

    /// Entries `> 0` become edges.
    pub fn from_dense(labels: IdIndex, m: &DenseMatrix) -> Self {
        let rows = (0..m.size())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(j, &w)| (j as u32, w))
                    .collect()
            })
            .collect();
        ProximityGraph { labels, rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &IdIndex {
        &self.labels
    }

    /// Neighbours of `i` (including `i` itself when reflexive), sorted by index.
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        weight_in(&self.rows[i], j).unwrap_or(0.0)
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        weight_in(&self.rows[i], i).is_some()
    }

    /// Undirected off-diagonal edges `(i, j, p)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |e| (e.0 as usize) > i)
                .map(move |&(j, w)| (i, j as usize, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::filled(self.size(), 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m.set(i, j as usize, w);
            }
        }
        m
    }

    /// Checks range, symmetry and reflexivity of touched vertices.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                let j = j as usize;
                if !(w > 0.0 && w <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "p({i},{j}) = {w} outside (0, 1]"
                    )));
                }
                if self.weight(j, i) != w {
                    return Err(Error::InvalidParameter(format!("p({i},{j}) not symmetric")));
                }
            }
            if row.iter().any(|e| e.0 as usize != i) && self.weight(i, i) != 1.0 {
                return Err(Error::InvalidParameter(format!("p({i},{i}) != 1")));
            }
        }
        Ok(())
    }
}

/// Symmetric distance graph with zero diagonal. Absent entries are infinite.
///
/// `active` remembers which vertices carried a self-loop on the proximity side
/// so the proximity ↔ distance round trip is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGraph {
    labels: IdIndex,
    rows: Vec<Row>,
    active: Vec<bool>,
}

impl DistanceGraph {
    /// Builds a graph from undirected finite edges `(i, j, d)`. Infinite weights
    /// are dropped; self-edges only mark the vertex active.
    pub fn from_edges(
        labels: IdIndex,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut rows = symmetric_rows(n, edges, |d| d >= 0.0)?;
        let mut active = vec![false; n];
        for (i, row) in rows.iter_mut().enumerate() {
            if !row.is_empty() {
                active[i] = true;
            }
            row.retain(|e| e.0 as usize != i && e.1.is_finite());
        }
        Ok(DistanceGraph {
            labels,
            rows,
            active,
        })
    }

    pub(crate) fn from_parts(labels: IdIndex, rows: Vec<Row>, active: Vec<bool>) -> Self {
        debug_assert_eq!(labels.len(), rows.len());
        DistanceGraph {
            labels,
            rows,
            active,
        }
    }

    /// Finite off-diagonal entries become edges.
    pub fn from_dense(labels: IdIndex, m: &DenseMatrix, active: Vec<bool>) -> Self {
        let rows = (0..m.size())
            .map(|i| {
                m.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, &d)| j != i && d.is_finite())
                    .map(|(j, &d)| (j as u32, d))
                    .collect()
            })
            .collect();
        DistanceGraph {
            labels,
            rows,
            active,
        }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &IdIndex {
        &self.labels
    }

    /// Finite off-diagonal neighbours of `i`, sorted by index.
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub(crate) fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            weight_in(&self.rows[i], j).unwrap_or(f64::INFINITY)
        }
    }

    /// Undirected finite edges `(i, j, d)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |e| (e.0 as usize) > i)
                .map(move |&(j, w)| (i, j as usize, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Dense copy with `∞` for absent edges and `0` on the diagonal.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.size();
        let mut m = DenseMatrix::filled(n, f64::INFINITY);
        for (i, row) in self.rows.iter().enumerate() {
            m.set(i, i, 0.0);
            for &(j, d) in row {
                m.set(i, j as usize, d);
            }
        }
        m
    }
}
