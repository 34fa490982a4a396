//! Browser demo. Three operations over a small user–item relation typed as
//! `user item` lines: build proximity graphs, inspect the metric closure and
//! its semi-metric pairs, and compare recommendations before and after
//! enhancement. Each wasm export returns a JSON string; the plain functions
//! behind them are what the native tests call.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use semirec_core::closure::{distance_closure, to_distance};
use semirec_core::recommend::{
    item_based_scores, user_based_scores, GraphKind, ScoredRecommendations, SemiMetricProfile,
};
use semirec_core::semimetric::{enhance_with_stats, pooled_b, Qualification};
use semirec_core::{BinaryRelation, DenseMatrix, Metric, ProximityGraph};

/// Parses whitespace- or tab-separated `user item [...]` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BinaryRelation, String> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut f = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty());
        let mut num = || -> Result<u64, String> {
            f.next()
                .ok_or_else(|| format!("line {}: expected `user item`", n + 1))?
                .parse()
                .map_err(|_| format!("line {}: ids must be non-negative integers", n + 1))
        };
        pairs.push((num()?, num()?));
    }
    if pairs.is_empty() {
        return Err("no user–item pairs".into());
    }
    BinaryRelation::from_pairs(&pairs).map_err(|e| e.to_string())
}

fn kind(graph: &str) -> Result<GraphKind, String> {
    match graph {
        "item" => Ok(GraphKind::Item),
        "user" => Ok(GraphKind::User),
        other => Err(format!("unknown graph {other:?}; use \"item\" or \"user\"")),
    }
}

/// Infinite entries become `None` (JSON null).
fn rows(m: &DenseMatrix) -> Vec<Vec<Option<f64>>> {
    (0..m.size())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|&x| x.is_finite().then_some(x))
                .collect()
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ProximityView {
    pub users: Vec<u64>,
    pub items: Vec<u64>,
    pub item_proximity: Vec<Vec<Option<f64>>>,
    pub user_proximity: Vec<Vec<Option<f64>>>,
}

pub fn proximity_view(text: &str) -> Result<ProximityView, String> {
    let rel = parse_pairs(text)?;
    Ok(ProximityView {
        users: rel.users().ids().to_vec(),
        items: rel.items().ids().to_vec(),
        item_proximity: rows(&GraphKind::Item.build(&rel).to_dense()),
        user_proximity: rows(&GraphKind::User.build(&rel).to_dense()),
    })
}

#[derive(Debug, Serialize)]
pub struct PairView {
    pub a: u64,
    pub b: u64,
    pub direct: Option<f64>,
    pub shortest: f64,
    pub s: Option<f64>,
    pub b_ab: f64,
    pub b_ba: f64,
}

#[derive(Debug, Serialize)]
pub struct ClosureView {
    pub labels: Vec<u64>,
    pub direct: Vec<Vec<Option<f64>>>,
    pub closed: Vec<Vec<Option<f64>>>,
    pub pairs: Vec<PairView>,
    /// Sorted pooled `b` values, for the threshold slider.
    pub b_values: Vec<f64>,
}

fn graph_and_profile(
    rel: &BinaryRelation,
    graph: &str,
) -> Result<(ProximityGraph, SemiMetricProfile), String> {
    let g = kind(graph)?.build(rel);
    let profile = SemiMetricProfile::compute(&g, &Metric).map_err(|e| e.to_string())?;
    Ok((g, profile))
}

pub fn closure_view(text: &str, graph: &str) -> Result<ClosureView, String> {
    let rel = parse_pairs(text)?;
    let (g, profile) = graph_and_profile(&rel, graph)?;
    let direct = to_distance(&g, &Metric);
    let closed = distance_closure(&direct, &Metric).map_err(|e| e.to_string())?;
    let labels = g.labels();
    let finite = |x: f64| x.is_finite().then_some(x);
    let mut b_values = pooled_b(&profile.stats);
    b_values.sort_by(f64::total_cmp);
    Ok(ClosureView {
        labels: labels.ids().to_vec(),
        direct: rows(&direct.to_dense()),
        closed: rows(&closed.to_dense()),
        pairs: profile
            .stats
            .iter()
            .map(|s| PairView {
                a: labels.id(s.i),
                b: labels.id(s.j),
                direct: finite(s.direct),
                shortest: s.shortest,
                s: finite(s.s),
                b_ab: s.b_ij,
                b_ba: s.b_ji,
            })
            .collect(),
        b_values,
    })
}

#[derive(Debug, Serialize)]
pub struct Ranked {
    pub item: u64,
    pub score: f64,
}

#[derive(Debug, Serialize)]
pub struct EnhanceView {
    pub labels: Vec<u64>,
    pub threshold: f64,
    pub inserted: usize,
    pub enhanced: Vec<Vec<Option<f64>>>,
    pub user: u64,
    pub before: Vec<Ranked>,
    pub after: Vec<Ranked>,
}

fn ranked(rec: &ScoredRecommendations, rel: &BinaryRelation, n: usize) -> Vec<Ranked> {
    rec.top(n)
        .iter()
        .map(|&i| Ranked {
            item: rel.items().id(i as usize),
            score: rec.scores[i as usize],
        })
        .collect()
}

/// Enhances the chosen graph at `threshold` and ranks items for `user`
/// before and after. `k` is used for the user graph only.
pub fn enhance_view(
    text: &str,
    graph: &str,
    threshold: f64,
    user: u64,
    k: usize,
    top_n: usize,
) -> Result<EnhanceView, String> {
    let rel = parse_pairs(text)?;
    let graph_kind = kind(graph)?;
    let (g, profile) = graph_and_profile(&rel, graph)?;
    let enhanced = enhance_with_stats(
        &g,
        &profile.stats,
        &Metric,
        threshold,
        Qualification::Either,
    )
    .map_err(|e| e.to_string())?;
    let score = |p: &ProximityGraph| {
        match graph_kind {
            GraphKind::Item => item_based_scores(p, &rel, user),
            GraphKind::User => user_based_scores(p, &rel, user, k.max(1)),
        }
        .map_err(|e| e.to_string())
    };
    let before = score(&g)?;
    let after = score(&enhanced.graph)?;
    Ok(EnhanceView {
        labels: g.labels().ids().to_vec(),
        threshold,
        inserted: enhanced.inserted,
        enhanced: rows(&enhanced.graph.to_dense()),
        user,
        before: ranked(&before, &rel, top_n),
        after: ranked(&after, &rel, top_n),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .unwrap_or_else(|e| serde_json::json!({ "error": e }).to_string())
}

#[wasm_bindgen]
pub fn proximity(text: &str) -> String {
    to_json(proximity_view(text))
}

#[wasm_bindgen]
pub fn closure(text: &str, graph: &str) -> String {
    to_json(closure_view(text, graph))
}

#[wasm_bindgen]
pub fn enhance(
    text: &str,
    graph: &str,
    threshold: f64,
    user: u64,
    k: usize,
    top_n: usize,
) -> String {
    to_json(enhance_view(text, graph, threshold, user, k, top_n))
}
