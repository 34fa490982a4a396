//! Semi-metric edges: pairs whose shortest indirect distance beats the direct one.
//!
//! For a pair `(i, j)` with direct distance `d_ij` and closed distance `d̲_ij`,
//! the semi-metric ratio is `s = d_ij / d̲_ij` and the below-average ratio is
//! `b_ij = d̄_i / d̲_ij`, where `d̄_i` is the mean finite direct distance from
//! `i`. Only pairs with `0 < d̲_ij < d_ij` are recorded; `d_ij` may be infinite.

use serde::{Deserialize, Serialize};

use crate::algebra::DualAlgebra;
use crate::closure::{distance_closure, to_distance};
use crate::error::{Error, Result};
use crate::graph::{DistanceGraph, ProximityGraph, Row};
use crate::par;
use crate::powerlaw::{self, PowerLawFit};
use crate::warning::Warning;

/// Relative slack below which a closed distance counts as equal to the direct one.
const SHORTCUT_SLACK: f64 = 1e-12;

/// Mean finite direct distance from `vertex`, diagonal excluded. `None` for
/// isolated vertices.
pub fn mean_direct_distance(graph: &DistanceGraph, vertex: usize) -> Option<f64> {
    let row = graph.row(vertex);
    if row.is_empty() {
        None
    } else {
        Some(row.iter().map(|e| e.1).sum::<f64>() / row.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiMetricEdgeStats {
    /// Dense vertex indices with `i < j`.
    pub i: usize,
    pub j: usize,
    pub direct: f64,
    pub shortest: f64,
    pub s: f64,
    pub b_ij: f64,
    pub b_ji: f64,
}

impl SemiMetricEdgeStats {
    pub fn max_b(&self) -> f64 {
        self.b_ij.max(self.b_ji)
    }

    pub fn min_b(&self) -> f64 {
        self.b_ij.min(self.b_ji)
    }
}

/// One record per unordered pair that the closure shortened.
pub fn semimetric_stats(
    direct: &DistanceGraph,
    closed: &DistanceGraph,
) -> Result<Vec<SemiMetricEdgeStats>> {
    if direct.size() != closed.size() {
        return Err(Error::InvalidParameter(format!(
            "direct graph has {} vertices, closed graph {}",
            direct.size(),
            closed.size()
        )));
    }
    let n = direct.size();
    let means: Vec<f64> = (0..n)
        .map(|v| mean_direct_distance(direct, v).unwrap_or(0.0))
        .collect();
    let labels = direct.labels();
    let per_row: Vec<Result<Vec<SemiMetricEdgeStats>>> = par::map_indices(
        n,
        || (),
        |_, i| {
            for &(j, d) in direct.row(i) {
                let c = closed.distance(i, j as usize);
                if c > d * (1.0 + 1e-9) {
                    return Err(Error::InconsistentClosure {
                        i: labels.id(i),
                        j: labels.id(j as usize),
                        direct: d,
                        closed: c,
                    });
                }
            }
            let mut out = Vec::new();
            for &(j, shortest) in closed.row(i) {
                let j = j as usize;
                if j <= i || shortest <= 0.0 {
                    continue;
                }
                let d = direct.distance(i, j);
                if shortest >= d * (1.0 - SHORTCUT_SLACK) {
                    continue;
                }
                out.push(SemiMetricEdgeStats {
                    i,
                    j,
                    direct: d,
                    shortest,
                    s: d / shortest,
                    b_ij: means[i] / shortest,
                    b_ji: means[j] / shortest,
                });
            }
            Ok(out)
        },
    );
    let mut all = Vec::new();
    for row in per_row {
        all.extend(row?);
    }
    Ok(all)
}

/// Every directed below-average ratio, `b_ij` and `b_ji` for each record.
pub fn pooled_b(stats: &[SemiMetricEdgeStats]) -> Vec<f64> {
    stats.iter().flat_map(|s| [s.b_ij, s.b_ji]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum ThresholdPolicy {
    /// Fixed `b` threshold.
    Explicit(f64),
    /// Keep the upper `value` fraction of the pooled `b` distribution.
    Percentile(f64),
    /// Lower cutoff of a power-law fit to pooled `b`; falls back to the given
    /// percentile when the fit is impossible.
    PowerLawCutoff { fallback_percentile: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::PowerLawCutoff {
            fallback_percentile: 0.1,
        }
    }
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<()> {
        let check_pct = |q: f64| {
            if q > 0.0 && q < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "percentile {q} outside (0, 1)"
                )))
            }
        };
        match *self {
            ThresholdPolicy::Explicit(t) if t > 0.0 => Ok(()),
            ThresholdPolicy::Explicit(t) => Err(Error::InvalidParameter(format!(
                "explicit threshold {t} must be positive"
            ))),
            ThresholdPolicy::Percentile(q) => check_pct(q),
            ThresholdPolicy::PowerLawCutoff {
                fallback_percentile,
            } => check_pct(fallback_percentile),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSelection {
    pub threshold: f64,
    pub fit: Option<PowerLawFit>,
    pub warnings: Vec<Warning>,
}

/// Smallest value among the top `fraction` of `values`.
fn upper_quantile(values: &[f64], fraction: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let keep = ((fraction * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[keep.min(sorted.len()) - 1]
}

pub fn select_threshold(
    stats: &[SemiMetricEdgeStats],
    policy: &ThresholdPolicy,
) -> Result<ThresholdSelection> {
    policy.validate()?;
    let plain = |threshold| ThresholdSelection {
        threshold,
        fit: None,
        warnings: Vec::new(),
    };
    if let ThresholdPolicy::Explicit(t) = *policy {
        return Ok(plain(t));
    }
    let pooled = pooled_b(stats);
    if pooled.is_empty() {
        return Err(Error::InvalidParameter(
            "no semi-metric pairs to derive a threshold from".into(),
        ));
    }
    match *policy {
        ThresholdPolicy::Percentile(q) => Ok(plain(upper_quantile(&pooled, q))),
        ThresholdPolicy::PowerLawCutoff {
            fallback_percentile,
        } => Ok(match powerlaw::fit_tail(&pooled) {
            Some(fit) => ThresholdSelection {
                threshold: fit.x_min,
                fit: Some(fit),
                warnings: Vec::new(),
            },
            None => {
                let warning = Warning::ThresholdFallback {
                    reason: "degenerate or too small b distribution".into(),
                    percentile: fallback_percentile,
                };
                log::warn!("{warning}");
                ThresholdSelection {
                    threshold: upper_quantile(&pooled, fallback_percentile),
                    fit: None,
                    warnings: vec![warning],
                }
            }
        }),
        ThresholdPolicy::Explicit(_) => unreachable!(),
    }
}

/// How the two directed ratios of a pair are reconciled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qualification {
    /// `max(b_ij, b_ji) >= threshold`.
    #[default]
    Either,
    /// `min(b_ij, b_ji) >= threshold`.
    Both,
}

impl Qualification {
    pub fn admits(self, stat: &SemiMetricEdgeStats, threshold: f64) -> bool {
        match self {
            Qualification::Either => stat.max_b() >= threshold,
            Qualification::Both => stat.min_b() >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enhanced {
    pub graph: ProximityGraph,
    pub inserted: usize,
}

/// Replaces each qualifying pair's weight by its closure value `phi⁻¹(d̲_ij)`.
pub fn enhance_with_stats(
    graph: &ProximityGraph,
    stats: &[SemiMetricEdgeStats],
    algebra: &dyn DualAlgebra,
    threshold: f64,
    rule: Qualification,
) -> Result<Enhanced> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "enhancement threshold {threshold} must be non-negative"
        )));
    }
    let n = graph.size();
    let mut extra: Vec<Row> = vec![Vec::new(); n];
    let mut inserted = 0;
    for stat in stats.iter().filter(|s| rule.admits(s, threshold)) {
        let p = algebra.phi_inv(stat.shortest);
        extra[stat.i].push((stat.j as u32, p));
        extra[stat.j].push((stat.i as u32, p));
        inserted += 1;
    }
    if inserted == 0 {
        return Ok(Enhanced {
            graph: graph.clone(),
            inserted,
        });
    }
    let rows = graph
        .rows()
        .iter()
        .zip(extra)
        .map(|(row, mut add)| {
            if add.is_empty() {
                return row.clone();
            }
            add.sort_by_key(|e| e.0);
            merge_rows(row, &add)
        })
        .collect();
    Ok(Enhanced {
        graph: ProximityGraph::from_rows(graph.labels().clone(), rows),
        inserted,
    })
}

/// Sorted merge; entries of `update` win on equal keys.
fn merge_rows(base: &[(u32, f64)], update: &[(u32, f64)]) -> Row {
    let mut out = Vec::with_capacity(base.len() + update.len());
    let (mut a, mut b) = (0, 0);
    while a < base.len() || b < update.len() {
        match (base.get(a), update.get(b)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                out.push(*y);
                a += 1;
                b += 1;
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                out.push(*x);
                a += 1;
            }
            (Some(_), Some(y)) | (None, Some(y)) => {
                out.push(*y);
                b += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                a += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Closure, stats and enhancement in one call, with the either-direction rule.
pub fn enhance(
    graph: &ProximityGraph,
    algebra: &dyn DualAlgebra,
    threshold: f64,
) -> Result<ProximityGraph> {
    let direct = to_distance(graph, algebra);
    let closed = distance_closure(&direct, algebra)?;
    let stats = semimetric_stats(&direct, &closed)?;
    Ok(enhance_with_stats(graph, &stats, algebra, threshold, Qualification::Either)?.graph)
}
