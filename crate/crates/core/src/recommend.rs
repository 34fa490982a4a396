//! Item- and user-based recommenders over proximity graphs, plain or enhanced
//! with semi-metric edges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraChoice, DualAlgebra};
use crate::closure::{distance_closure, to_distance};
use crate::error::{Error, Result};
use crate::graph::ProximityGraph;
use crate::par;
use crate::powerlaw::PowerLawFit;
use crate::proximity::{item_proximity, user_proximity};
use crate::relation::{BinaryRelation, ExternalId};
use crate::semimetric::{
    enhance_with_stats, select_threshold, semimetric_stats, Qualification, SemiMetricEdgeStats,
    ThresholdPolicy,
};
use crate::warning::Warning;

/// Full per-item scores for one user plus the resulting ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRecommendations {
    pub user: ExternalId,
    /// Indexed by dense item index.
    pub scores: Vec<f64>,
    /// Dense item indices, best first; ties by ascending item id.
    pub ranking: Vec<u32>,
    /// Training profile of the user (sorted item indices).
    pub profile: Vec<u32>,
    pub warnings: Vec<Warning>,
}

impl ScoredRecommendations {
    /// Ranks every item, leaving out the profile when `exclude_profile` is set.
    pub fn from_scores(
        user: ExternalId,
        scores: Vec<f64>,
        profile: Vec<u32>,
        exclude_profile: bool,
    ) -> Self {
        let mut ranking: Vec<u32> = (0..scores.len() as u32)
            .filter(|i| !exclude_profile || profile.binary_search(i).is_err())
            .collect();
        ranking.sort_by(|&a, &b| {
            scores[b as usize]
                .total_cmp(&scores[a as usize])
                .then(a.cmp(&b))
        });
        ScoredRecommendations {
            user,
            scores,
            ranking,
            profile,
            warnings: Vec::new(),
        }
    }

    pub fn top(&self, n: usize) -> &[u32] {
        &self.ranking[..n.min(self.ranking.len())]
    }

    pub fn in_profile(&self, item: u32) -> bool {
        self.profile.binary_search(&item).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    ItemProx,
    ItemSm,
    UserProx,
    UserSm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::ItemProx,
        Algorithm::ItemSm,
        Algorithm::UserProx,
        Algorithm::UserSm,
    ];

    pub fn graph(self) -> GraphKind {
        match self {
            Algorithm::ItemProx | Algorithm::ItemSm => GraphKind::Item,
            Algorithm::UserProx | Algorithm::UserSm => GraphKind::User,
        }
    }

    pub fn is_semimetric(self) -> bool {
        matches!(self, Algorithm::ItemSm | Algorithm::UserSm)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "item-prox" => Algorithm::ItemProx,
            "item-sm" => Algorithm::ItemSm,
            "user-prox" => Algorithm::UserProx,
            "user-sm" => Algorithm::UserSm,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown algorithm {other:?}"
                )))
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::ItemProx => "item-prox",
            Algorithm::ItemSm => "item-sm",
            Algorithm::UserProx => "user-prox",
            Algorithm::UserSm => "user-sm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Item,
    User,
}

impl GraphKind {
    pub fn build(self, relation: &BinaryRelation) -> ProximityGraph {
        match self {
            GraphKind::Item => item_proximity(relation),
            GraphKind::User => user_proximity(relation),
        }
    }
}

pub const DEFAULT_K: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    pub algorithm: Algorithm,
    pub k_neighbors: usize,
    pub threshold_policy: ThresholdPolicy,
    pub algebra: AlgebraChoice,
    pub qualification: Qualification,
    pub exclude_profile: bool,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            algorithm: Algorithm::ItemProx,
            k_neighbors: DEFAULT_K,
            threshold_policy: ThresholdPolicy::default(),
            algebra: AlgebraChoice::Metric,
            qualification: Qualification::Either,
            exclude_profile: true,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        self.threshold_policy.validate()
    }
}

fn user_index(relation: &BinaryRelation, user: ExternalId) -> Result<usize> {
    relation
        .users()
        .index_of(user)
        .ok_or(Error::UnknownUser(user))
}

fn profile_of(relation: &BinaryRelation, u: usize) -> Result<Vec<u32>> {
    let profile = relation.user_items(u);
    if profile.is_empty() {
        return Err(Error::EmptyProfile(relation.users().id(u)));
    }
    Ok(profile.to_vec())
}

/// Item score = mean over the user's profile items `c` of `p(item, c)`;
/// absent edges count as 0.
pub(crate) fn item_scores_by_index(
    iup: &ProximityGraph,
    relation: &BinaryRelation,
    u: usize,
    exclude_profile: bool,
) -> Result<ScoredRecommendations> {
    let profile = profile_of(relation, u)?;
    let mut scores = vec![0.0; relation.n_items()];
    for &c in &profile {
        for &(j, w) in iup.row(c as usize) {
            scores[j as usize] += w;
        }
    }
    let inv = 1.0 / profile.len() as f64;
    scores.iter_mut().for_each(|s| *s *= inv);
    Ok(ScoredRecommendations::from_scores(
        relation.users().id(u),
        scores,
        profile,
        exclude_profile,
    ))
}

/// The `k` users with the highest positive proximity to `u` (self excluded),
/// ties broken by ascending user id.
pub fn neighbourhood(uip: &ProximityGraph, u: usize, k: usize) -> Vec<u32> {
    let mut cands: Vec<(u32, f64)> = uip
        .row(u)
        .iter()
        .copied()
        .filter(|&(v, w)| v as usize != u && w > 0.0)
        .collect();
    cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    cands.truncate(k);
    cands.into_iter().map(|e| e.0).collect()
}

/// Item score = number of the `k` nearest users whose profile holds the item.
pub(crate) fn user_scores_by_index(
    uip: &ProximityGraph,
    relation: &BinaryRelation,
    u: usize,
    k: usize,
    exclude_profile: bool,
) -> Result<ScoredRecommendations> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let profile = profile_of(relation, u)?;
    let neighbours = neighbourhood(uip, u, k);
    let mut scores = vec![0.0; relation.n_items()];
    for &v in &neighbours {
        for &j in relation.user_items(v as usize) {
            scores[j as usize] += 1.0;
        }
    }
    let user = relation.users().id(u);
    let mut rec = ScoredRecommendations::from_scores(user, scores, profile, exclude_profile);
    if neighbours.len() < k {
        rec.warnings.push(Warning::ShortNeighborhood {
            user,
            found: neighbours.len(),
            k,
        });
    }
    Ok(rec)
}

pub fn item_based_scores(
    iup: &ProximityGraph,
    relation: &BinaryRelation,
    user: ExternalId,
) -> Result<ScoredRecommendations> {
    item_scores_by_index(iup, relation, user_index(relation, user)?, true)
}

pub fn user_based_scores(
    uip: &ProximityGraph,
    relation: &BinaryRelation,
    user: ExternalId,
    k: usize,
) -> Result<ScoredRecommendations> {
    user_scores_by_index(uip, relation, user_index(relation, user)?, k, true)
}

/// Semi-metric structure of a proximity graph: the closure statistics from
/// which any number of enhanced graphs can be cut.
#[derive(Debug, Clone)]
pub struct SemiMetricProfile {
    pub stats: Vec<SemiMetricEdgeStats>,
}

impl SemiMetricProfile {
    pub fn compute(graph: &ProximityGraph, algebra: &dyn DualAlgebra) -> Result<Self> {
        let direct = to_distance(graph, algebra);
        let closed = distance_closure(&direct, algebra)?;
        Ok(SemiMetricProfile {
            stats: semimetric_stats(&direct, &closed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnhancementSummary {
    pub threshold: f64,
    pub semimetric_pairs: usize,
    pub inserted_edges: usize,
    pub fit: Option<PowerLawFit>,
}

/// Enhances `graph` using a threshold chosen by `policy` on `profile`.
/// A profile without semi-metric pairs leaves the graph unchanged.
pub fn enhance_graph(
    graph: &ProximityGraph,
    profile: &SemiMetricProfile,
    algebra: &dyn DualAlgebra,
    policy: &ThresholdPolicy,
    rule: Qualification,
) -> Result<(ProximityGraph, EnhancementSummary, Vec<Warning>)> {
    if profile.stats.is_empty() && !matches!(policy, ThresholdPolicy::Explicit(_)) {
        policy.validate()?;
        let summary = EnhancementSummary {
            threshold: f64::INFINITY,
            semimetric_pairs: 0,
            inserted_edges: 0,
            fit: None,
        };
        return Ok((graph.clone(), summary, vec![Warning::NoSemiMetricPairs]));
    }
    let selection = select_threshold(&profile.stats, policy)?;
    let enhanced = enhance_with_stats(graph, &profile.stats, algebra, selection.threshold, rule)?;
    let summary = EnhancementSummary {
        threshold: selection.threshold,
        semimetric_pairs: profile.stats.len(),
        inserted_edges: enhanced.inserted,
        fit: selection.fit,
    };
    Ok((enhanced.graph, summary, selection.warnings))
}

pub fn item_based_sm_scores(
    iup: &ProximityGraph,
    relation: &BinaryRelation,
    user: ExternalId,
    algebra: &dyn DualAlgebra,
    policy: &ThresholdPolicy,
) -> Result<ScoredRecommendations> {
    let profile = SemiMetricProfile::compute(iup, algebra)?;
    let (graph, _, _) = enhance_graph(iup, &profile, algebra, policy, Qualification::Either)?;
    item_based_scores(&graph, relation, user)
}

pub fn user_based_sm_scores(
    uip: &ProximityGraph,
    relation: &BinaryRelation,
    user: ExternalId,
    k: usize,
    algebra: &dyn DualAlgebra,
    policy: &ThresholdPolicy,
) -> Result<ScoredRecommendations> {
    let profile = SemiMetricProfile::compute(uip, algebra)?;
    let (graph, _, _) = enhance_graph(uip, &profile, algebra, policy, Qualification::Either)?;
    user_based_scores(&graph, relation, user, k)
}

/// A recommender bound to one training relation and one (possibly enhanced)
/// graph. Enhancement happens once, at construction.
#[derive(Debug, Clone)]
pub struct Recommender<'a> {
    relation: &'a BinaryRelation,
    graph: ProximityGraph,
    config: RecommenderConfig,
    pub enhancement: Option<EnhancementSummary>,
    pub warnings: Vec<Warning>,
}

impl<'a> Recommender<'a> {
    /// Builds graphs from scratch.
    pub fn new(relation: &'a BinaryRelation, config: RecommenderConfig) -> Result<Self> {
        config.validate()?;
        let graph = config.algorithm.graph().build(relation);
        let profile = if config.algorithm.is_semimetric() {
            Some(SemiMetricProfile::compute(
                &graph,
                config.algebra.algebra(),
            )?)
        } else {
            None
        };
        Self::from_parts(relation, graph, profile.as_ref(), config)
    }

    /// Reuses a prebuilt proximity graph and, for semi-metric algorithms, its
    /// closure statistics.
    pub fn from_parts(
        relation: &'a BinaryRelation,
        graph: ProximityGraph,
        profile: Option<&SemiMetricProfile>,
        config: RecommenderConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut warnings = Vec::new();
        let (graph, enhancement) = if config.algorithm.is_semimetric() {
            let profile = profile.ok_or_else(|| {
                Error::InvalidParameter("semi-metric algorithm needs closure statistics".into())
            })?;
            let (g, summary, w) = enhance_graph(
                &graph,
                profile,
                config.algebra.algebra(),
                &config.threshold_policy,
                config.qualification,
            )?;
            warnings = w;
            (g, Some(summary))
        } else {
            (graph, None)
        };
        Ok(Recommender {
            relation,
            graph,
            config,
            enhancement,
            warnings,
        })
    }

    pub fn graph(&self) -> &ProximityGraph {
        &self.graph
    }

    pub fn config(&self) -> &RecommenderConfig {
        &self.config
    }

    /// Scores one user by dense index.
    pub fn recommend(&self, user: usize) -> Result<ScoredRecommendations> {
        let exclude = self.config.exclude_profile;
        match self.config.algorithm.graph() {
            GraphKind::Item => item_scores_by_index(&self.graph, self.relation, user, exclude),
            GraphKind::User => user_scores_by_index(
                &self.graph,
                self.relation,
                user,
                self.config.k_neighbors,
                exclude,
            ),
        }
    }

    /// Scores the given users in parallel, preserving order.
    pub fn recommend_many(&self, users: &[usize]) -> Vec<Result<ScoredRecommendations>> {
        par::map_indices(users.len(), || (), |_, k| self.recommend(users[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Metric;
    use crate::relation::IdIndex;

    #[test]
    fn single_profile_item() {
        let items = IdIndex::new([1, 2, 3]);
        let iup = ProximityGraph::from_edges_reflexive(items.clone(), [(1, 0, 0.8), (2, 0, 0.2)])
            .unwrap();
        let rel = BinaryRelation::with_index(IdIndex::new([7]), items, &[(7, 1)]).unwrap();
        let rec = item_based_scores(&iup, &rel, 7).unwrap();
        assert_eq!(rec.scores[1], 0.8);
        assert_eq!(rec.scores[2], 0.2);
        assert_eq!(rec.ranking, vec![1, 2]);
    }

    #[test]
    fn absent_edges_count_as_zero() {
        let items = IdIndex::new([1, 2, 3]);
        let iup = ProximityGraph::from_edges_reflexive(items.clone(), [(2, 0, 0.4)]).unwrap();
        let rel = BinaryRelation::with_index(IdIndex::new([7]), items, &[(7, 1), (7, 2)]).unwrap();
        let rec = item_based_scores(&iup, &rel, 7).unwrap();
        assert_eq!(rec.scores[2], 0.2);
        assert_eq!(rec.ranking, vec![2]);
    }

    #[test]
    fn zero_scores_rank_last_by_id() {
        let items = IdIndex::new([1, 2, 3, 4]);
        let iup = ProximityGraph::from_edges_reflexive(items.clone(), [(3, 0, 0.1)]).unwrap();
        let rel = BinaryRelation::with_index(IdIndex::new([7]), items, &[(7, 1)]).unwrap();
        let rec = item_based_scores(&iup, &rel, 7).unwrap();
        assert_eq!(rec.ranking, vec![3, 1, 2]);
    }

    #[test]
    fn empty_profile_and_unknown_user() {
        let users = IdIndex::new([1, 2]);
        let items = IdIndex::new([1]);
        let rel = BinaryRelation::with_index(users, items.clone(), &[(1, 1)]).unwrap();
        let iup = item_proximity(&rel);
        assert!(matches!(
            item_based_scores(&iup, &rel, 2),
            Err(Error::EmptyProfile(2))
        ));
        assert!(matches!(
            item_based_scores(&iup, &rel, 9),
            Err(Error::UnknownUser(9))
        ));
    }

    // user 1 profile {i1}; neighbours 2:{i1,i2}, 3:{i2,i3}
    fn user_fixture() -> (BinaryRelation, ProximityGraph) {
        let rel = BinaryRelation::from_pairs(&[(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)]).unwrap();
        let uip = ProximityGraph::from_edges_reflexive(
            rel.users().clone(),
            [(0, 1, 0.5), (0, 2, 0.4), (1, 2, 0.3)],
        )
        .unwrap();
        (rel, uip)
    }

    #[test]
    fn user_frequency_counts() {
        let (rel, uip) = user_fixture();
        let rec = user_based_scores(&uip, &rel, 1, 2).unwrap();
        assert_eq!(rec.scores[1], 2.0);
        assert_eq!(rec.scores[2], 1.0);
        assert_eq!(rec.ranking, vec![1, 2]);
        assert!(rec.warnings.is_empty());

        let one = user_based_scores(&uip, &rel, 1, 1).unwrap();
        assert_eq!(one.scores, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_neighbourhood_warns() {
        let rel = BinaryRelation::from_pairs(&[(1, 1), (2, 2)]).unwrap();
        let uip = user_proximity(&rel);
        let rec = user_based_scores(&uip, &rel, 1, 5).unwrap();
        assert!(rec.scores.iter().all(|&s| s == 0.0));
        assert_eq!(
            rec.warnings,
            vec![Warning::ShortNeighborhood {
                user: 1,
                found: 0,
                k: 5
            }]
        );
    }

    #[test]
    fn triangle_enhancement_raises_item_score() {
        // items A, B, C with d(A,B)=2, d(B,C)=3, d(A,C)=10
        let items = IdIndex::new([1, 2, 3]);
        let iup = ProximityGraph::from_edges_reflexive(
            items.clone(),
            [(0, 1, 1.0 / 3.0), (1, 2, 0.25), (0, 2, 1.0 / 11.0)],
        )
        .unwrap();
        let rel = BinaryRelation::with_index(IdIndex::new([9]), items, &[(9, 1)]).unwrap();
        let base = item_based_scores(&iup, &rel, 9).unwrap();
        assert!((base.scores[2] - 1.0 / 11.0).abs() < 1e-15);
        let sm =
            item_based_sm_scores(&iup, &rel, 9, &Metric, &ThresholdPolicy::Explicit(1.1)).unwrap();
        assert!((sm.scores[2] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
    }
}
