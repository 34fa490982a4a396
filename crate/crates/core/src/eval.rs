//! Top-n precision/recall/F1 and the degree-of-agreement ranking measure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recommend::ScoredRecommendations;
use crate::relation::ExternalId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// `test` must be sorted item indices. `None` when `test` is empty.
pub fn precision_recall_f1(
    rec: &ScoredRecommendations,
    test: &[u32],
    n: usize,
) -> Option<PrecisionRecall> {
    if test.is_empty() || n == 0 {
        return None;
    }
    let top = rec.top(n);
    let hits = top.iter().filter(|i| test.binary_search(i).is_ok()).count() as f64;
    let precision = if top.is_empty() {
        0.0
    } else {
        hits / top.len() as f64
    };
    let recall = hits / test.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Some(PrecisionRecall {
        precision,
        recall,
        f1,
    })
}

/// Concordant-pair tally; ties contribute half an agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub agreements: f64,
    pub pairs: u64,
}

impl Agreement {
    pub fn ratio(&self) -> f64 {
        self.agreements / self.pairs as f64
    }
}

/// Over all pairs `(a, b)` of non-watched ranked items with `a` in `test` and
/// `b` not, counts `a` ahead of `b`. Order comes from the scores, so equal
/// scores tie regardless of their position in the ranking. `None` when no
/// such pair exists.
pub fn degree_of_agreement(rec: &ScoredRecommendations, test: &[u32]) -> Option<Agreement> {
    let candidates: Vec<u32> = rec
        .ranking
        .iter()
        .copied()
        .filter(|&i| !rec.in_profile(i))
        .collect();
    let is_test = |i: &u32| test.binary_search(i).is_ok();
    let n_test = candidates.iter().filter(|i| is_test(i)).count() as u64;
    let n_other = candidates.len() as u64 - n_test;
    let pairs = n_test * n_other;
    if pairs == 0 {
        return None;
    }
    let mut agreements = 0.0;
    let mut test_before = 0u64;
    let mut k = 0;
    while k < candidates.len() {
        let score = rec.scores[candidates[k] as usize];
        let mut end = k;
        while end < candidates.len() && rec.scores[candidates[end] as usize] == score {
            end += 1;
        }
        let group = &candidates[k..end];
        let test_here = group.iter().filter(|i| is_test(i)).count() as u64;
        let other_here = group.len() as u64 - test_here;
        agreements += (other_here * test_before) as f64 + 0.5 * (other_here * test_here) as f64;
        test_before += test_here;
        k = end;
    }
    Some(Agreement { agreements, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserEval {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub agreement: f64,
    pub agreements: f64,
    pub pairs: u64,
    pub test_size: usize,
}

impl UserEval {
    pub fn new(rec: &ScoredRecommendations, test: &[u32], n: usize) -> Option<UserEval> {
        let prf = precision_recall_f1(rec, test, n)?;
        let agr = degree_of_agreement(rec, test)?;
        Some(UserEval {
            precision: prf.precision,
            recall: prf.recall,
            f1: prf.f1,
            agreement: agr.ratio(),
            agreements: agr.agreements,
            pairs: agr.pairs,
            test_size: test.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub users: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Unweighted mean of per-user agreement (headline).
    pub agreement_macro: f64,
    /// Total agreements over total pairs.
    pub agreement_pooled: f64,
}

pub fn aggregate<'a>(per_user: impl IntoIterator<Item = &'a UserEval>) -> Result<Aggregate> {
    let mut n = 0usize;
    let (mut p, mut r, mut f, mut d) = (0.0, 0.0, 0.0, 0.0);
    let (mut agree, mut pairs) = (0.0, 0u64);
    for u in per_user {
        n += 1;
        p += u.precision;
        r += u.recall;
        f += u.f1;
        d += u.agreement;
        agree += u.agreements;
        pairs += u.pairs;
    }
    if n == 0 {
        return Err(Error::NoIncludedUsers);
    }
    let nf = n as f64;
    Ok(Aggregate {
        users: n,
        precision: p / nf,
        recall: r / nf,
        f1: f / nf,
        agreement_macro: d / nf,
        agreement_pooled: agree / pairs as f64,
    })
}

/// Why a user with test data did not contribute to the averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    EmptyTrainingProfile,
    NoRankablePairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub top_n: usize,
    pub aggregate: Aggregate,
    pub per_user: BTreeMap<ExternalId, UserEval>,
    pub excluded: BTreeMap<ExternalId, Exclusion>,
    /// Users with an empty test set; never part of the averages.
    pub users_without_test: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked(order: &[u32], n_items: usize) -> ScoredRecommendations {
        let mut scores = vec![0.0; n_items];
        for (rank, &i) in order.iter().enumerate() {
            scores[i as usize] = (order.len() - rank) as f64;
        }
        ScoredRecommendations::from_scores(1, scores, Vec::new(), true)
    }

    #[test]
    fn prf_hand_example() {
        // test {x, y, z} = {0, 1, 2}; top-5 holds 0 and 1
        let rec = ranked(&[0, 5, 1, 6, 7, 2, 8], 9);
        let m = precision_recall_f1(&rec, &[0, 1, 2], 5).unwrap();
        assert_eq!(m.recall, 2.0 / 3.0);
        assert_eq!(m.precision, 2.0 / 5.0);
        assert!((m.f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn prf_perfect_and_empty() {
        let rec = ranked(&[3, 4, 0, 1], 5);
        let m = precision_recall_f1(&rec, &[3, 4], 2).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = precision_recall_f1(&rec, &[2], 2).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(precision_recall_f1(&rec, &[], 2).is_none());
    }

    #[test]
    fn agreement_pair_enumeration() {
        // ranking [a1, b1, a2], test {a1, a2}
        let rec = ranked(&[0, 1, 2], 3);
        let a = degree_of_agreement(&rec, &[0, 2]).unwrap();
        assert_eq!((a.agreements, a.pairs), (1.0, 2));
        assert_eq!(a.ratio(), 0.5);

        assert_eq!(
            degree_of_agreement(&ranked(&[0, 2, 1], 3), &[0, 2])
                .unwrap()
                .ratio(),
            1.0
        );
        assert_eq!(
            degree_of_agreement(&ranked(&[1, 2, 0], 3), &[0, 2])
                .unwrap()
                .ratio(),
            0.0
        );
    }

    #[test]
    fn ties_count_half() {
        let rec = ScoredRecommendations::from_scores(1, vec![0.5, 0.5, 0.5], Vec::new(), true);
        assert_eq!(degree_of_agreement(&rec, &[0]).unwrap().ratio(), 0.5);
    }

    #[test]
    fn watched_items_are_ignored() {
        // profile item 1 ranked ahead when exclusion is off
        let rec = ScoredRecommendations::from_scores(1, vec![0.2, 0.9, 0.1], vec![1], false);
        assert_eq!(rec.ranking, vec![1, 0, 2]);
        let a = degree_of_agreement(&rec, &[0]).unwrap();
        assert_eq!((a.agreements, a.pairs), (1.0, 1));
    }

    #[test]
    fn no_pairs() {
        let rec = ranked(&[0, 1], 2);
        assert!(degree_of_agreement(&rec, &[0, 1]).is_none());
    }

    #[test]
    fn aggregates() {
        let user = |agreements: f64, pairs: u64| UserEval {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            agreement: agreements / pairs as f64,
            agreements,
            pairs,
            test_size: 1,
        };
        let both = [user(10.0, 10), user(15.0, 30)];
        let agg = aggregate(&both).unwrap();
        assert_eq!(agg.agreement_macro, 0.75);
        assert_eq!(agg.agreement_pooled, 0.625);
        let one = aggregate(&both[1..]).unwrap();
        assert_eq!(one.agreement_macro, one.agreement_pooled);
        assert!(matches!(aggregate(&[]), Err(Error::NoIncludedUsers)));
    }
}
