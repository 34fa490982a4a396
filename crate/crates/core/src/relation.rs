//! Binary user–item relations parsed from MovieLens-style rating files.
//!
//! Ratings are binarized: any rated `(user, item)` pair becomes a 1, everything
//! else is an implicit 0. Dense indices are assigned in ascending order of the
//! external id, so ordering by index is ordering by external id.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warning::Warning;

pub type ExternalId = u64;

/// Sorted set of external ids; the position of an id is its dense index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdIndex {
    ids: Vec<ExternalId>,
}

impl IdIndex {
    pub fn new(ids: impl IntoIterator<Item = ExternalId>) -> Self {
        let mut ids: Vec<_> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        IdIndex { ids }
    }

    /// `0..n` mapped onto itself.
    pub fn identity(n: usize) -> Self {
        IdIndex {
            ids: (0..n as ExternalId).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: ExternalId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn id(&self, index: usize) -> ExternalId {
        self.ids[index]
    }

    pub fn ids(&self) -> &[ExternalId] {
        &self.ids
    }
}

/// How a rating value turns into a relation entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binarization {
    /// Any rated pair counts.
    #[default]
    AnyRating,
    /// Only ratings at or above the given value count.
    MinRating(i64),
}

impl Binarization {
    fn keeps(self, rating: i64) -> bool {
        match self {
            Binarization::AnyRating => true,
            Binarization::MinRating(min) => rating >= min,
        }
    }
}

/// Sparse boolean `n × m` incidence matrix between users (rows) and items (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRelation {
    users: IdIndex,
    items: IdIndex,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
    len: usize,
}

impl BinaryRelation {
    /// Builds a relation over the given index maps from dense `(row, col)` pairs.
    /// Duplicates collapse; out-of-range pairs are rejected.
    pub fn from_indexed_pairs(
        users: IdIndex,
        items: IdIndex,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let (n, m) = (users.len(), items.len());
        let mut rows = vec![Vec::new(); n];
        for (u, i) in pairs {
            if u >= n || i >= m {
                return Err(Error::InvalidParameter(format!(
                    "pair ({u}, {i}) outside a {n}x{m} relation"
                )));
            }
            rows[u].push(i as u32);
        }
        let mut cols = vec![Vec::new(); m];
        let mut len = 0;
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            len += row.len();
            for &i in row.iter() {
                cols[i as usize].push(u as u32);
            }
        }
        Ok(BinaryRelation {
            users,
            items,
            rows,
            cols,
            len,
        })
    }

    /// Builds a relation whose index maps are exactly the ids present in `pairs`.
    pub fn from_pairs(pairs: &[(ExternalId, ExternalId)]) -> Result<Self> {
        let users = IdIndex::new(pairs.iter().map(|p| p.0));
        let items = IdIndex::new(pairs.iter().map(|p| p.1));
        Self::with_index(users, items, pairs)
    }

    /// Builds a relation over fixed index maps from external-id pairs.
    pub fn with_index(
        users: IdIndex,
        items: IdIndex,
        pairs: &[(ExternalId, ExternalId)],
    ) -> Result<Self> {
        let mut dense = Vec::with_capacity(pairs.len());
        for &(u, i) in pairs {
            let (Some(ui), Some(ii)) = (users.index_of(u), items.index_of(i)) else {
                return Err(Error::InvalidParameter(format!(
                    "pair ({u}, {i}) not covered by the index maps"
                )));
            };
            dense.push((ui, ii));
        }
        Self::from_indexed_pairs(users, items, dense)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// Number of stored (non-zero) entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn users(&self) -> &IdIndex {
        &self.users
    }

    pub fn items(&self) -> &IdIndex {
        &self.items
    }

    /// Sorted item indices of a user's profile.
    pub fn user_items(&self, user: usize) -> &[u32] {
        &self.rows[user]
    }

    /// Sorted user indices that relate to an item.
    pub fn item_users(&self, item: usize) -> &[u32] {
        &self.cols[item]
    }

    pub(crate) fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub(crate) fn cols(&self) -> &[Vec<u32>] {
        &self.cols
    }

    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.rows[user].binary_search(&(item as u32)).is_ok()
    }

    /// Dense `(user, item)` pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&i| (u, i as usize)))
    }

    /// Same relation with users and items swapped.
    pub fn transpose(&self) -> BinaryRelation {
        BinaryRelation {
            users: self.items.clone(),
            items: self.users.clone(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            len: self.len,
        }
    }

    /// Writes the pair set back out in rating-file layout (rating 1, timestamp 0).
    pub fn write_ratings<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, i) in self.pairs() {
            writeln!(out, "{}\t{}\t1\t0", self.users.id(u), self.items.id(i))?;
        }
        Ok(())
    }
}

/// One parsed rating line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rating {
    pub user: ExternalId,
    pub item: ExternalId,
    pub rating: i64,
    pub timestamp: i64,
}

/// Reads tab-separated `user item rating timestamp` records. Blank lines are skipped.
pub fn read_ratings<R: BufRead>(reader: R) -> Result<Vec<Rating>> {
    let mut out = Vec::new();
    for (lineno, text) in reader.lines().enumerate() {
        let line = lineno + 1;
        let text = text.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let text = text.trim_end_matches(['\r', '\n']);
        if text.trim().is_empty() {
            continue;
        }
        out.push(parse_line(text, line)?);
    }
    Ok(out)
}

fn parse_line(text: &str, line: usize) -> Result<Rating> {
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::Parse {
            line,
            message: format!("expected 4 tab-separated fields, found {}", fields.len()),
        });
    }
    let int = |idx: usize, name: &str| -> Result<i64> {
        fields[idx].trim().parse::<i64>().map_err(|_| Error::Parse {
            line,
            message: format!("{name} {:?} is not an integer", fields[idx]),
        })
    };
    let user = int(0, "user id")?;
    let item = int(1, "item id")?;
    let rating = int(2, "rating")?;
    let timestamp = int(3, "timestamp")?;
    if user < 0 || item < 0 {
        return Err(Error::Parse {
            line,
            message: "ids must be non-negative".into(),
        });
    }
    Ok(Rating {
        user: user as ExternalId,
        item: item as ExternalId,
        rating,
        timestamp,
    })
}

/// Parses a rating stream into a binarized relation.
pub fn parse_ratings<R: BufRead>(reader: R, rule: Binarization) -> Result<BinaryRelation> {
    let ratings = read_ratings(reader)?;
    if ratings.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pairs = binarize(&ratings, rule);
    BinaryRelation::from_pairs(&pairs)
}

/// Parses a published train/test file pair. Both relations share index maps
/// built from the union of ids seen in either file.
pub fn parse_file_pair<A: BufRead, B: BufRead>(
    train: A,
    test: B,
    rule: Binarization,
) -> Result<(BinaryRelation, BinaryRelation)> {
    let train = read_ratings(train)?;
    let test = read_ratings(test)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let users = IdIndex::new(train.iter().chain(&test).map(|r| r.user));
    let items = IdIndex::new(train.iter().chain(&test).map(|r| r.item));
    let train = BinaryRelation::with_index(users.clone(), items.clone(), &binarize(&train, rule))?;
    let test = BinaryRelation::with_index(users, items, &binarize(&test, rule))?;
    Ok((train, test))
}

fn binarize(ratings: &[Rating], rule: Binarization) -> Vec<(ExternalId, ExternalId)> {
    ratings
        .iter()
        .filter(|r| rule.keeps(r.rating))
        .map(|r| (r.user, r.item))
        .collect()
}

/// Seeded random holdout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSpec {
    pub fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: BinaryRelation,
    pub test: BinaryRelation,
    pub warnings: Vec<Warning>,
}

/// Partitions the pair set; `round(fraction * len)` pairs go to the test side.
pub fn split(relation: &BinaryRelation, spec: &HoldoutSpec) -> Result<Split> {
    if !(spec.fraction > 0.0 && spec.fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction {} must lie in (0, 1)",
            spec.fraction
        )));
    }
    let mut pairs: Vec<(usize, usize)> = relation.pairs().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    pairs.shuffle(&mut rng);
    let n_test = (spec.fraction * pairs.len() as f64).round() as usize;
    let test_pairs = pairs.split_off(pairs.len() - n_test);

    let train =
        BinaryRelation::from_indexed_pairs(relation.users.clone(), relation.items.clone(), pairs)?;
    let test = BinaryRelation::from_indexed_pairs(
        relation.users.clone(),
        relation.items.clone(),
        test_pairs,
    )?;
    let warnings = (0..relation.n_users())
        .filter(|&u| !relation.user_items(u).is_empty() && train.user_items(u).is_empty())
        .map(|u| Warning::EmptyTrainingProfile {
            user: relation.users.id(u),
        })
        .collect();
    Ok(Split {
        train,
        test,
        warnings,
    })
}
