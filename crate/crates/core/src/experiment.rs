//! End-to-end experiments: load, split, build graphs, enhance, recommend,
//! evaluate, report.
//!
//! A [`Session`] keeps proximity graphs and closure statistics in memory so a
//! sweep over thresholds, `k` or `n` computes each closure once. With a cache
//! directory the statistics also persist on disk, keyed by the SHA-256 of the
//! training data.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::AlgebraChoice;
use crate::error::{Error, Result};
use crate::eval::{aggregate, EvalReport, Exclusion, UserEval};
use crate::graph::ProximityGraph;
use crate::io;
use crate::recommend::{
    Algorithm, EnhancementSummary, GraphKind, Recommender, RecommenderConfig,
    ScoredRecommendations, SemiMetricProfile,
};
use crate::relation::{self, Binarization, BinaryRelation, HoldoutSpec};
use crate::semimetric::ThresholdPolicy;
use crate::warning::Warning;

pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_HOLDOUT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DataSource {
    /// Published train/test files.
    FilePair { train: PathBuf, test: PathBuf },
    /// One ratings file with a seeded random holdout.
    Holdout {
        ratings: PathBuf,
        fraction: f64,
        seed: u64,
    },
}

impl DataSource {
    /// `u1.base`/`u1.test` when both exist in `dir`, else a holdout of `u.data`.
    pub fn from_dir(dir: &Path, seed: u64) -> DataSource {
        let (train, test) = (dir.join("u1.base"), dir.join("u1.test"));
        if train.is_file() && test.is_file() {
            DataSource::FilePair { train, test }
        } else {
            DataSource::Holdout {
                ratings: dir.join("u.data"),
                fraction: DEFAULT_HOLDOUT,
                seed,
            }
        }
    }

    fn paths(&self) -> Vec<&Path> {
        match self {
            DataSource::FilePair { train, test } => vec![train, test],
            DataSource::Holdout { ratings, .. } => vec![ratings],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub recommender: RecommenderConfig,
    pub top_n: usize,
    pub binarization: Binarization,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, algorithm: Algorithm) -> Self {
        ExperimentConfig {
            data,
            recommender: RecommenderConfig {
                algorithm,
                ..RecommenderConfig::default()
            },
            top_n: DEFAULT_TOP_N,
            binarization: Binarization::AnyRating,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_n == 0 {
            return Err(Error::InvalidParameter("top-n must be at least 1".into()));
        }
        if let DataSource::Holdout { fraction, .. } = self.data {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "holdout fraction {fraction} must lie in (0, 1)"
                )));
            }
        }
        self.recommender.validate()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Train/test relations sharing index maps, plus input checksums.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub source: DataSource,
    pub train: BinaryRelation,
    pub test: BinaryRelation,
    /// File name → SHA-256.
    pub checksums: BTreeMap<String, String>,
    pub warnings: Vec<Warning>,
}

impl Dataset {
    pub fn load(source: &DataSource, rule: Binarization) -> Result<Dataset> {
        let mut checksums = BTreeMap::new();
        let mut contents = Vec::new();
        for path in source.paths() {
            let bytes = read_file(path)?;
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            checksums.insert(name, sha256_hex(&bytes));
            contents.push(bytes);
        }
        let (train, test, warnings) = match source {
            DataSource::FilePair { .. } => {
                let (train, test) = relation::parse_file_pair(
                    contents[0].as_slice(),
                    contents[1].as_slice(),
                    rule,
                )?;
                (train, test, Vec::new())
            }
            DataSource::Holdout { fraction, seed, .. } => {
                let full = relation::parse_ratings(contents[0].as_slice(), rule)?;
                let split = relation::split(
                    &full,
                    &HoldoutSpec {
                        fraction: *fraction,
                        seed: *seed,
                    },
                )?;
                (split.train, split.test, split.warnings)
            }
        };
        Ok(Dataset {
            source: source.clone(),
            train,
            test,
            checksums,
            warnings,
        })
    }

    /// Digest identifying the training relation, for cache keys.
    pub fn train_digest(&self) -> String {
        let mut buf = Vec::with_capacity(self.train.len() * 12);
        self.train
            .write_ratings(&mut buf)
            .expect("writing to a Vec cannot fail");
        sha256_hex(&buf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: DataSource,
    pub checksums: BTreeMap<String, String>,
    pub split_note: String,
}

/// Machine-readable report. Contains nothing run-dependent (no timings), so
/// identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub enhancement: Option<EnhancementSummary>,
    pub evaluation: EvalReport,
    pub warnings: Vec<Warning>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-user rows followed by `#`-prefixed aggregate lines.
    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("user\tprecision\trecall\tf1\tagreement\tagreements\tpairs\ttest_size\n");
        for (user, u) in &self.evaluation.per_user {
            let _ = writeln!(
                out,
                "{user}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                u.precision, u.recall, u.f1, u.agreement, u.agreements, u.pairs, u.test_size
            );
        }
        let a = &self.evaluation.aggregate;
        let _ = writeln!(out, "# algorithm\t{}", self.config.recommender.algorithm);
        let _ = writeln!(out, "# top_n\t{}", self.evaluation.top_n);
        let _ = writeln!(out, "# users\t{}", a.users);
        let _ = writeln!(out, "# precision\t{}", a.precision);
        let _ = writeln!(out, "# recall\t{}", a.recall);
        let _ = writeln!(out, "# f1\t{}", a.f1);
        let _ = writeln!(out, "# agreement_macro\t{}", a.agreement_macro);
        let _ = writeln!(out, "# agreement_pooled\t{}", a.agreement_pooled);
        out
    }

    /// Short human-readable table.
    pub fn render(&self) -> String {
        let a = &self.evaluation.aggregate;
        let rc = &self.config.recommender;
        let mut out = String::new();
        let _ = writeln!(out, "algorithm        {}", rc.algorithm);
        if rc.algorithm.graph() == GraphKind::User {
            let _ = writeln!(out, "k                {}", rc.k_neighbors);
        }
        if let Some(e) = &self.enhancement {
            let _ = writeln!(
                out,
                "b threshold      {:.6} ({} of {} semi-metric pairs inserted)",
                e.threshold, e.inserted_edges, e.semimetric_pairs
            );
        }
        let _ = writeln!(
            out,
            "users evaluated  {} (excluded {})",
            a.users,
            self.evaluation.excluded.len()
        );
        let _ = writeln!(out, "top-n            {}", self.evaluation.top_n);
        let _ = writeln!(out, "precision        {:.4}", a.precision);
        let _ = writeln!(out, "recall           {:.4}", a.recall);
        let _ = writeln!(out, "F1               {:.4}", a.f1);
        let _ = writeln!(out, "agreement macro  {:.2}%", 100.0 * a.agreement_macro);
        let _ = writeln!(out, "agreement pooled {:.2}%", 100.0 * a.agreement_pooled);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub timings: Vec<StageTiming>,
    /// Graph the recommender used (enhanced for semi-metric algorithms).
    pub graph: ProximityGraph,
    pub rankings: Vec<ScoredRecommendations>,
}

fn split_note(source: &DataSource) -> String {
    match source {
        DataSource::FilePair { .. } => {
            "published train/test file pair; single fold, not cross-validated".into()
        }
        DataSource::Holdout { fraction, seed, .. } => format!(
            "seeded random holdout (fraction {fraction}, seed {seed}); stand-in for an unstated protocol"
        ),
    }
}

/// Holds one dataset and memoizes graphs and closure statistics across runs.
pub struct Session {
    dataset: Dataset,
    binarization: Binarization,
    cache_dir: Option<PathBuf>,
    graphs: HashMap<GraphKind, ProximityGraph>,
    profiles: HashMap<(GraphKind, AlgebraChoice), SemiMetricProfile>,
    train_digest: Option<String>,
    timings: Vec<StageTiming>,
}

impl Session {
    pub fn new(dataset: Dataset, binarization: Binarization) -> Self {
        Session {
            dataset,
            binarization,
            cache_dir: None,
            graphs: HashMap::new(),
            profiles: HashMap::new(),
            train_digest: None,
            timings: Vec::new(),
        }
    }

    pub fn load(source: &DataSource, binarization: Binarization) -> Result<Self> {
        let start = Instant::now();
        let dataset = Dataset::load(source, binarization).map_err(|e| e.in_stage("load"))?;
        let mut session = Session::new(dataset, binarization);
        session.record("load", start);
        Ok(session)
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    fn record(&mut self, stage: &'static str, start: Instant) {
        self.timings.push(StageTiming {
            stage,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    pub fn graph(&mut self, kind: GraphKind) -> &ProximityGraph {
        if !self.graphs.contains_key(&kind) {
            let start = Instant::now();
            let g = kind.build(&self.dataset.train);
            self.record("proximity", start);
            self.graphs.insert(kind, g);
        }
        &self.graphs[&kind]
    }

    fn cache_path(&mut self, kind: GraphKind, algebra: AlgebraChoice) -> Option<PathBuf> {
        let dir = self.cache_dir.clone()?;
        let digest = self
            .train_digest
            .get_or_insert_with(|| self.dataset.train_digest())
            .clone();
        let key =
            sha256_hex(format!("{digest}/{kind:?}/{algebra}/{:?}", self.binarization).as_bytes());
        Some(dir.join(format!("semimetric-{}.tsv", &key[..16])))
    }

    pub fn profile(
        &mut self,
        kind: GraphKind,
        algebra: AlgebraChoice,
    ) -> Result<&SemiMetricProfile> {
        if !self.profiles.contains_key(&(kind, algebra)) {
            let cached = self.cache_path(kind, algebra);
            let graph = self.graph(kind).clone();
            let start = Instant::now();
            let profile = match cached.as_deref().filter(|p| p.is_file()) {
                Some(path) => {
                    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
                    let stats = io::read_stats(std::io::BufReader::new(file), graph.labels())?;
                    self.record("closure (cached)", start);
                    SemiMetricProfile { stats }
                }
                None => {
                    let p = SemiMetricProfile::compute(&graph, algebra.algebra())
                        .map_err(|e| e.in_stage("closure"))?;
                    self.record("closure", start);
                    if let Some(path) = cached {
                        self.store(&path, &p, &graph)?;
                    }
                    p
                }
            };
            self.profiles.insert((kind, algebra), profile);
        }
        Ok(&self.profiles[&(kind, algebra)])
    }

    fn store(
        &self,
        path: &Path,
        profile: &SemiMetricProfile,
        graph: &ProximityGraph,
    ) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let tmp = path.with_extension("tmp");
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        io::write_stats(
            &profile.stats,
            graph.labels(),
            std::io::BufWriter::new(file),
        )?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// Runs one configuration against the loaded dataset.
    pub fn run(&mut self, config: &ExperimentConfig) -> Result<RunOutput> {
        config.validate()?;
        let rc = config.recommender.clone();
        let kind = rc.algorithm.graph();
        let graph = self.graph(kind).clone();
        let profile = if rc.algorithm.is_semimetric() {
            Some(self.profile(kind, rc.algebra)?.clone())
        } else {
            None
        };

        let start = Instant::now();
        let dataset = self.dataset.clone();
        let (train, test) = (&dataset.train, &dataset.test);
        let recommender = Recommender::from_parts(train, graph, profile.as_ref(), rc)
            .map_err(|e| e.in_stage("enhance"))?;
        let enhance_done = Instant::now();

        let mut excluded = BTreeMap::new();
        let mut users = Vec::new();
        let mut users_without_test = 0;
        for u in 0..train.n_users() {
            if test.user_items(u).is_empty() {
                users_without_test += 1;
            } else if train.user_items(u).is_empty() {
                excluded.insert(train.users().id(u), Exclusion::EmptyTrainingProfile);
            } else {
                users.push(u);
            }
        }
        let mut warnings = self.dataset.warnings.clone();
        warnings.extend(recommender.warnings.iter().cloned());
        let mut per_user = BTreeMap::new();
        let mut rankings = Vec::with_capacity(users.len());
        for (&u, rec) in users.iter().zip(recommender.recommend_many(&users)) {
            let rec = rec.map_err(|e| e.in_stage("recommend"))?;
            warnings.extend(rec.warnings.iter().cloned());
            match UserEval::new(&rec, test.user_items(u), config.top_n) {
                Some(ev) => {
                    per_user.insert(rec.user, ev);
                }
                None => {
                    excluded.insert(rec.user, Exclusion::NoRankablePairs);
                }
            }
            rankings.push(rec);
        }
        let aggregate = aggregate(per_user.values()).map_err(|e| e.in_stage("evaluate"))?;
        self.timings.push(StageTiming {
            stage: "enhance",
            seconds: (enhance_done - start).as_secs_f64(),
        });
        self.record("recommend+evaluate", enhance_done);

        let report = ExperimentReport {
            config: config.clone(),
            provenance: Provenance {
                source: self.dataset.source.clone(),
                checksums: self.dataset.checksums.clone(),
                split_note: split_note(&self.dataset.source),
            },
            enhancement: recommender.enhancement.clone(),
            evaluation: EvalReport {
                top_n: config.top_n,
                aggregate,
                per_user,
                excluded,
                users_without_test,
            },
            warnings,
        };
        Ok(RunOutput {
            report,
            timings: std::mem::take(&mut self.timings),
            graph: recommender.graph().clone(),
            rankings,
        })
    }
}

/// Loads the data and runs one configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut session = Session::load(&config.data, config.binarization)?;
    session.run(config)
}

/// Axes of a parameter sweep; empty axes keep the base configuration's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub algorithms: Vec<Algorithm>,
    pub k: Vec<usize>,
    pub top_n: Vec<usize>,
    pub policies: Vec<ThresholdPolicy>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.algorithms.is_empty()
            && self.k.is_empty()
            && self.top_n.is_empty()
            && self.policies.is_empty()
    }

    /// Cartesian product over the non-empty axes.
    pub fn expand(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        fn axis<T: Clone>(values: &[T], fallback: T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback]
            } else {
                values.to_vec()
            }
        }
        let rc = &base.recommender;
        let mut out = Vec::new();
        for algorithm in axis(&self.algorithms, rc.algorithm) {
            for k in axis(&self.k, rc.k_neighbors) {
                for policy in axis(&self.policies, rc.threshold_policy) {
                    for top_n in axis(&self.top_n, base.top_n) {
                        let mut c = base.clone();
                        c.recommender.algorithm = algorithm;
                        c.recommender.k_neighbors = k;
                        c.recommender.threshold_policy = policy;
                        c.top_n = top_n;
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub config: ExperimentConfig,
    pub report: Option<ExperimentReport>,
    pub error: Option<String>,
}

/// Runs every grid point; failures are recorded and the sweep continues.
pub fn sweep(
    session: &mut Session,
    base: &ExperimentConfig,
    grid: &SweepGrid,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    Ok(grid
        .expand(base)
        .into_iter()
        .map(|config| match session.run(&config) {
            Ok(out) => SweepPoint {
                config,
                report: Some(out.report),
                error: None,
            },
            Err(e) => {
                log::warn!("sweep point failed: {e}");
                SweepPoint {
                    config,
                    report: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect())
}

fn policy_label(p: &ThresholdPolicy) -> String {
    match p {
        ThresholdPolicy::Explicit(t) => format!("b>={t}"),
        ThresholdPolicy::Percentile(q) => format!("top {q}"),
        ThresholdPolicy::PowerLawCutoff { .. } => "power-law".into(),
    }
}

/// One line per grid point.
pub fn sweep_table(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "algorithm\tk\tpolicy\ttop_n\tthreshold\tinserted\tF1\tagreement_macro\tagreement_pooled\n",
    );
    for p in points {
        let rc = &p.config.recommender;
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t",
            rc.algorithm,
            rc.k_neighbors,
            policy_label(&rc.threshold_policy),
            p.config.top_n
        );
        match (&p.report, &p.error) {
            (Some(r), _) => {
                let a = &r.evaluation.aggregate;
                let (t, ins) = r
                    .enhancement
                    .as_ref()
                    .map(|e| (format!("{:.6}", e.threshold), e.inserted_edges.to_string()))
                    .unwrap_or_else(|| ("-".into(), "-".into()));
                let _ = writeln!(
                    out,
                    "{t}\t{ins}\t{:.4}\t{:.4}\t{:.4}",
                    a.f1, a.agreement_macro, a.agreement_pooled
                );
            }
            (None, e) => {
                let _ = writeln!(out, "error: {}", e.as_deref().unwrap_or("unknown"));
            }
        }
    }
    out
}
