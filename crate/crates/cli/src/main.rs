use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semirec_core::experiment::{
    self, DataSource, ExperimentConfig, RunOutput, Session, StageTiming, SweepGrid,
    DEFAULT_HOLDOUT, DEFAULT_TOP_N,
};
use semirec_core::io;
use semirec_core::recommend::{RecommenderConfig, DEFAULT_K};
use semirec_core::relation::Binarization;
use semirec_core::semimetric::{Qualification, ThresholdPolicy};
use semirec_core::{AlgebraChoice, Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "semirec",
    version,
    about = "Semi-metric recommender experiments on MovieLens-format ratings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its report.
    Run(RunArgs),
    /// Run a parameter grid and print a summary table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Ratings file, or a directory holding u1.base/u1.test or u.data.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    data: Option<PathBuf>,
    /// Training ratings (file-pair mode).
    #[arg(long, requires = "test")]
    train: Option<PathBuf>,
    /// Test ratings (file-pair mode).
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// Hold out this fraction of `--data` at random instead of using a published split.
    #[arg(long)]
    holdout: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only ratings at or above this value.
    #[arg(long)]
    min_rating: Option<i64>,
    /// Directory for cached closure statistics.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "item-sm")]
    algorithm: String,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    top_n: usize,
    /// Neighbourhood size for user-based algorithms.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Fixed `b` threshold.
    #[arg(long, group = "policy")]
    b_threshold: Option<f64>,
    /// Keep the upper fraction of the `b` distribution.
    #[arg(long, group = "policy")]
    b_percentile: Option<f64>,
    /// Threshold at the power-law cutoff of the `b` distribution (default).
    #[arg(long, group = "policy")]
    b_powerlaw: bool,
    /// Percentile used when the power-law fit fails.
    #[arg(long, default_value_t = 0.1)]
    fallback_percentile: f64,
    #[arg(long, default_value = "metric")]
    algebra: String,
    /// Require both directed `b` values to reach the threshold.
    #[arg(long)]
    require_both: bool,
    /// Keep already-rated items in rankings.
    #[arg(long)]
    include_profile: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Structured,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Report destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    format: Format,
    /// Write the graph used for recommendation as an edge list.
    #[arg(long)]
    export_graph: Option<PathBuf>,
    /// Write semi-metric statistics (semi-metric algorithms only).
    #[arg(long)]
    export_stats: Option<PathBuf>,
    /// Write per-user rankings.
    #[arg(long)]
    export_rankings: Option<PathBuf>,
    /// Rows per user in the rankings export (default: top-n).
    #[arg(long)]
    rankings_limit: Option<usize>,
    /// Write stage timings as TSV.
    #[arg(long)]
    timings: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    top_ns: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    b_percentiles: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    b_thresholds: Vec<f64>,
    /// Include the power-law cutoff as a threshold grid point.
    #[arg(long)]
    with_powerlaw: bool,
    /// Summary table destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one structured report per grid point here.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl DataArgs {
    fn source(&self) -> Result<DataSource, Error> {
        match (&self.data, &self.train, &self.test) {
            (_, Some(train), Some(test)) => {
                if self.holdout.is_some() {
                    return Err(usage("--holdout cannot be combined with --train/--test"));
                }
                Ok(DataSource::FilePair {
                    train: train.clone(),
                    test: test.clone(),
                })
            }
            (Some(path), _, _) => {
                if path.is_dir() {
                    match self.holdout {
                        Some(fraction) => Ok(DataSource::Holdout {
                            ratings: path.join("u.data"),
                            fraction,
                            seed: self.seed,
                        }),
                        None => Ok(DataSource::from_dir(path, self.seed)),
                    }
                } else {
                    Ok(DataSource::Holdout {
                        ratings: path.clone(),
                        fraction: self.holdout.unwrap_or(DEFAULT_HOLDOUT),
                        seed: self.seed,
                    })
                }
            }
            _ => Err(usage("give --data or both --train and --test")),
        }
    }

    fn binarization(&self) -> Binarization {
        self.min_rating
            .map(Binarization::MinRating)
            .unwrap_or(Binarization::AnyRating)
    }

    fn session(&self, source: &DataSource) -> Result<Session, Error> {
        let session = Session::load(source, self.binarization())?;
        Ok(match &self.cache_dir {
            Some(dir) => session.with_cache_dir(dir),
            None => session,
        })
    }

    fn init_threads(&self) -> Result<(), Error> {
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(usage("--threads must be at least 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(format!("cannot configure thread pool: {e}")))?;
        }
        Ok(())
    }
}

impl ModelArgs {
    fn policy(&self) -> ThresholdPolicy {
        if let Some(t) = self.b_threshold {
            ThresholdPolicy::Explicit(t)
        } else if let Some(q) = self.b_percentile {
            ThresholdPolicy::Percentile(q)
        } else {
            ThresholdPolicy::PowerLawCutoff {
                fallback_percentile: self.fallback_percentile,
            }
        }
    }

    fn config(
        &self,
        data: DataSource,
        binarization: Binarization,
    ) -> Result<ExperimentConfig, Error> {
        let config = ExperimentConfig {
            data,
            recommender: RecommenderConfig {
                algorithm: self.algorithm.parse()?,
                k_neighbors: self.k,
                threshold_policy: self.policy(),
                algebra: self.algebra.parse::<AlgebraChoice>()?,
                qualification: if self.require_both {
                    Qualification::Both
                } else {
                    Qualification::Either
                },
                exclude_profile: !self.include_profile,
            },
            top_n: self.top_n,
            binarization,
        };
        config.validate()?;
        Ok(config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn timings_tsv(timings: &[StageTiming]) -> String {
    let mut s = String::from("stage\tseconds\n");
    for t in timings {
        s.push_str(&format!("{}\t{:.3}\n", t.stage, t.seconds));
    }
    s
}

fn run(args: RunArgs) -> Result<(), Error> {
    args.data.init_threads()?;
    let source = args.data.source()?;
    let config = args
        .model
        .config(source.clone(), args.data.binarization())?;
    let mut session = args.data.session(&source)?;
    let kind = config.recommender.algorithm.graph();
    let RunOutput {
        report,
        timings,
        graph,
        rankings,
    } = session.run(&config)?;

    let text = match args.format {
        Format::Structured => report.to_json() + "\n",
        Format::Tsv => report.to_tsv(),
    };
    emit(args.out.as_deref(), &text)?;

    if let Some(path) = &args.export_graph {
        io::write_proximity_edges(&graph, create(path)?)?;
    }
    if let Some(path) = &args.export_stats {
        if !config.recommender.algorithm.is_semimetric() {
            return Err(usage("--export-stats needs a semi-metric algorithm"));
        }
        let labels = session.graph(kind).labels().clone();
        let profile = session.profile(kind, config.recommender.algebra)?;
        io::write_stats(&profile.stats, &labels, create(path)?)?;
    }
    if let Some(path) = &args.export_rankings {
        let limit = args.rankings_limit.unwrap_or(config.top_n);
        io::write_rankings(
            &rankings,
            session.dataset().train.items(),
            Some(limit),
            create(path)?,
        )?;
    }
    if let Some(path) = &args.timings {
        emit(Some(path), &timings_tsv(&timings))?;
    }

    eprint!("{}", report.render());
    for t in &timings {
        eprintln!("  {:<20} {:>8.3}s", t.stage, t.seconds);
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    args.data.init_threads()?;
    let source = args.data.source()?;
    let base = args
        .model
        .config(source.clone(), args.data.binarization())?;
    let mut policies: Vec<ThresholdPolicy> = args
        .b_percentiles
        .iter()
        .map(|&q| ThresholdPolicy::Percentile(q))
        .chain(
            args.b_thresholds
                .iter()
                .map(|&t| ThresholdPolicy::Explicit(t)),
        )
        .collect();
    if args.with_powerlaw {
        policies.push(ThresholdPolicy::PowerLawCutoff {
            fallback_percentile: args.model.fallback_percentile,
        });
    }
    let grid = SweepGrid {
        algorithms: args
            .algorithms
            .iter()
            .map(|a| a.parse())
            .collect::<Result<_, _>>()?,
        k: args.ks.clone(),
        top_n: args.top_ns.clone(),
        policies,
    };
    if grid.is_empty() {
        return Err(usage("sweep grid is empty; give at least one of --algorithms, --ks, --top-ns, --b-percentiles, --b-thresholds, --with-powerlaw"));
    }
    let mut session = args.data.session(&source)?;
    let points = experiment::sweep(&mut session, &base, &grid)?;
    if let Some(dir) = &args.report_dir {
        for (n, p) in points.iter().enumerate() {
            if let Some(r) = &p.report {
                emit(
                    Some(&dir.join(format!("point-{n:03}.json"))),
                    &(r.to_json() + "\n"),
                )?;
            }
        }
    }
    emit(args.out.as_deref(), &experiment::sweep_table(&points))?;
    let failed = points.iter().filter(|p| p.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} grid points failed", points.len());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Compute => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
