//! The `pseudoclust` command line: prepare, cluster, export-pseudolabels,
//! baseline, eval and embed-stats over one output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pseudoclust::Algorithm;

pub use config::RunConfig;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pseudoclust", version, about = "Clustering-based pseudo-labeling pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override the config file.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// TOML config; defaults to `<out>/config.toml` when that exists.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_algorithm)]
    pub algorithm: Option<Algorithm>,
    #[arg(long, global = true)]
    pub clusters: Option<usize>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Comma-separated labeled-sample sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub budgets: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    #[arg(long, global = true)]
    pub filter_fraction: Option<f64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub permutations: Option<usize>,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: pseudoclust::Error| e.to_string())
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Split, trim and vectorize the corpus; draw budget samples.
    Prepare,
    /// Cluster the train split.
    Cluster,
    /// Write pseudolabels.jsonl from the partition.
    ExportPseudolabels,
    /// Train a reference classifier per budget sample and predict the test split.
    Baseline {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long, value_enum, default_value_t = FeatureKind::Bow)]
        features: FeatureKind,
    },
    /// Score predictions and write the report.
    Eval {
        /// Extra predictions files, e.g. from an external trainer.
        predictions: Vec<PathBuf>,
    },
    /// Embedding dispersion (ED / NED with a permutation test).
    EmbedStats {
        /// Matrix file (`.bin` for binary, text otherwise); defaults to the
        /// averaged test embeddings from `prepare`.
        #[arg(long, requires = "ids")]
        matrix: Option<PathBuf>,
        /// One doc_id per line, aligned with the matrix rows.
        #[arg(long)]
        ids: Option<PathBuf>,
        #[arg(long, default_value = "averaged")]
        source: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Nb,
    Svm,
    ClusterMajority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    Bow,
    Dense,
}

impl Overrides {
    /// Base config (explicit file, else `<out>/config.toml`, else defaults)
    /// with the flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let default_out = self.out.clone().unwrap_or_else(|| RunConfig::default().out);
        let mut config = match &self.config {
            Some(path) => {
                let mut c = RunConfig::load(path)?;
                let base = path.parent().map(PathBuf::from).unwrap_or_default();
                for p in [&mut c.corpus, &mut c.embeddings].into_iter().flatten() {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
                if c.out.is_relative() {
                    c.out = base.join(&c.out);
                }
                c
            }
            None => {
                let saved = default_out.join("config.toml");
                if saved.exists() { RunConfig::load(&saved)? } else { RunConfig::default() }
            }
        };
        if let Some(v) = &self.out {
            config.out = v.clone();
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.algorithm {
            config.cluster.algorithm = v;
        }
        if let Some(v) = self.clusters {
            config.cluster.n_clusters = v;
        }
        if let Some(v) = self.restarts {
            config.cluster.restarts = v;
        }
        if let Some(v) = self.max_iters {
            config.cluster.max_iterations = v;
        }
        if let Some(v) = &self.budgets {
            config.budgets = v.clone();
        }
        if let Some(v) = self.reps {
            config.repetitions = v;
        }
        if let Some(v) = self.filter_fraction {
            config.filter_fraction = v;
        }
        if let Some(v) = &self.corpus {
            config.corpus = Some(v.clone());
        }
        if let Some(v) = &self.embeddings {
            config.embeddings = Some(v.clone());
        }
        if let Some(v) = self.permutations {
            config.permutations = v;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.overrides.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let config = cli.overrides.resolve()?;
    match &cli.command {
        Command::Prepare => commands::prepare(&config),
        Command::Cluster => commands::cluster(&config),
        Command::ExportPseudolabels => commands::export(&config),
        Command::Baseline { model, features } => commands::baseline(&config, *model, *features),
        Command::Eval { predictions } => commands::eval(&config, predictions),
        Command::EmbedStats { matrix, ids, source } => {
            commands::embed_stats(&config, matrix.as_deref().zip(ids.as_deref()), source)
        }
    }
}
