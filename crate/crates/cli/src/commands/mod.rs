mod baseline;
mod eval;
mod prepare;
mod stages;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use pseudoclust::cluster::Representation;
use pseudoclust::corpus::io::{read_bow_coo, read_corpus, read_dense};
use pseudoclust::corpus::{DenseVector, SparseCounts};
use pseudoclust::digest::json_digest;
use pseudoclust::{Algorithm, Corpus, Split};

use crate::config::{RunConfig, TrimCaps};
use crate::error::{CliError, Result};
use crate::manifest::Workspace;

pub use baseline::baseline;
pub use eval::{embed_stats, eval};
pub use prepare::prepare;
pub use stages::{cluster, export};

pub(crate) const CORPUS: &str = "corpus.jsonl";
pub(crate) const SPLIT: &str = "split.jsonl";
pub(crate) const VOCABULARY: &str = "vocabulary.jsonl";
pub(crate) const BOW_TRAIN: &str = "bow_train.coo";
pub(crate) const BOW_TEST: &str = "bow_test.coo";
pub(crate) const DENSE_TRAIN: &str = "dense_train.jsonl";
pub(crate) const DENSE_TEST: &str = "dense_test.jsonl";
pub(crate) const BUDGET_SAMPLES: &str = "budget_samples.jsonl";
pub(crate) const CONFIG: &str = "config.toml";
pub(crate) const PARTITION: &str = "partition.jsonl";
pub(crate) const PSEUDOLABELS: &str = "pseudolabels.jsonl";

/// The part of the configuration `prepare` depends on.
#[derive(Serialize)]
struct PrepareKey<'a> {
    corpus: Option<&'a Path>,
    embeddings: Option<&'a Path>,
    seed: u64,
    split: pseudoclust::corpus::SplitRatios,
    trim: Option<TrimCaps>,
    vocab_cap: usize,
    budgets: &'a [usize],
    repetitions: usize,
}

pub(crate) fn prepare_digest(config: &RunConfig) -> String {
    json_digest(&PrepareKey {
        corpus: config.corpus.as_deref(),
        embeddings: config.embeddings.as_deref(),
        seed: config.seed,
        split: config.split,
        trim: config.trim,
        vocab_cap: config.vocab_cap,
        budgets: &config.budgets,
        repetitions: config.repetitions,
    })
}

/// Artifacts of `prepare`, loaded for a downstream stage.
pub(crate) struct Prepared {
    pub corpus: Corpus,
    pub train_ids: Vec<u64>,
    pub test_ids: Vec<u64>,
    pub vocab_size: usize,
    pub bow_train: Vec<SparseCounts>,
    pub bow_test: Vec<SparseCounts>,
    pub dense_train: Option<Vec<DenseVector>>,
    pub dense_test: Option<Vec<DenseVector>>,
    /// Digests of the files read, for the consuming stage's record.
    pub digests: BTreeMap<String, String>,
}

impl Prepared {
    pub fn load(ws: &Workspace, config: &RunConfig) -> Result<Self> {
        let record = ws.require("prepare", Some(&prepare_digest(config)))?;
        let corpus = read_corpus(&ws.path(CORPUS))?;
        let train_ids = corpus.split_ids(Split::Train);
        let test_ids = corpus.split_ids(Split::Test);
        let (vocab_size, bow_train) = read_bow_coo(&ws.path(BOW_TRAIN), &train_ids)?;
        let (_, bow_test) = read_bow_coo(&ws.path(BOW_TEST), &test_ids)?;
        let (dense_train, dense_test) = if record.artifacts.contains_key(DENSE_TRAIN) {
            (
                Some(dense_in_order(&ws.path(DENSE_TRAIN), &train_ids)?),
                Some(dense_in_order(&ws.path(DENSE_TEST), &test_ids)?),
            )
        } else {
            (None, None)
        };
        Ok(Prepared {
            corpus,
            train_ids,
            test_ids,
            vocab_size,
            bow_train,
            bow_test,
            dense_train,
            dense_test,
            digests: record.artifacts.clone(),
        })
    }

    pub fn inputs(&self, names: &[&str]) -> BTreeMap<String, String> {
        names
            .iter()
            .filter_map(|n| self.digests.get(*n).map(|d| (n.to_string(), d.clone())))
            .collect()
    }

    pub fn train_representation(&self, algorithm: Algorithm) -> Result<Representation<'_>> {
        if algorithm.is_sparse() {
            Ok(Representation::Sparse(&self.bow_train))
        } else {
            Ok(Representation::Dense(self.dense_train()?))
        }
    }

    pub fn dense_train(&self) -> Result<&[DenseVector]> {
        self.dense_train.as_deref().ok_or_else(no_dense)
    }

    pub fn dense_test(&self) -> Result<&[DenseVector]> {
        self.dense_test.as_deref().ok_or_else(no_dense)
    }
}

fn no_dense() -> CliError {
    CliError::Config("dense features need word vectors: set `embeddings` and re-run `prepare`".into())
}

fn dense_in_order(path: &Path, ids: &[u64]) -> Result<Vec<DenseVector>> {
    let (_, mut by_id) = read_dense(path)?;
    ids.iter()
        .map(|id| {
            by_id.remove(id).ok_or_else(|| {
                CliError::Stale(format!("{} has no vector for document {id}", path.display()))
            })
        })
        .collect()
}

/// Artifact-name-safe tag.
pub(crate) fn check_tag(tag: &str) -> Result<()> {
    if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(CliError::Config(format!("tag {tag:?} may only hold letters, digits, '_' and '-'")));
    }
    Ok(())
}
