//! Documents, deterministic splits, budget samples and text representations.

mod budget;
mod dense;
pub mod io;
pub mod stem;
mod vocab;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

pub use budget::{sample_budgets, BudgetSample, DEFAULT_BUDGETS};
pub use dense::{vectorize_dense, vectorize_dense_all, DenseVector, Embeddings};
pub use vocab::{
    build_vocabulary, tokenize, tokenize_and_stem, vectorize_bow, vectorize_bow_all, SparseCounts,
    Vocabulary, DEFAULT_VOCAB_CAP,
};

pub const MIN_SPLIT_DOCS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: u64,
    pub text: String,
    #[serde(default, rename = "label", skip_serializing_if = "Option::is_none")]
    pub gold_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl Document {
    pub fn new(id: u64, text: impl Into<String>) -> Self {
        Document {
            id,
            text: text.into(),
            gold_label: None,
            split: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.gold_label = Some(label.into());
        self
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }
}

/// Train/dev/test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const fn new(train: f64, dev: f64, test: f64) -> Self {
        SplitRatios { train, dev, test }
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.dev, self.test];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadRatios { sum });
        }
        Ok(())
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios::new(0.7, 0.1, 0.2)
    }
}

/// Apportion `total` items by `weights` with the largest-remainder method.
/// Remainder ties go to the earlier entry.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut shares: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        shares[i] += 1;
    }
    shares
}

/// A validated collection of documents, every one assigned to a split.
///
/// Documents are stored sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    docs: Vec<Document>,
    position: HashMap<u64, usize>,
    labels: Vec<String>,
}

impl Corpus {
    /// Wrap documents that already carry split assignments.
    pub fn from_split_documents(mut docs: Vec<Document>) -> Result<Self> {
        validate_documents(&docs)?;
        if let Some(doc) = docs.iter().find(|d| d.split.is_none()) {
            return Err(Error::InvalidConfig(format!(
                "document {} has no split assignment",
                doc.id
            )));
        }
        docs.sort_by_key(|d| d.id);
        let position = docs.iter().enumerate().map(|(i, d)| (d.id, i)).collect();
        let labels = docs
            .iter()
            .filter_map(|d| d.gold_label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Corpus {
            docs,
            position,
            labels,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Document> {
        self.position.get(&id).map(|&i| &self.docs[i])
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Document> + '_ {
        self.docs.iter().filter(move |d| d.split == Some(split))
    }

    pub fn split_ids(&self, split: Split) -> Vec<u64> {
        self.split(split).map(|d| d.id).collect()
    }

    pub fn split_len(&self, split: Split) -> usize {
        self.split(split).count()
    }

    /// Gold labels in lexicographic order; a label's position is its index.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Label index of a document's gold label.
    pub fn gold_index(&self, id: u64) -> Option<usize> {
        self.get(id)
            .and_then(|d| d.gold_label.as_deref())
            .and_then(|l| self.label_index(l))
    }

    pub fn split_sizes(&self) -> BTreeMap<Split, usize> {
        let mut sizes = BTreeMap::new();
        for split in [Split::Train, Split::Dev, Split::Test] {
            sizes.insert(split, self.split_len(split));
        }
        sizes
    }
}

fn validate_documents(docs: &[Document]) -> Result<()> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut seen = BTreeSet::new();
    for doc in docs {
        if !seen.insert(doc.id) {
            return Err(Error::DuplicateId(doc.id));
        }
        if doc.text.trim().is_empty() {
            return Err(Error::EmptyText { id: doc.id });
        }
    }
    Ok(())
}

/// Assign documents to train/dev/test.
///
/// Split sizes are the largest-remainder shares of the ratios and the
/// assignment is a seeded shuffle. If every document already carries a split
/// the input passes through unchanged.
pub fn split_corpus(docs: Vec<Document>, ratios: SplitRatios, seed: u64) -> Result<Corpus> {
    validate_documents(&docs)?;
    ratios.validate()?;
    let presplit = docs.iter().filter(|d| d.split.is_some()).count();
    if presplit == docs.len() {
        return Corpus::from_split_documents(docs);
    }
    if presplit > 0 {
        return Err(Error::InvalidConfig(format!(
            "{presplit} of {} documents carry a split; expected all or none",
            docs.len()
        )));
    }
    if docs.len() < MIN_SPLIT_DOCS {
        return Err(Error::CorpusTooSmall {
            found: docs.len(),
            required: MIN_SPLIT_DOCS,
        });
    }
    let mut docs = docs;
    docs.sort_by_key(|d| d.id);
    let sizes = largest_remainder(&[ratios.train, ratios.dev, ratios.test], docs.len());
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng_for(seed, &[stream::SPLIT]));
    let splits = [Split::Train, Split::Dev, Split::Test];
    let mut cursor = 0;
    for (split, size) in splits.into_iter().zip(sizes) {
        for &i in &order[cursor..cursor + size] {
            docs[i].split = Some(split);
        }
        cursor += size;
    }
    Corpus::from_split_documents(docs)
}

/// Uniformly subsample the train and test splits down to the given caps.
/// Dev documents are kept; dropped documents leave the corpus.
pub fn trim_corpus(corpus: Corpus, train_cap: usize, test_cap: usize, seed: u64) -> Result<Corpus> {
    if train_cap == 0 || test_cap == 0 {
        return Err(Error::InvalidConfig("trim caps must be positive".into()));
    }
    let mut keep: BTreeSet<u64> = corpus.split_ids(Split::Dev).into_iter().collect();
    for (split, cap, tag) in [(Split::Train, train_cap, 0u64), (Split::Test, test_cap, 1)] {
        let mut ids = corpus.split_ids(split);
        if ids.len() > cap {
            ids.shuffle(&mut rng_for(seed, &[stream::TRIM, tag]));
            ids.truncate(cap);
        }
        keep.extend(ids);
    }
    let docs = corpus
        .docs
        .into_iter()
        .filter(|d| keep.contains(&d.id))
        .collect();
    Corpus::from_split_documents(docs)
}
