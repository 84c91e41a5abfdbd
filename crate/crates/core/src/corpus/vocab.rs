use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stem::stem;
use super::Document;

pub const DEFAULT_VOCAB_CAP: usize = 10_000;

/// Lowercase and split on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn tokenize_and_stem(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| stem(t)).collect()
}

/// Capped, frequency-ordered stemmed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    frequencies: Vec<u64>,
    index: HashMap<String, usize>,
    size_cap: usize,
}

impl Vocabulary {
    /// Build from `(term, frequency)` pairs already in vocabulary order.
    pub fn from_terms(entries: Vec<(String, u64)>, size_cap: usize) -> Self {
        let mut entries = entries;
        entries.truncate(size_cap);
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i))
            .collect();
        let (terms, frequencies) = entries.into_iter().unzip();
        Vocabulary {
            terms,
            frequencies,
            index,
            size_cap,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    pub fn size_cap(&self) -> usize {
        self.size_cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// The `cap` most frequent stemmed terms; equal frequencies are ordered
/// lexicographically.
pub fn build_vocabulary<'a, I>(train_docs: I, cap: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a Document>,
{
    let texts: Vec<&str> = train_docs.into_iter().map(|d| d.text.as_str()).collect();
    let counts = texts
        .par_iter()
        .fold(HashMap::<String, u64>::new, |mut acc, text| {
            for token in tokenize_and_stem(text) {
                *acc.entry(token).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_terms(entries, cap.max(1))
}

/// Sparse term counts over a fixed vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseCounts {
    indices: Vec<u32>,
    values: Vec<u32>,
    total: u64,
}

impl SparseCounts {
    /// Build from `(index, count)` pairs; duplicates are summed and zero
    /// counts dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut pairs: Vec<(u32, u32)> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let mut indices: Vec<u32> = Vec::with_capacity(pairs.len());
        let mut values: Vec<u32> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let total = values.iter().map(|&v| v as u64).sum();
        SparseCounts {
            indices,
            values,
            total,
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    pub fn count(&self, term: usize) -> u32 {
        match self.indices.binary_search(&(term as u32)) {
            Ok(p) => self.values[p],
            Err(_) => 0,
        }
    }

    /// Expand into a dense real vector of length `dim`.
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v as f64;
        }
        out
    }
}

/// Count in-vocabulary stemmed tokens; out-of-vocabulary tokens are dropped.
pub fn vectorize_bow(doc: &Document, vocab: &Vocabulary) -> SparseCounts {
    SparseCounts::from_pairs(
        tokenize_and_stem(&doc.text)
            .iter()
            .filter_map(|t| vocab.position(t))
            .map(|p| (p as u32, 1)),
    )
}

pub fn vectorize_bow_all(docs: &[&Document], vocab: &Vocabulary) -> Vec<SparseCounts> {
    docs.par_iter().map(|d| vectorize_bow(d, vocab)).collect()
}
