use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// Labeled embeddings of one model state.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub doc_ids: Vec<u64>,
    pub vectors: Vec<Vec<f64>>,
    /// Class index per vector.
    pub labels: Vec<usize>,
    pub source: String,
}

impl EmbeddingSet {
    pub fn new(doc_ids: Vec<u64>, vectors: Vec<Vec<f64>>, labels: Vec<usize>, source: impl Into<String>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::TooFewSamples { found: 0, required: 1 });
        }
        if doc_ids.len() != vectors.len() {
            return Err(Error::LengthMismatch { left: doc_ids.len(), right: vectors.len() });
        }
        if labels.len() != vectors.len() {
            return Err(Error::LengthMismatch { left: labels.len(), right: vectors.len() });
        }
        let dim = vectors[0].len();
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("embedding entries must be finite".into()));
        }
        Ok(EmbeddingSet { doc_ids, vectors, labels, source: source.into() })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }
}

/// Mean Euclidean distance of each vector to its class centroid.
pub fn embedding_distance(set: &EmbeddingSet) -> f64 {
    distance_with_labels(&set.vectors, &set.labels, set.n_classes())
}

fn distance_with_labels(vectors: &[Vec<f64>], labels: &[usize], n_classes: usize) -> f64 {
    let dim = vectors[0].len();
    let mut centroids = vec![vec![0.0; dim]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (v, &l) in vectors.iter().zip(labels) {
        counts[l] += 1;
        for (c, x) in centroids[l].iter_mut().zip(v) {
            *c += x;
        }
    }
    for (c, &n) in centroids.iter_mut().zip(&counts) {
        if n > 0 {
            c.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    let total: f64 = vectors
        .iter()
        .zip(labels)
        .map(|(v, &l)| {
            v.iter()
                .zip(&centroids[l])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    total / vectors.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for PermutationPlan {
    fn default() -> Self {
        PermutationPlan { repetitions: 1000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NedResult {
    pub ned: f64,
    pub p_value: f64,
    pub observed: f64,
    /// Mean distance under uniformly permuted labels.
    pub permuted_mean: f64,
    pub repetitions: usize,
    /// Only one class is present, so the ratio is 1 by construction.
    pub single_class: bool,
}

/// Distance normalized by its expectation under random label permutations,
/// with the one-sided add-one permutation p-value.
pub fn normalized_embedding_distance(set: &EmbeddingSet, plan: &PermutationPlan) -> Result<NedResult> {
    if plan.repetitions == 0 {
        return Err(Error::InvalidConfig("permutation repetitions must be at least 1".into()));
    }
    let k = set.n_classes();
    let observed = embedding_distance(set);
    let permuted: Vec<f64> = (0..plan.repetitions)
        .into_par_iter()
        .map(|r| {
            let mut labels = set.labels.clone();
            labels.shuffle(&mut rng_for(plan.seed, &[stream::PERMUTATION, r as u64]));
            distance_with_labels(&set.vectors, &labels, k)
        })
        .collect();
    let permuted_mean = permuted.iter().sum::<f64>() / permuted.len() as f64;
    let as_small = permuted.iter().filter(|&&d| d <= observed).count();
    let single_class = set.labels.iter().all(|&l| l == set.labels[0]);
    let ned = if single_class || permuted_mean == 0.0 { 1.0 } else { observed / permuted_mean };
    Ok(NedResult {
        ned,
        p_value: (1 + as_small) as f64 / (1 + plan.repetitions) as f64,
        observed,
        permuted_mean,
        repetitions: plan.repetitions,
        single_class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    /// One whitespace-separated row per line.
    Text,
    /// `u64` rows, `u64` columns, then row-major `f64`, all little-endian.
    Binary,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => MatrixFormat::Binary,
            _ => MatrixFormat::Text,
        }
    }
}

/// Write a matrix and its `doc_id` sidecar (one id per line).
pub fn write_embedding_matrix(path: &Path, ids_path: &Path, doc_ids: &[u64], rows: &[Vec<f64>]) -> Result<()> {
    if doc_ids.len() != rows.len() {
        return Err(Error::LengthMismatch { left: doc_ids.len(), right: rows.len() });
    }
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    match MatrixFormat::from_path(path) {
        MatrixFormat::Text => {
            for row in rows {
                let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                writeln!(out, "{}", line.join(" ")).map_err(io)?;
            }
        }
        MatrixFormat::Binary => {
            let cols = rows.first().map_or(0, Vec::len);
            out.write_all(&(rows.len() as u64).to_le_bytes()).map_err(io)?;
            out.write_all(&(cols as u64).to_le_bytes()).map_err(io)?;
            for row in rows {
                if row.len() != cols {
                    return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
                }
                for x in row {
                    out.write_all(&x.to_le_bytes()).map_err(io)?;
                }
            }
        }
    }
    out.flush().map_err(io)?;
    let ids: String = doc_ids.iter().map(|id| format!("{id}\n")).collect();
    std::fs::write(ids_path, ids).map_err(|e| Error::io(ids_path, e))
}

pub fn read_embedding_matrix(path: &Path, ids_path: &Path) -> Result<(Vec<u64>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<Vec<f64>> = match MatrixFormat::from_path(path) {
        MatrixFormat::Text => {
            let mut rows = Vec::new();
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let row = line
                    .split_whitespace()
                    .map(|tok| tok.parse::<f64>().map_err(|e| Error::parse(path, i + 1, format!("{tok:?}: {e}"))))
                    .collect::<Result<Vec<f64>>>()?;
                if let Some(first) = rows.first().map(Vec::len) {
                    if row.len() != first {
                        return Err(Error::parse(path, i + 1, format!("expected {first} columns, found {}", row.len())));
                    }
                }
                rows.push(row);
            }
            rows
        }
        MatrixFormat::Binary => {
            let mut bytes = Vec::new();
            BufReader::new(file).read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
            if bytes.len() < 16 {
                return Err(Error::parse(path, 0, "truncated header"));
            }
            let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
            let d = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
            let body = &bytes[16..];
            if body.len() != n * d * 8 {
                return Err(Error::parse(path, 0, format!("expected {n}x{d} values, found {} bytes", body.len())));
            }
            body.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect::<Vec<f64>>()
                .chunks(d.max(1))
                .take(n)
                .map(<[f64]>::to_vec)
                .collect()
        }
    };
    let ids_text = std::fs::read_to_string(ids_path).map_err(|e| Error::io(ids_path, e))?;
    let ids = ids_text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse::<u64>().map_err(|e| Error::parse(ids_path, i + 1, e.to_string())))
        .collect::<Result<Vec<u64>>>()?;
    if ids.len() != rows.len() {
        return Err(Error::LengthMismatch { left: ids.len(), right: rows.len() });
    }
    Ok((ids, rows))
}
