use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stem::stem;
use super::vocab::tokenize;
use super::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector {
    values: Vec<f64>,
    norm: f64,
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        DenseVector::new(values)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.values
    }
}

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("dense vector has non-finite entries".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(DenseVector { values, norm })
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector {
            values: vec![0.0; dim],
            norm: 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Pretrained word vectors in the common text format: a term followed by
/// `dim` whitespace-separated decimals per line.
#[derive(Debug, Clone, Default)]
pub struct Embeddings {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
}

impl Embeddings {
    pub fn from_table(dim: usize, table: HashMap<String, Vec<f64>>) -> Result<Self> {
        for v in table.values() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        Ok(Embeddings { dim, table })
    }

    /// Parse the text format. A leading `count dim` line, as written by
    /// word2vec tools, is skipped.
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut dim = None;
        let mut table = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut fields = line.split_whitespace();
            let Some(term) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if i == 0 && rest.len() == 1 && term.parse::<usize>().is_ok() {
                if rest[0].parse::<usize>().is_ok() {
                    continue;
                }
            }
            let values = rest
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(path, i + 1, "non-finite value"));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("dimension mismatch: expected {d}, found {}", values.len()),
                    ))
                }
                Some(_) => {}
            }
            table.insert(term.to_owned(), values);
        }
        let dim = dim.ok_or_else(|| Error::parse(path, 1, "no vectors in embedding file"))?;
        Ok(Embeddings { dim, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Look a token up as written, falling back to its stem.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.table
            .get(token)
            .or_else(|| self.table.get(&stem(token)))
            .map(Vec::as_slice)
    }
}

/// Unweighted mean of the vectors of the document's tokens that have one;
/// documents with no known token map to the zero vector.
pub fn vectorize_dense(doc: &Document, embeddings: &Embeddings) -> DenseVector {
    let mut sum = vec![0.0; embeddings.dim()];
    let mut n = 0usize;
    for token in tokenize(&doc.text) {
        if let Some(v) = embeddings.lookup(&token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n == 0 {
        return DenseVector::zeros(embeddings.dim());
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    DenseVector::new(sum).expect("mean of finite vectors")
}

pub fn vectorize_dense_all(docs: &[&Document], embeddings: &Embeddings) -> Vec<DenseVector> {
    docs.par_iter()
        .map(|d| vectorize_dense(d, embeddings))
        .collect()
}
