use serde::{Deserialize, Serialize};

use super::{argmax, index_labels};
use crate::corpus::SparseCounts;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Multinomial naive Bayes over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub labels: Vec<String>,
    pub class_log_priors: Vec<f64>,
    /// `[class][term]`, each row a log distribution over the vocabulary.
    pub term_log_likelihoods: Vec<Vec<f64>>,
    pub smoothing_alpha: f64,
}

pub fn train_nb(samples: &[(&SparseCounts, &str)], vocab_size: usize, alpha: f64) -> Result<NbModel> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("smoothing alpha must be positive, got {alpha}")));
    }
    if vocab_size == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let (labels, index) = index_labels(samples.iter().map(|s| s.1));
    let n_classes = labels.len();
    let mut doc_counts = vec![0usize; n_classes];
    let mut term_counts = vec![vec![0.0f64; vocab_size]; n_classes];
    for (&(bow, _), &c) in samples.iter().zip(&index) {
        doc_counts[c] += 1;
        for (j, count) in bow.iter() {
            let j = j as usize;
            if j >= vocab_size {
                return Err(Error::DimensionMismatch { expected: vocab_size, found: j + 1 });
            }
            term_counts[c][j] += count as f64;
        }
    }
    let n = samples.len() as f64;
    let class_log_priors = doc_counts.iter().map(|&c| (c as f64 / n).ln()).collect();
    let term_log_likelihoods = term_counts
        .into_iter()
        .map(|row| {
            let log_total = (row.iter().sum::<f64>() + alpha * vocab_size as f64).ln();
            row.into_iter().map(|c| (c + alpha).ln() - log_total).collect()
        })
        .collect();
    Ok(NbModel { labels, class_log_priors, term_log_likelihoods, smoothing_alpha: alpha })
}

impl NbModel {
    /// Unnormalized log posterior per class; out-of-vocabulary terms are ignored.
    pub fn joint_log_likelihood(&self, doc: &SparseCounts) -> Vec<f64> {
        self.class_log_priors
            .iter()
            .zip(&self.term_log_likelihoods)
            .map(|(prior, row)| {
                prior
                    + doc
                        .iter()
                        .filter_map(|(j, c)| row.get(j as usize).map(|l| l * c as f64))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn posterior(&self, doc: &SparseCounts) -> Vec<f64> {
        softmax(&self.joint_log_likelihood(doc))
    }

    pub fn predict_index(&self, doc: &SparseCounts) -> usize {
        argmax(&self.joint_log_likelihood(doc))
    }

    pub fn predict(&self, doc: &SparseCounts) -> &str {
        &self.labels[self.predict_index(doc)]
    }
}

pub(crate) fn softmax(log_scores: &[f64]) -> Vec<f64> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Gaussian naive Bayes for dense features, which may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub labels: Vec<String>,
    pub class_log_priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub variance_floor: f64,
}

/// Added to every variance, relative to the largest feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

pub fn train_gaussian_nb(samples: &[(&[f64], &str)]) -> Result<GaussianNbModel> {
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let dim = samples[0].0.len();
    if let Some((x, _)) = samples.iter().find(|(x, _)| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
    }
    let (labels, index) = index_labels(samples.iter().map(|s| s.1));
    let k = labels.len();
    let mut counts = vec![0usize; k];
    let mut means = vec![vec![0.0; dim]; k];
    for (&(x, _), &c) in samples.iter().zip(&index) {
        counts[c] += 1;
        for (m, v) in means[c].iter_mut().zip(x) {
            *m += v;
        }
    }
    for (row, &n) in means.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|m| *m /= n as f64);
    }
    let mut variances = vec![vec![0.0; dim]; k];
    for (&(x, _), &c) in samples.iter().zip(&index) {
        for ((s, v), m) in variances[c].iter_mut().zip(x).zip(&means[c]) {
            *s += (v - m).powi(2);
        }
    }
    for (row, &n) in variances.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|s| *s /= n as f64);
    }

    let n = samples.len() as f64;
    let max_feature_variance = (0..dim)
        .map(|j| {
            let mean = samples.iter().map(|(x, _)| x[j]).sum::<f64>() / n;
            samples.iter().map(|(x, _)| (x[j] - mean).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max);
    let variance_floor = if max_feature_variance > 0.0 {
        VAR_SMOOTHING * max_feature_variance
    } else {
        VAR_SMOOTHING
    };
    for row in &mut variances {
        row.iter_mut().for_each(|s| *s += variance_floor);
    }
    let class_log_priors = counts.iter().map(|&c| (c as f64 / n).ln()).collect();
    Ok(GaussianNbModel { labels, class_log_priors, means, variances, variance_floor })
}

impl GaussianNbModel {
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dim = self.means[0].len();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
        }
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        Ok((0..self.labels.len())
            .map(|c| {
                self.class_log_priors[c]
                    - 0.5
                        * x.iter()
                            .zip(&self.means[c])
                            .zip(&self.variances[c])
                            .map(|((v, m), s)| ln_2pi + s.ln() + (v - m).powi(2) / s)
                            .sum::<f64>()
            })
            .collect())
    }

    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.joint_log_likelihood(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.labels[self.predict_index(x)?])
    }
}
