//! Accuracy, gain and error reduction, NMI, paired t-tests and
//! embedding-dispersion statistics.

mod embed;
mod report;
mod stats;

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};
use crate::pseudolabel::PredictionSet;

pub use embed::{
    embedding_distance, normalized_embedding_distance, read_embedding_matrix,
    write_embedding_matrix, EmbeddingSet, MatrixFormat, NedResult, PermutationPlan,
};
pub use report::{build_report, Comparison, EvalReport, GroupSummary, ReportConfig};
pub use stats::{bonferroni, mean, paired_ttest, sem, Degeneracy, TTest};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracyCell {
    pub setting: String,
    pub budget: usize,
    pub repetition: usize,
    pub accuracy: f64,
}

/// Fraction of test documents whose prediction equals the gold label.
pub fn accuracy(predictions: &BTreeMap<u64, String>, corpus: &Corpus) -> Result<f64> {
    let test: Vec<&_> = corpus.split(Split::Test).collect();
    if test.is_empty() {
        return Err(Error::InvalidPredictions("corpus has no test documents".into()));
    }
    let mut correct = 0usize;
    for doc in &test {
        let predicted = predictions.get(&doc.id).ok_or_else(|| {
            Error::InvalidPredictions(format!("no prediction for test document {}", doc.id))
        })?;
        let gold = doc.gold_label.as_deref().ok_or_else(|| {
            Error::InvalidPredictions(format!("test document {} has no gold label", doc.id))
        })?;
        correct += usize::from(predicted == gold);
    }
    if predictions.len() != test.len() {
        return Err(Error::InvalidPredictions(format!(
            "{} predictions for {} test documents",
            predictions.len(),
            test.len()
        )));
    }
    Ok(correct as f64 / test.len() as f64)
}

pub fn accuracy_cells(predictions: &PredictionSet, corpus: &Corpus) -> Result<Vec<AccuracyCell>> {
    predictions
        .groups
        .iter()
        .map(|(key, group)| {
            Ok(AccuracyCell {
                setting: key.setting.clone(),
                budget: key.budget,
                repetition: key.repetition,
                accuracy: accuracy(group, corpus)?,
            })
        })
        .collect()
}

/// Relative accuracy gain and relative reduction of the error `1 - accuracy`.
pub fn gain_and_error_reduction(base_accuracy: f64, new_accuracy: f64) -> Result<(f64, f64)> {
    if !(base_accuracy > 0.0 && base_accuracy < 1.0) {
        return Err(Error::UndefinedRatio(base_accuracy));
    }
    let gain = (new_accuracy - base_accuracy) / base_accuracy;
    let base_error = 1.0 - base_accuracy;
    let error_reduction = (base_error - (1.0 - new_accuracy)) / base_error;
    Ok((gain, error_reduction))
}

/// Normalized mutual information `I(A;B) / sqrt(H(A) H(B))`, natural log.
/// Zero when either labeling is constant.
pub fn nmi<A: Eq + Hash, B: Eq + Hash>(labels_a: &[A], labels_b: &[B]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch { left: labels_a.len(), right: labels_b.len() });
    }
    if labels_a.is_empty() {
        return Err(Error::TooFewSamples { found: 0, required: 1 });
    }
    let a = dense_codes(labels_a);
    let b = dense_codes(labels_b);
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut joint = vec![0usize; ka * kb];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(&b) {
        joint[x * kb + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let n = a.len() as f64;
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    if ha <= 0.0 || hb <= 0.0 {
        return Ok(0.0);
    }
    // a bijection between labelings: exactly 1, free of rounding
    if ka == kb && joint.iter().filter(|&&c| c > 0).count() == ka {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (ca[x] as f64 * cb[y] as f64)).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

fn dense_codes<T: Eq + Hash>(labels: &[T]) -> Vec<usize> {
    let mut codes: HashMap<&T, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = codes.len();
            *codes.entry(l).or_insert(next)
        })
        .collect()
}
