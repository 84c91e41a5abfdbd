//! Non-transformer reference classifiers.

mod features;
mod majority;
mod nb;
mod svm;

use serde::{Deserialize, Serialize};

pub use features::Features;
pub use majority::{
    cluster_majority_allocation, predict_cluster_majority, train_cluster_majority,
    ClusterMajorityModel,
};
pub use nb::{train_gaussian_nb, train_nb, GaussianNbModel, NbModel, DEFAULT_ALPHA};
pub use svm::{train_svm, LinearSvmModel, SvmConfig};

/// Index of the maximal score; ties go to the lowest index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Sorted distinct labels and the per-sample index into them.
pub(crate) fn index_labels<'a>(labels: impl Iterator<Item = &'a str>) -> (Vec<String>, Vec<usize>) {
    let labels: Vec<&str> = labels.collect();
    let mut distinct: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    distinct.sort();
    distinct.dedup();
    let index = labels
        .iter()
        .map(|l| distinct.binary_search_by(|d| d.as_str().cmp(l)).unwrap())
        .collect();
    (distinct, index)
}

/// A trained baseline in its serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BaselineModel {
    Nb(NbModel),
    GaussianNb(GaussianNbModel),
    Svm(LinearSvmModel),
    ClusterMajority(ClusterMajorityModel),
}
