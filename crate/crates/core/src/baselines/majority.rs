use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::cluster::{assign_nearest_cluster, ClusterModel, DocVector, Partition};
use crate::corpus::{largest_remainder, Corpus};
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// Labels each cluster by the mode of a small revealed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMajorityModel {
    pub cluster_label: Vec<String>,
    pub revealed_ids: Vec<Vec<u64>>,
    pub budget: usize,
    pub seed: u64,
}

/// Split `budget` across clusters proportionally to size, at least one each.
///
/// Clusters whose proportional quota falls below one are pinned to one and
/// the rest of the budget is re-apportioned among the others, by largest
/// remainder.
pub fn cluster_majority_allocation(sizes: &[usize], budget: usize) -> Result<Vec<usize>> {
    let total: usize = sizes.iter().sum();
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidConfig("cluster without members".into()));
    }
    if budget < sizes.len() {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} is below the cluster count {}",
            sizes.len()
        )));
    }
    if budget > total {
        return Err(Error::BudgetTooLarge { budget, train_size: total });
    }
    let mut pinned = vec![false; sizes.len()];
    loop {
        let free: Vec<usize> = (0..sizes.len()).filter(|&c| !pinned[c]).collect();
        let free_budget = budget - (sizes.len() - free.len());
        let free_total: f64 = free.iter().map(|&c| sizes[c] as f64).sum();
        let below: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&c| (sizes[c] as f64) / free_total * (free_budget as f64) < 1.0)
            .collect();
        if below.is_empty() {
            let weights: Vec<f64> = free.iter().map(|&c| sizes[c] as f64).collect();
            let shares = largest_remainder(&weights, free_budget);
            let mut allocation = vec![1; sizes.len()];
            for (&c, s) in free.iter().zip(shares) {
                allocation[c] = s;
            }
            return Ok(allocation);
        }
        for c in below {
            pinned[c] = true;
        }
    }
}

pub fn train_cluster_majority(
    partition: &Partition,
    corpus: &Corpus,
    budget: usize,
    seed: u64,
) -> Result<ClusterMajorityModel> {
    let members = partition.members();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let allocation = cluster_majority_allocation(&sizes, budget)?;
    let mut cluster_label = Vec::with_capacity(members.len());
    let mut revealed_ids = Vec::with_capacity(members.len());
    for (c, (positions, &quota)) in members.iter().zip(&allocation).enumerate() {
        let mut rng = rng_for(seed, &[stream::MAJORITY, c as u64]);
        let mut ids: Vec<u64> = index::sample(&mut rng, positions.len(), quota)
            .into_iter()
            .map(|i| partition.doc_ids[positions[i]])
            .collect();
        ids.sort_unstable();
        let mut votes = vec![0usize; corpus.labels().len()];
        for &id in &ids {
            let label = corpus.gold_index(id).ok_or_else(|| {
                Error::PartitionMismatch(format!("revealed document {id} has no gold label"))
            })?;
            votes[label] += 1;
        }
        let mut mode = 0;
        for (l, &v) in votes.iter().enumerate() {
            if v > votes[mode] {
                mode = l;
            }
        }
        cluster_label.push(corpus.labels()[mode].clone());
        revealed_ids.push(ids);
    }
    Ok(ClusterMajorityModel { cluster_label, revealed_ids, budget, seed })
}

/// The label of the document's nearest cluster.
pub fn predict_cluster_majority<'m>(
    model: &'m ClusterMajorityModel,
    doc: DocVector<'_>,
    clusters: &ClusterModel,
) -> Result<&'m str> {
    if clusters.n_clusters() != model.cluster_label.len() {
        return Err(Error::PartitionMismatch(format!(
            "model has {} clusters, partition {}",
            model.cluster_label.len(),
            clusters.n_clusters()
        )));
    }
    Ok(&model.cluster_label[assign_nearest_cluster(doc, clusters)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn allocation_examples() {
        assert_eq!(cluster_majority_allocation(&[100, 50, 50], 8).unwrap(), vec![4, 2, 2]);
        let sizes: Vec<usize> = (1..=50).map(|i| i * 7 % 31 + 1).collect();
        assert_eq!(cluster_majority_allocation(&sizes, 50).unwrap(), vec![1; 50]);
        // a tiny cluster keeps its floor; the rest is proportional
        assert_eq!(cluster_majority_allocation(&[1, 50, 49], 10).unwrap(), vec![1, 5, 4]);
    }

    #[test]
    fn allocation_errors() {
        assert!(cluster_majority_allocation(&[3, 3, 3], 2).is_err());
        assert!(matches!(
            cluster_majority_allocation(&[3, 3], 7),
            Err(Error::BudgetTooLarge { .. })
        ));
        assert!(cluster_majority_allocation(&[3, 0], 2).is_err());
    }

    proptest! {
        #[test]
        fn allocation_invariants(sizes in prop::collection::vec(1usize..200, 1..40), extra in 0usize..500) {
            let total: usize = sizes.iter().sum();
            let budget = (sizes.len() + extra).min(total);
            let alloc = cluster_majority_allocation(&sizes, budget).unwrap();
            prop_assert_eq!(alloc.iter().sum::<usize>(), budget);
            prop_assert!(alloc.iter().all(|&a| a >= 1));
            prop_assert!(alloc.iter().zip(&sizes).all(|(a, s)| a <= s));
        }
    }
}
