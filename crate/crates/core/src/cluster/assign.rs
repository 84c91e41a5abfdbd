use super::kmeans::{centroids_of, nearest, sq_dist, Centroids};
use super::sib::{DocDist, SibState};
use super::Partition;
use crate::corpus::{DenseVector, SparseCounts};
use crate::error::{Error, Result};

/// A document in either representation.
#[derive(Debug, Clone, Copy)]
pub enum DocVector<'a> {
    Sparse(&'a SparseCounts),
    Dense(&'a [f64]),
}

impl<'a> From<&'a SparseCounts> for DocVector<'a> {
    fn from(v: &'a SparseCounts) -> Self {
        DocVector::Sparse(v)
    }
}

impl<'a> From<&'a DenseVector> for DocVector<'a> {
    fn from(v: &'a DenseVector) -> Self {
        DocVector::Dense(v.values())
    }
}

/// What is needed to route new documents to clusters of a partition.
#[derive(Debug, Clone)]
pub enum ClusterModel {
    /// Cluster statistics of an sIB partition; new documents enter with the
    /// training prior 1/n.
    Sib(SibState),
    Centroids(Centroids),
}

impl ClusterModel {
    pub fn from_sib(bow: &[SparseCounts], partition: &Partition) -> Result<Self> {
        Ok(ClusterModel::Sib(SibState::from_partition(bow, partition)?))
    }

    pub fn from_dense(vecs: &[DenseVector], partition: &Partition) -> Result<Self> {
        if vecs.len() != partition.len() {
            return Err(Error::PartitionMismatch(format!(
                "{} vectors for a partition of {} documents",
                vecs.len(),
                partition.len()
            )));
        }
        let points: Vec<Vec<f64>> = vecs.iter().map(|v| v.values().to_vec()).collect();
        Ok(ClusterModel::Centroids(centroids_of(
            &points,
            &partition.assignments,
            partition.n_clusters,
        )))
    }

    pub fn n_clusters(&self) -> usize {
        match self {
            ClusterModel::Sib(s) => s.n_clusters(),
            ClusterModel::Centroids(c) => c.len(),
        }
    }

    /// Merge cost (sIB) or Euclidean distance (K-means) to every cluster.
    pub fn costs(&self, doc: DocVector<'_>) -> Result<Vec<f64>> {
        match (self, doc) {
            (ClusterModel::Sib(state), DocVector::Sparse(counts)) => {
                let v = state.vocab_size() as u32;
                let known = SparseCounts::from_pairs(
                    counts
                        .indices()
                        .iter()
                        .zip(counts.values())
                        .filter(|(&i, _)| i < v)
                        .map(|(&i, &c)| (i, c)),
                );
                if known.is_empty() {
                    return Ok(vec![0.0; state.n_clusters()]);
                }
                let dist = DocDist::new(&known);
                let a = 1.0 / state.n_docs() as f64;
                let mut costs = Vec::new();
                state.merge_costs(&dist, a, &mut costs);
                Ok(costs)
            }
            (ClusterModel::Centroids(c), DocVector::Dense(x)) => {
                if let Some(first) = c.first() {
                    if first.len() != x.len() {
                        return Err(Error::DimensionMismatch {
                            expected: first.len(),
                            found: x.len(),
                        });
                    }
                }
                Ok(c.iter().map(|c| sq_dist(x, c).sqrt()).collect())
            }
            (ClusterModel::Sib(_), DocVector::Dense(_)) => {
                Err(Error::RepresentationMismatch { expected: "sparse" })
            }
            (ClusterModel::Centroids(_), DocVector::Sparse(_)) => {
                Err(Error::RepresentationMismatch { expected: "dense" })
            }
        }
    }
}

/// Cluster with the smallest cost; ties go to the lowest index. A sparse
/// document without known terms lands in cluster 0.
pub fn assign_nearest_cluster(doc: DocVector<'_>, model: &ClusterModel) -> Result<usize> {
    if let (ClusterModel::Centroids(c), DocVector::Dense(x)) = (model, doc) {
        if c.first().is_some_and(|f| f.len() == x.len()) {
            return Ok(nearest(x, c).0);
        }
    }
    let costs = model.costs(doc)?;
    let mut best = 0;
    for (t, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = t;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{cluster_sib, Algorithm, ClusterConfig};

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn centroid_and_tie_routing() {
        let model = ClusterModel::Centroids(vec![vec![0.0, 0.0], vec![2.0, 0.0]]);
        let c = dv(&[2.0, 0.0]);
        assert_eq!(assign_nearest_cluster((&c).into(), &model).unwrap(), 1);
        let mid = dv(&[1.0, 5.0]);
        assert_eq!(assign_nearest_cluster((&mid).into(), &model).unwrap(), 0);
        let bad = SparseCounts::from_pairs([(0, 1)]);
        assert!(matches!(
            assign_nearest_cluster((&bad).into(), &model),
            Err(Error::RepresentationMismatch { .. })
        ));
    }

    #[test]
    fn converged_sib_training_docs_prefer_own_cluster() {
        let bow: Vec<SparseCounts> = (0..30u32)
            .map(|i| {
                let base = (i % 3) * 10;
                SparseCounts::from_pairs([(base + i % 5, 2), (base + (i + 1) % 5, 1), (base + 7, 1)])
            })
            .collect();
        let config = ClusterConfig {
            convergence_threshold: 0.0,
            max_iterations: 50,
            ..ClusterConfig::new(Algorithm::Sib, 3, 2)
        };
        let p = cluster_sib(&bow, &config).unwrap();
        let mut state = SibState::from_partition(&bow, &p).unwrap();
        for i in 0..bow.len() {
            let costs = state.reassignment_costs(i);
            let own = p.assignments[i];
            assert!(costs.iter().all(|&c| costs[own] <= c + 1e-15));
        }
        let model = ClusterModel::Sib(state);
        for (i, b) in bow.iter().enumerate() {
            assert_eq!(assign_nearest_cluster(b.into(), &model).unwrap(), p.assignments[i]);
        }
        let dense = dv(&[1.0]);
        assert!(assign_nearest_cluster((&dense).into(), &model).is_err());
    }
}
