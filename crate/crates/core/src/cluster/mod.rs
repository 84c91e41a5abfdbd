//! Hard clustering of train documents: sequential Information Bottleneck
//! over bag-of-words counts, and Lloyd or Hartigan K-means over dense
//! vectors, each with multi-restart selection.

mod assign;
pub mod io;
pub mod kmeans;
pub mod sib;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digest::json_digest;
use crate::error::{Error, Result};

pub use assign::{assign_nearest_cluster, ClusterModel, DocVector};
pub use kmeans::{cluster_hartigan, cluster_kmeans, Centroids, KmeansRun};
pub use sib::{cluster_sib, mutual_information, SibRun, SibState};

pub const DEFAULT_CLUSTERS: usize = 50;
pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITERATIONS: usize = 15;
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sib,
    Kmeans,
    #[serde(alias = "hartigan")]
    HartiganKmeans,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sib => "sib",
            Algorithm::Kmeans => "kmeans",
            Algorithm::HartiganKmeans => "hartigan_kmeans",
        }
    }

    /// Whether the algorithm clusters sparse counts (as opposed to dense vectors).
    pub fn is_sparse(self) -> bool {
        matches!(self, Algorithm::Sib)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sib" => Ok(Algorithm::Sib),
            "kmeans" => Ok(Algorithm::Kmeans),
            "hartigan" | "hartigan_kmeans" => Ok(Algorithm::HartiganKmeans),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub n_clusters: usize,
    pub algorithm: Algorithm,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Sweeps stop once fewer than this fraction of documents move.
    pub convergence_threshold: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            n_clusters: DEFAULT_CLUSTERS,
            algorithm: Algorithm::Sib,
            restarts: DEFAULT_RESTARTS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed: 0,
            convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
        }
    }
}

impl ClusterConfig {
    pub fn new(algorithm: Algorithm, n_clusters: usize, seed: u64) -> Self {
        ClusterConfig {
            algorithm,
            n_clusters,
            seed,
            ..ClusterConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::InvalidConfig("n_clusters must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.convergence_threshold) {
            return Err(Error::InvalidConfig(
                "convergence_threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

/// Cluster assignment for every clustered document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub doc_ids: Vec<u64>,
    pub assignments: Vec<usize>,
    pub n_clusters: usize,
    /// I(T;Y) for sIB, negated SSE for the K-means variants.
    pub objective: f64,
    pub chosen_restart: usize,
    /// Per-restart score in the algorithm's native sense: I(T;Y) for sIB
    /// (largest wins), SSE for K-means (smallest wins).
    pub restart_objectives: Vec<f64>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config_digest: String,
    /// Documents with no in-vocabulary token, placed round-robin after
    /// convergence.
    pub empty_docs: Vec<u64>,
}

impl Partition {
    pub(crate) fn from_restarts(
        config: &ClusterConfig,
        runs: Vec<(Vec<usize>, f64)>,
        maximize: bool,
    ) -> Partition {
        let restart_objectives: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let mut best = 0;
        for (i, &obj) in restart_objectives.iter().enumerate() {
            let better = if maximize {
                obj > restart_objectives[best]
            } else {
                obj < restart_objectives[best]
            };
            if better {
                best = i;
            }
        }
        let (assignments, value) = runs.into_iter().nth(best).expect("at least one restart");
        let objective = if maximize { value } else { -value };
        Partition {
            doc_ids: (0..assignments.len() as u64).collect(),
            assignments,
            n_clusters: config.n_clusters,
            objective,
            chosen_restart: best,
            restart_objectives,
            algorithm: config.algorithm,
            seed: config.seed,
            config_digest: config.digest(),
            empty_docs: Vec::new(),
        }
    }

    /// Attach real document ids, aligned with the clustered vectors.
    pub fn with_doc_ids(mut self, ids: &[u64]) -> Result<Self> {
        if ids.len() != self.assignments.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: self.assignments.len(),
            });
        }
        let remap: std::collections::HashMap<u64, u64> = self
            .doc_ids
            .iter()
            .zip(ids)
            .map(|(&old, &new)| (old, new))
            .collect();
        self.empty_docs = self.empty_docs.iter().map(|d| remap[d]).collect();
        self.doc_ids = ids.to_vec();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn cluster_of(&self, doc_id: u64) -> Option<usize> {
        self.doc_ids
            .iter()
            .position(|&d| d == doc_id)
            .map(|p| self.assignments[p])
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Members of each cluster, as positions into `doc_ids`.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &a) in self.assignments.iter().enumerate() {
            out[a].push(i);
        }
        out
    }
}

pub(crate) fn check_cluster_count(clusters: usize, documents: usize) -> Result<()> {
    if clusters > documents {
        return Err(Error::TooManyClusters {
            clusters,
            documents,
        });
    }
    Ok(())
}

/// Cost of each clustered document with respect to its own cluster: the sIB
/// merge cost after withdrawal, or the Euclidean distance to the centroid.
/// `None` for documents with no in-vocabulary token.
pub fn assignment_costs(partition: &Partition, repr: Representation<'_>) -> Result<Vec<Option<f64>>> {
    match repr {
        Representation::Sparse(bow) => {
            let mut state = SibState::from_partition(bow, partition)?;
            let mut out = vec![None; partition.len()];
            let positions: Vec<usize> = (0..bow.len()).filter(|&i| !bow[i].is_empty()).collect();
            for (i, &pos) in positions.iter().enumerate() {
                let costs = state.reassignment_costs(i);
                out[pos] = Some(costs[partition.assignments[pos]]);
            }
            Ok(out)
        }
        Representation::Dense(vecs) => {
            let model = ClusterModel::from_dense(vecs, partition)?;
            vecs.iter()
                .zip(&partition.assignments)
                .map(|(v, &a)| Ok(Some(model.costs(v.into())?[a])))
                .collect()
        }
    }
}

/// The vectors a partition was computed from.
#[derive(Debug, Clone, Copy)]
pub enum Representation<'a> {
    Sparse(&'a [crate::corpus::SparseCounts]),
    Dense(&'a [crate::corpus::DenseVector]),
}

/// Cluster with the algorithm named in the config.
pub fn cluster(repr: Representation<'_>, config: &ClusterConfig) -> Result<Partition> {
    match (config.algorithm, repr) {
        (Algorithm::Sib, Representation::Sparse(bow)) => cluster_sib(bow, config),
        (Algorithm::Kmeans, Representation::Dense(v)) => cluster_kmeans(v, config),
        (Algorithm::HartiganKmeans, Representation::Dense(v)) => cluster_hartigan(v, config),
        (Algorithm::Sib, _) => Err(Error::RepresentationMismatch { expected: "sparse" }),
        (_, _) => Err(Error::RepresentationMismatch { expected: "dense" }),
    }
}
