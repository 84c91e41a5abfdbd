//! Partition files: a header record followed by one `{doc_id, cluster}`
//! record per document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Algorithm, Partition};
use crate::error::{Error, Result};
use crate::jsonl::{self, Header};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMeta {
    pub algorithm: Algorithm,
    pub n_clusters: usize,
    pub objective: f64,
    pub chosen_restart: usize,
    pub restart_objectives: Vec<f64>,
    pub seed: u64,
    pub config_digest: String,
    #[serde(default)]
    pub empty_docs: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub doc_id: u64,
    pub cluster: usize,
}

pub fn partition_bytes(p: &Partition) -> Result<Vec<u8>> {
    let header = Header::new(
        "partition",
        PartitionMeta {
            algorithm: p.algorithm,
            n_clusters: p.n_clusters,
            objective: p.objective,
            chosen_restart: p.chosen_restart,
            restart_objectives: p.restart_objectives.clone(),
            seed: p.seed,
            config_digest: p.config_digest.clone(),
            empty_docs: p.empty_docs.clone(),
        },
    );
    let records: Vec<AssignmentRecord> = p
        .doc_ids
        .iter()
        .zip(&p.assignments)
        .map(|(&doc_id, &cluster)| AssignmentRecord { doc_id, cluster })
        .collect();
    jsonl::to_bytes(&header, &records)
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    let (header, records): (Header<PartitionMeta>, Vec<AssignmentRecord>) =
        jsonl::read(path, "partition")?;
    let m = header.meta;
    if let Some(r) = records.iter().find(|r| r.cluster >= m.n_clusters) {
        return Err(Error::PartitionMismatch(format!(
            "document {} assigned to cluster {} of {}",
            r.doc_id, r.cluster, m.n_clusters
        )));
    }
    Ok(Partition {
        doc_ids: records.iter().map(|r| r.doc_id).collect(),
        assignments: records.iter().map(|r| r.cluster).collect(),
        n_clusters: m.n_clusters,
        objective: m.objective,
        chosen_restart: m.chosen_restart,
        restart_objectives: m.restart_objectives,
        algorithm: m.algorithm,
        seed: m.seed,
        config_digest: m.config_digest,
        empty_docs: m.empty_docs,
    })
}
