use serde::Serialize;

use pseudoclust::cluster::io::{partition_bytes, read_partition};
use pseudoclust::cluster::{assignment_costs, cluster as run_clustering};
use pseudoclust::digest::json_digest;
use pseudoclust::pseudolabel::{pseudolabel_bytes, pseudolabel_records};
use pseudoclust::Partition;

use super::*;
use crate::manifest::StageRecord;

fn representation_file(algorithm: Algorithm) -> &'static str {
    if algorithm.is_sparse() { BOW_TRAIN } else { DENSE_TRAIN }
}

pub fn cluster(config: &RunConfig) -> Result<()> {
    let mut ws = Workspace::open(&config.out)?;
    let prepared = Prepared::load(&ws, config)?;
    let cluster_config = config.cluster_config();
    let repr = prepared.train_representation(cluster_config.algorithm)?;
    let partition = run_clustering(repr, &cluster_config)?.with_doc_ids(&prepared.train_ids)?;
    let artifact = ws.write(PARTITION, &partition_bytes(&partition)?)?;
    ws.record(
        "cluster",
        StageRecord {
            config_digest: cluster_config.digest(),
            inputs: prepared.inputs(&[CORPUS, representation_file(cluster_config.algorithm)]),
            artifacts: [artifact].into(),
            ..StageRecord::default()
        },
    )?;
    println!(
        "{} clustered {} documents into {} clusters (objective {:.6}, restart {}/{}, {} without features)",
        partition.algorithm,
        partition.len(),
        partition.n_clusters,
        partition.objective,
        partition.chosen_restart,
        partition.restart_objectives.len(),
        partition.empty_docs.len()
    );
    Ok(())
}

/// The partition written by `cluster`, after checking it matches the
/// current cluster configuration.
pub(crate) fn load_partition(ws: &Workspace, config: &RunConfig) -> Result<(Partition, String)> {
    let record = ws.require("cluster", Some(&config.cluster_config().digest()))?;
    let digest = record.artifacts[PARTITION].clone();
    Ok((read_partition(&ws.path(PARTITION))?, digest))
}

#[derive(Serialize)]
struct ExportKey<'a> {
    cluster: &'a str,
    filter_fraction: f64,
}

pub fn export(config: &RunConfig) -> Result<()> {
    let mut ws = Workspace::open(&config.out)?;
    let prepared = Prepared::load(&ws, config)?;
    let (partition, partition_digest) = load_partition(&ws, config)?;
    let repr = prepared.train_representation(partition.algorithm)?;
    let costs = assignment_costs(&partition, repr)?;
    let records = pseudolabel_records(&partition, &prepared.corpus, &costs, config.filter_fraction)?;
    let artifact = ws.write(PSEUDOLABELS, &pseudolabel_bytes(&partition, &records, config.filter_fraction)?)?;
    let mut inputs = prepared.inputs(&[CORPUS, representation_file(partition.algorithm)]);
    inputs.insert(PARTITION.into(), partition_digest);
    let cluster_digest = config.cluster_config().digest();
    ws.record(
        "export-pseudolabels",
        StageRecord {
            config_digest: json_digest(&ExportKey { cluster: &cluster_digest, filter_fraction: config.filter_fraction }),
            inputs,
            artifacts: [artifact].into(),
            ..StageRecord::default()
        },
    )?;
    println!(
        "exported {} of {} pseudo-labeled documents (filter fraction {}) -> {}",
        records.len(),
        partition.len(),
        config.filter_fraction,
        ws.path(PSEUDOLABELS).display()
    );
    Ok(())
}
