use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use pseudoclust::digest::json_digest;
use pseudoclust::eval::{
    accuracy_cells, build_report, embedding_distance, nmi, normalized_embedding_distance,
    read_embedding_matrix, EmbeddingSet, NedResult, PermutationPlan,
};
use pseudoclust::pseudolabel::{import_predictions, PredictionSet};
use pseudoclust::Error;

use super::stages::load_partition;
use super::*;
use crate::manifest::{file_digest, StageRecord};

pub fn eval(config: &RunConfig, extra: &[PathBuf]) -> Result<()> {
    let mut ws = Workspace::open(&config.out)?;
    let prepared = Prepared::load(&ws, config)?;
    let mut inputs = prepared.inputs(&[CORPUS]);
    let mut sources = BTreeMap::new();
    let mut predictions = PredictionSet::default();

    let baseline_stages: Vec<String> =
        ws.manifest.stages.keys().filter(|k| k.starts_with("baseline:")).cloned().collect();
    for stage in &baseline_stages {
        let record = ws.require(stage, None)?;
        for (name, digest) in record.artifacts.iter().filter(|(n, _)| n.starts_with("predictions/")) {
            predictions.merge(import_predictions(&ws.path(name), &prepared.corpus)?)?;
            inputs.insert(name.clone(), digest.clone());
        }
    }
    for path in extra {
        predictions.merge(import_predictions(path, &prepared.corpus)?)?;
        sources.insert(path.display().to_string(), file_digest(path)?);
    }
    if predictions.groups.is_empty() {
        return Err(CliError::Config(
            "no predictions to evaluate: run `baseline` or pass predictions files".into(),
        ));
    }

    let cells = accuracy_cells(&predictions, &prepared.corpus)?;
    let mut report = build_report(cells, &config.report_config())?;
    // NMI against gold labels when a partition for the current config exists
    if ws.manifest.stages.contains_key("cluster") {
        let (partition, digest) = load_partition(&ws, config)?;
        let gold: Vec<usize> = partition
            .doc_ids
            .iter()
            .map(|&id| prepared.corpus.gold_index(id).ok_or_else(|| {
                CliError::Config(format!("train document {id} has no gold label"))
            }))
            .collect::<Result<_>>()?;
        report.cluster_nmi = Some(nmi(&partition.assignments, &gold)?);
        inputs.insert(PARTITION.into(), digest);
    }

    let outputs = [
        ("report/results.csv", report.results_csv()?),
        ("report/summary.json", report.summary_json()?),
        ("report/plotdata.csv", report.plotdata_csv()?),
    ];
    let mut artifacts = BTreeMap::new();
    for (name, bytes) in outputs {
        let (k, v) = ws.write(name, &bytes)?;
        artifacts.insert(k, v);
    }
    ws.record(
        "eval",
        StageRecord { config_digest: json_digest(&config.eval), inputs, artifacts, sources },
    )?;

    println!("{:<20} {:>7} {:>5} {:>8} {:>8}", "setting", "budget", "reps", "mean", "sem");
    for g in &report.groups {
        println!("{:<20} {:>7} {:>5} {:>8.4} {:>8.4}", g.setting, g.budget, g.repetitions, g.mean, g.sem);
    }
    for g in &report.excluded {
        println!("excluded {} at budget {}: missing repetitions {:?}", g.setting, g.budget, g.missing_repetitions);
    }
    if let Some(v) = report.cluster_nmi {
        println!("cluster NMI vs gold labels: {v:.4}");
    }
    println!("report -> {}", ws.path("report").display());
    Ok(())
}

#[derive(Serialize)]
struct EmbedStats<'a> {
    source: &'a str,
    documents: usize,
    dim: usize,
    classes: usize,
    ed: f64,
    ned: NedResult,
    plan: PermutationPlan,
}

pub fn embed_stats(config: &RunConfig, matrix: Option<(&Path, &Path)>, source: &str) -> Result<()> {
    check_tag(source)?;
    let mut ws = Workspace::open(&config.out)?;
    let prepared = Prepared::load(&ws, config)?;
    let mut inputs = prepared.inputs(&[CORPUS]);
    let mut sources = BTreeMap::new();
    let (ids, rows) = match matrix {
        Some((m, ids)) => {
            sources.insert(m.display().to_string(), file_digest(m)?);
            sources.insert(ids.display().to_string(), file_digest(ids)?);
            read_embedding_matrix(m, ids)?
        }
        None => {
            inputs.extend(prepared.inputs(&[DENSE_TEST]));
            let vecs = prepared.dense_test()?;
            (prepared.test_ids.clone(), vecs.iter().map(|v| v.values().to_vec()).collect())
        }
    };
    let labels = ids
        .iter()
        .map(|&id| {
            prepared.corpus.gold_index(id).ok_or_else(|| {
                CliError::Config(format!("document {id} is unknown or has no gold label"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let classes = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
    let set = EmbeddingSet::new(ids, rows, labels, source)?;
    let plan = PermutationPlan { repetitions: config.permutations, seed: config.seed };
    let ned = normalized_embedding_distance(&set, &plan)?;
    let stats = EmbedStats {
        source,
        documents: set.len(),
        dim: set.dim(),
        classes,
        ed: embedding_distance(&set),
        ned,
        plan,
    };
    let mut bytes = serde_json::to_vec_pretty(&stats).map_err(Error::from)?;
    bytes.push(b'\n');
    let name = format!("embed_stats/{source}.json");
    let artifact = ws.write(&name, &bytes)?;
    ws.record(
        &format!("embed-stats:{source}"),
        StageRecord { config_digest: json_digest(&plan), inputs, artifacts: [artifact].into(), sources },
    )?;
    println!(
        "{source}: ED {:.6}, NED {:.4}, p = {:.4} over {} permutations{}",
        stats.ed,
        stats.ned.ned,
        stats.ned.p_value,
        plan.repetitions,
        if stats.ned.single_class { " (single class: NED is 1 by construction)" } else { "" }
    );
    Ok(())
}
