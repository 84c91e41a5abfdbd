//! Pseudo-label export and prediction import: the file interchange with an
//! external trainer.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{Algorithm, Partition};
use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};
use crate::jsonl::{self, Header};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelRecord {
    pub doc_id: u64,
    pub text: String,
    pub pseudo_label: usize,
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelMeta {
    pub algorithm: Algorithm,
    pub n_clusters: usize,
    pub filter_fraction: f64,
    pub config_digest: String,
}

/// Pseudo-labeled train documents ordered by id.
///
/// With `filter_fraction > 0`, each cluster drops `floor(f * size)` members
/// with the highest assignment cost; documents without a cost rank highest.
pub fn pseudolabel_records(
    partition: &Partition,
    corpus: &Corpus,
    costs: &[Option<f64>],
    filter_fraction: f64,
) -> Result<Vec<PseudoLabelRecord>> {
    if !(0.0..1.0).contains(&filter_fraction) {
        return Err(Error::InvalidConfig(format!(
            "filter fraction must lie in [0, 1), got {filter_fraction}"
        )));
    }
    if costs.len() != partition.len() {
        return Err(Error::LengthMismatch {
            left: costs.len(),
            right: partition.len(),
        });
    }
    let train: BTreeSet<u64> = corpus.split_ids(Split::Train).into_iter().collect();
    let clustered: BTreeSet<u64> = partition.doc_ids.iter().copied().collect();
    if clustered.len() != partition.len() {
        return Err(Error::PartitionMismatch("duplicate document ids".into()));
    }
    if let Some(id) = clustered.difference(&train).next() {
        return Err(Error::PartitionMismatch(format!(
            "document {id} is not in the train split"
        )));
    }
    if let Some(id) = train.difference(&clustered).next() {
        return Err(Error::PartitionMismatch(format!(
            "train document {id} has no cluster"
        )));
    }

    let mut keep = vec![true; partition.len()];
    if filter_fraction > 0.0 {
        for members in partition.members() {
            let drop = (filter_fraction * members.len() as f64).floor() as usize;
            let mut ranked = members;
            ranked.sort_by(|&a, &b| {
                let ca = costs[a].unwrap_or(f64::INFINITY);
                let cb = costs[b].unwrap_or(f64::INFINITY);
                cb.total_cmp(&ca)
                    .then(partition.doc_ids[a].cmp(&partition.doc_ids[b]))
            });
            for &i in &ranked[..drop] {
                keep[i] = false;
            }
        }
    }

    let mut records: Vec<PseudoLabelRecord> = (0..partition.len())
        .filter(|&i| keep[i])
        .map(|i| {
            let doc_id = partition.doc_ids[i];
            PseudoLabelRecord {
                doc_id,
                text: corpus.get(doc_id).expect("validated above").text.clone(),
                pseudo_label: partition.assignments[i],
                confidence: costs[i],
            }
        })
        .collect();
    records.sort_by_key(|r| r.doc_id);
    Ok(records)
}

pub fn pseudolabel_bytes(
    partition: &Partition,
    records: &[PseudoLabelRecord],
    filter_fraction: f64,
) -> Result<Vec<u8>> {
    let header = Header::new(
        "pseudolabels",
        PseudoLabelMeta {
            algorithm: partition.algorithm,
            n_clusters: partition.n_clusters,
            filter_fraction,
            config_digest: partition.config_digest.clone(),
        },
    );
    jsonl::to_bytes(&header, records)
}

/// Write `pseudolabels.jsonl` into `dir` and return its path.
pub fn export_pseudolabels(
    partition: &Partition,
    corpus: &Corpus,
    costs: &[Option<f64>],
    filter_fraction: f64,
    dir: &Path,
) -> Result<PathBuf> {
    let records = pseudolabel_records(partition, corpus, costs, filter_fraction)?;
    let path = dir.join("pseudolabels.jsonl");
    crate::corpus::io::write_bytes(&path, &pseudolabel_bytes(partition, &records, filter_fraction)?)?;
    Ok(path)
}

pub fn read_pseudolabels(path: &Path) -> Result<(PseudoLabelMeta, Vec<PseudoLabelRecord>)> {
    let (header, records): (Header<PseudoLabelMeta>, _) = jsonl::read(path, "pseudolabels")?;
    Ok((header.meta, records))
}

/// Setting tags used by convention: `plain`, `it_clust`, `it_mlm`,
/// `it_mlm_clust`, and the baseline model names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub doc_id: u64,
    pub predicted_label: String,
    pub setting: String,
    pub budget: usize,
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub setting: String,
    pub budget: usize,
    pub repetition: usize,
}

/// Validated predictions: every group covers the full test split once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    pub groups: BTreeMap<GroupKey, BTreeMap<u64, String>>,
}

impl PredictionSet {
    pub fn from_records(records: Vec<PredictionRecord>, corpus: &Corpus) -> Result<Self> {
        let test: BTreeSet<u64> = corpus.split_ids(Split::Test).into_iter().collect();
        let labels: HashSet<&str> = corpus.labels().iter().map(String::as_str).collect();
        let mut groups: BTreeMap<GroupKey, BTreeMap<u64, String>> = BTreeMap::new();
        for r in records {
            if !test.contains(&r.doc_id) {
                return Err(Error::InvalidPredictions(format!(
                    "document {} is not in the test split",
                    r.doc_id
                )));
            }
            if !labels.contains(r.predicted_label.as_str()) {
                return Err(Error::InvalidPredictions(format!(
                    "unknown label {:?} for document {}",
                    r.predicted_label, r.doc_id
                )));
            }
            let key = GroupKey {
                setting: r.setting,
                budget: r.budget,
                repetition: r.repetition,
            };
            let group = groups.entry(key.clone()).or_default();
            if group.insert(r.doc_id, r.predicted_label).is_some() {
                return Err(Error::InvalidPredictions(format!(
                    "duplicate prediction for (doc_id {}, setting {}, budget {}, repetition {})",
                    r.doc_id, key.setting, key.budget, key.repetition
                )));
            }
        }
        for (key, group) in &groups {
            if group.len() != test.len() {
                let missing = test.iter().find(|id| !group.contains_key(id)).unwrap();
                return Err(Error::InvalidPredictions(format!(
                    "(setting {}, budget {}, repetition {}) misses {} test documents, e.g. {missing}",
                    key.setting,
                    key.budget,
                    key.repetition,
                    test.len() - group.len()
                )));
            }
        }
        Ok(PredictionSet { groups })
    }

    pub fn merge(&mut self, other: PredictionSet) -> Result<()> {
        for (key, group) in other.groups {
            if self.groups.contains_key(&key) {
                return Err(Error::InvalidPredictions(format!(
                    "group (setting {}, budget {}, repetition {}) appears twice",
                    key.setting, key.budget, key.repetition
                )));
            }
            self.groups.insert(key, group);
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<PredictionRecord> {
        self.groups
            .iter()
            .flat_map(|(key, group)| {
                group.iter().map(move |(&doc_id, label)| PredictionRecord {
                    doc_id,
                    predicted_label: label.clone(),
                    setting: key.setting.clone(),
                    budget: key.budget,
                    repetition: key.repetition,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionMeta {}

pub fn prediction_bytes(records: &[PredictionRecord]) -> Result<Vec<u8>> {
    jsonl::to_bytes(&Header::new("predictions", PredictionMeta {}), records)
}

/// Read and validate a predictions file. The schema header line is
/// optional for files produced by other tools.
pub fn import_predictions(path: &Path, corpus: &Corpus) -> Result<PredictionSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 {
            if let Ok(header) = serde_json::from_str::<Header<PredictionMeta>>(&line) {
                if header.schema != "predictions" {
                    return Err(Error::parse(path, 1, format!("unexpected schema {:?}", header.schema)));
                }
                continue;
            }
        }
        let record: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        records.push(record);
    }
    PredictionSet::from_records(records, corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Document};

    fn corpus(n_train: u64, n_test: u64) -> Corpus {
        let mut docs = Vec::new();
        for i in 0..n_train {
            docs.push(
                Document::new(i, format!("train {i}"))
                    .with_label(if i % 2 == 0 { "a" } else { "b" })
                    .with_split(Split::Train),
            );
        }
        for i in 0..n_test {
            docs.push(
                Document::new(1000 + i, format!("test {i}"))
                    .with_label("a")
                    .with_split(Split::Test),
            );
        }
        Corpus::from_split_documents(docs).unwrap()
    }

    fn partition(n: usize) -> Partition {
        Partition {
            doc_ids: (0..n as u64).collect(),
            assignments: (0..n).map(|i| i % 2).collect(),
            n_clusters: 2,
            objective: 0.5,
            chosen_restart: 0,
            restart_objectives: vec![0.5],
            algorithm: Algorithm::Sib,
            seed: 0,
            config_digest: "x".into(),
            empty_docs: vec![],
        }
    }

    #[test]
    fn unfiltered_export_covers_train() {
        let c = corpus(10, 2);
        let p = partition(10);
        let costs = vec![Some(0.1); 10];
        let r = pseudolabel_records(&p, &c, &costs, 0.0).unwrap();
        assert_eq!(r.len(), 10);
        assert!(r.windows(2).all(|w| w[0].doc_id < w[1].doc_id));
        assert_eq!(r[3].pseudo_label, 1);
        assert_eq!(r[3].text, "train 3");
    }

    #[test]
    fn filtering_drops_costliest_per_cluster() {
        let c = corpus(100, 2);
        let p = partition(100);
        let costs: Vec<Option<f64>> = (0..100).map(|i| Some(i as f64)).collect();
        let r = pseudolabel_records(&p, &c, &costs, 0.1).unwrap();
        assert_eq!(r.len(), 90);
        assert_eq!(r.iter().filter(|x| x.pseudo_label == 0).count(), 45);
        assert_eq!(r.iter().filter(|x| x.pseudo_label == 1).count(), 45);
        assert!(r.iter().all(|x| x.doc_id < 90));
    }

    #[test]
    fn round_trip_and_purity() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(10, 2);
        let p = partition(10);
        let costs: Vec<Option<f64>> = (0..10).map(|i| if i == 4 { None } else { Some(i as f64 * 0.5) }).collect();
        let path = export_pseudolabels(&p, &c, &costs, 0.0, dir.path()).unwrap();
        let first = std::fs::read(&path).unwrap();
        let (meta, back) = read_pseudolabels(&path).unwrap();
        assert_eq!(meta.n_clusters, 2);
        assert_eq!(back, pseudolabel_records(&p, &c, &costs, 0.0).unwrap());
        export_pseudolabels(&p, &c, &costs, 0.0, dir.path()).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let c = corpus(10, 2);
        let p = partition(9);
        assert!(matches!(
            pseudolabel_records(&p, &c, &[None; 9], 0.0),
            Err(Error::PartitionMismatch(_))
        ));
        assert!(pseudolabel_records(&partition(10), &c, &[None; 10], 1.0).is_err());
    }

    fn preds(ids: &[u64], label: &str) -> Vec<PredictionRecord> {
        ids.iter()
            .map(|&doc_id| PredictionRecord {
                doc_id,
                predicted_label: label.into(),
                setting: "plain".into(),
                budget: 64,
                repetition: 0,
            })
            .collect()
    }

    #[test]
    fn prediction_validation() {
        let c = corpus(4, 3);
        let ok = PredictionSet::from_records(preds(&[1000, 1001, 1002], "b"), &c).unwrap();
        assert_eq!(ok.groups.len(), 1);
        assert_eq!(ok.groups.values().next().unwrap().len(), 3);

        let err = PredictionSet::from_records(preds(&[1000, 1001, 1001, 1002], "b"), &c).unwrap_err();
        assert!(err.to_string().contains("doc_id 1001"), "{err}");
        let err = PredictionSet::from_records(preds(&[1000, 1001, 1002], "zzz"), &c).unwrap_err();
        assert!(err.to_string().contains("unknown label"), "{err}");
        let err = PredictionSet::from_records(preds(&[1000, 1001], "a"), &c).unwrap_err();
        assert!(err.to_string().contains("misses 1"), "{err}");
        assert!(PredictionSet::from_records(preds(&[0, 1000, 1001, 1002], "a"), &c).is_err());
    }

    #[test]
    fn import_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(4, 2);
        let records = preds(&[1000, 1001], "a");
        let with = dir.path().join("with.jsonl");
        std::fs::write(&with, prediction_bytes(&records).unwrap()).unwrap();
        let set = import_predictions(&with, &c).unwrap();
        assert_eq!(set.records(), records);
        let without = dir.path().join("without.jsonl");
        let body: String = records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        std::fs::write(&without, body).unwrap();
        assert_eq!(import_predictions(&without, &c).unwrap(), set);
    }
}
