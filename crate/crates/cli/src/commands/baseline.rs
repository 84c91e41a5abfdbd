use rayon::prelude::*;
use serde::Serialize;

use pseudoclust::baselines::{
    predict_cluster_majority, train_cluster_majority, train_gaussian_nb, train_nb, train_svm,
    BaselineModel, Features,
};
use pseudoclust::cluster::{ClusterModel, DocVector};
use pseudoclust::corpus::io::read_budget_samples;
use pseudoclust::digest::json_digest;
use pseudoclust::pseudolabel::{prediction_bytes, PredictionRecord, PredictionSet};
use pseudoclust::seed::derive_seed;
use pseudoclust::Error;

use super::stages::load_partition;
use super::*;
use crate::manifest::StageRecord;
use crate::{FeatureKind, ModelKind};

#[derive(Debug, Serialize)]
struct ModelEntry {
    budget: usize,
    repetition: usize,
    /// `None` when the sample held a single class and the SVM degenerates
    /// to predicting it.
    model: Option<BaselineModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constant_label: Option<String>,
}

#[derive(Serialize)]
struct ModelsArtifact<'a> {
    setting: &'a str,
    entries: Vec<ModelEntry>,
}

#[derive(Serialize)]
struct BaselineKey<'a> {
    setting: &'a str,
    prepare: String,
    cluster: Option<String>,
    nb_alpha: f64,
    svm: pseudoclust::baselines::SvmConfig,
}

pub(crate) fn setting_name(model: ModelKind, features: FeatureKind) -> &'static str {
    match (model, features) {
        (ModelKind::Nb, FeatureKind::Bow) => "nb_bow",
        (ModelKind::Nb, FeatureKind::Dense) => "nb_dense",
        (ModelKind::Svm, FeatureKind::Bow) => "svm_bow",
        (ModelKind::Svm, FeatureKind::Dense) => "svm_dense",
        (ModelKind::ClusterMajority, _) => "cluster_majority",
    }
}

type Fit = (ModelEntry, Vec<String>);

pub fn baseline(config: &RunConfig, model: ModelKind, features: FeatureKind) -> Result<()> {
    let mut ws = Workspace::open(&config.out)?;
    let prepared = Prepared::load(&ws, config)?;
    let setting = setting_name(model, features);
    let mut inputs = prepared.inputs(&[CORPUS]);
    let mut cluster_digest = None;

    let fits: Vec<Fit> = match model {
        ModelKind::ClusterMajority => {
            let (partition, digest) = load_partition(&ws, config)?;
            inputs.insert(PARTITION.into(), digest);
            let feature_file = if partition.algorithm.is_sparse() { BOW_TRAIN } else { DENSE_TRAIN };
            inputs.extend(prepared.inputs(&[feature_file]));
            cluster_digest = Some(config.cluster_config().digest());
            let repr = prepared.train_representation(partition.algorithm)?;
            let clusters = match repr {
                pseudoclust::cluster::Representation::Sparse(bow) => ClusterModel::from_sib(bow, &partition)?,
                pseudoclust::cluster::Representation::Dense(v) => ClusterModel::from_dense(v, &partition)?,
            };
            let test: Vec<DocVector> = if partition.algorithm.is_sparse() {
                prepared.bow_test.iter().map(DocVector::from).collect()
            } else {
                prepared.dense_test()?.iter().map(DocVector::from).collect()
            };
            let jobs: Vec<(usize, usize)> = config
                .budgets
                .iter()
                .flat_map(|&b| (0..config.repetitions).map(move |r| (b, r)))
                .collect();
            jobs.par_iter()
                .map(|&(budget, repetition)| {
                    let seed = derive_seed(config.seed, &[budget as u64, repetition as u64]);
                    let m = train_cluster_majority(&partition, &prepared.corpus, budget, seed)?;
                    let labels = test
                        .iter()
                        .map(|&doc| Ok(predict_cluster_majority(&m, doc, &clusters)?.to_string()))
                        .collect::<Result<Vec<_>>>()?;
                    let entry = ModelEntry { budget, repetition, model: Some(BaselineModel::ClusterMajority(m)), constant_label: None };
                    Ok((entry, labels))
                })
                .collect::<Result<_>>()?
        }
        ModelKind::Nb | ModelKind::Svm => {
            inputs.extend(prepared.inputs(&[
                BUDGET_SAMPLES,
                if features == FeatureKind::Bow { BOW_TRAIN } else { DENSE_TRAIN },
                if features == FeatureKind::Bow { BOW_TEST } else { DENSE_TEST },
            ]));
            let samples = read_budget_samples(&ws.path(BUDGET_SAMPLES))?;
            samples
                .par_iter()
                .map(|s| {
                    let positions = s
                        .doc_ids
                        .iter()
                        .map(|id| {
                            prepared.train_ids.binary_search(id).map_err(|_| {
                                CliError::Stale(format!("budget sample names unknown train document {id}"))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()?;
                    let labels: Vec<&str> = s
                        .doc_ids
                        .iter()
                        .map(|&id| {
                            prepared.corpus.get(id).and_then(|d| d.gold_label.as_deref()).ok_or_else(|| {
                                CliError::Config(format!("train document {id} has no gold label"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    let (model, predictions) = match features {
                        FeatureKind::Bow => fit_predict(
                            model,
                            config,
                            positions.iter().map(|&i| &prepared.bow_train[i]).zip(labels.iter().copied()).collect(),
                            &prepared.bow_test.iter().collect::<Vec<_>>(),
                            prepared.vocab_size,
                        )?,
                        FeatureKind::Dense => {
                            let train = prepared.dense_train()?;
                            let test = prepared.dense_test()?;
                            let dim = train.first().map_or(0, |v| v.dim());
                            fit_predict(
                                model,
                                config,
                                positions.iter().map(|&i| &train[i]).zip(labels.iter().copied()).collect(),
                                &test.iter().collect::<Vec<_>>(),
                                dim,
                            )?
                        }
                    };
                    let constant_label = match &model {
                        None => predictions.first().cloned(),
                        Some(_) => None,
                    };
                    Ok((ModelEntry { budget: s.budget, repetition: s.repetition, model, constant_label }, predictions))
                })
                .collect::<Result<_>>()?
        }
    };

    let mut records = Vec::new();
    let mut entries = Vec::with_capacity(fits.len());
    for (entry, labels) in fits {
        for (&doc_id, label) in prepared.test_ids.iter().zip(labels) {
            records.push(PredictionRecord {
                doc_id,
                predicted_label: label,
                setting: setting.to_string(),
                budget: entry.budget,
                repetition: entry.repetition,
            });
        }
        entries.push(entry);
    }
    let records = PredictionSet::from_records(records, &prepared.corpus)?.records();
    let predictions_name = format!("predictions/{setting}.jsonl");
    let models_name = format!("models/{setting}.json");
    let models = serde_json::to_vec_pretty(&ModelsArtifact { setting, entries: entries })
        .map_err(Error::from)?;
    let artifacts = [ws.write(&predictions_name, &prediction_bytes(&records)?)?, ws.write(&models_name, &models)?].into();
    let key = BaselineKey {
        setting,
        prepare: prepare_digest(config),
        cluster: cluster_digest,
        nb_alpha: config.nb_alpha,
        svm: config.svm_config(),
    };
    ws.record(
        &format!("baseline:{setting}"),
        StageRecord { config_digest: json_digest(&key), inputs, artifacts, ..StageRecord::default() },
    )?;
    println!("{setting}: {} predictions -> {}", records.len(), ws.path(&predictions_name).display());
    Ok(())
}

/// Something both NB variants and the SVM can train on.
trait BaselineInput: Features + Sync {
    fn as_dense(&self) -> Option<&[f64]>;
    fn as_sparse(&self) -> Option<&SparseCounts>;
}

impl BaselineInput for SparseCounts {
    fn as_dense(&self) -> Option<&[f64]> {
        None
    }
    fn as_sparse(&self) -> Option<&SparseCounts> {
        Some(self)
    }
}

impl BaselineInput for DenseVector {
    fn as_dense(&self) -> Option<&[f64]> {
        Some(self.values())
    }
    fn as_sparse(&self) -> Option<&SparseCounts> {
        None
    }
}

fn fit_predict<X: BaselineInput>(
    model: ModelKind,
    config: &RunConfig,
    samples: Vec<(&X, &str)>,
    test: &[&X],
    dim: usize,
) -> Result<(Option<BaselineModel>, Vec<String>)> {
    match model {
        ModelKind::Nb => {
            if let Some(sparse) = samples.iter().map(|(x, l)| x.as_sparse().map(|s| (s, *l))).collect::<Option<Vec<_>>>() {
                let nb = train_nb(&sparse, dim, config.nb_alpha)?;
                let labels = test.iter().map(|x| nb.predict(x.as_sparse().unwrap()).to_string()).collect();
                Ok((Some(BaselineModel::Nb(nb)), labels))
            } else {
                let dense: Vec<(&[f64], &str)> = samples.iter().map(|(x, l)| (x.as_dense().unwrap(), *l)).collect();
                let nb = train_gaussian_nb(&dense)?;
                let labels = test
                    .iter()
                    .map(|x| Ok(nb.predict(x.as_dense().unwrap())?.to_string()))
                    .collect::<Result<_>>()?;
                Ok((Some(BaselineModel::GaussianNb(nb)), labels))
            }
        }
        ModelKind::Svm => match train_svm(&samples, dim, &config.svm_config()) {
            Ok(svm) => {
                let labels = test.iter().map(|x| svm.predict(*x).to_string()).collect();
                Ok((Some(BaselineModel::Svm(svm)), labels))
            }
            Err(Error::SingleClass(_)) => {
                let only = samples[0].1.to_string();
                Ok((None, vec![only; test.len()]))
            }
            Err(e) => Err(e.into()),
        },
        ModelKind::ClusterMajority => unreachable!("handled by the caller"),
    }
}
