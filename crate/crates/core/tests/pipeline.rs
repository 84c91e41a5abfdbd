use std::collections::HashMap;

use pseudoclust::baselines::{predict_cluster_majority, train_cluster_majority, train_nb};
use pseudoclust::cluster::{assignment_costs, cluster, ClusterModel, Representation};
use pseudoclust::corpus::{
    build_vocabulary, tokenize_and_stem, vectorize_bow_all, vectorize_dense_all, Embeddings,
};
use pseudoclust::eval::{accuracy_cells, build_report, nmi, ReportConfig};
use pseudoclust::pseudolabel::{export_pseudolabels, read_pseudolabels, PredictionRecord, PredictionSet};
use pseudoclust::synth::{topical_documents, with_splits, TopicalSpec};
use pseudoclust::{Algorithm, ClusterConfig, Corpus, Document, Split};
use rand::Rng;

fn corpus() -> Corpus {
    let spec = TopicalSpec { topics: 4, docs_per_topic: 50, words_per_doc: 25, noise_words: 5, seed: 8, ..TopicalSpec::default() };
    Corpus::from_split_documents(with_splits(topical_documents(&spec), 4, 4, 1)).unwrap()
}

fn gold(corpus: &Corpus, ids: &[u64]) -> Vec<usize> {
    ids.iter().map(|&id| corpus.gold_index(id).unwrap()).collect()
}

#[test]
fn sparse_flow_from_clusters_to_report() {
    let corpus = corpus();
    let train: Vec<&Document> = corpus.split(Split::Train).collect();
    let test: Vec<&Document> = corpus.split(Split::Test).collect();
    let ids: Vec<u64> = train.iter().map(|d| d.id).collect();
    let vocab = build_vocabulary(train.iter().copied(), 10_000);
    let bow = vectorize_bow_all(&train, &vocab);

    let config = ClusterConfig { restarts: 4, ..ClusterConfig::new(Algorithm::Sib, 4, 21) };
    let partition = cluster(Representation::Sparse(&bow), &config).unwrap().with_doc_ids(&ids).unwrap();
    assert!(nmi(&partition.assignments, &gold(&corpus, &ids)).unwrap() > 0.99);

    let costs = assignment_costs(&partition, Representation::Sparse(&bow)).unwrap();
    assert!(costs.iter().all(|c| c.is_some_and(|v| v.is_finite() && v >= 0.0)));
    let dir = tempfile::tempdir().unwrap();
    let path = export_pseudolabels(&partition, &corpus, &costs, 0.2, dir.path()).unwrap();
    let (meta, records) = read_pseudolabels(&path).unwrap();
    assert_eq!(meta.n_clusters, 4);
    let sizes = partition.cluster_sizes();
    let kept: usize = sizes.iter().map(|s| s - s / 5).sum();
    assert_eq!(records.len(), kept);
    // every dropped member costs at least as much as every kept one
    for c in 0..4 {
        let kept_max = records.iter().filter(|r| r.pseudo_label == c).map(|r| r.confidence.unwrap()).fold(f64::MIN, f64::max);
        let kept_ids: Vec<u64> = records.iter().map(|r| r.doc_id).collect();
        for (i, &id) in partition.doc_ids.iter().enumerate() {
            if partition.assignments[i] == c && !kept_ids.contains(&id) {
                assert!(costs[i].unwrap() >= kept_max);
            }
        }
    }

    let model = train_cluster_majority(&partition, &corpus, 4, 3).unwrap();
    assert!(model.revealed_ids.iter().all(|r| r.len() == 1));
    let clusters = ClusterModel::from_sib(&bow, &partition).unwrap();
    let test_bow = vectorize_bow_all(&test, &vocab);
    let revealed: Vec<usize> = model.revealed_ids.iter().flatten().map(|id| ids.binary_search(id).unwrap()).collect();
    let nb_samples: Vec<_> = revealed.iter().map(|&i| (&bow[i], train[i].gold_label.as_deref().unwrap())).collect();
    let nb = train_nb(&nb_samples, vocab.len(), 1.0).unwrap();

    let mut records = Vec::new();
    for (doc, b) in test.iter().zip(&test_bow) {
        let label = predict_cluster_majority(&model, b.into(), &clusters).unwrap();
        assert_eq!(label, doc.gold_label.as_deref().unwrap());
        assert_eq!(nb.predict(b), label);
        for (setting, rep, l) in [("plain", 0, "topic0"), ("plain", 1, label), ("cluster_majority", 0, label), ("cluster_majority", 1, label)] {
            records.push(PredictionRecord { doc_id: doc.id, predicted_label: l.into(), setting: setting.into(), budget: 4, repetition: rep });
        }
    }
    let set = PredictionSet::from_records(records, &corpus).unwrap();
    let cells = accuracy_cells(&set, &corpus).unwrap();
    let report = build_report(cells, &ReportConfig::default()).unwrap();
    let cm = report.groups.iter().find(|g| g.setting == "cluster_majority").unwrap();
    assert_eq!((cm.mean, cm.sem), (1.0, 0.0));
    let plain = report.groups.iter().find(|g| g.setting == "plain").unwrap();
    assert!((plain.mean - (1.0 + 0.25) / 2.0).abs() < 1e-12);
    assert_eq!(report.comparisons.len(), 1);
}

#[test]
fn dense_flow_with_embeddings() {
    let corpus = corpus();
    let train: Vec<&Document> = corpus.split(Split::Train).collect();
    let ids: Vec<u64> = train.iter().map(|d| d.id).collect();
    // topic words sit near a topic center, background words near the origin
    let mut rng = pseudoclust::seed::rng_for(1, &[2]);
    let mut table = HashMap::new();
    for d in &train {
        let topic: usize = d.gold_label.as_ref().unwrap()[5..].parse().unwrap();
        for (j, token) in tokenize_and_stem(&d.text).into_iter().enumerate() {
            let is_topic_word = j < 25;
            table.entry(token).or_insert_with(|| {
                (0..8)
                    .map(|k| {
                        let center = if is_topic_word && k == topic { 3.0 } else { 0.0 };
                        center + rng.random_range(-0.5..0.5)
                    })
                    .collect::<Vec<f64>>()
            });
        }
    }
    let embeddings = Embeddings::from_table(8, table).unwrap();
    let vectors = vectorize_dense_all(&train, &embeddings);
    for algorithm in [Algorithm::Kmeans, Algorithm::HartiganKmeans] {
        let config = ClusterConfig { restarts: 3, ..ClusterConfig::new(algorithm, 4, 5) };
        let partition = cluster(Representation::Dense(&vectors), &config).unwrap().with_doc_ids(&ids).unwrap();
        assert!(nmi(&partition.assignments, &gold(&corpus, &ids)).unwrap() > 0.95, "{algorithm}");
        let costs = assignment_costs(&partition, Representation::Dense(&vectors)).unwrap();
        let clusters = ClusterModel::from_dense(&vectors, &partition).unwrap();
        for (v, (&a, c)) in vectors.iter().zip(partition.assignments.iter().zip(&costs)) {
            let distances = clusters.costs(v.into()).unwrap();
            assert!((distances[a] - c.unwrap()).abs() < 1e-12);
        }
        assert!(cluster(Representation::Sparse(&[]), &config).is_err());
    }
}
