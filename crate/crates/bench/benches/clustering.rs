use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudoclust::cluster::{cluster_hartigan, cluster_kmeans, cluster_sib};
use pseudoclust::corpus::{build_vocabulary, vectorize_bow_all};
use pseudoclust::synth::{disjoint_topic_counts, gaussian_blobs, topical_documents, TopicalSpec};
use pseudoclust::{Algorithm, ClusterConfig, DenseVector, Document};

fn sib(c: &mut Criterion) {
    let mut group = c.benchmark_group("sib");
    group.sample_size(10);
    for docs in [1_000usize, 5_000] {
        let (bow, _) = disjoint_topic_counts(20, docs / 20, 2_000, 40, 1);
        let config = ClusterConfig { restarts: 1, ..ClusterConfig::new(Algorithm::Sib, 50, 0) };
        group.bench_with_input(BenchmarkId::from_parameter(docs), &bow, |b, bow| {
            b.iter(|| cluster_sib(black_box(bow), &config).unwrap())
        });
    }
    group.finish();
}

fn kmeans(c: &mut Criterion) {
    let (points, _) = gaussian_blobs(8, 500, 50, 3.0, 1.0, 2);
    let vecs: Vec<DenseVector> = points.into_iter().map(|p| DenseVector::new(p).unwrap()).collect();
    let mut group = c.benchmark_group("kmeans");
    group.sample_size(10);
    let lloyd = ClusterConfig { restarts: 1, ..ClusterConfig::new(Algorithm::Kmeans, 50, 0) };
    group.bench_function("lloyd", |b| b.iter(|| cluster_kmeans(black_box(&vecs), &lloyd).unwrap()));
    let hartigan = ClusterConfig { restarts: 1, ..ClusterConfig::new(Algorithm::HartiganKmeans, 50, 0) };
    group.bench_function("hartigan", |b| b.iter(|| cluster_hartigan(black_box(&vecs), &hartigan).unwrap()));
    group.finish();
}

fn vectorize(c: &mut Criterion) {
    let spec = TopicalSpec { topics: 10, docs_per_topic: 500, words_per_doc: 60, noise_words: 20, ..TopicalSpec::default() };
    let docs = topical_documents(&spec);
    let refs: Vec<&Document> = docs.iter().collect();
    c.bench_function("vocabulary", |b| b.iter(|| build_vocabulary(black_box(refs.iter().copied()), 10_000)));
    let vocab = build_vocabulary(refs.iter().copied(), 10_000);
    c.bench_function("bow", |b| b.iter(|| vectorize_bow_all(black_box(&refs), &vocab)));
}

criterion_group!(benches, sib, kmeans, vectorize);
criterion_main!(benches);
