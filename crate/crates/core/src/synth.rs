//! Seeded synthetic fixtures: topical corpora, disjoint-topic count
//! matrices and Gaussian blobs.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::stem::stem;
use crate::corpus::{Document, SparseCounts, Split};
use crate::seed::rng_for;

/// `count` distinct lowercase words that the stemmer leaves unchanged.
pub fn stable_words(count: usize, seed: u64) -> Vec<String> {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
    const VOWELS: &[&str] = &["a", "o", "u"];
    let mut rng = rng_for(seed, &[0x5759]);
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::with_capacity(count);
    while words.len() < count {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(&mut rng).unwrap());
            w.push_str(VOWELS.choose(&mut rng).unwrap());
        }
        w.push_str(ONSETS.choose(&mut rng).unwrap());
        if stem(&w) == w && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

/// Labeled documents over disjoint per-topic word lists. Each document
/// draws `words_per_doc` words uniformly from its topic, plus
/// `noise_words` from a shared background list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicalSpec {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub words_per_topic: usize,
    pub words_per_doc: usize,
    pub noise_words: usize,
    pub seed: u64,
}

impl Default for TopicalSpec {
    fn default() -> Self {
        TopicalSpec { topics: 5, docs_per_topic: 100, words_per_topic: 40, words_per_doc: 30, noise_words: 0, seed: 0 }
    }
}

pub fn topical_documents(spec: &TopicalSpec) -> Vec<Document> {
    let background = 50;
    let words = stable_words(spec.topics * spec.words_per_topic + background, spec.seed);
    let (topic_words, noise) = words.split_at(spec.topics * spec.words_per_topic);
    let mut rng = rng_for(spec.seed, &[0x7e47]);
    let mut docs = Vec::with_capacity(spec.topics * spec.docs_per_topic);
    for i in 0..spec.topics * spec.docs_per_topic {
        let topic = i % spec.topics;
        let vocab = &topic_words[topic * spec.words_per_topic..(topic + 1) * spec.words_per_topic];
        let mut text: Vec<&str> = (0..spec.words_per_doc)
            .map(|_| vocab.choose(&mut rng).unwrap().as_str())
            .collect();
        text.extend((0..spec.noise_words).map(|_| noise.choose(&mut rng).unwrap().as_str()));
        docs.push(Document::new(i as u64, text.join(" ")).with_label(format!("topic{topic}")));
    }
    docs
}

/// The documents with splits assigned within each topic: of every
/// `train + test` consecutive members of a topic, the first `train` go to
/// train and the rest to test.
pub fn with_splits(docs: Vec<Document>, topics: usize, train: usize, test: usize) -> Vec<Document> {
    docs.into_iter()
        .enumerate()
        .map(|(i, d)| {
            let position = i / topics.max(1);
            let split = if position % (train + test).max(1) < train { Split::Train } else { Split::Test };
            d.with_split(split)
        })
        .collect()
}

/// Count vectors from `topics` multinomials with disjoint support over a
/// vocabulary of `vocab_size` terms, and each document's topic.
pub fn disjoint_topic_counts(
    topics: usize,
    docs_per_topic: usize,
    vocab_size: usize,
    words_per_doc: usize,
    seed: u64,
) -> (Vec<SparseCounts>, Vec<usize>) {
    let width = vocab_size / topics;
    let mut rng = rng_for(seed, &[0xd15c]);
    let mut docs = Vec::with_capacity(topics * docs_per_topic);
    let mut labels = Vec::with_capacity(topics * docs_per_topic);
    for i in 0..topics * docs_per_topic {
        let topic = i % topics;
        // a per-topic skewed distribution: weight of term j is 1/(j+1)
        let weights: Vec<f64> = (0..width).map(|j| 1.0 / (j + 1) as f64).collect();
        let dist = rand::distr::weighted::WeightedIndex::new(&weights).unwrap();
        let mut counts = vec![0u32; width];
        for _ in 0..words_per_doc {
            counts[dist.sample(&mut rng)] += 1;
        }
        docs.push(SparseCounts::from_pairs(
            counts
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c > 0)
                .map(|(j, c)| ((topic * width + j) as u32, c)),
        ));
        labels.push(topic);
    }
    (docs, labels)
}

/// `per_class` points around each of `classes` centers. Centers sit on the
/// vertices of a hypercube with edge `separation * sigma`, so the closest
/// pair of centers is exactly that far apart.
pub fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    sigma: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let bits = usize::BITS - (classes.max(2) - 1).leading_zeros();
    assert!(dim >= bits as usize, "not enough axes for the centers");
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = rng_for(seed, &[0xb10b]);
    let mut points = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    for i in 0..classes * per_class {
        let class = i % classes;
        let center: Vec<f64> = (0..dim)
            .map(|axis| if (class >> axis) & 1 == 1 { separation * sigma } else { 0.0 })
            .collect();
        points.push(center.iter().map(|c| c + noise.sample(&mut rng)).collect());
        labels.push(class);
    }
    (points, labels)
}
