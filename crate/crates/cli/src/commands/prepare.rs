use std::collections::BTreeMap;

use pseudoclust::corpus::io::{
    bow_coo_bytes, budget_samples_bytes, corpus_bytes, dense_bytes, read_documents, split_bytes,
    vocabulary_bytes,
};
use pseudoclust::corpus::{
    build_vocabulary, sample_budgets, split_corpus, trim_corpus, vectorize_bow_all,
    vectorize_dense_all, Embeddings,
};
use pseudoclust::{Document, Error, Split};

use super::*;
use crate::manifest::{file_digest, StageRecord, Workspace};

pub fn prepare(config: &RunConfig) -> Result<()> {
    let corpus_path = config
        .corpus
        .as_deref()
        .ok_or_else(|| CliError::Config("no corpus: pass --corpus or set `corpus` in the config".into()))?;
    let docs = read_documents(corpus_path)?;
    let mut corpus = split_corpus(docs, config.split, config.seed)?;
    if let Some(caps) = config.trim {
        corpus = trim_corpus(corpus, caps.train, caps.test, config.seed)?;
    }
    let train: Vec<&Document> = corpus.split(Split::Train).collect();
    let test: Vec<&Document> = corpus.split(Split::Test).collect();
    let train_ids: Vec<u64> = train.iter().map(|d| d.id).collect();
    let test_ids: Vec<u64> = test.iter().map(|d| d.id).collect();
    let vocab = build_vocabulary(train.iter().copied(), config.vocab_cap);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary.into());
    }
    let bow_train = vectorize_bow_all(&train, &vocab);
    let bow_test = vectorize_bow_all(&test, &vocab);
    let samples = sample_budgets(&corpus, &config.budgets, config.repetitions, config.seed)?;

    let mut ws = Workspace::open(&config.out)?;
    let mut artifacts = BTreeMap::new();
    let mut sources = BTreeMap::new();
    sources.insert(corpus_path.display().to_string(), file_digest(corpus_path)?);
    let saved = RunConfig { out: ".".into(), ..config.clone() };
    for (name, bytes) in [
        (CONFIG, saved.to_toml().into_bytes()),
        (CORPUS, corpus_bytes(&corpus)?),
        (SPLIT, split_bytes(&corpus, config.seed)?),
        (VOCABULARY, vocabulary_bytes(&vocab)?),
        (BOW_TRAIN, bow_coo_bytes(&train_ids, &bow_train, vocab.len())),
        (BOW_TEST, bow_coo_bytes(&test_ids, &bow_test, vocab.len())),
        (BUDGET_SAMPLES, budget_samples_bytes(&samples, config.seed, config.repetitions)?),
    ] {
        let (k, v) = ws.write(name, &bytes)?;
        artifacts.insert(k, v);
    }
    if let Some(path) = &config.embeddings {
        let embeddings = Embeddings::read(path)?;
        sources.insert(path.display().to_string(), file_digest(path)?);
        let dim = embeddings.dim();
        for (name, ids, docs) in [(DENSE_TRAIN, &train_ids, &train), (DENSE_TEST, &test_ids, &test)] {
            let vecs = vectorize_dense_all(docs, &embeddings);
            let (k, v) = ws.write(name, &dense_bytes(ids, &vecs, dim)?)?;
            artifacts.insert(k, v);
        }
    }
    ws.record(
        "prepare",
        StageRecord { config_digest: prepare_digest(config), inputs: BTreeMap::new(), artifacts, sources },
    )?;
    let sizes = corpus.split_sizes();
    println!(
        "prepared {} documents (train {}, dev {}, test {}), {} labels, vocabulary {}, {} budget samples -> {}",
        corpus.len(),
        sizes.get(&Split::Train).unwrap_or(&0),
        sizes.get(&Split::Dev).unwrap_or(&0),
        sizes.get(&Split::Test).unwrap_or(&0),
        corpus.labels().len(),
        vocab.len(),
        samples.len(),
        config.out.display()
    );
    Ok(())
}
