//! Corpus ingestion and artifact files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BudgetSample, Corpus, DenseVector, Document, Split, SparseCounts, Vocabulary};
use crate::error::{Error, Result};
use crate::jsonl::{self, Header};

#[derive(Debug, Deserialize)]
struct RawJsonRecord {
    id: Option<u64>,
    text: String,
    #[serde(default)]
    label: Option<serde_json::Value>,
    #[serde(default)]
    split: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawCsvRecord {
    #[serde(default)]
    id: Option<u64>,
    text: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    split: Option<String>,
}

fn parse_split(raw: Option<&str>, path: &Path, line: usize) -> Result<Option<Split>> {
    match raw.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Some(Split::Train)),
            "dev" | "validation" | "valid" => Ok(Some(Split::Dev)),
            "test" => Ok(Some(Split::Test)),
            other => Err(Error::parse(path, line, format!("unknown split {other:?}"))),
        },
    }
}

fn label_string(value: serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::Null => None,
        serde_json::Value::String(s) if s.is_empty() => None,
        serde_json::Value::String(s) => Some(s),
        other => Some(other.to_string()),
    }
}

/// Read raw documents from CSV (`.csv`) or JSON lines (anything else).
///
/// Fields are `text`, optional `label`, optional `split` and optional `id`;
/// without an id the zero-based record number is used.
pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv(path)
    } else {
        read_jsonl(path)
    }
}

fn read_csv(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut docs = Vec::new();
    for (i, record) in reader.deserialize::<RawCsvRecord>().enumerate() {
        let line = i + 2;
        let raw = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
        docs.push(Document {
            id: raw.id.unwrap_or(i as u64),
            text: raw.text,
            gold_label: raw.label.filter(|l| !l.is_empty()),
            split: parse_split(raw.split.as_deref(), path, line)?,
        });
    }
    Ok(docs)
}

fn read_jsonl(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut record_no = 0u64;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawJsonRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        docs.push(Document {
            id: raw.id.unwrap_or(record_no),
            text: raw.text,
            gold_label: raw.label.and_then(label_string),
            split: parse_split(raw.split.as_deref(), path, i + 1)?,
        });
        record_no += 1;
    }
    Ok(docs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub documents: usize,
    pub labels: Vec<String>,
}

pub fn corpus_bytes(corpus: &Corpus) -> Result<Vec<u8>> {
    let header = Header::new(
        "corpus",
        CorpusMeta {
            documents: corpus.len(),
            labels: corpus.labels().to_vec(),
        },
    );
    jsonl::to_bytes(&header, corpus.documents())
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let (_, docs): (Header<CorpusMeta>, Vec<Document>) = jsonl::read(path, "corpus")?;
    Corpus::from_split_documents(docs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMeta {
    pub seed: u64,
    pub sizes: BTreeMap<Split, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub doc_id: u64,
    pub split: Split,
}

pub fn split_bytes(corpus: &Corpus, seed: u64) -> Result<Vec<u8>> {
    let header = Header::new(
        "split",
        SplitMeta {
            seed,
            sizes: corpus.split_sizes(),
        },
    );
    let records: Vec<SplitRecord> = corpus
        .documents()
        .iter()
        .map(|d| SplitRecord {
            doc_id: d.id,
            split: d.split.expect("corpus documents carry a split"),
        })
        .collect();
    jsonl::to_bytes(&header, &records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabMeta {
    pub size_cap: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabRecord {
    pub index: usize,
    pub term: String,
    pub frequency: u64,
}

pub fn vocabulary_bytes(vocab: &Vocabulary) -> Result<Vec<u8>> {
    let header = Header::new(
        "vocabulary",
        VocabMeta {
            size_cap: vocab.size_cap(),
            size: vocab.len(),
        },
    );
    let records: Vec<VocabRecord> = vocab
        .terms()
        .iter()
        .zip(vocab.frequencies())
        .enumerate()
        .map(|(index, (term, &frequency))| VocabRecord {
            index,
            term: term.clone(),
            frequency,
        })
        .collect();
    jsonl::to_bytes(&header, &records)
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let (header, records): (Header<VocabMeta>, Vec<VocabRecord>) = jsonl::read(path, "vocabulary")?;
    for (i, r) in records.iter().enumerate() {
        if r.index != i {
            return Err(Error::parse(path, i + 2, "vocabulary indices must be dense"));
        }
    }
    Ok(Vocabulary::from_terms(
        records.into_iter().map(|r| (r.term, r.frequency)).collect(),
        header.meta.size_cap,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetMeta {
    pub seed: u64,
    pub repetitions: usize,
}

pub fn budget_samples_bytes(samples: &[BudgetSample], seed: u64, repetitions: usize) -> Result<Vec<u8>> {
    jsonl::to_bytes(
        &Header::new("budget_samples", BudgetMeta { seed, repetitions }),
        samples,
    )
}

pub fn read_budget_samples(path: &Path) -> Result<Vec<BudgetSample>> {
    let (_, samples): (Header<BudgetMeta>, Vec<BudgetSample>) = jsonl::read(path, "budget_samples")?;
    Ok(samples)
}

const COO_HEADER: &str = "%coo doc_id term_index count";

/// Coordinate triplets, one `doc_id term_index count` line per non-zero.
pub fn bow_coo_bytes(ids: &[u64], bows: &[SparseCounts], vocab_size: usize) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "{COO_HEADER} vocab_size={vocab_size} documents={}", ids.len()).unwrap();
    for (id, bow) in ids.iter().zip(bows) {
        for (term, count) in bow.iter() {
            writeln!(out, "{id}\t{term}\t{count}").unwrap();
        }
    }
    out
}

/// Read triplets back for the given documents; documents without a triplet
/// get an empty vector.
pub fn read_bow_coo(path: &Path, ids: &[u64]) -> Result<(usize, Vec<SparseCounts>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let position: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); ids.len()];
    let mut vocab_size = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(rest) = line.strip_prefix(COO_HEADER) {
            vocab_size = rest
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix("vocab_size="))
                .and_then(|v| v.parse().ok());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e: std::num::ParseIntError| Error::parse(path, i + 1, e.to_string()))?;
        let [doc_id, term, count] = fields[..] else {
            return Err(Error::parse(path, i + 1, "expected three fields"));
        };
        if let Some(&p) = position.get(&doc_id) {
            pairs[p].push((term as u32, count as u32));
        }
    }
    let vocab_size = vocab_size.ok_or_else(|| Error::parse(path, 1, "missing coo header"))?;
    Ok((
        vocab_size,
        pairs.into_iter().map(SparseCounts::from_pairs).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMeta {
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRecord {
    pub doc_id: u64,
    pub values: DenseVector,
}

pub fn dense_bytes(ids: &[u64], vecs: &[DenseVector], dim: usize) -> Result<Vec<u8>> {
    let records: Vec<DenseRecord> = ids
        .iter()
        .zip(vecs)
        .map(|(&doc_id, v)| DenseRecord {
            doc_id,
            values: v.clone(),
        })
        .collect();
    jsonl::to_bytes(&Header::new("dense", DenseMeta { dim }), &records)
}

pub fn read_dense(path: &Path) -> Result<(usize, BTreeMap<u64, DenseVector>)> {
    let (header, records): (Header<DenseMeta>, Vec<DenseRecord>) = jsonl::read(path, "dense")?;
    let dim = header.meta.dim;
    let mut out = BTreeMap::new();
    for r in records {
        if r.values.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.values.dim(),
            });
        }
        out.insert(r.doc_id, r.values);
    }
    Ok((dim, out))
}

/// Write bytes to `path`, creating or truncating it.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, split_corpus, vectorize_bow, SplitRatios};

    #[test]
    fn reads_csv_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("c.csv");
        std::fs::write(&csv_path, "text,label\n\"hello, world\",greet\nbye now,\n").unwrap();
        let docs = read_documents(&csv_path).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "hello, world");
        assert_eq!(docs[0].gold_label.as_deref(), Some("greet"));
        assert_eq!(docs[1].gold_label, None);
        assert_eq!(docs[1].id, 1);

        let json_path = dir.path().join("c.jsonl");
        std::fs::write(
            &json_path,
            "{\"text\":\"a b\",\"label\":3,\"split\":\"test\"}\n\n{\"id\":9,\"text\":\"c\",\"split\":\"train\"}\n",
        )
        .unwrap();
        let docs = read_documents(&json_path).unwrap();
        assert_eq!(docs[0].gold_label.as_deref(), Some("3"));
        assert_eq!(docs[0].split, Some(Split::Test));
        assert_eq!(docs[1].id, 9);
    }

    #[test]
    fn unknown_split_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        std::fs::write(&p, "{\"text\":\"a\",\"split\":\"holdout\"}\n").unwrap();
        assert!(matches!(read_documents(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn artifacts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let docs: Vec<Document> = (0..20)
            .map(|i| Document::new(i, format!("alpha beta w{}", i % 4)).with_label("x"))
            .collect();
        let corpus = split_corpus(docs, SplitRatios::default(), 2).unwrap();
        let p = dir.path().join("corpus.jsonl");
        write_bytes(&p, &corpus_bytes(&corpus).unwrap()).unwrap();
        assert_eq!(read_corpus(&p).unwrap(), corpus);

        let vocab = build_vocabulary(corpus.split(Split::Train), 3);
        let p = dir.path().join("vocab.jsonl");
        write_bytes(&p, &vocabulary_bytes(&vocab).unwrap()).unwrap();
        assert_eq!(read_vocabulary(&p).unwrap(), vocab);

        let ids: Vec<u64> = corpus.documents().iter().map(|d| d.id).collect();
        let bows: Vec<SparseCounts> = corpus
            .documents()
            .iter()
            .map(|d| vectorize_bow(d, &vocab))
            .collect();
        let p = dir.path().join("bow.coo");
        write_bytes(&p, &bow_coo_bytes(&ids, &bows, vocab.len())).unwrap();
        let (size, back) = read_bow_coo(&p, &ids).unwrap();
        assert_eq!(size, 3);
        assert_eq!(back, bows);
    }
}
