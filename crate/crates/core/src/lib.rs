//! Unsupervised pseudo-labeling toolkit: stemmed bag-of-words and averaged
//! embedding representations, sequential Information Bottleneck and K-means
//! clustering, pseudo-label interchange, bag-of-words baselines, and the
//! evaluation statistics used to judge them.

pub mod baselines;
pub mod cluster;
pub mod corpus;
pub mod digest;
pub mod error;
pub mod eval;
pub mod jsonl;
pub mod pseudolabel;
pub mod seed;
pub mod synth;

pub use cluster::{Algorithm, ClusterConfig, Partition};
pub use corpus::{Corpus, DenseVector, Document, SparseCounts, Split, Vocabulary};
pub use error::{Error, Result};
