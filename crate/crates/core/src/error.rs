use std::path::PathBuf;

/// Errors raised by the clustering, labeling and evaluation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus too small: {found} documents, at least {required} required")]
    CorpusTooSmall { found: usize, required: usize },
    #[error("split ratios must sum to 1, got {sum}")]
    BadRatios { sum: f64 },
    #[error("document {id} has empty text")]
    EmptyText { id: u64 },
    #[error("duplicate document id {0}")]
    DuplicateId(u64),
    #[error("budget {budget} exceeds train split size {train_size}")]
    BudgetTooLarge { budget: usize, train_size: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("requested {clusters} clusters for {documents} documents")]
    TooManyClusters { clusters: usize, documents: usize },
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("representation mismatch: model expects {expected} vectors")]
    RepresentationMismatch { expected: &'static str },
    #[error("partition does not match corpus: {0}")]
    PartitionMismatch(String),
    #[error("invalid predictions: {0}")]
    InvalidPredictions(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("need at least two classes, found {0}")]
    SingleClass(usize),
    #[error("undefined ratio: base accuracy {0} must lie strictly between 0 and 1")]
    UndefinedRatio(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {required} samples, found {found}")]
    TooFewSamples { found: usize, required: usize },
    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by the filesystem rather than by bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. }) || matches!(self, Error::Csv(e) if e.is_io_error())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
