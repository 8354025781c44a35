//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus: no sentences in input")]
    EmptyCorpus,

    #[error("empty test set")]
    EmptyTestSet,

    #[error("duplicate word in fixed word list: {0:?}")]
    DuplicateWord(String),

    #[error("corpus has zero tokens")]
    ZeroTokens,

    #[error("mixed window orders: expected {expected}, found {found}")]
    MixedOrders { expected: usize, found: usize },

    #[error("context {context:?} not present in statistics (windows and stats built from different corpora?)")]
    UnknownContext { context: Vec<u32> },

    #[error("Kneser-Ney discount degenerate at level {level} (n1 + 2*n2 = 0): use a smaller order or more data")]
    KnDegenerate { level: usize },

    #[error("ARPA parse error at line {line}: {msg}")]
    ArpaParse { line: usize, msg: String },

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("target pmf not normalized: sums to {sum}")]
    NonNormalizedTarget { sum: f64 },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("model emitted non-positive probability {prob} for token at position {position}")]
    NonPositiveProb { position: usize, prob: f64 },

    #[error("training regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("encoding variant {variant:?} not supported by family {family:?}")]
    VariantMismatch { variant: String, family: String },

    #[error("optimizer step requested before any gradients were accumulated")]
    StepWithoutGradients,

    #[error("empty training target set")]
    EmptyTargets,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("unknown word {0:?}")]
    UnknownWord(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
