//! Language modeling toolkit: classic back-off n-gram smoothing (Katz,
//! interpolated Kneser-Ney) and neural n-gram smoothing (feed-forward,
//! vanilla RNN, LSTM with several context encodings and target regimes),
//! plus a fully recurrent LSTM baseline with segmented-BPTT training.
//!
//! The pieces compose into one pipeline: build a [`corpus::Vocabulary`],
//! encode a [`corpus::CorpusStream`], extract [`ngram::NGramWindow`]s and
//! accumulate [`ngram::ContextStats`], then estimate a back-off model
//! ([`backoff`]) or train a neural one ([`neural`], [`recurrent`]) and
//! evaluate perplexity ([`eval`]).

pub mod backoff;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ngram;
pub mod nn;

pub use error::{Error, Result};
