//! Back-off n-gram models: Katz and interpolated Kneser-Ney estimation from
//! [`ContextStats`](crate::ngram::ContextStats), probability lookup via the
//! standard back-off recursion, and ARPA-format persistence.

mod arpa;
mod katz;
mod kneser_ney;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Vocabulary, WordId};

pub use arpa::{read_arpa, write_arpa};
pub use katz::estimate_katz;
pub use kneser_ney::estimate_kn;

pub const DEFAULT_GT_MAX: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    Katz,
    KneserNeyInterpolated,
}

impl std::fmt::Display for Smoothing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Smoothing::Katz => write!(f, "katz"),
            Smoothing::KneserNeyInterpolated => write!(f, "kneser_ney_interpolated"),
        }
    }
}

/// One stored n-gram: natural-log probability plus, below the top level, a
/// natural-log back-off weight (absent means a weight of 1).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub log_prob: f64,
    pub log_bow: Option<f64>,
}

/// A back-off model over a fixed vocabulary. Probabilities and back-off
/// weights are held in natural log internally; ARPA serialization converts
/// to log10.
#[derive(Debug, Clone)]
pub struct ArpaModel {
    order: usize,
    levels: Vec<HashMap<Box<[WordId]>, Entry>>,
    vocab: Vocabulary,
    smoothing: Smoothing,
}

impl ArpaModel {
    pub(crate) fn from_levels(
        order: usize,
        levels: Vec<HashMap<Box<[WordId]>, Entry>>,
        vocab: Vocabulary,
        smoothing: Smoothing,
    ) -> ArpaModel {
        debug_assert_eq!(levels.len(), order);
        ArpaModel {
            order,
            levels,
            vocab,
            smoothing,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn entries_at(&self, m: usize) -> usize {
        self.levels[m - 1].len()
    }

    /// Natural-log probability by the standard back-off recursion: stored
    /// grams return their value; otherwise the context's back-off weight
    /// scales the suffix-context probability. Total over the vocabulary,
    /// strictly greater than -inf for every (h, w).
    pub fn log_prob(&self, context: &[WordId], word: WordId) -> f64 {
        let max_ctx = self.order - 1;
        let h = if context.len() > max_ctx {
            &context[context.len() - max_ctx..]
        } else {
            context
        };
        self.log_prob_rec(h, word)
    }

    fn log_prob_rec(&self, h: &[WordId], word: WordId) -> f64 {
        let m = h.len() + 1;
        let mut key: Vec<WordId> = Vec::with_capacity(m);
        key.extend_from_slice(h);
        key.push(word);
        if let Some(e) = self.levels[m - 1].get(key.as_slice()) {
            return e.log_prob;
        }
        if h.is_empty() {
            // The unigram level covers the whole vocabulary, so this is only
            // reachable with an id outside the model's vocabulary.
            return f64::NEG_INFINITY;
        }
        let bow = self.levels[h.len() - 1]
            .get(h)
            .and_then(|e| e.log_bow)
            .unwrap_or(0.0);
        bow + self.log_prob_rec(&h[1..], word)
    }

    /// Probability in (0, 1].
    pub fn prob(&self, context: &[WordId], word: WordId) -> f64 {
        self.log_prob(context, word).exp()
    }

    /// Sums P(w|h) over the whole vocabulary; 1 within tolerance for any h.
    pub fn mass(&self, context: &[WordId]) -> f64 {
        (0..self.vocab.size() as WordId)
            .map(|w| self.prob(context, w))
            .sum()
    }

    pub(crate) fn levels(&self) -> &[HashMap<Box<[WordId]>, Entry>] {
        &self.levels
    }
}

/// Bottom-up model construction: levels are inserted in order 1..=n and the
/// back-off recursion over already-built levels is available to estimators.
pub(crate) struct ModelBuilder {
    pub levels: Vec<HashMap<Box<[WordId]>, Entry>>,
}

impl ModelBuilder {
    pub fn new() -> ModelBuilder {
        ModelBuilder { levels: Vec::new() }
    }

    /// log P(w|h) over the levels built so far; h must be shorter than the
    /// number of built levels.
    pub fn log_prob(&self, h: &[WordId], word: WordId) -> f64 {
        debug_assert!(h.len() < self.levels.len());
        let m = h.len() + 1;
        let mut key: Vec<WordId> = Vec::with_capacity(m);
        key.extend_from_slice(h);
        key.push(word);
        if let Some(e) = self.levels[m - 1].get(key.as_slice()) {
            return e.log_prob;
        }
        if h.is_empty() {
            return f64::NEG_INFINITY;
        }
        let bow = self.levels[h.len() - 1]
            .get(h)
            .and_then(|e| e.log_bow)
            .unwrap_or(0.0);
        bow + self.log_prob_rec_lower(&h[1..], word)
    }

    fn log_prob_rec_lower(&self, h: &[WordId], word: WordId) -> f64 {
        self.log_prob(h, word)
    }

    /// Sets the back-off weight on a lower-level entry. A context that never
    /// occurs as an event at its own level (the all-`<pad>` sentence-start
    /// context) is materialized first with exactly the probability the
    /// back-off recursion already assigns it, which leaves every
    /// distribution unchanged while giving the weight a place to live.
    pub fn set_bow(&mut self, context: &[WordId], log_bow: f64) {
        let level = context.len();
        if !self.levels[level - 1].contains_key(context) {
            let lp = self.log_prob(&context[..level - 1], context[level - 1]);
            self.levels[level - 1].insert(
                context.to_vec().into_boxed_slice(),
                Entry {
                    log_prob: lp,
                    log_bow: None,
                },
            );
        }
        let entry = self.levels[level - 1]
            .get_mut(context)
            .expect("entry just ensured");
        entry.log_bow = Some(log_bow);
    }
}
