//! Perplexity and cross-entropy computation, uniform over all model kinds,
//! plus report assembly.

use serde::Serialize;

use crate::backoff::ArpaModel;
use crate::corpus::{BoundaryMode, CorpusStream, WordId};
use crate::error::{Error, Result};
use crate::ngram::{extract_windows, ContextStats, NGramWindow};

/// Anything that scores a word in an n-gram context. All probabilities must
/// be strictly positive over the closed vocabulary.
pub trait LanguageModel {
    fn order(&self) -> usize;
    /// Natural-log probability of `word` after `context` (length order-1;
    /// longer contexts are truncated to the most recent ids, shorter ones are
    /// scored with the matching level where supported).
    fn log_prob(&self, context: &[WordId], word: WordId) -> f64;
    fn descriptor(&self) -> String;
}

impl LanguageModel for ArpaModel {
    fn order(&self) -> usize {
        self.order()
    }

    fn log_prob(&self, context: &[WordId], word: WordId) -> f64 {
        ArpaModel::log_prob(self, context, word)
    }

    fn descriptor(&self) -> String {
        format!("{}-gram {}", self.order(), self.smoothing())
    }
}

/// The uniform distribution over a closed vocabulary; its perplexity on any
/// corpus equals the vocabulary size.
pub struct UniformModel {
    pub vocab_size: usize,
    pub order: usize,
}

impl LanguageModel for UniformModel {
    fn order(&self) -> usize {
        self.order
    }

    fn log_prob(&self, _context: &[WordId], _word: WordId) -> f64 {
        -(self.vocab_size as f64).ln()
    }

    fn descriptor(&self) -> String {
        format!("uniform over {} words", self.vocab_size)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub model: String,
    pub perplexity: f64,
    /// nats per token
    pub cross_entropy: f64,
    /// log2 convenience view of the same quantity
    pub bits_per_token: f64,
    pub token_count: usize,
    pub oov_rate: f64,
    pub boundary_mode: BoundaryMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_ratios: Option<Vec<f64>>,
}

impl EvalReport {
    /// Aligned-text summary table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let rows = [
            ("model", self.model.clone()),
            ("perplexity", format!("{:.4}", self.perplexity)),
            ("cross-entropy (nats)", format!("{:.6}", self.cross_entropy)),
            ("bits/token", format!("{:.6}", self.bits_per_token)),
            ("tokens", self.token_count.to_string()),
            ("oov rate", format!("{:.4}", self.oov_rate)),
            ("boundary mode", self.boundary_mode.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap();
        for (k, v) in rows {
            s.push_str(&format!("{k:<width$}  {v}\n"));
        }
        if let Some(hr) = &self.hit_ratios {
            let vals = hr
                .iter()
                .map(|r| format!("{r:.1}"))
                .collect::<Vec<_>>()
                .join(", ");
            s.push_str(&format!("{:<width$}  {vals}\n", "hit ratios (%)"));
        }
        s
    }
}

fn summed_log_prob(model: &dyn LanguageModel, windows: &[NGramWindow]) -> Result<f64> {
    let mut sum = 0.0f64;
    for (position, w) in windows.iter().enumerate() {
        let lp = model.log_prob(&w.context, w.target);
        if !lp.is_finite() || lp > 0.0 {
            return Err(Error::NonPositiveProb {
                position,
                prob: lp.exp(),
            });
        }
        sum += lp;
    }
    Ok(sum)
}

/// Perplexity per the exponentiated mean negative log-likelihood, counting
/// every `</s>` and `<unk>` target. Contexts are formed per the corpus
/// boundary mode.
pub fn perplexity(
    model: &dyn LanguageModel,
    corpus: &CorpusStream,
    pad: WordId,
) -> Result<EvalReport> {
    if corpus.total_tokens() == 0 {
        return Err(Error::ZeroTokens);
    }
    let windows = extract_windows(corpus, model.order(), pad);
    let sum = summed_log_prob(model, &windows)?;
    let n = windows.len();
    let xent = -sum / n as f64;
    Ok(EvalReport {
        model: model.descriptor(),
        perplexity: xent.exp(),
        cross_entropy: xent,
        bits_per_token: xent / std::f64::consts::LN_2,
        token_count: n,
        oov_rate: corpus.oov_rate()?,
        boundary_mode: corpus.boundary_mode(),
        hit_ratios: None,
    })
}

/// Cross-entropy in nats/token from raw windows (the one-hot path).
pub fn cross_entropy_onehot(model: &dyn LanguageModel, windows: &[NGramWindow]) -> Result<f64> {
    if windows.is_empty() {
        return Err(Error::ZeroTokens);
    }
    Ok(-summed_log_prob(model, windows)? / windows.len() as f64)
}

/// Cross-entropy in nats/token from sufficient statistics (the multinomial
/// path): (1/T) sum_h count(h) sum_w f(w|h) . -log P(w|h). Agrees with the
/// one-hot path because count(h) f(w|h) = count(h,w).
pub fn cross_entropy_multinomial(model: &dyn LanguageModel, stats: &ContextStats) -> Result<f64> {
    let t = stats.total_windows();
    if t == 0 {
        return Err(Error::ZeroTokens);
    }
    let n = stats.order();
    let mut sum = 0.0f64;
    let grouped = stats.grouped_successors(n);
    let mut contexts: Vec<&[WordId]> = grouped.keys().copied().collect();
    contexts.sort_unstable();
    for h in contexts {
        for &(w, count) in &grouped[h] {
            let lp = model.log_prob(h, w);
            if !lp.is_finite() || lp > 0.0 {
                return Err(Error::NonPositiveProb {
                    position: 0,
                    prob: lp.exp(),
                });
            }
            sum += count as f64 * lp;
        }
    }
    Ok(-sum / t as f64)
}
