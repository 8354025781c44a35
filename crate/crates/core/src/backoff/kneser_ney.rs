//! Interpolated Kneser-Ney estimation with one absolute discount per level,
//! folded into the ARPA back-off representation.

use std::collections::HashMap;

use crate::corpus::{Vocabulary, WordId};
use crate::error::{Error, Result};
use crate::ngram::ContextStats;

use super::{ArpaModel, Entry, ModelBuilder, Smoothing};

/// Effective counts at one level: raw counts at the top level, continuation
/// counts below. Grams that start with `<pad>` can never be preceded, so they
/// keep their raw counts (the usual sentence-begin exception).
fn effective_counts(
    stats: &ContextStats,
    m: usize,
    top: bool,
    pad: WordId,
) -> HashMap<Box<[WordId]>, u64> {
    if top {
        return stats.grams_at(m).map(|(g, c)| (g.to_vec().into_boxed_slice(), c)).collect();
    }
    let mut cont: HashMap<Box<[WordId]>, u64> = HashMap::new();
    for (gram, _) in stats.grams_at(m + 1) {
        // distinct-predecessor count of the suffix
        *cont.entry(gram[1..].to_vec().into_boxed_slice()).or_insert(0) += 1;
    }
    let mut out: HashMap<Box<[WordId]>, u64> = HashMap::with_capacity(stats.distinct_grams_at(m));
    for (gram, raw) in stats.grams_at(m) {
        let eff = if gram[0] == pad {
            raw
        } else {
            cont.get(gram).copied().unwrap_or(0)
        };
        if eff > 0 {
            out.insert(gram.to_vec().into_boxed_slice(), eff);
        }
    }
    out
}

/// Chen-Goodman discount D = n1 / (n1 + 2*n2) from the level's
/// counts-of-counts. A level with no count-1 and no count-2 grams cannot be
/// smoothed at all; a level with no singletons (the formula would give D=0,
/// removing all back-off mass) falls back to the classic absolute discount
/// of 0.5.
fn level_discount(counts: &HashMap<Box<[WordId]>, u64>, level: usize) -> Result<f64> {
    let n1 = counts.values().filter(|&&c| c == 1).count() as f64;
    let n2 = counts.values().filter(|&&c| c == 2).count() as f64;
    if n1 + 2.0 * n2 == 0.0 {
        return Err(Error::KnDegenerate { level });
    }
    if n1 == 0.0 {
        log::warn!("level {level}: no singleton counts; using absolute discount 0.5");
        return Ok(0.5);
    }
    Ok(n1 / (n1 + 2.0 * n2))
}

fn group_by_context(
    counts: &HashMap<Box<[WordId]>, u64>,
) -> HashMap<&[WordId], Vec<(WordId, u64)>> {
    let mut map: HashMap<&[WordId], Vec<(WordId, u64)>> = HashMap::new();
    for (gram, &c) in counts {
        let m = gram.len();
        map.entry(&gram[..m - 1]).or_default().push((gram[m - 1], c));
    }
    for succ in map.values_mut() {
        succ.sort_unstable_by_key(|&(w, _)| w);
    }
    map
}

/// Estimates an interpolated Kneser-Ney model: absolute discount per level
/// from counts-of-counts, continuation counts at lower levels, uniform 1/V
/// interpolation at the bottom, interpolation folded into back-off weights.
pub fn estimate_kn(stats: &ContextStats, vocab: &Vocabulary, order: usize) -> Result<ArpaModel> {
    assert!(order >= 1 && order <= stats.order(), "order out of range");
    let v = vocab.size() as f64;
    let pad = vocab.pad_id();
    let mut builder = ModelBuilder::new();

    // Unigram level over the whole vocabulary, interpolated with uniform.
    {
        let counts = effective_counts(stats, 1, order == 1, pad);
        let discount = level_discount(&counts, 1)?;
        let total: u64 = counts.values().sum();
        let total = total as f64;
        let types = counts.len() as f64;
        let gamma = discount * types / total;
        let mut level: HashMap<Box<[WordId]>, Entry> =
            HashMap::with_capacity(vocab.size());
        for w in 0..vocab.size() as WordId {
            let eff = counts.get([w].as_slice()).copied().unwrap_or(0) as f64;
            let p = (eff - discount).max(0.0) / total + gamma / v;
            level.insert(
                vec![w].into_boxed_slice(),
                Entry {
                    log_prob: p.ln(),
                    log_bow: None,
                },
            );
        }
        builder.levels.push(level);
    }

    for m in 2..=order {
        let counts = effective_counts(stats, m, m == order, pad);
        let discount = level_discount(&counts, m)?;
        let grouped = group_by_context(&counts);
        let mut contexts: Vec<&[WordId]> = grouped.keys().copied().collect();
        contexts.sort_unstable();
        let mut level: HashMap<Box<[WordId]>, Entry> = HashMap::with_capacity(counts.len());
        let mut bows: Vec<(&[WordId], f64)> = Vec::with_capacity(contexts.len());
        for h in contexts {
            let succ = &grouped[h];
            let total: u64 = succ.iter().map(|&(_, c)| c).sum();
            let total = total as f64;
            let gamma = discount * succ.len() as f64 / total;
            let suffix = &h[1..];
            for &(w, c) in succ {
                let p = (c as f64 - discount).max(0.0) / total
                    + gamma * builder.log_prob(suffix, w).exp();
                let mut gram = h.to_vec();
                gram.push(w);
                level.insert(
                    gram.into_boxed_slice(),
                    Entry {
                        log_prob: p.ln(),
                        log_bow: None,
                    },
                );
            }
            bows.push((h, gamma.ln()));
        }
        for (h, log_bow) in bows {
            builder.set_bow(h, log_bow);
        }
        builder.levels.push(level);
    }

    Ok(ArpaModel::from_levels(
        order,
        builder.levels,
        vocab.clone(),
        Smoothing::KneserNeyInterpolated,
    ))
}
