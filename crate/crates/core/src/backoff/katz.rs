//! Katz back-off estimation with Good-Turing discounting.

use std::collections::HashMap;

use log::warn;

use crate::corpus::{Vocabulary, WordId};
use crate::error::Result;
use crate::ngram::ContextStats;

use super::{ArpaModel, Entry, ModelBuilder, Smoothing};

/// Minimal back-off mass forced onto a context whose Good-Turing discounts
/// degenerate to nothing while unseen successors remain; keeps every
/// probability strictly positive.
const FLOOR_DISCOUNT: f64 = 1e-4;

/// Good-Turing discount ratios d_r for r = 1..=gt_max at one level.
/// Degenerate counts-of-counts fall back to no discounting at that count.
fn gt_discounts(counts_of_counts: &[u64], gt_max: u64, level: usize) -> Vec<f64> {
    let k = gt_max as usize;
    let n = |r: usize| -> f64 {
        if r == 0 || r > counts_of_counts.len() {
            0.0
        } else {
            counts_of_counts[r - 1] as f64
        }
    };
    let mut discounts = vec![1.0; k + 1]; // index r, entry d_r (index 0 unused)
    if n(1) == 0.0 {
        warn!("level {level}: no singletons; Good-Turing discounting disabled");
        return discounts;
    }
    let big_a = (k as f64 + 1.0) * n(k + 1) / n(1);
    if (1.0 - big_a).abs() < 1e-12 {
        warn!("level {level}: degenerate Good-Turing normalizer; discounting disabled");
        return discounts;
    }
    for r in 1..=k {
        if n(r) == 0.0 || n(r + 1) == 0.0 {
            warn!("level {level}: counts-of-counts zero near r={r}; no discount at that count");
            continue;
        }
        let r_star = (r as f64 + 1.0) * n(r + 1) / n(r);
        let d = (r_star / r as f64 - big_a) / (1.0 - big_a);
        if d <= 0.0 || d > 1.0 {
            warn!("level {level}: out-of-range Good-Turing discount {d:.4} at r={r}; clamped to 1");
            continue;
        }
        discounts[r] = d;
    }
    discounts
}

fn counts_of_counts(stats: &ContextStats, m: usize, gt_max: u64) -> Vec<u64> {
    let mut n = vec![0u64; gt_max as usize + 1];
    for (_, c) in stats.grams_at(m) {
        if c >= 1 && c <= gt_max + 1 {
            n[(c - 1) as usize] += 1;
        }
    }
    n
}

fn discount_for(discounts: &[f64], count: u64) -> f64 {
    let r = count as usize;
    if r < discounts.len() {
        discounts[r]
    } else {
        1.0
    }
}

/// Estimates a Katz back-off model: Good-Turing discounted relative
/// frequencies for counts 1..=gt_max (undiscounted above), back-off weights
/// chosen so every context's distribution normalizes, and a unigram level
/// covering the whole vocabulary.
pub fn estimate_katz(
    stats: &ContextStats,
    vocab: &Vocabulary,
    order: usize,
    gt_max: u64,
) -> Result<ArpaModel> {
    assert!(order >= 1 && order <= stats.order(), "order out of range");
    let v = vocab.size();
    let mut builder = ModelBuilder::new();

    // Unigram level: discounted relative frequencies with the leftover mass
    // spread uniformly over zero-count words.
    {
        let discounts = gt_discounts(&counts_of_counts(stats, 1, gt_max), gt_max, 1);
        let total = stats.total_windows() as f64;
        let counts: Vec<u64> = (0..v as WordId).map(|w| stats.gram_count(&[w])).collect();
        let unseen = counts.iter().filter(|&&c| c == 0).count();
        let mut probs = vec![0.0f64; v];
        if total == 0.0 {
            // Empty corpus: uniform over the vocabulary.
            probs.iter_mut().for_each(|p| *p = 1.0 / v as f64);
        } else {
            let mut seen_mass = 0.0;
            for (w, &c) in counts.iter().enumerate() {
                if c > 0 {
                    probs[w] = discount_for(&discounts, c) * c as f64 / total;
                    seen_mass += probs[w];
                }
            }
            let leftover = 1.0 - seen_mass;
            if unseen == 0 {
                probs.iter_mut().for_each(|p| *p /= seen_mass);
            } else if leftover > 1e-12 {
                let share = leftover / unseen as f64;
                for (w, &c) in counts.iter().enumerate() {
                    if c == 0 {
                        probs[w] = share;
                    }
                }
            } else {
                // No discount mass survived; fall back to additive smoothing
                // so unseen words keep positive probability.
                warn!("unigram level: no Good-Turing mass for {unseen} unseen words; using add-one smoothing");
                for (w, &c) in counts.iter().enumerate() {
                    probs[w] = (c as f64 + 1.0) / (total + v as f64);
                }
            }
        }
        let mut level: HashMap<Box<[WordId]>, Entry> = HashMap::with_capacity(v);
        for (w, &p) in probs.iter().enumerate() {
            level.insert(
                vec![w as WordId].into_boxed_slice(),
                Entry {
                    log_prob: p.ln(),
                    log_bow: None,
                },
            );
        }
        builder.levels.push(level);
    }

    for m in 2..=order {
        let discounts = gt_discounts(&counts_of_counts(stats, m, gt_max), gt_max, m);
        let grouped = stats.grouped_successors(m);
        let mut contexts: Vec<&[WordId]> = grouped.keys().copied().collect();
        contexts.sort_unstable();
        let mut level: HashMap<Box<[WordId]>, Entry> =
            HashMap::with_capacity(stats.distinct_grams_at(m));
        let mut bows: Vec<(&[WordId], f64)> = Vec::with_capacity(contexts.len());
        for h in contexts {
            let succ = &grouped[h];
            let h_total = stats.context_count(h) as f64;
            let mut probs: Vec<(WordId, f64)> = succ
                .iter()
                .map(|&(w, c)| (w, discount_for(&discounts, c) * c as f64 / h_total))
                .collect();
            let seen_mass: f64 = probs.iter().map(|&(_, p)| p).sum();
            if succ.len() == v {
                // Every vocabulary word observed: renormalize, nothing backs off.
                for p in &mut probs {
                    p.1 /= seen_mass;
                }
                bows.push((h, 0.0));
            } else {
                let mut leftover = 1.0 - seen_mass;
                if leftover <= 1e-12 {
                    warn!(
                        "level {m}: context with no discount mass; forcing floor discount {FLOOR_DISCOUNT}"
                    );
                    for p in &mut probs {
                        p.1 *= 1.0 - FLOOR_DISCOUNT;
                    }
                    leftover = 1.0 - seen_mass * (1.0 - FLOOR_DISCOUNT);
                }
                let suffix = &h[1..];
                let lower_seen: f64 = probs
                    .iter()
                    .map(|&(w, _)| builder.log_prob(suffix, w).exp())
                    .sum();
                let bow = leftover / (1.0 - lower_seen);
                bows.push((h, bow.ln()));
            }
            for (w, p) in probs {
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
        Smoothing::Katz,
    ))
}
