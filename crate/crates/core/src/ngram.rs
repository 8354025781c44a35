//! Sliding-window n-gram extraction, sufficient-statistics accumulation,
//! training-target construction, and hit-ratio analysis.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{BoundaryMode, CorpusStream, WordId};
use crate::error::{Error, Result};

/// One prediction site: a context of exactly n-1 ids and the target word.
/// `<pad>` may appear only as a leftmost run of the context, never as target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NGramWindow {
    pub context: Vec<WordId>,
    pub target: WordId,
}

impl NGramWindow {
    pub fn order(&self) -> usize {
        self.context.len() + 1
    }

    /// The order-m suffix gram: last m-1 context ids followed by the target.
    pub fn suffix_gram(&self, m: usize) -> Vec<WordId> {
        let ctx = &self.context[self.context.len() - (m - 1)..];
        let mut g = Vec::with_capacity(m);
        g.extend_from_slice(ctx);
        g.push(self.target);
        g
    }
}

/// Extracts one window per token of the corpus. In sentence-independent mode
/// contexts are padded with `<pad>` at each sentence start; in straddling
/// mode windows slide over the concatenation of all sentences and `<pad>`
/// appears only before the very first token of the stream.
pub fn extract_windows(corpus: &CorpusStream, n: usize, pad: WordId) -> Vec<NGramWindow> {
    assert!(n >= 1, "order must be >= 1");
    let ctx_len = n - 1;
    let mut windows = Vec::with_capacity(corpus.total_tokens());
    match corpus.boundary_mode() {
        BoundaryMode::SentenceIndependent => {
            for sent in corpus.sentences() {
                let ids = sent.ids();
                for (k, &target) in ids.iter().enumerate() {
                    let mut context = Vec::with_capacity(ctx_len);
                    for j in 0..ctx_len {
                        let pos = k as isize - ctx_len as isize + j as isize;
                        context.push(if pos < 0 { pad } else { ids[pos as usize] });
                    }
                    windows.push(NGramWindow { context, target });
                }
            }
        }
        BoundaryMode::Straddling => {
            let stream: Vec<WordId> = corpus.stream().collect();
            for (k, &target) in stream.iter().enumerate() {
                let mut context = Vec::with_capacity(ctx_len);
                for j in 0..ctx_len {
                    let pos = k as isize - ctx_len as isize + j as isize;
                    context.push(if pos < 0 { pad } else { stream[pos as usize] });
                }
                windows.push(NGramWindow { context, target });
            }
        }
    }
    windows
}

#[derive(Debug, Clone, Default)]
struct LevelStats {
    /// m-gram (last m-1 context ids + target) -> count
    grams: HashMap<Box<[WordId]>, u64>,
    /// (m-1)-length context -> total count over successors
    contexts: HashMap<Box<[WordId]>, u64>,
}

/// Exact n-gram sufficient statistics at all orders 1..=n. Lower-order
/// statistics are derived from suffixes of the highest-order windows, so a
/// context of any stored (m+1)-gram is itself a stored m-gram.
#[derive(Debug, Clone)]
pub struct ContextStats {
    order: usize,
    levels: Vec<LevelStats>,
    windows: u64,
}

impl ContextStats {
    pub fn accumulate(order: usize, windows: &[NGramWindow]) -> Result<ContextStats> {
        let mut stats = ContextStats {
            order,
            levels: vec![LevelStats::default(); order],
            windows: 0,
        };
        for w in windows {
            stats.add_window(w)?;
        }
        Ok(stats)
    }

    pub fn add_window(&mut self, w: &NGramWindow) -> Result<()> {
        if w.order() != self.order {
            return Err(Error::MixedOrders {
                expected: self.order,
                found: w.order(),
            });
        }
        for m in 1..=self.order {
            let gram = w.suffix_gram(m);
            let level = &mut self.levels[m - 1];
            *level
                .contexts
                .entry(gram[..m - 1].to_vec().into_boxed_slice())
                .or_insert(0) += 1;
            *level.grams.entry(gram.into_boxed_slice()).or_insert(0) += 1;
        }
        self.windows += 1;
        Ok(())
    }

    /// Adds counts from `other`. Counts are additive, so sharded accumulation
    /// merged in any order equals accumulating the concatenated windows.
    pub fn merge(&mut self, other: &ContextStats) -> Result<()> {
        if other.order != self.order {
            return Err(Error::MixedOrders {
                expected: self.order,
                found: other.order,
            });
        }
        for m in 0..self.order {
            for (k, v) in &other.levels[m].grams {
                *self.levels[m].grams.entry(k.clone()).or_insert(0) += v;
            }
            for (k, v) in &other.levels[m].contexts {
                *self.levels[m].contexts.entry(k.clone()).or_insert(0) += v;
            }
        }
        self.windows += other.windows;
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total number of accumulated windows T_w.
    pub fn total_windows(&self) -> u64 {
        self.windows
    }

    /// count(g) for an m-gram g, m = g.len().
    pub fn gram_count(&self, gram: &[WordId]) -> u64 {
        self.levels[gram.len() - 1]
            .grams
            .get(gram)
            .copied()
            .unwrap_or(0)
    }

    /// count(h) for a context h governing order m = h.len() + 1.
    pub fn context_count(&self, context: &[WordId]) -> u64 {
        self.levels[context.len()]
            .contexts
            .get(context)
            .copied()
            .unwrap_or(0)
    }

    /// Iterates (m-gram, count) pairs at order m.
    pub fn grams_at(&self, m: usize) -> impl Iterator<Item = (&[WordId], u64)> {
        self.levels[m - 1].grams.iter().map(|(k, &v)| (&**k, v))
    }

    /// Iterates (context, total) pairs for contexts governing order m.
    pub fn contexts_at(&self, m: usize) -> impl Iterator<Item = (&[WordId], u64)> {
        self.levels[m - 1].contexts.iter().map(|(k, &v)| (&**k, v))
    }

    pub fn distinct_grams_at(&self, m: usize) -> usize {
        self.levels[m - 1].grams.len()
    }

    /// Successors of `context` at order context.len()+1, with counts.
    /// Scans the whole level; use [`ContextStats::grouped_successors`] when
    /// visiting many contexts.
    pub fn successors(&self, context: &[WordId]) -> Vec<(WordId, u64)> {
        let m = context.len() + 1;
        let mut out: Vec<(WordId, u64)> = self.levels[m - 1]
            .grams
            .iter()
            .filter(|(g, _)| &g[..m - 1] == context)
            .map(|(g, &c)| (g[m - 1], c))
            .collect();
        out.sort_unstable_by_key(|&(w, _)| w);
        out
    }

    /// One pass over order-m grams, grouped by context. Successor lists are
    /// sorted by word id.
    pub fn grouped_successors(&self, m: usize) -> HashMap<&[WordId], Vec<(WordId, u64)>> {
        let mut map: HashMap<&[WordId], Vec<(WordId, u64)>> = HashMap::new();
        for (gram, count) in self.levels[m - 1].grams.iter() {
            map.entry(&gram[..m - 1])
                .or_default()
                .push((gram[m - 1], *count));
        }
        for succ in map.values_mut() {
            succ.sort_unstable_by_key(|&(w, _)| w);
        }
        map
    }

    /// Writes the count file: one `order TAB space-joined-ids TAB count` line
    /// per stored m-gram, sorted by order then id tuple. Byte-deterministic.
    pub fn write_counts<W: Write>(&self, mut out: W) -> Result<()> {
        for m in 1..=self.order {
            let mut grams: Vec<(&Box<[WordId]>, &u64)> = self.levels[m - 1].grams.iter().collect();
            grams.sort_unstable_by(|a, b| a.0.cmp(b.0));
            for (gram, count) in grams {
                let ids = gram
                    .iter()
                    .map(|id| id.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                writeln!(out, "{m}\t{ids}\t{count}")?;
            }
        }
        Ok(())
    }

    /// Reads a count file written by [`ContextStats::write_counts`],
    /// rebuilding context totals by prefix aggregation.
    pub fn read_counts<R: Read>(input: R) -> Result<ContextStats> {
        let reader = BufReader::new(input);
        let mut by_order: Vec<Vec<(Box<[WordId]>, u64)>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let parse_err = |msg: &str| Error::Config(format!("count file line {}: {msg}", lineno + 1));
            let m: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad order field"))?;
            let ids_str = parts.next().ok_or_else(|| parse_err("missing ids field"))?;
            let count: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad count field"))?;
            let ids: Vec<WordId> = ids_str
                .split(' ')
                .map(|t| t.parse::<WordId>().map_err(|_| parse_err("bad id")))
                .collect::<Result<_>>()?;
            if m == 0 || ids.len() != m {
                return Err(parse_err("id tuple length does not match order"));
            }
            if by_order.len() < m {
                by_order.resize(m, Vec::new());
            }
            by_order[m - 1].push((ids.into_boxed_slice(), count));
        }
        if by_order.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let order = by_order.len();
        let mut stats = ContextStats {
            order,
            levels: vec![LevelStats::default(); order],
            windows: 0,
        };
        for (i, grams) in by_order.into_iter().enumerate() {
            for (gram, count) in grams {
                *stats.levels[i]
                    .contexts
                    .entry(gram[..i].to_vec().into_boxed_slice())
                    .or_insert(0) += count;
                stats.levels[i].grams.insert(gram, count);
            }
        }
        stats.windows = stats.levels[0].grams.values().sum();
        Ok(stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRegime {
    OneHot,
    Multinomial,
    WeightedMultinomial,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetPayload {
    OneHot(WordId),
    /// Full empirical next-word distribution f(.|h), sorted by word id.
    Multinomial(Vec<(WordId, f64)>),
}

/// One training sample: a context, its target payload, and a loss weight
/// (1 for one-hot and plain multinomial, count(h) for context-weighted).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    pub context: Vec<WordId>,
    pub payload: TargetPayload,
    pub weight: f64,
}

/// Builds training targets from windows and the statistics accumulated over
/// the same corpus.
pub fn build_targets(
    stats: &ContextStats,
    windows: &[NGramWindow],
    regime: TargetRegime,
) -> Result<Vec<TargetRecord>> {
    match regime {
        TargetRegime::OneHot => Ok(windows
            .iter()
            .map(|w| TargetRecord {
                context: w.context.clone(),
                payload: TargetPayload::OneHot(w.target),
                weight: 1.0,
            })
            .collect()),
        TargetRegime::Multinomial | TargetRegime::WeightedMultinomial => {
            let mut contexts: Vec<&[WordId]> = windows.iter().map(|w| &w.context[..]).collect();
            contexts.sort_unstable();
            contexts.dedup();
            let grouped = stats.grouped_successors(stats.order());
            let mut records = Vec::with_capacity(contexts.len());
            for h in contexts {
                let total = stats.context_count(h);
                if total == 0 {
                    return Err(Error::UnknownContext { context: h.to_vec() });
                }
                let succ = grouped.get(h).cloned().unwrap_or_default();
                let payload: Vec<(WordId, f64)> = succ
                    .into_iter()
                    .map(|(w, c)| (w, c as f64 / total as f64))
                    .collect();
                let weight = match regime {
                    TargetRegime::WeightedMultinomial => total as f64,
                    _ => 1.0,
                };
                records.push(TargetRecord {
                    context: h.to_vec(),
                    payload: TargetPayload::Multinomial(payload),
                    weight,
                });
            }
            Ok(records)
        }
    }
}

/// For each order m in 1..=n, the percentage of test m-grams (suffix context
/// plus target) that occurred in training. With `include_padded` false,
/// windows whose m-gram contains `<pad>` are excluded from numerator and
/// denominator. Orders with an empty denominator yield NaN.
pub fn hit_ratio(
    train_stats: &ContextStats,
    test_windows: &[NGramWindow],
    include_padded: bool,
    pad: WordId,
) -> Result<Vec<f64>> {
    if test_windows.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let n = train_stats.order();
    for w in test_windows {
        if w.order() != n {
            return Err(Error::MixedOrders {
                expected: n,
                found: w.order(),
            });
        }
    }
    let mut ratios = Vec::with_capacity(n);
    for m in 1..=n {
        let mut hits = 0u64;
        let mut total = 0u64;
        for w in test_windows {
            let gram = w.suffix_gram(m);
            if !include_padded && gram.contains(&pad) {
                continue;
            }
            total += 1;
            if train_stats.gram_count(&gram) > 0 {
                hits += 1;
            }
        }
        ratios.push(100.0 * hits as f64 / total as f64);
    }
    Ok(ratios)
}
