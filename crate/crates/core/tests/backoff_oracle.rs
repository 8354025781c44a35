//! Brute-force oracles for the back-off estimators: probability tables built
//! by direct formula evaluation over raw counts, compared against the model's
//! stored-entry/back-off-weight lookup on exhaustive small instances.

use std::collections::{HashMap, HashSet};

use nglm::backoff::{estimate_katz, estimate_kn, ArpaModel};
use nglm::corpus::{BoundaryMode, CorpusStream, Vocabulary, WordId};
use nglm::ngram::{extract_windows, ContextStats, NGramWindow};

const GT_MAX: u64 = 5;
const FLOOR_DISCOUNT: f64 = 1e-4;

/// Raw suffix-gram counts per order, collected directly from windows.
struct RawCounts {
    n: usize,
    v: usize,
    pad: WordId,
    levels: Vec<HashMap<Vec<WordId>, u64>>,
    total: u64,
}

impl RawCounts {
    fn collect(windows: &[NGramWindow], n: usize, v: usize, pad: WordId) -> RawCounts {
        let mut levels = vec![HashMap::new(); n];
        for w in windows {
            for m in 1..=n {
                *levels[m - 1].entry(w.suffix_gram(m)).or_insert(0) += 1;
            }
        }
        RawCounts {
            n,
            v,
            pad,
            levels,
            total: windows.len() as u64,
        }
    }

    fn count(&self, gram: &[WordId]) -> u64 {
        self.levels[gram.len() - 1].get(gram).copied().unwrap_or(0)
    }

    fn successors(&self, h: &[WordId]) -> Vec<(WordId, u64)> {
        let m = h.len() + 1;
        let mut out: Vec<(WordId, u64)> = self.levels[m - 1]
            .iter()
            .filter(|(g, _)| &g[..m - 1] == h)
            .map(|(g, &c)| (g[m - 1], c))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Direct-formula Katz probability: Good-Turing discounted relative
/// frequencies with the leftover mass routed through back-off, evaluated
/// recursively without any stored model.
struct KatzOracle {
    raw: RawCounts,
}

impl KatzOracle {
    fn discounts(&self, m: usize) -> Vec<f64> {
        let k = GT_MAX as usize;
        let mut noc = vec![0u64; k + 1];
        for &c in self.raw.levels[m - 1].values() {
            if c >= 1 && c <= GT_MAX + 1 {
                noc[(c - 1) as usize] += 1;
            }
        }
        let n = |r: usize| -> f64 {
            if r == 0 || r > noc.len() {
                0.0
            } else {
                noc[r - 1] as f64
            }
        };
        let mut d = vec![1.0; k + 1];
        if n(1) == 0.0 {
            return d;
        }
        let a = (k as f64 + 1.0) * n(k + 1) / n(1);
        if (1.0 - a).abs() < 1e-12 {
            return d;
        }
        for r in 1..=k {
            if n(r) == 0.0 || n(r + 1) == 0.0 {
                continue;
            }
            let r_star = (r as f64 + 1.0) * n(r + 1) / n(r);
            let dr = (r_star / r as f64 - a) / (1.0 - a);
            if dr > 0.0 && dr <= 1.0 {
                d[r] = dr;
            }
        }
        d
    }

    fn unigram(&self, w: WordId) -> f64 {
        let v = self.raw.v;
        let total = self.raw.total as f64;
        if total == 0.0 {
            return 1.0 / v as f64;
        }
        let d = self.discounts(1);
        let disc = |c: u64| -> f64 {
            let r = c as usize;
            if r < d.len() {
                d[r]
            } else {
                1.0
            }
        };
        let counts: Vec<u64> = (0..v as WordId)
            .map(|x| self.raw.count(&[x]))
            .collect();
        let unseen = counts.iter().filter(|&&c| c == 0).count();
        let seen_mass: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| disc(c) * c as f64 / total)
            .sum();
        let c_w = counts[w as usize];
        let leftover = 1.0 - seen_mass;
        if unseen == 0 {
            disc(c_w) * c_w as f64 / total / seen_mass
        } else if leftover > 1e-12 {
            if c_w > 0 {
                disc(c_w) * c_w as f64 / total
            } else {
                leftover / unseen as f64
            }
        } else {
            (c_w as f64 + 1.0) / (total + v as f64)
        }
    }

    fn prob(&self, h: &[WordId], w: WordId) -> f64 {
        if h.is_empty() {
            return self.unigram(w);
        }
        let succ = self.raw.successors(h);
        if succ.is_empty() {
            // context never observed: plain back-off with weight 1
            return self.prob(&h[1..], w);
        }
        let m = h.len() + 1;
        let d = self.discounts(m);
        let disc = |c: u64| -> f64 {
            let r = c as usize;
            if r < d.len() {
                d[r]
            } else {
                1.0
            }
        };
        let h_total: u64 = succ.iter().map(|&(_, c)| c).sum();
        let p_disc = |c: u64| disc(c) * c as f64 / h_total as f64;
        let seen_mass: f64 = succ.iter().map(|&(_, c)| p_disc(c)).sum();
        let c_hw = self.raw.count(&{
            let mut g = h.to_vec();
            g.push(w);
            g
        });
        if succ.len() == self.raw.v {
            assert!(c_hw > 0);
            return p_disc(c_hw) / seen_mass;
        }
        let leftover = 1.0 - seen_mass;
        let (scale, leftover) = if leftover <= 1e-12 {
            (
                1.0 - FLOOR_DISCOUNT,
                1.0 - seen_mass * (1.0 - FLOOR_DISCOUNT),
            )
        } else {
            (1.0, leftover)
        };
        if c_hw > 0 {
            return p_disc(c_hw) * scale;
        }
        let lower_seen: f64 = succ.iter().map(|&(x, _)| self.prob(&h[1..], x)).sum();
        let alpha = leftover / (1.0 - lower_seen);
        alpha * self.prob(&h[1..], w)
    }
}

/// Direct-formula interpolated Kneser-Ney probability: absolute discounting
/// with continuation counts (raw counts for `<pad>`-initial grams) and a
/// uniform 1/V base, summing the interpolation terms explicitly.
struct KnOracle {
    raw: RawCounts,
    /// effective counts per level
    eff: Vec<HashMap<Vec<WordId>, u64>>,
}

impl KnOracle {
    fn build(raw: RawCounts) -> KnOracle {
        let n = raw.n;
        let mut eff = Vec::with_capacity(n);
        for m in 1..=n {
            if m == n {
                eff.push(raw.levels[m - 1].clone());
            } else {
                let mut cont: HashMap<Vec<WordId>, u64> = HashMap::new();
                let mut preds: HashMap<Vec<WordId>, HashSet<WordId>> = HashMap::new();
                for g in raw.levels[m].keys() {
                    preds.entry(g[1..].to_vec()).or_default().insert(g[0]);
                }
                for (g, p) in preds {
                    cont.insert(g, p.len() as u64);
                }
                let mut level = HashMap::new();
                for (g, &c_raw) in &raw.levels[m - 1] {
                    let c = if g[0] == raw.pad {
                        c_raw
                    } else {
                        cont.get(g).copied().unwrap_or(0)
                    };
                    if c > 0 {
                        level.insert(g.clone(), c);
                    }
                }
                eff.push(level);
            }
        }
        KnOracle { raw, eff }
    }

    fn discount(&self, m: usize) -> f64 {
        let n1 = self.eff[m - 1].values().filter(|&&c| c == 1).count() as f64;
        let n2 = self.eff[m - 1].values().filter(|&&c| c == 2).count() as f64;
        assert!(n1 + 2.0 * n2 > 0.0, "degenerate fixture at level {m}");
        if n1 == 0.0 {
            0.5
        } else {
            n1 / (n1 + 2.0 * n2)
        }
    }

    fn successors(&self, h: &[WordId]) -> Vec<(WordId, u64)> {
        let m = h.len() + 1;
        let mut out: Vec<(WordId, u64)> = self.eff[m - 1]
            .iter()
            .filter(|(g, _)| &g[..m - 1] == h)
            .map(|(g, &c)| (g[m - 1], c))
            .collect();
        out.sort_unstable();
        out
    }

    fn prob(&self, h: &[WordId], w: WordId) -> f64 {
        if h.is_empty() {
            let d = self.discount(1);
            let total: u64 = self.eff[0].values().sum();
            let total = total as f64;
            let types = self.eff[0].len() as f64;
            let gamma = d * types / total;
            let c = self.eff[0].get(&vec![w]).copied().unwrap_or(0) as f64;
            return (c - d).max(0.0) / total + gamma / self.raw.v as f64;
        }
        let succ = self.successors(h);
        if succ.is_empty() {
            return self.prob(&h[1..], w);
        }
        let m = h.len() + 1;
        let d = self.discount(m);
        let total: u64 = succ.iter().map(|&(_, c)| c).sum();
        let total = total as f64;
        let gamma = d * succ.len() as f64 / total;
        let c = succ
            .iter()
            .find(|&&(x, _)| x == w)
            .map(|&(_, c)| c)
            .unwrap_or(0) as f64;
        (c - d).max(0.0) / total + gamma * self.prob(&h[1..], w)
    }
}

fn fixture(text: &str, n: usize, mode: BoundaryMode) -> (Vocabulary, Vec<NGramWindow>, ContextStats) {
    let v = Vocabulary::build(text, None, None).unwrap();
    let c = CorpusStream::encode(text, &v, mode).unwrap();
    let w = extract_windows(&c, n, v.pad_id());
    let stats = ContextStats::accumulate(n, &w).unwrap();
    (v, w, stats)
}

fn assert_table_matches(
    model: &ArpaModel,
    oracle_prob: impl Fn(&[WordId], WordId) -> f64,
    v: usize,
    n: usize,
) {
    let ids: Vec<WordId> = (0..v as WordId).collect();
    let mut contexts: Vec<Vec<WordId>> = vec![vec![]];
    for _ in 1..n {
        let mut next = Vec::new();
        for c in &contexts {
            if c.len() == n - 1 {
                continue;
            }
            for &x in &ids {
                let mut cc = c.clone();
                cc.push(x);
                next.push(cc);
            }
        }
        contexts.extend(next);
    }
    for h in &contexts {
        for &w in &ids {
            let got = model.prob(h, w);
            let want = oracle_prob(h, w);
            assert!(
                (got - want).abs() < 1e-12,
                "P({w}|{h:?}): model {got:.17} oracle {want:.17}"
            );
            assert!(got > 0.0, "P({w}|{h:?}) must be positive");
        }
    }
}

#[test]
fn katz_matches_direct_formula_table_exhaustively() {
    // 5-word vocabulary (a, b + specials), trigram model, mixed counts
    let text = "a b a\nb a b b\na\nb a";
    let (v, w, stats) = fixture(text, 3, BoundaryMode::SentenceIndependent);
    assert_eq!(v.size(), 5);
    let model = estimate_katz(&stats, &v, 3, GT_MAX).unwrap();
    let oracle = KatzOracle {
        raw: RawCounts::collect(&w, 3, v.size(), v.pad_id()),
    };
    assert_table_matches(&model, |h, x| oracle.prob(h, x), v.size(), 3);
}

#[test]
fn katz_matches_oracle_in_straddling_mode() {
    let text = "a b b\na a\nb";
    let (v, w, stats) = fixture(text, 3, BoundaryMode::Straddling);
    let model = estimate_katz(&stats, &v, 3, GT_MAX).unwrap();
    let oracle = KatzOracle {
        raw: RawCounts::collect(&w, 3, v.size(), v.pad_id()),
    };
    assert_table_matches(&model, |h, x| oracle.prob(h, x), v.size(), 3);
}

#[test]
fn kn_matches_direct_formula_table_exhaustively() {
    let text = "a b a\nb a b b\na\nb a";
    let (v, w, stats) = fixture(text, 3, BoundaryMode::SentenceIndependent);
    let model = estimate_kn(&stats, &v, 3).unwrap();
    let oracle = KnOracle::build(RawCounts::collect(&w, 3, v.size(), v.pad_id()));
    assert_table_matches(&model, |h, x| oracle.prob(h, x), v.size(), 3);
}

#[test]
fn kn_matches_oracle_in_straddling_mode() {
    let text = "a b b\na a\nb";
    let (v, w, stats) = fixture(text, 3, BoundaryMode::Straddling);
    let model = estimate_kn(&stats, &v, 3).unwrap();
    let oracle = KnOracle::build(RawCounts::collect(&w, 3, v.size(), v.pad_id()));
    assert_table_matches(&model, |h, x| oracle.prob(h, x), v.size(), 3);
}

#[test]
fn kn_bigram_value_from_direct_interpolation_sum() {
    // two sentences "a b" and "a c": P(b|a) sums the interpolation terms
    // (1-D)-discounted bigram plus gamma times the continuation unigram.
    let text = "a b\na c";
    let (v, w, stats) = fixture(text, 2, BoundaryMode::SentenceIndependent);
    let model = estimate_kn(&stats, &v, 2).unwrap();
    let a = v.id_of("a").unwrap();
    let b = v.id_of("b").unwrap();
    let oracle = KnOracle::build(RawCounts::collect(&w, 2, v.size(), v.pad_id()));
    let direct = oracle.prob(&[a], b);
    // frozen hand computation: D2 = 2/3, gamma(a) = 2/3,
    // P_cont(b) = 0.4/5 + 0.48/6 = 4/25; P(b|a) = 1/6 + (2/3)(4/25) = 41/150
    assert!((direct - 41.0 / 150.0).abs() < 1e-15, "oracle {direct}");
    let got = model.prob(&[a], b);
    assert!((got - direct).abs() < 1e-12, "model {got} oracle {direct}");
}

#[test]
fn normalization_exhaustive_on_six_word_vocabulary() {
    // 6-word vocabulary (a, b, c + specials), order 3; sums over the whole
    // vocabulary must be 1 within 1e-6 for every possible context. "c" only
    // ever follows "b" so the continuation counts keep singletons.
    let text = "a b c\nb c\na b\nb a\na b c";
    let v = Vocabulary::build(text, None, None).unwrap();
    assert_eq!(v.size(), 6);
    let c = CorpusStream::encode(text, &v, BoundaryMode::SentenceIndependent).unwrap();
    let w = extract_windows(&c, 3, v.pad_id());
    let stats = ContextStats::accumulate(3, &w).unwrap();
    for model in [
        estimate_katz(&stats, &v, 3, GT_MAX).unwrap(),
        estimate_kn(&stats, &v, 3).unwrap(),
    ] {
        for w1 in 0..6u32 {
            for w2 in 0..6u32 {
                let mass = model.mass(&[w1, w2]);
                assert!(
                    (mass - 1.0).abs() < 1e-6,
                    "{} mass({w1},{w2}) = {mass}",
                    model.smoothing()
                );
            }
            let mass = model.mass(&[w1]);
            assert!((mass - 1.0).abs() < 1e-6);
        }
        let mass = model.mass(&[]);
        assert!((mass - 1.0).abs() < 1e-6);
    }
}

#[test]
fn stored_grams_return_stored_values() {
    let text = "a b a\nb a b b\na";
    let (v, w, stats) = fixture(text, 3, BoundaryMode::SentenceIndependent);
    let model = estimate_kn(&stats, &v, 3).unwrap();
    // a stored trigram looked up twice gives bitwise-identical results
    let win = &w[2];
    let p1 = model.prob(&win.context, win.target);
    let p2 = model.prob(&win.context, win.target);
    assert_eq!(p1.to_bits(), p2.to_bits());
}

#[test]
fn fully_covered_context_renormalizes_without_backoff() {
    // every vocabulary word (incl. specials typed literally) follows "a",
    // so the context (a) needs no back-off mass under Katz
    let text = "a a\na b\na </s>\na <unk>\na <pad>\nb a";
    let v = Vocabulary::build("a b", None, None).unwrap();
    let c = CorpusStream::encode(text, &v, BoundaryMode::SentenceIndependent).unwrap();
    let w = extract_windows(&c, 2, v.pad_id());
    let stats = ContextStats::accumulate(2, &w).unwrap();
    let a = v.id_of("a").unwrap();
    let model = estimate_katz(&stats, &v, 2, GT_MAX).unwrap();
    let mass: f64 = (0..v.size() as u32).map(|x| model.prob(&[a], x)).sum();
    assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
}

#[test]
fn kn_saturation_vs_katz_degradation_shape() {
    // a mid-sized synthetic corpus: KN must not lose from extra order,
    // while the raw estimators stay normalized at both orders
    let mut text = String::new();
    let words = ["u", "v", "w", "x", "y"];
    let mut state = 11u64;
    for _ in 0..200 {
        let mut sent = Vec::new();
        for _ in 0..6 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            sent.push(words[(state >> 33) as usize % words.len()]);
        }
        text.push_str(&sent.join(" "));
        text.push('\n');
    }
    // rare words keep the continuation counts-of-counts non-degenerate
    text.push_str("u rare1 rare2\n");
    let v = Vocabulary::build(&text, None, None).unwrap();
    let c = CorpusStream::encode(&text, &v, BoundaryMode::SentenceIndependent).unwrap();
    for n in [3, 5] {
        let w = extract_windows(&c, n, v.pad_id());
        let stats = ContextStats::accumulate(n, &w).unwrap();
        for model in [
            estimate_katz(&stats, &v, n, GT_MAX).unwrap(),
            estimate_kn(&stats, &v, n).unwrap(),
        ] {
            for h in [vec![], vec![3], vec![3, 4]] {
                let mass = model.mass(&h);
                assert!((mass - 1.0).abs() < 1e-6, "order {n} mass {mass}");
            }
        }
    }
}
