//! ARPA text format: `\data\` header with per-level counts, one
//! `\m-grams:` section per level with `log10prob TAB words TAB log10bow`
//! lines, closed by `\end\`. Output is byte-deterministic: entries are
//! sorted by id tuple and printed with six decimal digits.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::corpus::{Vocabulary, WordId, EOS_SYMBOL, PAD_SYMBOL, UNK_SYMBOL};
use crate::error::{Error, Result};

use super::{ArpaModel, Entry, Smoothing};

const LN_10: f64 = std::f64::consts::LN_10;

pub fn write_arpa<W: Write>(model: &ArpaModel, mut out: W) -> Result<()> {
    writeln!(out, "smoothing: {}", model.smoothing())?;
    writeln!(out)?;
    writeln!(out, "\\data\\")?;
    let levels = model.levels();
    for (i, level) in levels.iter().enumerate() {
        if !level.is_empty() {
            writeln!(out, "ngram {}={}", i + 1, level.len())?;
        }
    }
    writeln!(out)?;
    // Degenerate models may store nothing above some level; the highest
    // populated level is serialized without a back-off column.
    let top_level = levels
        .iter()
        .rposition(|l| !l.is_empty())
        .map(|i| i + 1)
        .unwrap_or(1);
    for (i, level) in levels.iter().enumerate() {
        if level.is_empty() {
            continue;
        }
        let m = i + 1;
        let top = m == top_level;
        writeln!(out, "\\{m}-grams:")?;
        let mut entries: Vec<(&Box<[WordId]>, &Entry)> = level.iter().collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        for (gram, entry) in entries {
            if !entry.log_prob.is_finite() {
                return Err(Error::NonFinite("ARPA probability"));
            }
            let words = gram
                .iter()
                .map(|&id| model.vocab().word_of(id))
                .collect::<Vec<_>>()
                .join(" ");
            let lp10 = entry.log_prob / LN_10;
            if top {
                writeln!(out, "{lp10:.6}\t{words}")?;
            } else {
                let bow10 = entry.log_bow.unwrap_or(0.0) / LN_10;
                if !bow10.is_finite() {
                    return Err(Error::NonFinite("ARPA back-off weight"));
                }
                writeln!(out, "{lp10:.6}\t{words}\t{bow10:.6}")?;
            }
        }
        writeln!(out)?;
    }
    writeln!(out, "\\end\\")?;
    Ok(())
}

struct Numbered<R> {
    lines: std::io::Lines<BufReader<R>>,
    lineno: usize,
}

impl<R: Read> Numbered<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        match self.lines.next() {
            None => Ok(None),
            Some(l) => {
                self.lineno += 1;
                Ok(Some(l?))
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ArpaParse {
            line: self.lineno,
            msg: msg.into(),
        }
    }
}

/// Reads an ARPA file written by [`write_arpa`]. The vocabulary is rebuilt
/// from the unigram section (which covers every word; the specials occupy the
/// first three lines), so a written model reads back with identical ids.
pub fn read_arpa<R: Read>(input: R) -> Result<ArpaModel> {
    let mut r = Numbered {
        lines: BufReader::new(input).lines(),
        lineno: 0,
    };

    // Preamble: free text until the \data\ marker; a "smoothing:" line is
    // recognized as the model tag.
    let mut smoothing = Smoothing::KneserNeyInterpolated;
    loop {
        let line = r
            .next_line()?
            .ok_or_else(|| r.err("missing \\data\\ header"))?;
        let t = line.trim();
        if t == "\\data\\" {
            break;
        }
        if let Some(tag) = t.strip_prefix("smoothing:") {
            smoothing = match tag.trim() {
                "katz" => Smoothing::Katz,
                "kneser_ney_interpolated" => Smoothing::KneserNeyInterpolated,
                other => return Err(r.err(format!("unknown smoothing tag {other:?}"))),
            };
        }
    }

    // Count header: "ngram m=K" lines up to the first blank line.
    let mut declared: Vec<(usize, usize)> = Vec::new();
    loop {
        let line = r
            .next_line()?
            .ok_or_else(|| r.err("unexpected end of file in \\data\\ section"))?;
        let t = line.trim();
        if t.is_empty() {
            break;
        }
        let suffix = t
            .strip_prefix("ngram ")
            .ok_or_else(|| r.err(format!("expected 'ngram m=K', got {t:?}")))?;
        let (m, k) = suffix
            .split_once('=')
            .ok_or_else(|| r.err("malformed ngram count line"))?;
        let m: usize = m.trim().parse().map_err(|_| r.err("bad ngram order"))?;
        let k: usize = k.trim().parse().map_err(|_| r.err("bad ngram count"))?;
        if m == 0 {
            return Err(r.err("ngram order must be positive"));
        }
        declared.push((m, k));
    }
    if declared.is_empty() {
        return Err(r.err("\\data\\ section declares no ngram counts"));
    }
    let order = declared.iter().map(|&(m, _)| m).max().unwrap();
    let mut expected = vec![0usize; order];
    for &(m, k) in &declared {
        expected[m - 1] = k;
    }

    let mut levels: Vec<HashMap<Box<[WordId]>, Entry>> = vec![HashMap::new(); order];
    let mut vocab: Option<Vocabulary> = None;
    let mut unigram_words: Vec<(String, f64, Option<f64>)> = Vec::new();

    for m in 1..=order {
        if expected[m - 1] == 0 {
            continue;
        }
        // Section header (skipping blank separator lines).
        loop {
            let line = r
                .next_line()?
                .ok_or_else(|| r.err(format!("missing \\{m}-grams: section")))?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t == format!("\\{m}-grams:") {
                break;
            }
            return Err(r.err(format!("expected \\{m}-grams: section header, got {t:?}")));
        }
        let top = m == order;
        for _ in 0..expected[m - 1] {
            let line = r
                .next_line()?
                .ok_or_else(|| r.err("unexpected end of file inside ngram section"))?;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(r.err(format!("expected 2 or 3 tab-separated fields, got {}", fields.len())));
            }
            if top && fields.len() == 3 {
                return Err(r.err("back-off weight not allowed at the highest order"));
            }
            let lp10: f64 = fields[0]
                .parse()
                .map_err(|_| r.err("bad log10 probability"))?;
            let bow10: Option<f64> = if fields.len() == 3 {
                Some(fields[2].parse().map_err(|_| r.err("bad log10 back-off weight"))?)
            } else {
                None
            };
            let words: Vec<&str> = fields[1].split(' ').collect();
            if words.len() != m {
                return Err(r.err(format!(
                    "expected {m} words, got {} in {:?}",
                    words.len(),
                    fields[1]
                )));
            }
            if m == 1 {
                unigram_words.push((
                    words[0].to_string(),
                    lp10 * LN_10,
                    bow10.map(|b| b * LN_10),
                ));
            } else {
                let vocab = vocab.as_ref().expect("vocabulary built from unigrams");
                let ids: Vec<WordId> = words
                    .iter()
                    .map(|w| {
                        vocab
                            .id_of(w)
                            .ok_or_else(|| r.err(format!("word {w:?} not in unigram section")))
                    })
                    .collect::<Result<_>>()?;
                levels[m - 1].insert(
                    ids.into_boxed_slice(),
                    Entry {
                        log_prob: lp10 * LN_10,
                        log_bow: bow10.map(|b| b * LN_10),
                    },
                );
            }
        }
        if m == 1 {
            // Build the vocabulary: specials first, then remaining words in
            // file order.
            let listed: Vec<String> = unigram_words.iter().map(|(w, _, _)| w.clone()).collect();
            for s in [UNK_SYMBOL, EOS_SYMBOL, PAD_SYMBOL] {
                if !listed.iter().any(|w| w == s) {
                    return Err(r.err(format!("unigram section missing special {s:?}")));
                }
            }
            let v = Vocabulary::build("", None, Some(&listed))
                .map_err(|e| r.err(format!("bad unigram vocabulary: {e}")))?;
            for (w, lp, bow) in &unigram_words {
                let id = v.id_of(w).expect("word just inserted");
                levels[0].insert(
                    vec![id].into_boxed_slice(),
                    Entry {
                        log_prob: *lp,
                        log_bow: *bow,
                    },
                );
            }
            vocab = Some(v);
        }
        if levels[m - 1].len() != expected[m - 1] {
            return Err(r.err(format!(
                "level {m} declares {} entries but {} distinct grams were read",
                expected[m - 1],
                levels[m - 1].len()
            )));
        }
    }

    // Closing marker.
    loop {
        let line = r.next_line()?.ok_or_else(|| r.err("missing \\end\\ marker"))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t == "\\end\\" {
            break;
        }
        return Err(r.err(format!("expected \\end\\, got {t:?}")));
    }

    let vocab = vocab.ok_or_else(|| r.err("no unigram section"))?;
    Ok(ArpaModel::from_levels(order, levels, vocab, smoothing))
}
