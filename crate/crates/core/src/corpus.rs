//! Text ingestion: vocabulary construction, OOV mapping, and sentence-stream
//! assembly in both sentence-independent and straddling modes.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type WordId = u32;

pub const UNK_SYMBOL: &str = "<unk>";
pub const EOS_SYMBOL: &str = "</s>";
pub const PAD_SYMBOL: &str = "<pad>";

/// Closed word<->id map with distinguished unknown, end-of-sentence and
/// left-padding symbols. Ids are dense `0..V`; the three specials always
/// occupy ids 0, 1, 2 in the fixed order `<unk>`, `</s>`, `<pad>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    word_to_id: HashMap<String, WordId>,
    id_to_word: Vec<String>,
}

impl Vocabulary {
    fn with_specials() -> Self {
        let mut v = Vocabulary {
            word_to_id: HashMap::new(),
            id_to_word: Vec::new(),
        };
        for s in [UNK_SYMBOL, EOS_SYMBOL, PAD_SYMBOL] {
            v.push_word(s.to_string());
        }
        v
    }

    fn push_word(&mut self, word: String) -> WordId {
        debug_assert!(!self.word_to_id.contains_key(&word));
        let id = self.id_to_word.len() as WordId;
        self.word_to_id.insert(word.clone(), id);
        self.id_to_word.push(word);
        id
    }

    /// Builds a vocabulary from line-per-sentence training text.
    ///
    /// With `fixed_word_list`, the vocabulary is exactly that list plus the
    /// required specials (list entries naming a special are recognized, not
    /// duplicated). Otherwise the `max_size` most frequent content words are
    /// kept, frequency ties broken lexicographically.
    pub fn build(
        training_text: &str,
        max_size: Option<usize>,
        fixed_word_list: Option<&[String]>,
    ) -> Result<Vocabulary> {
        if let Some(list) = fixed_word_list {
            return Self::from_word_list(list);
        }
        if training_text.lines().all(|l| l.split_whitespace().next().is_none()) {
            return Err(Error::EmptyCorpus);
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for line in training_text.lines() {
            for tok in line.split_whitespace() {
                *freq.entry(tok).or_insert(0) += 1;
            }
        }
        let mut words: Vec<(&str, u64)> = freq
            .into_iter()
            .filter(|(w, _)| *w != UNK_SYMBOL && *w != EOS_SYMBOL && *w != PAD_SYMBOL)
            .collect();
        // Most frequent first; ties break lexicographically for determinism.
        words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(k) = max_size {
            words.truncate(k);
        }
        let mut vocab = Vocabulary::with_specials();
        for (w, _) in words {
            vocab.push_word(w.to_string());
        }
        Ok(vocab)
    }

    fn from_word_list(list: &[String]) -> Result<Vocabulary> {
        let mut vocab = Vocabulary::with_specials();
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for w in list {
            if seen.insert(w.as_str(), ()).is_some() {
                return Err(Error::DuplicateWord(w.clone()));
            }
            if w == UNK_SYMBOL || w == EOS_SYMBOL || w == PAD_SYMBOL {
                continue;
            }
            vocab.push_word(w.clone());
        }
        Ok(vocab)
    }

    pub fn size(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn unk_id(&self) -> WordId {
        0
    }

    pub fn eos_id(&self) -> WordId {
        1
    }

    pub fn pad_id(&self) -> WordId {
        2
    }

    pub fn id_of(&self, word: &str) -> Option<WordId> {
        self.word_to_id.get(word).copied()
    }

    pub fn word_of(&self, id: WordId) -> &str {
        &self.id_to_word[id as usize]
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.id_to_word.iter().map(String::as_str)
    }

    /// Writes one word per line; the line number is the id, specials first.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        for w in &self.id_to_word {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(f))
    }

    /// Reads a vocabulary file written by [`Vocabulary::save`]. The three
    /// specials must appear first in the fixed order.
    pub fn load<R: Read>(input: R) -> Result<Vocabulary> {
        let reader = BufReader::new(input);
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim();
            if !w.is_empty() {
                words.push(w.to_string());
            }
        }
        if words.len() < 3
            || words[0] != UNK_SYMBOL
            || words[1] != EOS_SYMBOL
            || words[2] != PAD_SYMBOL
        {
            return Err(Error::Config(format!(
                "vocabulary file must start with the specials {UNK_SYMBOL}, {EOS_SYMBOL}, {PAD_SYMBOL}"
            )));
        }
        let mut vocab = Vocabulary::with_specials();
        for w in &words[3..] {
            if vocab.word_to_id.contains_key(w) {
                return Err(Error::DuplicateWord(w.clone()));
            }
            vocab.push_word(w.clone());
        }
        Ok(vocab)
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<Vocabulary> {
        Self::load(std::fs::File::open(path)?)
    }
}

/// Ordered token ids, always terminated by the `</s>` id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence(Vec<WordId>);

impl Sentence {
    pub fn ids(&self) -> &[WordId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least the terminating `</s>`
    }
}

/// Maps each whitespace token to its id (or `<unk>`) and appends `</s>`.
/// Returns the sentence and the number of tokens that mapped to `<unk>`.
pub fn encode_sentence(line: &str, vocab: &Vocabulary) -> (Sentence, usize) {
    let unk = vocab.unk_id();
    let mut ids = Vec::new();
    let mut oov = 0;
    for tok in line.split_whitespace() {
        let id = vocab.id_of(tok).unwrap_or(unk);
        if id == unk {
            oov += 1;
        }
        ids.push(id);
    }
    ids.push(vocab.eos_id());
    (Sentence(ids), oov)
}

/// Inverse of [`encode_sentence`] up to OOV replacement: OOV tokens come back
/// as the unknown-word surface form, and the trailing `</s>` is dropped.
pub fn decode_sentence(sentence: &Sentence, vocab: &Vocabulary) -> String {
    let ids = sentence.ids();
    let body = &ids[..ids.len() - 1];
    body.iter()
        .map(|&id| vocab.word_of(id))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Each sentence is an independent unit; contexts are padded to the left.
    SentenceIndependent,
    /// Windows slide over the concatenation of all sentences.
    Straddling,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryMode::SentenceIndependent => write!(f, "sentence_independent"),
            BoundaryMode::Straddling => write!(f, "straddling"),
        }
    }
}

/// An encoded corpus: ordered sentences plus the boundary mode used when
/// forming n-gram windows over it. `total_tokens` counts every `</s>` and
/// never counts `<pad>`.
#[derive(Debug, Clone)]
pub struct CorpusStream {
    sentences: Vec<Sentence>,
    boundary_mode: BoundaryMode,
    total_tokens: usize,
    oov_tokens: usize,
}

impl CorpusStream {
    pub fn encode(text: &str, vocab: &Vocabulary, mode: BoundaryMode) -> Result<CorpusStream> {
        let mut sentences = Vec::new();
        let mut total = 0;
        let mut oov = 0;
        for line in text.lines() {
            let (s, o) = encode_sentence(line, vocab);
            total += s.len();
            oov += o;
            sentences.push(s);
        }
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(CorpusStream {
            sentences,
            boundary_mode: mode,
            total_tokens: total,
            oov_tokens: oov,
        })
    }

    pub fn from_path<P: AsRef<Path>>(
        path: P,
        vocab: &Vocabulary,
        mode: BoundaryMode,
    ) -> Result<CorpusStream> {
        let text = std::fs::read_to_string(path)?;
        Self::encode(&text, vocab, mode)
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn boundary_mode(&self) -> BoundaryMode {
        self.boundary_mode
    }

    pub fn with_boundary_mode(mut self, mode: BoundaryMode) -> Self {
        self.boundary_mode = mode;
        self
    }

    /// Total token count T, including `</s>` tokens.
    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// Fraction of tokens that carry the `<unk>` id.
    pub fn oov_rate(&self) -> Result<f64> {
        if self.total_tokens == 0 {
            return Err(Error::ZeroTokens);
        }
        Ok(self.oov_tokens as f64 / self.total_tokens as f64)
    }

    pub fn oov_tokens(&self) -> usize {
        self.oov_tokens
    }

    /// All token ids in order, each sentence ending with `</s>`.
    pub fn stream(&self) -> impl Iterator<Item = WordId> + '_ {
        self.sentences.iter().flat_map(|s| s.ids().iter().copied())
    }
}
