//! Tokenizer and vocabulary.
//!
//! Lowercases, splits on whitespace and punctuation, and keeps the
//! structural tokens of the proof grammar (`&`, `->`, `;`, `:`) atomic.
//! Reserved tokens occupy fixed low ids so that datasets built with
//! different corpora still agree on the grammar.

use std::collections::HashMap;
use std::ops::Range;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;
pub const AMP: u32 = 4;
pub const ARROW: u32 = 5;
pub const SEMI: u32 = 6;
pub const COLON: u32 = 7;
pub const HYP: u32 = 8;

const FIRST_LABEL: u32 = 9;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '_'
}

/// Tokenizes with byte spans into the original string, so callers can
/// recover the exact source text of a token run.
pub fn tokenize_spans(text: &str) -> Vec<(String, Range<usize>)> {
    let mut out = Vec::new();
    let bytes = text.char_indices().collect::<Vec<_>>();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // "->" is atomic; a '-' inside a word stays inside the word
        if c == '-' && i + 1 < bytes.len() && bytes[i + 1].1 == '>' {
            let end = bytes[i + 1].0 + 1;
            out.push(("->".to_string(), pos..end));
            i += 2;
            continue;
        }
        if is_word_char(c) || c == '-' {
            let start = pos;
            let mut token = String::new();
            while i < bytes.len() {
                let (_, ch) = bytes[i];
                if is_word_char(ch) || (ch == '-' && !(i + 1 < bytes.len() && bytes[i + 1].1 == '>')) {
                    token.extend(ch.to_lowercase());
                    i += 1;
                } else {
                    break;
                }
            }
            let end = if i < bytes.len() { bytes[i].0 } else { text.len() };
            out.push((token, start..end));
            continue;
        }
        // single punctuation character
        let end = pos + c.len_utf8();
        out.push((c.to_lowercase().collect(), pos..end));
        i += 1;
    }
    out
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|(t, _)| t).collect()
}

/// Bijective token ↔ id map with a fixed reserved prefix: control tokens,
/// grammar separators, `hypothesis`, and `sent1..K` / `int1..K` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    label_capacity: u32,
}

impl Vocabulary {
    pub fn reserved_tokens(label_capacity: u32) -> Vec<String> {
        let mut tokens: Vec<String> = ["<pad>", "<unk>", "<bos>", "<eos>", "&", "->", ";", ":", "hypothesis"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for k in 1..=label_capacity {
            tokens.push(format!("sent{}", k));
        }
        for k in 1..=label_capacity {
            tokens.push(format!("int{}", k));
        }
        tokens
    }

    /// Builds a vocabulary over pre-tokenized corpus lines: reserved tokens
    /// first, then corpus tokens with `count >= min_count` ordered by
    /// descending count (ties: lexicographic), which keeps construction
    /// deterministic.
    pub fn build<'a, I>(corpus: I, min_count: usize, label_capacity: u32) -> Vocabulary
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for line in corpus {
            for tok in tokenize(line) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        let mut tokens = Self::reserved_tokens(label_capacity);
        let reserved: std::collections::HashSet<String> = tokens.iter().cloned().collect();
        let mut rest: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_count && !reserved.contains(t))
            .collect();
        rest.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        tokens.extend(rest.into_iter().map(|(t, _)| t));
        Self::from_tokens(tokens, label_capacity)
    }

    /// Reassembles a vocabulary from an explicit token list (checkpoints).
    pub fn from_tokens(tokens: Vec<String>, label_capacity: u32) -> Vocabulary {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary { tokens, index, label_capacity }
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn label_capacity(&self) -> u32 {
        self.label_capacity
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn sent_id(&self, k: u32) -> Option<u32> {
        (k >= 1 && k <= self.label_capacity).then(|| FIRST_LABEL + (k - 1))
    }

    pub fn int_id(&self, k: u32) -> Option<u32> {
        (k >= 1 && k <= self.label_capacity).then(|| FIRST_LABEL + self.label_capacity + (k - 1))
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn encode_text(&self, text: &str) -> Vec<u32> {
        self.encode(&tokenize(text))
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().map(|&i| self.token(i)).collect()
    }

    /// Space-joined surface form, skipping control tokens.
    pub fn decode_to_string(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter(|&&i| i != PAD && i != BOS && i != EOS)
            .map(|&i| self.token(i))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
