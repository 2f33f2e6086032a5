//! Tokenization, sentence splitting and the shared domain types.
//!
//! Every metric in this crate is computed over [`Token`]s, so all of the
//! normalization rules live here: lowercase, no surrounding punctuation,
//! internal apostrophes and hyphens kept, bracketed annotations such as
//! `[rep]` removed before anything is counted.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Aphasia severity class, ordered from least to most impaired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityLevel {
    Mild,
    Moderate,
    Severe,
    VerySevere,
}

impl SeverityLevel {
    pub const ALL: [SeverityLevel; 4] = [
        SeverityLevel::Mild,
        SeverityLevel::Moderate,
        SeverityLevel::Severe,
        SeverityLevel::VerySevere,
    ];

    /// Machine name used in config keys, JSONL and CSV.
    pub fn key(self) -> &'static str {
        match self {
            SeverityLevel::Mild => "mild",
            SeverityLevel::Moderate => "moderate",
            SeverityLevel::Severe => "severe",
            SeverityLevel::VerySevere => "very_severe",
        }
    }

    /// Human-readable label for reports.
    pub fn label(self) -> &'static str {
        match self {
            SeverityLevel::Mild => "Mild",
            SeverityLevel::Moderate => "Moderate",
            SeverityLevel::Severe => "Severe",
            SeverityLevel::VerySevere => "Very Severe",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown severity level `{0}`")]
pub struct UnknownSeverity(pub String);

impl FromStr for SeverityLevel {
    type Err = UnknownSeverity;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match norm.as_str() {
            "mild" => Ok(SeverityLevel::Mild),
            "moderate" => Ok(SeverityLevel::Moderate),
            "severe" => Ok(SeverityLevel::Severe),
            "verysevere" => Ok(SeverityLevel::VerySevere),
            _ => Err(UnknownSeverity(s.to_string())),
        }
    }
}

/// A normalized word: lowercase, at least one letter, no surrounding
/// punctuation or whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    /// Normalizes a single word. Returns `None` when nothing word-like
    /// survives, or when the input would split into several tokens.
    pub fn new(raw: &str) -> Option<Token> {
        let mut tokens = tokenize(raw);
        if tokens.len() == 1 {
            tokens.pop()
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Number of letters, ignoring apostrophes, hyphens and digits.
    pub fn letter_count(&self) -> usize {
        self.0.chars().filter(|c| c.is_alphabetic()).count()
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Token::new(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("`{raw}` is not a single word")))
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered run of tokens, optionally closed by `.`, `!` or `?`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub terminated: bool,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, terminated: bool) -> Self {
        Sentence { tokens, terminated }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Renders the sentence as transcript text: tokens joined by single
    /// spaces, first letter capitalized, closed with a period.
    pub fn render(&self) -> String {
        let mut out = capitalize_first(&join_tokens(&self.tokens));
        out.push('.');
        out
    }
}

/// A transcript as raw text plus its sentence segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Transcript {
    pub fn parse(text: impl Into<String>) -> Self {
        let text = text.into();
        let sentences = split_sentences(&text);
        Transcript { text, sentences }
    }

    /// Builds a transcript by rendering and concatenating sentences in order.
    pub fn from_sentences(sentences: Vec<Sentence>) -> Self {
        let text = sentences
            .iter()
            .map(Sentence::render)
            .collect::<Vec<_>>()
            .join(" ");
        Transcript { text, sentences }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(Token::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Removes `[...]` annotations. An unclosed `[` drops the rest of the text.
fn strip_annotations(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '[' => {
                depth += 1;
                // keep words on either side of the annotation apart
                out.push(' ');
            }
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

fn push_token(buf: &mut String, out: &mut Vec<Token>) {
    // trailing joiners are never part of a word
    while buf.ends_with(is_joiner) {
        buf.pop();
    }
    if buf.chars().any(char::is_alphabetic) {
        out.push(Token(std::mem::take(buf)));
    } else {
        buf.clear();
    }
}

fn tokenize_clean(text: &str, out: &mut Vec<Token>) {
    let mut buf = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            // lowercasing can yield combining marks (e.g. from 'İ'); drop them
            buf.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
        } else if is_joiner(c) && !buf.is_empty() && !buf.ends_with(is_joiner) {
            buf.push(if c == '\u{2019}' { '\'' } else { c });
        } else {
            push_token(&mut buf, out);
        }
    }
    push_token(&mut buf, out);
}

/// Splits raw text into normalized word tokens, preserving order.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    tokenize_clean(&strip_annotations(text), &mut out);
    out
}

/// Splits raw text on `.`, `!` and `?`. Runs of two or more periods are
/// ellipses and do not end a sentence; a period between two digits is a
/// decimal point. Sentences without any token are discarded.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let clean = strip_annotations(text);
    let chars: Vec<char> = clean.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut i = 0;

    let mut flush = |current: &mut String, terminated: bool| {
        let mut tokens = Vec::new();
        tokenize_clean(current, &mut tokens);
        if !tokens.is_empty() {
            sentences.push(Sentence::new(tokens, terminated));
        }
        current.clear();
    };

    while i < chars.len() {
        let c = chars[i];
        match c {
            '.' => {
                let run_end = chars[i..].iter().take_while(|&&c| c == '.').count() + i;
                let decimal = run_end == i + 1
                    && i > 0
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit());
                if run_end - i >= 2 || decimal {
                    current.push(' ');
                } else {
                    flush(&mut current, true);
                }
                i = run_end;
            }
            '!' | '?' => {
                let run_end = chars[i..]
                    .iter()
                    .take_while(|&&c| matches!(c, '!' | '?'))
                    .count()
                    + i;
                flush(&mut current, true);
                i = run_end;
            }
            _ => {
                current.push(c);
                i += 1;
            }
        }
    }
    flush(&mut current, false);
    sentences
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,120}") {
            let once = tokenize(&text);
            let twice = tokenize(&join_tokens(&once));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_have_no_whitespace_or_edge_punctuation(text in "\\PC{0,120}") {
            for t in tokenize(&text) {
                let s = t.as_str();
                prop_assert!(!s.chars().any(char::is_whitespace));
                let first = s.chars().next().unwrap();
                let last = s.chars().last().unwrap();
                prop_assert!(first.is_alphanumeric() && last.is_alphanumeric());
                prop_assert!(s.chars().any(char::is_alphabetic));
            }
        }

        #[test]
        fn sentence_split_preserves_tokens(text in "[a-zA-Z'.!?, \\-\\[\\]]{0,160}") {
            let flat: Vec<Token> = split_sentences(&text).into_iter().flat_map(|s| s.tokens).collect();
            prop_assert_eq!(flat, tokenize(&text));
        }

        #[test]
        fn tokenize_ignores_case(text in "[a-zA-Z' .,]{0,80}") {
            prop_assert_eq!(tokenize(&text), tokenize(&text.to_uppercase()));
        }
    }
}
