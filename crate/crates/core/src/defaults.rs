//! Built-in lexicons and base sentences for the Cat Rescue task.
//!
//! All of these can be replaced through the config file.

use std::collections::{BTreeMap, BTreeSet};

use crate::text::Token;

pub const BASE_SENTENCES: [&str; 5] = [
    "The cat is stuck up the tree.",
    "The little girl called her father to use a ladder.",
    "But the ladder fell.",
    "They called the fire department.",
    "The fire department came to rescue the cat.",
];

pub const FILLERS: [&str; 11] = [
    "um", "uh", "oh", "so", "ah", "yup", "nope", "uh-huh", "um-hum", "then", "and",
];

/// Semantic and phonemic substitutions. `ledder` is an invented phonemic error.
pub const PARAPHASIA: [(&str, &str); 4] = [
    ("father", "mother"),
    ("girl", "boy"),
    ("cat", "dog"),
    ("ladder", "ledder"),
];

/// Words the augmenter never drops or substitutes.
pub const PROTECTED: [&str; 3] = ["tree", "fire", "department"];

pub const CONJUNCTIONS: [&str; 5] = ["and", "but", "so", "then", "or"];

/// Function words for lexical density: determiners, pronouns, prepositions,
/// conjunctions, auxiliaries, negation and common fillers.
pub const FUNCTION_WORDS: &[&str] = &[
    // determiners
    "a",
    "an",
    "the",
    "this",
    "that",
    "these",
    "those",
    "some",
    "any",
    "each",
    "every",
    "no",
    "all",
    "both",
    "another",
    "such",
    "my",
    "your",
    "his",
    "her",
    "its",
    "our",
    "their",
    // pronouns
    "i",
    "me",
    "you",
    "he",
    "him",
    "she",
    "it",
    "we",
    "us",
    "they",
    "them",
    "myself",
    "yourself",
    "himself",
    "herself",
    "itself",
    "ourselves",
    "themselves",
    "someone",
    "something",
    "anyone",
    "anything",
    "everyone",
    "everything",
    "nobody",
    "nothing",
    "who",
    "whom",
    "whose",
    "which",
    "what",
    "there",
    "here",
    // contracted pronoun + auxiliary
    "it's",
    "that's",
    "there's",
    "they're",
    "we're",
    "you're",
    "he's",
    "she's",
    "i'm",
    "i've",
    "we've",
    "they've",
    "you've",
    "i'll",
    "we'll",
    "they'll",
    "i'd",
    "we'd",
    "they'd",
    "let's",
    "don't",
    "doesn't",
    "didn't",
    "can't",
    "couldn't",
    "won't",
    "wouldn't",
    "isn't",
    "aren't",
    "wasn't",
    "weren't",
    "hasn't",
    "haven't",
    "hadn't",
    // prepositions and particles
    "in",
    "on",
    "at",
    "to",
    "of",
    "for",
    "with",
    "from",
    "by",
    "up",
    "down",
    "over",
    "under",
    "into",
    "onto",
    "off",
    "out",
    "about",
    "above",
    "below",
    "behind",
    "near",
    "through",
    "toward",
    "towards",
    "around",
    "after",
    "before",
    "across",
    "along",
    "against",
    "between",
    "upon",
    "within",
    "without",
    // conjunctions
    "and",
    "but",
    "or",
    "nor",
    "so",
    "yet",
    "then",
    "because",
    "if",
    "while",
    "when",
    "as",
    "than",
    "though",
    "although",
    "whether",
    // auxiliaries and modals
    "is",
    "am",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "do",
    "does",
    "did",
    "have",
    "has",
    "had",
    "will",
    "would",
    "can",
    "could",
    "shall",
    "should",
    "may",
    "might",
    "must",
    // negation
    "not",
    // fillers
    "um",
    "umm",
    "uh",
    "uhh",
    "oh",
    "ah",
    "er",
    "hmm",
    "yup",
    "nope",
    "uh-huh",
    "um-hum",
    "mm",
    "yeah",
];

pub(crate) fn tokens(words: &[&str]) -> BTreeSet<Token> {
    words
        .iter()
        .map(|w| Token::new(w).expect("built-in lexicon entry is a single word"))
        .collect()
}

pub(crate) fn ordered_tokens(words: &[&str]) -> Vec<Token> {
    let mut seen = BTreeSet::new();
    words
        .iter()
        .map(|w| Token::new(w).expect("built-in lexicon entry is a single word"))
        .filter(|t| seen.insert(t.clone()))
        .collect()
}

pub(crate) fn paraphasia_map() -> BTreeMap<Token, Token> {
    PARAPHASIA
        .iter()
        .map(|(from, to)| (Token::new(from).unwrap(), Token::new(to).unwrap()))
        .collect()
}

pub fn function_words() -> BTreeSet<Token> {
    tokens(FUNCTION_WORDS)
}
