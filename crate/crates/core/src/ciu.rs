//! Blind, text-only Correct Information Unit scoring.
//!
//! Every token counts as a word. A token is a CIU unless it is a filler,
//! a conjunction or an irrelevant item, or repeats the previous CIU
//! verbatim. The scorer cannot judge relevance, so "irrelevant" is a fixed
//! word list (by default the paraphasia substitutes).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::text::{tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiuScore {
    pub word_count: usize,
    pub ciu_count: usize,
    pub ciu_percentage: f64,
}

impl CiuScore {
    pub fn new(word_count: usize, ciu_count: usize) -> Self {
        assert!(ciu_count <= word_count, "more CIUs than words");
        let ciu_percentage = if word_count == 0 {
            0.0
        } else {
            100.0 * ciu_count as f64 / word_count as f64
        };
        CiuScore {
            word_count,
            ciu_count,
            ciu_percentage,
        }
    }
}

/// Word classes that never count as CIUs. Overlaps are resolved on
/// construction (fillers first, then conjunctions) so the sets are disjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionLexicons {
    fillers: BTreeSet<Token>,
    conjunctions: BTreeSet<Token>,
    irrelevant: BTreeSet<Token>,
}

impl ExclusionLexicons {
    pub fn new(
        fillers: impl IntoIterator<Item = Token>,
        conjunctions: impl IntoIterator<Item = Token>,
        irrelevant: impl IntoIterator<Item = Token>,
    ) -> Self {
        let fillers: BTreeSet<Token> = fillers.into_iter().collect();
        let conjunctions: BTreeSet<Token> = conjunctions
            .into_iter()
            .filter(|t| !fillers.contains(t))
            .collect();
        let irrelevant = irrelevant
            .into_iter()
            .filter(|t| !fillers.contains(t) && !conjunctions.contains(t))
            .collect();
        ExclusionLexicons {
            fillers,
            conjunctions,
            irrelevant,
        }
    }

    pub fn fillers(&self) -> &BTreeSet<Token> {
        &self.fillers
    }

    pub fn conjunctions(&self) -> &BTreeSet<Token> {
        &self.conjunctions
    }

    pub fn irrelevant(&self) -> &BTreeSet<Token> {
        &self.irrelevant
    }

    pub fn excludes(&self, token: &Token) -> bool {
        self.fillers.contains(token)
            || self.conjunctions.contains(token)
            || self.irrelevant.contains(token)
    }
}

impl Default for ExclusionLexicons {
    fn default() -> Self {
        ExclusionLexicons::new(
            defaults::ordered_tokens(&defaults::FILLERS),
            defaults::tokens(&defaults::CONJUNCTIONS),
            defaults::paraphasia_map().into_values(),
        )
    }
}

pub fn count_cius(tokens: &[Token], exclusions: &ExclusionLexicons) -> CiuScore {
    let mut ciu_count = 0;
    let mut last_ciu: Option<&Token> = None;
    for token in tokens {
        if exclusions.excludes(token) || last_ciu == Some(token) {
            continue;
        }
        ciu_count += 1;
        last_ciu = Some(token);
    }
    CiuScore::new(tokens.len(), ciu_count)
}

/// Scores raw transcript text with a fixed set of exclusions.
#[derive(Debug, Clone, Default)]
pub struct CiuScorer {
    exclusions: ExclusionLexicons,
}

impl CiuScorer {
    pub fn new(exclusions: ExclusionLexicons) -> Self {
        CiuScorer { exclusions }
    }

    pub fn exclusions(&self) -> &ExclusionLexicons {
        &self.exclusions
    }

    pub fn score_tokens(&self, tokens: &[Token]) -> CiuScore {
        count_cius(tokens, &self.exclusions)
    }

    pub fn score_transcript(&self, text: &str) -> CiuScore {
        self.score_tokens(&tokenize(text))
    }
}

/// Scores text with the built-in exclusion lexicons.
pub fn score_transcript(text: &str) -> CiuScore {
    CiuScorer::default().score_transcript(text)
}
