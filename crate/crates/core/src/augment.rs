//! Stochastic augmentation operators that degrade a sentence.
//!
//! Each operator is exposed as a plain function and as an
//! [`AugmentationOperator`] registered by name in an [`OperatorRegistry`].
//! A [`Pipeline`] is an ordered list of registered operators; the standard
//! one runs `drop`, then `filler`, then `para`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::text::{Sentence, Token};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("probability {name}={value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("filler insertion requested but the filler lexicon is empty")]
    FillerLexiconEmpty,
    #[error("unknown augmentation operator `{0}`")]
    UnknownOperator(String),
    #[error("invalid lexicons: {0}")]
    InvalidLexicons(String),
}

fn check_probability(name: &'static str, value: f64) -> Result<f64, AugmentError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(AugmentError::InvalidProbability { name, value })
    }
}

/// Per-severity operator probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationProfile {
    #[serde(rename = "drop")]
    pub p_drop: f64,
    #[serde(rename = "filler")]
    pub p_filler: f64,
    #[serde(rename = "para")]
    pub p_para: f64,
}

impl AugmentationProfile {
    pub const IDENTITY: AugmentationProfile = AugmentationProfile {
        p_drop: 0.0,
        p_filler: 0.0,
        p_para: 0.0,
    };

    pub fn new(p_drop: f64, p_filler: f64, p_para: f64) -> Result<Self, AugmentError> {
        let profile = AugmentationProfile {
            p_drop,
            p_filler,
            p_para,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        check_probability("drop", self.p_drop)?;
        check_probability("filler", self.p_filler)?;
        check_probability("para", self.p_para)?;
        Ok(())
    }
}

/// Word lists shared by the operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    fillers: Vec<Token>,
    paraphasia_map: BTreeMap<Token, Token>,
    protected: BTreeSet<Token>,
    conjunctions: BTreeSet<Token>,
}

impl Lexicons {
    /// Fillers keep their given order (duplicates removed) so that uniform
    /// selection is reproducible.
    pub fn new(
        fillers: impl IntoIterator<Item = Token>,
        paraphasia_map: BTreeMap<Token, Token>,
        protected: BTreeSet<Token>,
        conjunctions: BTreeSet<Token>,
    ) -> Result<Self, AugmentError> {
        let mut seen = BTreeSet::new();
        let fillers: Vec<Token> = fillers
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        if let Some(t) = paraphasia_map.keys().find(|k| protected.contains(*k)) {
            return Err(AugmentError::InvalidLexicons(format!(
                "`{t}` is both protected and a paraphasia source"
            )));
        }
        if let Some(t) = fillers.iter().find(|f| protected.contains(*f)) {
            return Err(AugmentError::InvalidLexicons(format!(
                "`{t}` is both protected and a filler"
            )));
        }
        Ok(Lexicons {
            fillers,
            paraphasia_map,
            protected,
            conjunctions,
        })
    }

    pub fn fillers(&self) -> &[Token] {
        &self.fillers
    }

    pub fn paraphasia_map(&self) -> &BTreeMap<Token, Token> {
        &self.paraphasia_map
    }

    pub fn protected(&self) -> &BTreeSet<Token> {
        &self.protected
    }

    pub fn conjunctions(&self) -> &BTreeSet<Token> {
        &self.conjunctions
    }
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons::new(
            defaults::ordered_tokens(&defaults::FILLERS),
            defaults::paraphasia_map(),
            defaults::tokens(&defaults::PROTECTED),
            defaults::tokens(&defaults::CONJUNCTIONS),
        )
        .expect("built-in lexicons are consistent")
    }
}

/// One paraphasia replacement, by position in the operator's input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub position: usize,
    pub original: Token,
    pub replacement: Token,
}

/// Drops each unprotected token with probability `p_drop`. At least one token
/// survives a non-empty input: the last protected token if there is one,
/// otherwise the first token.
pub fn apply_word_drop<R: Rng + ?Sized>(
    tokens: &[Token],
    p_drop: f64,
    protected: &BTreeSet<Token>,
    rng: &mut R,
) -> Result<Vec<Token>, AugmentError> {
    check_probability("drop", p_drop)?;
    let kept: Vec<Token> = tokens
        .iter()
        .filter(|t| protected.contains(*t) || !rng.random_bool(p_drop))
        .cloned()
        .collect();
    if kept.is_empty() && !tokens.is_empty() {
        let fallback = tokens
            .iter()
            .rev()
            .find(|t| protected.contains(*t))
            .unwrap_or(&tokens[0]);
        return Ok(vec![fallback.clone()]);
    }
    Ok(kept)
}

/// Inserts a uniformly chosen filler before each token and once at the end,
/// each slot independently with probability `p_filler`.
pub fn apply_filler_insertion<R: Rng + ?Sized>(
    tokens: &[Token],
    p_filler: f64,
    fillers: &[Token],
    rng: &mut R,
) -> Result<Vec<Token>, AugmentError> {
    check_probability("filler", p_filler)?;
    if p_filler == 0.0 {
        return Ok(tokens.to_vec());
    }
    if fillers.is_empty() {
        return Err(AugmentError::FillerLexiconEmpty);
    }
    let mut out = Vec::with_capacity(tokens.len() * 2 + 1);
    let slot = |out: &mut Vec<Token>, rng: &mut R| {
        if rng.random_bool(p_filler) {
            out.push(fillers.choose(rng).expect("non-empty").clone());
        }
    };
    for token in tokens {
        slot(&mut out, rng);
        out.push(token.clone());
    }
    slot(&mut out, rng);
    Ok(out)
}

/// Replaces unprotected paraphasia sources with their mapped word, each with
/// probability `p_para`.
pub fn apply_paraphasia<R: Rng + ?Sized>(
    tokens: &[Token],
    p_para: f64,
    paraphasia_map: &BTreeMap<Token, Token>,
    protected: &BTreeSet<Token>,
    rng: &mut R,
) -> Result<(Vec<Token>, Vec<Substitution>), AugmentError> {
    check_probability("para", p_para)?;
    let mut log = Vec::new();
    let out = tokens
        .iter()
        .enumerate()
        .map(|(position, token)| match paraphasia_map.get(token) {
            Some(replacement) if !protected.contains(token) && rng.random_bool(p_para) => {
                log.push(Substitution {
                    position,
                    original: token.clone(),
                    replacement: replacement.clone(),
                });
                replacement.clone()
            }
            _ => token.clone(),
        })
        .collect();
    Ok((out, log))
}

/// Side information collected while a pipeline runs.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct AugmentTrace {
    pub substitutions: Vec<Substitution>,
}

/// A named sentence-level augmentation.
pub trait AugmentationOperator: Send + Sync {
    fn name(&self) -> &'static str;

    fn apply(
        &self,
        tokens: Vec<Token>,
        profile: &AugmentationProfile,
        lexicons: &Lexicons,
        rng: &mut dyn RngCore,
        trace: &mut AugmentTrace,
    ) -> Result<Vec<Token>, AugmentError>;
}

#[derive(Debug, Default)]
pub struct WordDrop;

impl AugmentationOperator for WordDrop {
    fn name(&self) -> &'static str {
        "drop"
    }

    fn apply(
        &self,
        tokens: Vec<Token>,
        profile: &AugmentationProfile,
        lexicons: &Lexicons,
        rng: &mut dyn RngCore,
        _trace: &mut AugmentTrace,
    ) -> Result<Vec<Token>, AugmentError> {
        apply_word_drop(&tokens, profile.p_drop, lexicons.protected(), rng)
    }
}

#[derive(Debug, Default)]
pub struct FillerInsertion;

impl AugmentationOperator for FillerInsertion {
    fn name(&self) -> &'static str {
        "filler"
    }

    fn apply(
        &self,
        tokens: Vec<Token>,
        profile: &AugmentationProfile,
        lexicons: &Lexicons,
        rng: &mut dyn RngCore,
        _trace: &mut AugmentTrace,
    ) -> Result<Vec<Token>, AugmentError> {
        apply_filler_insertion(&tokens, profile.p_filler, lexicons.fillers(), rng)
    }
}

#[derive(Debug, Default)]
pub struct Paraphasia;

impl AugmentationOperator for Paraphasia {
    fn name(&self) -> &'static str {
        "para"
    }

    fn apply(
        &self,
        tokens: Vec<Token>,
        profile: &AugmentationProfile,
        lexicons: &Lexicons,
        rng: &mut dyn RngCore,
        trace: &mut AugmentTrace,
    ) -> Result<Vec<Token>, AugmentError> {
        let (out, log) = apply_paraphasia(
            &tokens,
            profile.p_para,
            lexicons.paraphasia_map(),
            lexicons.protected(),
            rng,
        )?;
        trace.substitutions.extend(log);
        Ok(out)
    }
}

/// Operators available by name.
#[derive(Clone)]
pub struct OperatorRegistry {
    operators: BTreeMap<&'static str, Arc<dyn AugmentationOperator>>,
}

impl OperatorRegistry {
    pub fn empty() -> Self {
        OperatorRegistry {
            operators: BTreeMap::new(),
        }
    }

    /// Registry holding `drop`, `filler` and `para`.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(WordDrop);
        registry.register(FillerInsertion);
        registry.register(Paraphasia);
        registry
    }

    /// Registers an operator, replacing any previous one with the same name.
    pub fn register<O: AugmentationOperator + 'static>(&mut self, operator: O) {
        self.operators.insert(operator.name(), Arc::new(operator));
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn AugmentationOperator>> {
        self.operators.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.operators.keys().copied()
    }

    pub fn pipeline<S: AsRef<str>>(&self, names: &[S]) -> Result<Pipeline, AugmentError> {
        let stages = names
            .iter()
            .map(|n| {
                self.get(n.as_ref())
                    .ok_or_else(|| AugmentError::UnknownOperator(n.as_ref().to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Pipeline { stages })
    }
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for OperatorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.operators.keys()).finish()
    }
}

pub const STANDARD_ORDER: [&str; 3] = ["drop", "filler", "para"];

/// An ordered sequence of operators applied to every sentence.
#[derive(Clone)]
pub struct Pipeline {
    stages: Vec<Arc<dyn AugmentationOperator>>,
}

impl Pipeline {
    pub fn standard() -> Self {
        OperatorRegistry::with_builtins()
            .pipeline(&STANDARD_ORDER)
            .expect("built-in operators are registered")
    }

    pub fn stage_names(&self) -> Vec<&'static str> {
        self.stages.iter().map(|s| s.name()).collect()
    }

    pub fn run(
        &self,
        sentence: &Sentence,
        profile: &AugmentationProfile,
        lexicons: &Lexicons,
        rng: &mut dyn RngCore,
        trace: &mut AugmentTrace,
    ) -> Result<Sentence, AugmentError> {
        profile.validate()?;
        let mut tokens = sentence.tokens.clone();
        for stage in &self.stages {
            tokens = stage.apply(tokens, profile, lexicons, rng, trace)?;
        }
        Ok(Sentence::new(tokens, sentence.terminated))
    }
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.stage_names()).finish()
    }
}

/// Applies the standard drop, filler, para sequence to one sentence.
pub fn augment_sentence(
    sentence: &Sentence,
    profile: &AugmentationProfile,
    lexicons: &Lexicons,
    rng: &mut dyn RngCore,
) -> Result<Sentence, AugmentError> {
    Pipeline::standard().run(
        sentence,
        profile,
        lexicons,
        rng,
        &mut AugmentTrace::default(),
    )
}
