//! Procedural corpus generation: augment the five base sentences under a
//! severity profile and concatenate them into one transcript.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::augment::{AugmentError, AugmentTrace, AugmentationProfile, Lexicons, Pipeline};
use crate::ciu::{CiuScore, CiuScorer};
use crate::corpus::{Method, TranscriptRecord};
use crate::defaults;
use crate::text::{split_sentences, Sentence, SeverityLevel, Transcript};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerationError {
    #[error("expected exactly 5 base sentences, got {0}")]
    BaseSentenceCount(usize),
    #[error("base sentence {index} (`{text}`) must be exactly one non-empty sentence")]
    BadBaseSentence { index: usize, text: String },
    #[error("no augmentation profile for severity `{0}`")]
    MissingProfile(SeverityLevel),
    #[error("per_severity_count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

/// The five sentences every transcript is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSentenceSet {
    sentences: Vec<Sentence>,
}

impl BaseSentenceSet {
    pub const LEN: usize = 5;

    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self, GenerationError> {
        if texts.len() != Self::LEN {
            return Err(GenerationError::BaseSentenceCount(texts.len()));
        }
        let sentences = texts
            .iter()
            .enumerate()
            .map(|(index, text)| {
                let mut parsed = split_sentences(text.as_ref());
                match parsed.len() {
                    1 => {
                        let mut s = parsed.pop().unwrap();
                        s.terminated = true;
                        Ok(s)
                    }
                    _ => Err(GenerationError::BadBaseSentence {
                        index,
                        text: text.as_ref().to_string(),
                    }),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(BaseSentenceSet { sentences })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    /// The unaugmented transcript.
    pub fn text(&self) -> String {
        Transcript::from_sentences(self.sentences.clone()).text
    }
}

impl Default for BaseSentenceSet {
    fn default() -> Self {
        BaseSentenceSet::parse(&defaults::BASE_SENTENCES).expect("built-in base sentences parse")
    }
}

/// Calibrated default profiles as `(drop, filler, para)`.
///
/// Fillers are the main lever on CIU% but also lower lexical density, so
/// the steeper severities lean on paraphasia instead. Only six base tokens
/// have a substitute, which is why `para` climbs so high.
pub const DEFAULT_PROFILES: [(SeverityLevel, f64, f64, f64); 4] = [
    (SeverityLevel::Mild, 0.06, 0.05, 0.05),
    (SeverityLevel::Moderate, 0.12, 0.07, 0.30),
    (SeverityLevel::Severe, 0.20, 0.09, 0.55),
    (SeverityLevel::VerySevere, 0.30, 0.11, 0.90),
];

pub fn default_profiles() -> BTreeMap<SeverityLevel, AugmentationProfile> {
    DEFAULT_PROFILES
        .iter()
        .map(|&(s, d, f, p)| (s, AugmentationProfile::new(d, f, p).expect("valid default")))
        .collect()
}

pub const DEFAULT_PER_SEVERITY_COUNT: usize = 2500;
pub const DEFAULT_MASTER_SEED: u64 = 20250101;

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub base: BaseSentenceSet,
    pub lexicons: Lexicons,
    pub profiles: BTreeMap<SeverityLevel, AugmentationProfile>,
    pub per_severity_count: usize,
    pub master_seed: u64,
    pub pipeline: Pipeline,
    pub scorer: CiuScorer,
    /// Stamped on every record so that output is reproducible.
    pub created_at: DateTime<Utc>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            base: BaseSentenceSet::default(),
            lexicons: Lexicons::default(),
            profiles: default_profiles(),
            per_severity_count: DEFAULT_PER_SEVERITY_COUNT,
            master_seed: DEFAULT_MASTER_SEED,
            pipeline: Pipeline::standard(),
            scorer: CiuScorer::default(),
            created_at: DateTime::<Utc>::UNIX_EPOCH,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.per_severity_count == 0 {
            return Err(GenerationError::ZeroCount);
        }
        for severity in SeverityLevel::ALL {
            self.profile(severity)?.validate()?;
        }
        Ok(())
    }

    pub fn profile(
        &self,
        severity: SeverityLevel,
    ) -> Result<&AugmentationProfile, GenerationError> {
        self.profiles
            .get(&severity)
            .ok_or(GenerationError::MissingProfile(severity))
    }
}

/// One procedurally generated transcript before it becomes a record.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTranscript {
    pub severity: SeverityLevel,
    pub transcript: Transcript,
    pub score: CiuScore,
    pub trace: AugmentTrace,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stable per-record seed; independent of generation order.
pub fn record_seed(master_seed: u64, severity: SeverityLevel, index: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ (severity.index() as u64 + 1));
    splitmix64(h ^ index)
}

pub fn record_id(severity: SeverityLevel, index: usize) -> String {
    format!("proc-{}-{:05}", severity.key(), index)
}

/// Augments every base sentence under the severity's profile and
/// concatenates the results.
pub fn generate_transcript(
    config: &GenerationConfig,
    severity: SeverityLevel,
    rng: &mut dyn RngCore,
) -> Result<GeneratedTranscript, GenerationError> {
    let profile = config.profile(severity)?;
    let mut trace = AugmentTrace::default();
    let sentences = config
        .base
        .sentences()
        .iter()
        .map(|s| {
            let mut out = config
                .pipeline
                .run(s, profile, &config.lexicons, rng, &mut trace)?;
            out.terminated = true;
            Ok(out)
        })
        .collect::<Result<Vec<_>, GenerationError>>()?;
    let transcript = Transcript::from_sentences(sentences);
    let tokens: Vec<_> = transcript.tokens().cloned().collect();
    let score = config.scorer.score_tokens(&tokens);
    Ok(GeneratedTranscript {
        severity,
        transcript,
        score,
        trace,
    })
}

/// Generates record `index` of `severity` from its derived seed.
pub fn generate_record(
    config: &GenerationConfig,
    severity: SeverityLevel,
    index: usize,
) -> Result<TranscriptRecord, GenerationError> {
    let seed = record_seed(config.master_seed, severity, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generated = generate_transcript(config, severity, &mut rng)?;
    Ok(TranscriptRecord {
        id: record_id(severity, index),
        method: Method::Procedural,
        model: None,
        severity,
        template_id: None,
        seed: Some(seed),
        transcript: generated.transcript.text,
        word_count: generated.score.word_count,
        ciu_count: generated.score.ciu_count,
        ciu_percentage: generated.score.ciu_percentage,
        created_at: config.created_at,
    })
}

/// Generates `per_severity_count` records for each severity, Mild first.
/// Records are built in parallel; the result is independent of scheduling.
pub fn generate_corpus(
    config: &GenerationConfig,
) -> Result<Vec<TranscriptRecord>, GenerationError> {
    config.validate()?;
    let n = config.per_severity_count;
    (0..SeverityLevel::ALL.len() * n)
        .into_par_iter()
        .map(|i| generate_record(config, SeverityLevel::ALL[i / n], i % n))
        .collect()
}
