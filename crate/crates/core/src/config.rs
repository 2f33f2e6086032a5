//! TOML run configuration. Every key is optional; missing keys fall back to
//! the built-in defaults.
//!
//! ```toml
//! per_severity_count = 2500
//! master_seed = 20250101
//! fillers = ["um", "uh"]
//! operators = ["drop", "filler", "para"]
//!
//! [profiles.severe]
//! para = 0.4
//!
//! [llm]
//! pack = "packs/custom.toml"   # relative to this file
//! repeats_per_template = 2
//!
//! [llm.endpoint]
//! base_url = "http://localhost:8000/v1"
//! model = "mistral-7b-instruct"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::augment::{AugmentationProfile, Lexicons, OperatorRegistry};
use crate::ciu::{CiuScorer, ExclusionLexicons};
use crate::defaults;
use crate::lexstats::ProfileSettings;
use crate::llm::{
    load_prompt_pack, EndpointConfig, LlmError, LlmRunPlan, PromptPack, SamplingParams,
};
use crate::procgen::{BaseSentenceSet, GenerationConfig};
use crate::text::{SeverityLevel, Token};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ConfigError {
    fn invalid(e: impl std::fmt::Display) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub base_sentences: Option<Vec<String>>,
    pub fillers: Option<Vec<String>>,
    pub paraphasia_map: Option<BTreeMap<String, String>>,
    pub protected: Option<Vec<String>>,
    pub conjunctions: Option<Vec<String>>,
    /// Extra CIU exclusions; defaults to the paraphasia substitutes.
    pub irrelevant: Option<Vec<String>>,
    pub function_words: Option<Vec<String>>,
    pub operators: Option<Vec<String>>,
    #[serde(default)]
    pub profiles: BTreeMap<String, ProfileOverride>,
    pub per_severity_count: Option<usize>,
    pub master_seed: Option<u64>,
    pub created_at: Option<toml::value::Datetime>,
    pub ndw_trials: Option<usize>,
    #[serde(default)]
    pub llm: LlmSection,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverride {
    pub drop: Option<f64>,
    pub filler: Option<f64>,
    pub para: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    pub pack: Option<PathBuf>,
    pub repeats_per_template: Option<u32>,
    #[serde(default)]
    pub endpoint: EndpointSection,
    pub sampling: Option<SamplingParams>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSection {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: Option<f64>,
    pub max_retries: Option<u32>,
    pub max_parallel: Option<usize>,
    pub retry_backoff_ms: Option<u64>,
}

/// Everything a run needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Settings {
    pub generation: GenerationConfig,
    pub profiling: ProfileSettings,
    pub llm: LlmRunPlan,
    /// The token is never read from the file; callers fill it from the
    /// environment.
    pub endpoint: EndpointConfig,
}

impl Default for Settings {
    fn default() -> Self {
        ConfigFile::default()
            .resolve(Path::new("."))
            .expect("defaults resolve")
    }
}

fn to_tokens(field: &str, words: &[String]) -> Result<Vec<Token>, ConfigError> {
    words
        .iter()
        .map(|w| {
            Token::new(w)
                .ok_or_else(|| ConfigError::Invalid(format!("{field}: `{w}` is not a single word")))
        })
        .collect()
}

fn token_set(
    field: &str,
    words: &Option<Vec<String>>,
    default: &[&str],
) -> Result<BTreeSet<Token>, ConfigError> {
    match words {
        Some(w) => Ok(to_tokens(field, w)?.into_iter().collect()),
        None => Ok(default
            .iter()
            .map(|w| Token::new(w).expect("built-in word"))
            .collect()),
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// `base_dir` anchors relative paths such as the prompt pack.
    pub fn resolve(&self, base_dir: &Path) -> Result<Settings, ConfigError> {
        let base = match &self.base_sentences {
            Some(s) => BaseSentenceSet::parse(s).map_err(ConfigError::invalid)?,
            None => BaseSentenceSet::default(),
        };

        let fillers = match &self.fillers {
            Some(f) => to_tokens("fillers", f)?,
            None => defaults::FILLERS
                .iter()
                .map(|w| Token::new(w).unwrap())
                .collect(),
        };
        let paraphasia_map: BTreeMap<Token, Token> = match &self.paraphasia_map {
            Some(m) => m
                .iter()
                .map(|(k, v)| {
                    let pair = to_tokens("paraphasia_map", &[k.clone(), v.clone()])?;
                    Ok((pair[0].clone(), pair[1].clone()))
                })
                .collect::<Result<_, ConfigError>>()?,
            None => defaults::PARAPHASIA
                .iter()
                .map(|(k, v)| (Token::new(k).unwrap(), Token::new(v).unwrap()))
                .collect(),
        };
        let protected = token_set("protected", &self.protected, &defaults::PROTECTED)?;
        let conjunctions = token_set("conjunctions", &self.conjunctions, &defaults::CONJUNCTIONS)?;
        let irrelevant: BTreeSet<Token> = match &self.irrelevant {
            Some(w) => to_tokens("irrelevant", w)?.into_iter().collect(),
            None => paraphasia_map.values().cloned().collect(),
        };
        let function_words = token_set(
            "function_words",
            &self.function_words,
            defaults::FUNCTION_WORDS,
        )?;

        let scorer = CiuScorer::new(ExclusionLexicons::new(
            fillers.iter().cloned(),
            conjunctions.iter().cloned(),
            irrelevant,
        ));
        let lexicons = Lexicons::new(fillers, paraphasia_map, protected, conjunctions)
            .map_err(ConfigError::invalid)?;

        let pipeline = match &self.operators {
            Some(names) => OperatorRegistry::with_builtins()
                .pipeline(names)
                .map_err(ConfigError::invalid)?,
            None => crate::augment::Pipeline::standard(),
        };

        let mut generation = GenerationConfig {
            base,
            lexicons,
            pipeline,
            scorer: scorer.clone(),
            ..GenerationConfig::default()
        };
        for (key, over) in &self.profiles {
            let severity: SeverityLevel = key
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("profiles: unknown severity `{key}`")))?;
            let current = generation.profiles[&severity];
            let merged = AugmentationProfile::new(
                over.drop.unwrap_or(current.p_drop),
                over.filler.unwrap_or(current.p_filler),
                over.para.unwrap_or(current.p_para),
            )
            .map_err(|e| ConfigError::Invalid(format!("profiles.{key}: {e}")))?;
            generation.profiles.insert(severity, merged);
        }
        if let Some(n) = self.per_severity_count {
            generation.per_severity_count = n;
        }
        if let Some(seed) = self.master_seed {
            generation.master_seed = seed;
        }
        if let Some(ts) = &self.created_at {
            generation.created_at = DateTime::parse_from_rfc3339(&ts.to_string())
                .map_err(|e| ConfigError::Invalid(format!("created_at `{ts}`: {e}")))?
                .with_timezone(&Utc);
        }
        generation.validate().map_err(ConfigError::invalid)?;

        let profiling = ProfileSettings {
            ndw_trials: self
                .ndw_trials
                .unwrap_or(ProfileSettings::default().ndw_trials),
            function_words,
        };
        if profiling.ndw_trials == 0 {
            return Err(ConfigError::Invalid("ndw_trials must be at least 1".into()));
        }

        let pack = match &self.llm.pack {
            Some(p) => load_prompt_pack(&base_dir.join(p)).map_err(ConfigError::invalid)?,
            None => PromptPack::builtin(),
        };
        let mut llm = LlmRunPlan::new(pack);
        llm.scorer = scorer;
        if let Some(r) = self.llm.repeats_per_template {
            llm.repeats_per_template = r;
        }
        if llm.repeats_per_template == 0 {
            return Err(ConfigError::Invalid(
                "llm.repeats_per_template must be at least 1".into(),
            ));
        }
        if let Some(s) = self.llm.sampling {
            s.validate().map_err(ConfigError::invalid)?;
            llm.sampling = s;
        }

        let e = &self.llm.endpoint;
        let mut endpoint = EndpointConfig::default();
        if let Some(url) = &e.base_url {
            endpoint.base_url = url.clone();
        }
        if let Some(m) = &e.model {
            endpoint.model_name = m.clone();
        } else if let Some(tag) = &llm.pack.model {
            endpoint.model_name = tag.clone();
        }
        if let Some(t) = e.timeout_secs {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::Invalid(
                    "llm.endpoint.timeout_secs must be > 0".into(),
                ));
            }
            endpoint.timeout = Duration::from_secs_f64(t);
        }
        if let Some(r) = e.max_retries {
            endpoint.max_retries = r;
        }
        if let Some(p) = e.max_parallel {
            endpoint.max_parallel = p;
        }
        if let Some(ms) = e.retry_backoff_ms {
            endpoint.retry_backoff = Duration::from_millis(ms);
        }
        endpoint
            .validate()
            .map_err(|e: LlmError| ConfigError::invalid(e))?;

        Ok(Settings {
            generation,
            profiling,
            llm,
            endpoint,
        })
    }
}

/// Reads and resolves a config file.
pub fn load_config(path: &Path) -> Result<Settings, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    ConfigFile::from_toml_str(&text)?.resolve(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<Settings, ConfigError> {
        ConfigFile::from_toml_str(text)?.resolve(Path::new("."))
    }

    #[test]
    fn empty_config_is_defaults() {
        let s = resolve("").unwrap();
        let d = GenerationConfig::default();
        assert_eq!(s.generation.profiles, d.profiles);
        assert_eq!(s.generation.per_severity_count, 2500);
        assert_eq!(
            s.generation.pipeline.stage_names(),
            ["drop", "filler", "para"]
        );
        assert_eq!(s.llm.repeats_per_template, 2);
        assert_eq!(s.endpoint.model_name, "mistral-7b-instruct");
        assert_eq!(s.profiling, ProfileSettings::default());
    }

    #[test]
    fn profile_override_merges() {
        let s = resolve("[profiles.severe]\npara = 0.5\n").unwrap();
        let d = GenerationConfig::default();
        let severe = s.generation.profiles[&SeverityLevel::Severe];
        assert_eq!(severe.p_para, 0.5);
        assert_eq!(severe.p_drop, d.profiles[&SeverityLevel::Severe].p_drop);
        assert_eq!(
            s.generation.profiles[&SeverityLevel::Mild],
            d.profiles[&SeverityLevel::Mild]
        );
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "unknown_key = 1",
            "[profiles.critical]\ndrop = 0.1",
            "[profiles.mild]\ndrop = 1.5",
            "per_severity_count = 0",
            "operators = [\"drop\", \"shuffle\"]",
            "fillers = [\"two words\"]",
            "protected = [\"cat\"]",
            "base_sentences = [\"One.\"]",
            "[llm]\nrepeats_per_template = 0",
            "[llm.endpoint]\ntimeout_secs = 0",
            "[llm.sampling]\ntop_p = 0",
            "[llm]\npack = \"/no/such/pack.toml\"",
        ] {
            assert!(resolve(text).is_err(), "{text}");
        }
    }

    #[test]
    fn custom_lexicons_reach_scorer_and_pipeline() {
        let s = resolve(
            "fillers = [\"er\"]\noperators = [\"para\"]\ncreated_at = 2024-05-01T00:00:00Z\n",
        )
        .unwrap();
        assert_eq!(s.generation.pipeline.stage_names(), ["para"]);
        let score = s.generation.scorer.score_transcript("er the cat um");
        assert_eq!((score.word_count, score.ciu_count), (4, 3));
        assert_eq!(
            s.generation.created_at.to_rfc3339(),
            "2024-05-01T00:00:00+00:00"
        );
    }
}
