//! Synthetic aphasic picture descriptions for the Cat Rescue task.
//!
//! Two generators share one record format: a seeded procedural augmenter
//! ([`procgen`]) and a prompt-driven LLM runner ([`llm`]). Records are scored
//! with a text-only CIU counter ([`ciu`]), profiled lexically ([`lexstats`])
//! and persisted or split with [`corpus`].

pub mod augment;
pub mod ciu;
pub mod config;
pub mod corpus;
pub mod defaults;
pub mod lexstats;
pub mod llm;
pub mod procgen;
pub mod text;

pub use augment::{AugmentationProfile, Lexicons, OperatorRegistry, Pipeline};
pub use ciu::{CiuScore, CiuScorer};
pub use config::{load_config, ConfigError, Settings};
pub use corpus::{Method, SplitSpec, TranscriptRecord};
pub use procgen::{generate_corpus, GenerationConfig};
pub use text::{tokenize, SeverityLevel, Token, Transcript};
