use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::Utc;
use serde::Serialize;

use super::client::{CompletionBackend, EndpointConfig, HttpChatClient, SamplingParams};
use super::pack::{PromptPack, PromptTemplate};
use super::LlmError;
use crate::ciu::CiuScorer;
use crate::corpus::{Method, TranscriptRecord};
use crate::text::SeverityLevel;

pub const DEFAULT_REPEATS: u32 = 2;

#[derive(Debug, Clone)]
pub struct LlmRunPlan {
    pub pack: PromptPack,
    pub repeats_per_template: u32,
    pub sampling: SamplingParams,
    pub scorer: CiuScorer,
}

impl LlmRunPlan {
    pub fn new(pack: PromptPack) -> Self {
        LlmRunPlan {
            pack,
            repeats_per_template: DEFAULT_REPEATS,
            sampling: SamplingParams::default(),
            scorer: CiuScorer::default(),
        }
    }

    pub fn planned_count(&self) -> usize {
        self.pack.templates().len() * self.repeats_per_template as usize
    }
}

/// A request that produced no record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRequest {
    pub severity: SeverityLevel,
    pub template_id: u8,
    pub repeat: u32,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct LlmRunOutcome {
    pub records: Vec<TranscriptRecord>,
    pub skipped: Vec<SkippedRequest>,
}

pub fn llm_record_id(severity: SeverityLevel, template_id: u8, repeat: u32) -> String {
    format!("llm-{}-t{template_id}-r{repeat}", severity.key())
}

struct Job<'a> {
    template: &'a PromptTemplate,
    repeat: u32,
}

/// Runs every (template, repeat) request with at most `max_parallel` in
/// flight. Results come back ordered by (severity, template_id, repeat)
/// regardless of completion order.
pub fn run_plan(
    plan: &LlmRunPlan,
    backend: &dyn CompletionBackend,
    max_parallel: usize,
) -> Result<LlmRunOutcome, LlmError> {
    if plan.repeats_per_template == 0 {
        return Err(LlmError::InvalidSettings(
            "repeats_per_template must be >= 1".into(),
        ));
    }
    if max_parallel == 0 {
        return Err(LlmError::InvalidSettings(
            "max_parallel must be >= 1".into(),
        ));
    }
    plan.sampling.validate()?;
    if let Some(tag) = &plan.pack.model {
        if tag != backend.model_name() {
            log::warn!(
                "prompt pack was written for `{tag}` but requests go to `{}`",
                backend.model_name()
            );
        }
    }

    // Pack templates are already sorted, so job order is record order.
    let jobs: Vec<Job> = plan
        .pack
        .templates()
        .iter()
        .flat_map(|t| {
            (1..=plan.repeats_per_template).map(move |repeat| Job {
                template: t,
                repeat,
            })
        })
        .collect();
    let results: Vec<Mutex<Option<Result<String, LlmError>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..max_parallel.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let t = job.template;
                let out = backend.complete(&t.system_text, &t.user_text, &plan.sampling);
                *results[i].lock().unwrap() = Some(out);
            });
        }
    });

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (job, slot) in jobs.iter().zip(results) {
        let t = job.template;
        match slot.into_inner().unwrap().expect("every job ran") {
            Ok(text) => {
                let score = plan.scorer.score_transcript(&text);
                records.push(TranscriptRecord {
                    id: llm_record_id(t.severity, t.template_id, job.repeat),
                    method: Method::Llm,
                    model: Some(backend.model_name().to_string()),
                    severity: t.severity,
                    template_id: Some(t.template_id),
                    seed: None,
                    transcript: text,
                    word_count: score.word_count,
                    ciu_count: score.ciu_count,
                    ciu_percentage: score.ciu_percentage,
                    created_at: Utc::now(),
                });
            }
            Err(e) => {
                log::warn!(
                    "{} template {} repeat {}: {e}",
                    t.severity,
                    t.template_id,
                    job.repeat
                );
                skipped.push(SkippedRequest {
                    severity: t.severity,
                    template_id: t.template_id,
                    repeat: job.repeat,
                    error: e.to_string(),
                });
            }
        }
    }
    if records.is_empty() {
        return Err(LlmError::AllRequestsFailed {
            attempted: skipped.len(),
            first_error: skipped.first().map(|s| s.error.clone()).unwrap_or_default(),
        });
    }
    Ok(LlmRunOutcome { records, skipped })
}

/// Runs the plan against an HTTP endpoint.
pub fn generate_llm_corpus(
    plan: &LlmRunPlan,
    endpoint: &EndpointConfig,
) -> Result<LlmRunOutcome, LlmError> {
    let client = HttpChatClient::new(endpoint.clone())?;
    run_plan(plan, &client, endpoint.max_parallel)
}
