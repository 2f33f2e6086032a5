//! LLM generation: severity-graded prompt packs sent to an OpenAI-compatible
//! chat-completions endpoint.

mod client;
mod pack;
mod runner;

pub use client::{
    request_completion, CompletionBackend, EndpointConfig, HttpChatClient, SamplingParams,
    API_KEY_ENV,
};
pub use pack::{load_prompt_pack, PromptPack, PromptTemplate, TEMPLATES_PER_SEVERITY};
pub use runner::{generate_llm_corpus, run_plan, LlmRunOutcome, LlmRunPlan, SkippedRequest};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("malformed prompt pack: {0}")]
    PackMalformed(String),
    #[error("cannot read prompt pack {path}: {source}")]
    PackIo {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("endpoint returned HTTP {0}")]
    HttpError(u16),
    #[error("endpoint returned no completion text")]
    EmptyCompletion,
    #[error("unexpected response body: {0}")]
    BadResponse(String),
    #[error("invalid endpoint or sampling settings: {0}")]
    InvalidSettings(String),
    #[error("all {attempted} requests failed; first error: {first_error}")]
    AllRequestsFailed {
        attempted: usize,
        first_error: String,
    },
}
