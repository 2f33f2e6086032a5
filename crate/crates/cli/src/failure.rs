//! Error to exit-code mapping: 1 I/O, 2 config or schema, 3 endpoint.

use aphasia_synth::config::ConfigError;
use aphasia_synth::corpus::CorpusError;
use aphasia_synth::lexstats::{LexError, ReportError};
use aphasia_synth::llm::LlmError;
use aphasia_synth::procgen::GenerationError;

pub const IO: u8 = 1;
pub const CONFIG: u8 = 2;
pub const ENDPOINT: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    /// `None` when the message was already printed (clap usage errors).
    pub message: Option<String>,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: Some(message.into()),
        }
    }

    pub fn silent(code: u8) -> Self {
        Failure {
            code,
            message: None,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure::new(IO, message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new(CONFIG, message)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<GenerationError> for Failure {
    fn from(e: GenerationError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let code = match &e {
            CorpusError::Io { .. } => IO,
            CorpusError::Csv(c) if c.is_io_error() => IO,
            CorpusError::Csv(_) | CorpusError::Schema { .. } | CorpusError::InvalidSplit(_) => {
                CONFIG
            }
        };
        Failure::new(code, e.to_string())
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        let code = match &e {
            LlmError::PackMalformed(_) | LlmError::PackIo { .. } | LlmError::InvalidSettings(_) => {
                CONFIG
            }
            LlmError::EndpointUnreachable(_)
            | LlmError::HttpError(_)
            | LlmError::EmptyCompletion
            | LlmError::BadResponse(_)
            | LlmError::AllRequestsFailed { .. } => ENDPOINT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let code = match &e {
            ReportError::Csv(c) if c.is_io_error() => IO,
            _ => CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<LexError> for Failure {
    fn from(e: LexError) -> Self {
        Failure::config(e.to_string())
    }
}
