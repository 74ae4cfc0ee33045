//! Turns a stepped trace into a structured one, either through an external
//! LLM (prompt, parse, repair, reconcile) or a deterministic cue-phrase
//! classifier that runs offline.

mod heuristic;
mod llm;
mod parse;
mod prompt;
mod reconcile;
mod repair;

use thiserror::Error;

use crate::model::{TraceError, ValidationReport};

pub use heuristic::{
    annotate_heuristic, annotate_heuristic_batch, annotate_heuristic_with, classify_step, cue_hits, summarize, CueHits,
    PhaseCursor, Position, SUMMARY_MAX_CHARS,
};
pub use llm::{
    annotate_llm, AnnotationRequest, LlmAnnotation, ProviderConfig, Secret, Transport, TransportError, API_KEY_ENV,
};
pub use parse::parse_annotation;
pub use prompt::{build_prompt, tojson, PROMPT_SLOT, PROMPT_TEMPLATE};
pub use reconcile::reconcile;
pub use repair::{repair, repair_with_notes, RepairNote};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotateError {
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("schema violation at {0}")]
    SchemaViolation(String),
    #[error("irreparable annotation: {0}")]
    Irreparable(String),
    #[error("annotation failed validation: {0}")]
    ValidationFailed(ValidationReport),
    #[error("provider error after {attempts} attempt(s): {message}")]
    ProviderError { attempts: u32, message: String },
    #[error("annotation failed after {attempts} attempt(s): {reason}")]
    AnnotationFailed { attempts: u32, reason: String },
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
}

impl From<TraceError> for AnnotateError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::SchemaViolation(path) => AnnotateError::SchemaViolation(path),
            other => AnnotateError::SchemaViolation(other.to_string()),
        }
    }
}
