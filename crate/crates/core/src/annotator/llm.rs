use std::fmt;
use std::time::Duration;

use log::{info, warn};
use thiserror::Error;

use super::{build_prompt, parse_annotation, reconcile, repair_with_notes, AnnotateError, RepairNote};
use crate::model::{SteppedTrace, StructuredTrace};

pub const API_KEY_ENV: &str = "RETRACE_LLM_API_KEY";

/// A credential that never shows up in `Debug` output.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Secret(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    /// OpenAI-compatible chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub credential: Option<Secret>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: "https://generativelanguage.googleapis.com/v1beta/openai/chat/completions".into(),
            model: "gemini-2.5-pro".into(),
            credential: None,
            timeout: Duration::from_secs(120),
            max_retries: 2,
            temperature: 0.0,
        }
    }
}

impl ProviderConfig {
    /// Defaults plus the credential from `RETRACE_LLM_API_KEY`, if set.
    pub fn from_env() -> Self {
        ProviderConfig {
            credential: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()).map(Secret::new),
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), AnnotateError> {
        if self.timeout.is_zero() {
            return Err(AnnotateError::InvalidConfig("timeout must be positive".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(AnnotateError::InvalidConfig("temperature must be a non-negative number".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Everything a transport needs for one structuring call.
#[derive(Debug, Clone, Copy)]
pub struct AnnotationRequest<'a> {
    pub config: &'a ProviderConfig,
    pub system_prompt: &'a str,
    pub question: &'a str,
}

/// Sends one request and returns the model's reply text. Must be safe to
/// call from concurrent requests.
pub trait Transport: Send + Sync {
    fn complete(&self, request: &AnnotationRequest<'_>) -> Result<String, TransportError>;
}

impl<F> Transport for F
where
    F: Fn(&AnnotationRequest<'_>) -> Result<String, TransportError> + Send + Sync,
{
    fn complete(&self, request: &AnnotationRequest<'_>) -> Result<String, TransportError> {
        self(request)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmAnnotation {
    pub trace: StructuredTrace,
    pub attempts: u32,
    /// Index moves applied to the accepted response.
    pub repairs: Vec<RepairNote>,
}

enum Failure {
    Transport(TransportError),
    Annotation(AnnotateError),
}

/// Prompt, call, parse, repair, reconcile; the same prompt is re-sent up to
/// `max_retries` more times when any stage fails.
pub fn annotate_llm(
    stepped: &SteppedTrace,
    cfg: &ProviderConfig,
    transport: &dyn Transport,
) -> Result<LlmAnnotation, AnnotateError> {
    cfg.check()?;
    let prompt = build_prompt(stepped);
    let request = AnnotationRequest { config: cfg, system_prompt: &prompt, question: stepped.question() };
    let total = cfg.max_retries.saturating_add(1);
    let mut last = None;
    for attempt in 1..=total {
        let outcome = transport.complete(&request).map_err(Failure::Transport).and_then(|body| {
            let skeleton = parse_annotation(&body).map_err(Failure::Annotation)?;
            let (repaired, notes) = repair_with_notes(&skeleton, stepped.len()).map_err(Failure::Annotation)?;
            let trace = reconcile(&repaired, stepped).map_err(Failure::Annotation)?;
            Ok((trace, notes))
        });
        let failure = match outcome {
            Ok((trace, repairs)) => {
                info!("annotation accepted after {attempt} attempt(s)");
                return Ok(LlmAnnotation { trace, attempts: attempt, repairs });
            }
            Err(f) => f,
        };
        match &failure {
            Failure::Transport(e) => warn!("attempt {attempt}/{total}: transport failed: {e}"),
            Failure::Annotation(e) => warn!("attempt {attempt}/{total}: unusable response: {e}"),
        }
        last = Some(failure);
    }
    Err(match last.expect("at least one attempt") {
        Failure::Transport(e) => AnnotateError::ProviderError { attempts: total, message: e.0 },
        Failure::Annotation(e) => AnnotateError::AnnotationFailed { attempts: total, reason: e.to_string() },
    })
}
