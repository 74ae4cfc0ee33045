//! The pipeline behind both the HTTP API and the CLI: extract, separate,
//! annotate, validate, persist; then stats, layouts and SVG on demand.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use retrace_core::annotator::{annotate_heuristic, annotate_llm, AnnotateError, ProviderConfig, Transport};
use retrace_core::layout::{self, export_svg_with, ExpansionState, LayoutError, Palette, RenderTree, View, Viewport};
use retrace_core::model::validate;
use retrace_core::separator::{extract_reasoning, extract_with, separate, ExtractPaths, RawTrace, SeparatorError};
use retrace_core::stats::{compute_stats, TraceStats};
use retrace_core::{SteppedTrace, StructuredTrace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{StoreError, TraceRecord, TraceStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Llm,
    #[default]
    Heuristic,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "llm" => Ok(Backend::Llm),
            "heuristic" => Ok(Backend::Heuristic),
            other => Err(format!("unknown backend {other:?} (expected llm or heuristic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Separator,
    Annotator,
    Validate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Separator => "separator",
            Stage::Annotator => "annotator",
            Stage::Validate => "validate",
        })
    }
}

/// A failed pipeline run, attributed to the stage that failed. `code` names
/// the underlying error variant.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{stage} stage failed ({code}): {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub code: &'static str,
    pub message: String,
}

impl From<SeparatorError> for PipelineError {
    fn from(e: SeparatorError) -> Self {
        let code = match e {
            SeparatorError::EmptyTrace => "EmptyTrace",
            SeparatorError::MalformedDocument(_) => "MalformedDocument",
            SeparatorError::MissingField(_) => "MissingField",
            SeparatorError::BadPath(_) => "BadPath",
        };
        PipelineError { stage: Stage::Separator, code, message: e.to_string() }
    }
}

impl From<AnnotateError> for PipelineError {
    fn from(e: AnnotateError) -> Self {
        let code = match e {
            AnnotateError::NoJsonFound => "NoJsonFound",
            AnnotateError::SchemaViolation(_) => "SchemaViolation",
            AnnotateError::Irreparable(_) => "Irreparable",
            AnnotateError::ValidationFailed(_) => "ValidationFailed",
            AnnotateError::ProviderError { .. } => "ProviderError",
            AnnotateError::AnnotationFailed { .. } => "AnnotationFailed",
            AnnotateError::InvalidConfig(_) => "InvalidConfig",
        };
        PipelineError { stage: Stage::Annotator, code, message: e.to_string() }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("no trace with id {0:?}")]
    NotFound(String),
    #[error("{0}")]
    BadState(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Pipeline(p) => p.code,
            ServiceError::NotFound(_) => "NotFound",
            ServiceError::BadState(_) => "BadState",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Storage(_) => "StorageError",
        }
    }
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => ServiceError::NotFound(id),
            other => ServiceError::Storage(other.to_string()),
        }
    }
}

impl From<LayoutError> for ServiceError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::BadState(m) => ServiceError::BadState(m),
            LayoutError::UnknownNode(_) => ServiceError::BadState(e.to_string()),
            LayoutError::BadViewport => ServiceError::BadRequest(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct SubmitOptions {
    #[serde(default)]
    pub backend: Backend,
    /// `None` sniffs the body: a JSON object is read as a provider response
    /// at the default paths, anything else as plain text. `Some("")` forces
    /// plain text.
    #[serde(default)]
    pub field_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submitted {
    pub trace_id: String,
    /// False when an identical document was already stored.
    pub created: bool,
    pub warnings: Vec<String>,
}

/// Parses `body` into a raw trace according to `field_path` (see
/// [`SubmitOptions::field_path`]).
pub fn ingest(body: &str, field_path: Option<&str>) -> Result<RawTrace, SeparatorError> {
    match field_path {
        Some(path) => extract_reasoning(body, path),
        None if looks_like_json_object(body) => extract_with(body, &ExtractPaths::default()),
        None => Ok(RawTrace::from_text(body)),
    }
}

fn looks_like_json_object(body: &str) -> bool {
    body.trim_start().starts_with('{') && serde_json::from_str::<serde_json::Value>(body).is_ok_and(|v| v.is_object())
}

/// Warnings worth surfacing to the user for an otherwise valid trace.
pub fn trace_warnings(stepped: &SteppedTrace) -> Vec<String> {
    if stepped.len() == 1 {
        vec!["trace has a single step: the reasoning text contains no line breaks".to_owned()]
    } else {
        Vec::new()
    }
}

pub struct Service {
    store: TraceStore,
    transport: Option<Arc<dyn Transport>>,
    provider: ProviderConfig,
    palette: Palette,
    ui_dir: Option<PathBuf>,
}

impl Service {
    pub fn new(store: TraceStore) -> Self {
        Service {
            store,
            transport: None,
            provider: ProviderConfig::default(),
            palette: Palette::default(),
            ui_dir: None,
        }
    }

    pub fn with_llm(mut self, provider: ProviderConfig, transport: Arc<dyn Transport>) -> Self {
        self.provider = provider;
        self.transport = Some(transport);
        self
    }

    pub fn with_palette(mut self, palette: Palette) -> Self {
        self.palette = palette;
        self
    }

    pub fn with_ui_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.ui_dir = dir;
        self
    }

    pub fn store(&self) -> &TraceStore {
        &self.store
    }

    pub fn ui_dir(&self) -> Option<&PathBuf> {
        self.ui_dir.as_ref()
    }

    /// Separate, annotate and validate without persisting.
    pub fn run_pipeline(
        &self,
        body: &str,
        opts: &SubmitOptions,
    ) -> Result<(StructuredTrace, Vec<String>), PipelineError> {
        let raw = ingest(body, opts.field_path.as_deref())?;
        let stepped = separate(&raw)?;
        let warnings = trace_warnings(&stepped);
        let structured = match opts.backend {
            Backend::Heuristic => annotate_heuristic(&stepped),
            Backend::Llm => {
                let transport = self.transport.as_deref().ok_or_else(|| PipelineError {
                    stage: Stage::Annotator,
                    code: "ProviderError",
                    message: format!("no LLM provider configured (set {})", retrace_core::annotator::API_KEY_ENV),
                })?;
                annotate_llm(&stepped, &self.provider, transport)?.trace
            }
        };
        let report = validate(&structured, &stepped).map_err(|e| PipelineError {
            stage: Stage::Validate,
            code: "StepCountMismatch",
            message: e.to_string(),
        })?;
        if !report.ok {
            return Err(PipelineError {
                stage: Stage::Validate,
                code: "ValidationFailed",
                message: report.to_string(),
            });
        }
        Ok((structured, warnings))
    }

    pub fn submit(&self, body: &str, opts: &SubmitOptions) -> Result<Submitted, ServiceError> {
        let (structured, warnings) = self.run_pipeline(body, opts)?;
        for w in &warnings {
            log::warn!("{w}");
        }
        let (trace_id, created) = self.store.put(&structured)?;
        Ok(Submitted { trace_id, created, warnings })
    }

    pub fn get(&self, id: &str) -> Result<TraceRecord, ServiceError> {
        Ok(self.store.get(id)?)
    }

    pub fn stats(&self, id: &str) -> Result<TraceStats, ServiceError> {
        Ok(compute_stats(&self.get(id)?.structured))
    }

    pub fn layout(
        &self,
        id: &str,
        view: View,
        state: &ExpansionState,
        vp: Viewport,
    ) -> Result<RenderTree, ServiceError> {
        let record = self.get(id)?;
        Ok(layout::layout(view, &record.structured, state, vp)?)
    }

    pub fn export(&self, id: &str, view: View, state: &ExpansionState, vp: Viewport) -> Result<String, ServiceError> {
        Ok(export_svg_with(&self.layout(id, view, state, vp)?, &self.palette))
    }
}
