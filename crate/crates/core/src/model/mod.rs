//! Domain types for stepped and structured reasoning traces.

mod codec;
mod skeleton;
pub mod taxonomy;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_structured, encode_structured};
pub use skeleton::{read_skeleton, AnnotationSkeleton, SkeletonGroup, SkeletonSubphase};
pub use taxonomy::{normalize_text, Phase, Subcategory, Taxonomy, TaxonomyEntry};
pub use validate::{validate, ValidationReport, Violation, ViolationCode};

/// Traces shorter than this only need a non-empty final decision phase.
pub const MANDATORY_PHASE_MIN_STEPS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("stepped trace has no steps")]
    NoSteps,
    #[error("step {0} is empty")]
    EmptyStep(usize),
    #[error("structured trace covers {structured} steps but the stepped trace has {stepped}")]
    StepCountMismatch { structured: usize, stepped: usize },
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("schema violation at {0}")]
    SchemaViolation(String),
    #[error("unknown subcategory {0:?}")]
    UnknownSubcategory(String),
}

/// The indexed sequence of verbatim reasoning steps plus task metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SteppedTraceFields")]
pub struct SteppedTrace {
    steps: Vec<String>,
    question: String,
    final_answer: String,
    source_model: String,
}

#[derive(Deserialize)]
struct SteppedTraceFields {
    steps: Vec<String>,
    #[serde(default)]
    question: String,
    #[serde(default)]
    final_answer: String,
    #[serde(default)]
    source_model: String,
}

impl TryFrom<SteppedTraceFields> for SteppedTrace {
    type Error = TraceError;

    fn try_from(f: SteppedTraceFields) -> Result<Self, Self::Error> {
        SteppedTrace::new(f.steps, f.question, f.final_answer, f.source_model)
    }
}

impl SteppedTrace {
    pub fn new(
        steps: Vec<String>,
        question: impl Into<String>,
        final_answer: impl Into<String>,
        source_model: impl Into<String>,
    ) -> Result<Self, TraceError> {
        if steps.is_empty() {
            return Err(TraceError::NoSteps);
        }
        if let Some(i) = steps.iter().position(|s| s.trim().is_empty()) {
            return Err(TraceError::EmptyStep(i));
        }
        Ok(SteppedTrace {
            steps,
            question: question.into(),
            final_answer: final_answer.into(),
            source_model: source_model.into(),
        })
    }

    /// Steps only, with empty metadata.
    pub fn from_steps<S: Into<String>>(steps: impl IntoIterator<Item = S>) -> Result<Self, TraceError> {
        Self::new(steps.into_iter().map(Into::into).collect(), "", "", "")
    }

    pub fn steps(&self) -> &[String] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn question(&self) -> &str {
        &self.question
    }

    pub fn final_answer(&self) -> &str {
        &self.final_answer
    }

    pub fn source_model(&self) -> &str {
        &self.source_model
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LlmAnnotated,
    HeuristicAnnotated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::LlmAnnotated => "llm_annotated",
            Provenance::HeuristicAnnotated => "heuristic_annotated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subphase {
    pub id: String,
    pub subcategory: Subcategory,
    pub summary: String,
    pub step_indices: Vec<usize>,
    /// Carried through untouched when a document supplies it.
    pub reference_subphase_id: Option<String>,
}

impl Subphase {
    pub fn first_step(&self) -> Option<usize> {
        self.step_indices.iter().copied().min()
    }

    pub fn last_step(&self) -> Option<usize> {
        self.step_indices.iter().copied().max()
    }
}

/// Canonical id of the `k`-th subphase (1-based) in document order.
pub fn subphase_id(k: usize) -> String {
    format!("subphase_{k}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseGroup {
    pub phase: Phase,
    pub main_phase_summary: String,
    pub subphases: Vec<Subphase>,
}

impl PhaseGroup {
    pub fn empty(phase: Phase) -> Self {
        PhaseGroup { phase, main_phase_summary: String::new(), subphases: Vec::new() }
    }

    pub fn step_count(&self) -> usize {
        self.subphases.iter().map(|s| s.step_indices.len()).sum()
    }

    /// Inclusive (first, last) step range, when the group is non-empty.
    pub fn step_range(&self) -> Option<(usize, usize)> {
        let first = self.subphases.iter().filter_map(Subphase::first_step).min()?;
        let last = self.subphases.iter().filter_map(Subphase::last_step).max()?;
        Some((first, last))
    }
}

/// Phases, subphases and step-index runs for one trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredTrace {
    pub groups: [PhaseGroup; 4],
    pub step_count: usize,
    pub provenance: Provenance,
    /// Verbatim steps; absent when decoded from a bare annotation document.
    pub source: Option<SteppedTrace>,
}

impl StructuredTrace {
    pub fn group(&self, phase: Phase) -> &PhaseGroup {
        &self.groups[phase.ordinal()]
    }

    /// Subphases in document order, paired with the phase they sit under.
    pub fn subphases(&self) -> impl Iterator<Item = (Phase, &Subphase)> {
        self.groups.iter().flat_map(|g| g.subphases.iter().map(move |s| (g.phase, s)))
    }

    pub fn find_subphase(&self, id: &str) -> Option<(Phase, &Subphase)> {
        self.subphases().find(|(_, s)| s.id == id)
    }

    pub fn step_text(&self, index: usize) -> Option<&str> {
        self.source.as_ref().and_then(|s| s.steps().get(index)).map(String::as_str)
    }
}
