//! JSON reading and writing of structured traces.
//!
//! The document is the annotation schema (`reasoning_analysis` with one key per
//! phase) optionally wrapped in an envelope carrying the verbatim steps and
//! task metadata. Output is byte-stable: fixed key order, two-space indent,
//! integers only, trailing newline.

use serde::Serialize;
use serde_json::Value;

use super::skeleton::read_skeleton;
use super::{PhaseGroup, Provenance, SteppedTrace, StructuredTrace, Subcategory, Subphase, TraceError};

pub fn decode_structured(document: &str) -> Result<StructuredTrace, TraceError> {
    let value: Value = serde_json::from_str(document).map_err(|e| TraceError::MalformedDocument(e.to_string()))?;
    let skeleton = read_skeleton(&value)?;
    let root = value.as_object().expect("read_skeleton checked the root");

    let mut groups: Vec<PhaseGroup> = Vec::with_capacity(4);
    let mut max_index: Option<usize> = None;
    for (g, group) in skeleton.groups.into_iter().enumerate() {
        let mut subphases = Vec::with_capacity(group.subphases.len());
        for (i, raw) in group.subphases.into_iter().enumerate() {
            let path = format!("reasoning_analysis.{}.subphases[{i}]", group.phase.key());
            let subcategory =
                Subcategory::from_label(&raw.label).ok_or_else(|| TraceError::UnknownSubcategory(raw.label.clone()))?;
            let step_indices = raw
                .step_indices
                .iter()
                .enumerate()
                .map(|(j, &ix)| {
                    usize::try_from(ix).map_err(|_| TraceError::SchemaViolation(format!("{path}.step_indices[{j}]")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(&m) = step_indices.iter().max() {
                max_index = Some(max_index.map_or(m, |cur| cur.max(m)));
            }
            subphases.push(Subphase {
                id: raw.id,
                subcategory,
                summary: raw.summary,
                step_indices,
                reference_subphase_id: raw.reference_subphase_id,
            });
        }
        debug_assert_eq!(group.phase.ordinal(), g);
        groups.push(PhaseGroup { phase: group.phase, main_phase_summary: group.main_phase_summary, subphases });
    }

    let provenance = match root.get("provenance") {
        None | Some(Value::Null) => Provenance::LlmAnnotated,
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| TraceError::SchemaViolation("provenance".into()))?,
    };

    let source = match root.get("steps") {
        None | Some(Value::Null) => None,
        Some(steps) => {
            let steps: Vec<String> =
                serde_json::from_value(steps.clone()).map_err(|_| TraceError::SchemaViolation("steps".into()))?;
            let meta = |key: &str| -> Result<String, TraceError> {
                match root.get(key) {
                    None | Some(Value::Null) => Ok(String::new()),
                    Some(Value::String(s)) => Ok(s.clone()),
                    Some(_) => Err(TraceError::SchemaViolation(key.into())),
                }
            };
            let stepped = SteppedTrace::new(steps, meta("question")?, meta("final_answer")?, meta("source_model")?)
                .map_err(|_| TraceError::SchemaViolation("steps".into()))?;
            Some(stepped)
        }
    };

    let step_count = match &source {
        Some(s) => s.len(),
        None => max_index.map_or(0, |m| m + 1),
    };

    Ok(StructuredTrace { groups: groups.try_into().expect("four groups"), step_count, provenance, source })
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    source_model: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    question: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_answer: Option<&'a str>,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<&'a [String]>,
    reasoning_analysis: AnalysisOut<'a>,
}

#[derive(Serialize)]
struct AnalysisOut<'a> {
    problem_definition_and_scoping: GroupOut<'a>,
    initial_solution_and_exploration: GroupOut<'a>,
    iterative_refinement_and_verification: GroupOut<'a>,
    final_decision: GroupOut<'a>,
}

#[derive(Serialize)]
struct GroupOut<'a> {
    main_phase_summary: &'a str,
    subphases: Vec<SubphaseOut<'a>>,
}

#[derive(Serialize)]
struct SubphaseOut<'a> {
    id: &'a str,
    subcategory: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_subphase_id: Option<&'a str>,
    summary: &'a str,
    step_indices: &'a [usize],
}

impl<'a> From<&'a PhaseGroup> for GroupOut<'a> {
    fn from(g: &'a PhaseGroup) -> Self {
        GroupOut {
            main_phase_summary: &g.main_phase_summary,
            subphases: g
                .subphases
                .iter()
                .map(|s| SubphaseOut {
                    id: &s.id,
                    subcategory: s.subcategory.label(),
                    reference_subphase_id: s.reference_subphase_id.as_deref(),
                    summary: &s.summary,
                    step_indices: &s.step_indices,
                })
                .collect(),
        }
    }
}

pub fn encode_structured(structured: &StructuredTrace) -> String {
    let source = structured.source.as_ref();
    let [g0, g1, g2, g3] = &structured.groups;
    let envelope = EnvelopeOut {
        source_model: source.map(SteppedTrace::source_model),
        question: source.map(SteppedTrace::question),
        final_answer: source.map(SteppedTrace::final_answer),
        provenance: structured.provenance,
        steps: source.map(SteppedTrace::steps),
        reasoning_analysis: AnalysisOut {
            problem_definition_and_scoping: g0.into(),
            initial_solution_and_exploration: g1.into(),
            iterative_refinement_and_verification: g2.into(),
            final_decision: g3.into(),
        },
    };
    let mut out = serde_json::to_string_pretty(&envelope).expect("plain data serializes");
    out.push('\n');
    out
}
