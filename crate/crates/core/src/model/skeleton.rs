use serde_json::{Map, Value};

use super::{Phase, TraceError};

/// An annotation document read for shape only: labels are raw text and
/// indices are unchecked integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSkeleton {
    pub groups: [SkeletonGroup; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonGroup {
    pub phase: Phase,
    pub main_phase_summary: String,
    pub subphases: Vec<SkeletonSubphase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonSubphase {
    pub id: String,
    pub label: String,
    pub summary: String,
    pub step_indices: Vec<i64>,
    pub reference_subphase_id: Option<String>,
}

impl AnnotationSkeleton {
    pub fn subphases(&self) -> impl Iterator<Item = (Phase, &SkeletonSubphase)> {
        self.groups.iter().flat_map(|g| g.subphases.iter().map(move |s| (g.phase, s)))
    }
}

fn schema(path: impl Into<String>) -> TraceError {
    TraceError::SchemaViolation(path.into())
}

fn object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, TraceError> {
    value.as_object().ok_or_else(|| schema(path))
}

fn string_field(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String, TraceError> {
    obj.get(key).and_then(Value::as_str).map(str::to_owned).ok_or_else(|| schema(format!("{path}.{key}")))
}

/// Reads the `reasoning_analysis` object out of a parsed document.
pub fn read_skeleton(document: &Value) -> Result<AnnotationSkeleton, TraceError> {
    let root = object(document, "$")?;
    let analysis = root.get("reasoning_analysis").ok_or_else(|| schema("reasoning_analysis"))?;
    let analysis = object(analysis, "reasoning_analysis")?;

    let mut groups = Vec::with_capacity(4);
    for phase in Phase::ALL {
        let path = format!("reasoning_analysis.{}", phase.key());
        let group = analysis.get(phase.key()).ok_or_else(|| schema(&path))?;
        let group = object(group, &path)?;
        let main_phase_summary = string_field(group, "main_phase_summary", &path)?;
        let list_path = format!("{path}.subphases");
        let list = group.get("subphases").and_then(Value::as_array).ok_or_else(|| schema(&list_path))?;
        let subphases = list
            .iter()
            .enumerate()
            .map(|(i, v)| read_subphase(v, &format!("{list_path}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        groups.push(SkeletonGroup { phase, main_phase_summary, subphases });
    }
    let groups: [SkeletonGroup; 4] = groups.try_into().expect("one group per phase");
    Ok(AnnotationSkeleton { groups })
}

fn read_subphase(value: &Value, path: &str) -> Result<SkeletonSubphase, TraceError> {
    let obj = object(value, path)?;
    let indices_path = format!("{path}.step_indices");
    let step_indices = obj
        .get("step_indices")
        .and_then(Value::as_array)
        .ok_or_else(|| schema(&indices_path))?
        .iter()
        .enumerate()
        .map(|(i, v)| v.as_i64().ok_or_else(|| schema(format!("{indices_path}[{i}]"))))
        .collect::<Result<Vec<_>, _>>()?;
    let reference_subphase_id = match obj.get("reference_subphase_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(format!("{path}.reference_subphase_id"))),
    };
    Ok(SkeletonSubphase {
        id: string_field(obj, "id", path)?,
        label: string_field(obj, "subcategory", path)?,
        summary: string_field(obj, "summary", path)?,
        step_indices,
        reference_subphase_id,
    })
}

impl From<&super::StructuredTrace> for AnnotationSkeleton {
    /// The annotation document a model would have had to send for `trace`.
    fn from(trace: &super::StructuredTrace) -> Self {
        AnnotationSkeleton {
            groups: trace.groups.clone().map(|g| SkeletonGroup {
                phase: g.phase,
                main_phase_summary: g.main_phase_summary,
                subphases: g
                    .subphases
                    .into_iter()
                    .map(|s| SkeletonSubphase {
                        id: s.id,
                        label: s.subcategory.label().to_owned(),
                        summary: s.summary,
                        step_indices: s.step_indices.iter().map(|&i| i as i64).collect(),
                        reference_subphase_id: s.reference_subphase_id,
                    })
                    .collect(),
            }),
        }
    }
}
