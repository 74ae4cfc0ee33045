use super::AnnotateError;
use crate::model::{
    validate, AnnotationSkeleton, PhaseGroup, Provenance, SteppedTrace, StructuredTrace, Subcategory, Subphase,
    ValidationReport, Violation, ViolationCode,
};

/// Resolves labels, attaches the verbatim steps and validates the result.
pub fn reconcile(skeleton: &AnnotationSkeleton, stepped: &SteppedTrace) -> Result<StructuredTrace, AnnotateError> {
    let mut problems = Vec::new();
    let groups = skeleton.groups.clone().map(|g| PhaseGroup {
        phase: g.phase,
        main_phase_summary: g.main_phase_summary,
        subphases: g
            .subphases
            .into_iter()
            .filter_map(|s| {
                let Some(subcategory) = Subcategory::from_label(&s.label) else {
                    problems.push(Violation {
                        code: ViolationCode::UnknownSubcategory,
                        detail: format!("{} has unknown label {:?}", s.id, s.label),
                        step_indices: Vec::new(),
                    });
                    return None;
                };
                let (step_indices, negative): (Vec<_>, Vec<_>) =
                    s.step_indices.iter().map(|&i| usize::try_from(i)).partition(Result::is_ok);
                if !negative.is_empty() {
                    problems.push(Violation {
                        code: ViolationCode::CoverageGap,
                        detail: format!("{} has negative step indices", s.id),
                        step_indices: Vec::new(),
                    });
                }
                Some(Subphase {
                    id: s.id,
                    subcategory,
                    summary: s.summary,
                    step_indices: step_indices.into_iter().map(Result::unwrap).collect(),
                    reference_subphase_id: s.reference_subphase_id,
                })
            })
            .collect(),
    });
    if !problems.is_empty() {
        return Err(AnnotateError::ValidationFailed(ValidationReport::from_violations(problems)));
    }

    let structured = StructuredTrace {
        groups,
        step_count: stepped.len(),
        provenance: Provenance::LlmAnnotated,
        source: Some(stepped.clone()),
    };
    let report = validate(&structured, stepped).expect("step_count taken from the stepped trace");
    if report.ok {
        Ok(structured)
    } else {
        Err(AnnotateError::ValidationFailed(report))
    }
}
