use serde::{Deserialize, Serialize};

use super::{subphase_id, Phase, SteppedTrace, StructuredTrace, TraceError, MANDATORY_PHASE_MIN_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    EmptyStep,
    DisjointnessViolation,
    CoverageGap,
    NonConsecutiveRun,
    PhaseOrderViolation,
    EmptyMandatoryPhase,
    BadSubphaseId,
    EmptySummary,
    UnknownSubcategory,
    SubcategoryPhaseMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
    pub step_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{:?}: {}", v.code, v.detail)?;
        }
        Ok(())
    }
}

fn violation(code: ViolationCode, detail: impl Into<String>, step_indices: Vec<usize>) -> Violation {
    Violation { code, detail: detail.into(), step_indices }
}

/// Lists every structural rule the trace breaks. Pure; never mutates.
pub fn validate(structured: &StructuredTrace, stepped: &SteppedTrace) -> Result<ValidationReport, TraceError> {
    let n = structured.step_count;
    if n != stepped.len() {
        return Err(TraceError::StepCountMismatch { structured: n, stepped: stepped.len() });
    }
    use ViolationCode::*;
    let mut out = Vec::new();

    for (i, step) in stepped.steps().iter().enumerate() {
        if step.trim().is_empty() {
            out.push(violation(EmptyStep, format!("step {i} is blank"), vec![i]));
        }
    }

    let mut hits = vec![0usize; n];
    let mut previous: Option<(Phase, &str, usize)> = None;
    for (k, (phase, sub)) in structured.subphases().enumerate() {
        let expected_id = subphase_id(k + 1);
        if sub.id != expected_id {
            out.push(violation(
                BadSubphaseId,
                format!("{:?} should be {expected_id:?}", sub.id),
                sub.step_indices.clone(),
            ));
        }
        if sub.summary.trim().is_empty() {
            out.push(violation(EmptySummary, format!("{} has an empty summary", sub.id), sub.step_indices.clone()));
        }
        if sub.subcategory.parent() != phase {
            out.push(violation(
                SubcategoryPhaseMismatch,
                format!("{} labelled {} sits under {}", sub.id, sub.subcategory, phase),
                sub.step_indices.clone(),
            ));
        }
        let consecutive = !sub.step_indices.is_empty() && sub.step_indices.windows(2).all(|w| w[1] == w[0] + 1);
        if !consecutive {
            out.push(violation(
                NonConsecutiveRun,
                format!("{} indices {:?} are not an ascending run", sub.id, sub.step_indices),
                sub.step_indices.clone(),
            ));
        }
        let outside: Vec<usize> = sub.step_indices.iter().copied().filter(|&i| i >= n).collect();
        if !outside.is_empty() {
            out.push(violation(CoverageGap, format!("{} references steps outside 0..{n}", sub.id), outside));
        }
        for &i in &sub.step_indices {
            if i < n {
                hits[i] += 1;
            }
        }

        if let (Some(first), Some(last)) = (sub.first_step(), sub.last_step()) {
            if let Some((prev_phase, prev_id, prev_last)) = previous {
                if prev_last >= first {
                    let scope = if prev_phase == phase { "within" } else { "across" };
                    out.push(violation(
                        PhaseOrderViolation,
                        format!("{prev_id} ends at {prev_last} but {} starts at {first} ({scope} phases)", sub.id),
                        vec![prev_last, first],
                    ));
                }
            }
            previous = Some((phase, &sub.id, last));
        }
    }

    for (i, &h) in hits.iter().enumerate() {
        if h > 1 {
            out.push(violation(DisjointnessViolation, format!("step {i} is in {h} subphases"), vec![i]));
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&i| hits[i] == 0).collect();
    if !missing.is_empty() {
        out.push(violation(CoverageGap, format!("{} steps unassigned", missing.len()), missing));
    }

    for phase in Phase::ALL {
        let required =
            if n >= MANDATORY_PHASE_MIN_STEPS { phase.is_mandatory() } else { phase == Phase::FinalDecision };
        if required && structured.group(phase).subphases.is_empty() {
            out.push(violation(EmptyMandatoryPhase, format!("{phase} has no subphases"), Vec::new()));
        }
    }

    Ok(ValidationReport::from_violations(out))
}
