//! Offline annotation by cue phrases and a forward-only phase cursor.
//!
//! Each step is normalized and scanned for the taxonomy's cue phrases
//! (whole-word matches). Only subcategories whose phase is not behind the
//! cursor are eligible; when several match, later phases win, then taxonomy
//! row order. Un-cued steps continue the cursor's phase, except that an
//! un-cued step right after problem definition starts the initial solution.

use std::sync::LazyLock;

use crate::exec::{self, ExecMode};
use crate::model::{
    normalize_text, subphase_id, Phase, PhaseGroup, Provenance, SteppedTrace, StructuredTrace, Subcategory, Subphase,
    Taxonomy, MANDATORY_PHASE_MIN_STEPS,
};

pub const SUMMARY_MAX_CHARS: usize = 140;
const ELLIPSIS: &str = "...";

/// Set of subcategories whose cues occur in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CueHits(u16);

impl CueHits {
    pub fn contains(self, s: Subcategory) -> bool {
        self.0 & (1 << s as u16) != 0
    }

    fn insert(&mut self, s: Subcategory) {
        self.0 |= 1 << s as u16;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Subcategory> {
        Subcategory::ALL.into_iter().filter(move |s| self.contains(*s))
    }
}

/// Padded cue phrases, grouped by subcategory in priority order.
static PRIORITY: LazyLock<Vec<(Subcategory, Vec<String>)>> = LazyLock::new(|| {
    let tax = Taxonomy::standard();
    Phase::ALL
        .into_iter()
        .rev()
        .flat_map(|p| p.subcategories())
        .map(|s| (s, tax.cues(s).iter().map(|c| format!(" {c} ")).collect()))
        .collect()
});

pub fn cue_hits(text: &str) -> CueHits {
    let padded = format!(" {} ", normalize_text(text));
    let mut hits = CueHits::default();
    for (s, cues) in PRIORITY.iter() {
        if cues.iter().any(|c| padded.contains(c.as_str())) {
            hits.insert(*s);
        }
    }
    hits
}

/// Phase reached so far while scanning a trace; never moves backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct PhaseCursor {
    pub current: Phase,
}

impl PhaseCursor {
    pub fn at(current: Phase) -> Self {
        PhaseCursor { current }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    First,
    Middle,
    Last,
}

pub fn classify_step(text: &str, cursor: PhaseCursor, position: Position) -> (Subcategory, PhaseCursor) {
    classify_hits(cue_hits(text), cursor, position)
}

fn classify_hits(hits: CueHits, cursor: PhaseCursor, position: Position) -> (Subcategory, PhaseCursor) {
    let pick = |eligible: &dyn Fn(Phase) -> bool| {
        PRIORITY.iter().map(|(s, _)| *s).find(|s| eligible(s.parent()) && hits.contains(*s))
    };
    let label = match position {
        Position::First => pick(&|p| p == Phase::ProblemDefinitionScoping).unwrap_or(Subcategory::Rephrase),
        Position::Last if cursor.current < Phase::FinalDecision => Subcategory::PreparingOutput,
        Position::Last => pick(&|p| p == Phase::FinalDecision).unwrap_or(Subcategory::PreparingOutput),
        Position::Middle => pick(&|p| p >= cursor.current).unwrap_or(match cursor.current {
            Phase::ProblemDefinitionScoping => Phase::InitialSolutionExploration.continuation_default(),
            p => p.continuation_default(),
        }),
    };
    let next = if position == Position::First { label.parent() } else { label.parent().max(cursor.current) };
    (label, PhaseCursor::at(next))
}

/// First sentence of the first step, cut to [`SUMMARY_MAX_CHARS`].
pub fn summarize<S: AsRef<str>>(steps: &[S]) -> String {
    let first = steps.first().map(|s| s.as_ref().trim()).unwrap_or("");
    let sentence = match first.find(['.', '?', '!']) {
        Some(i) => &first[..=i],
        None => first,
    };
    if sentence.chars().count() <= SUMMARY_MAX_CHARS {
        return sentence.to_owned();
    }
    let keep = SUMMARY_MAX_CHARS - ELLIPSIS.len();
    let mut out: String = sentence.chars().take(keep).collect();
    out.push_str(ELLIPSIS);
    out
}

pub fn annotate_heuristic(stepped: &SteppedTrace) -> StructuredTrace {
    annotate_heuristic_with(stepped, ExecMode::Auto)
}

pub fn annotate_heuristic_batch(traces: &[SteppedTrace], mode: ExecMode) -> Vec<StructuredTrace> {
    exec::map(mode, traces, |t| annotate_heuristic_with(t, ExecMode::Sequential))
}

pub fn annotate_heuristic_with(stepped: &SteppedTrace, mode: ExecMode) -> StructuredTrace {
    let steps = stepped.steps();
    let n = steps.len();
    let hits = exec::map(mode, steps, |s| cue_hits(s));

    let mut labels = Vec::with_capacity(n);
    let mut cursor = PhaseCursor::default();
    for (i, h) in hits.iter().enumerate() {
        let position = match i {
            _ if i + 1 == n => Position::Last,
            0 => Position::First,
            _ => Position::Middle,
        };
        let (label, next) = classify_hits(*h, cursor, position);
        labels.push(label);
        cursor = next;
    }
    if n >= MANDATORY_PHASE_MIN_STEPS {
        fill_initial_solution(&mut labels, &hits);
    }

    let mut groups = Phase::ALL.map(PhaseGroup::empty);
    let mut start = 0;
    let mut k = 0;
    while start < n {
        let label = labels[start];
        let end = (start..n).find(|&j| labels[j] != label).unwrap_or(n);
        k += 1;
        groups[label.parent().ordinal()].subphases.push(Subphase {
            id: subphase_id(k),
            subcategory: label,
            summary: summarize(&steps[start..end]),
            step_indices: (start..end).collect(),
            reference_subphase_id: None,
        });
        start = end;
    }
    for g in &mut groups {
        g.main_phase_summary = match g.step_range() {
            Some((first, _)) => summarize(&steps[first..=first]),
            None if g.phase == Phase::IterativeRefinementVerification => "No iterative refinement occurred.".to_owned(),
            None => "No steps in this phase.".to_owned(),
        };
    }

    StructuredTrace { groups, step_count: n, provenance: Provenance::HeuristicAnnotated, source: Some(stepped.clone()) }
}

/// Guarantees a non-empty initial-solution phase. The first step carrying a
/// first-answer cue after problem definition is pulled into it together with
/// the steps before it; without such a step the first step after problem
/// definition is.
fn fill_initial_solution(labels: &mut [Subcategory], hits: &[CueHits]) {
    let n = labels.len();
    let phase = |s: Subcategory| s.parent();
    if labels.iter().any(|s| phase(*s) == Phase::InitialSolutionExploration) {
        return;
    }
    let boundary = labels
        .iter()
        .position(|s| phase(*s) > Phase::InitialSolutionExploration)
        .expect("last step is a final decision");
    if boundary + 1 < n {
        match (boundary..n - 1).find(|&i| hits[i].contains(Subcategory::FirstAnswer)) {
            Some(k) => {
                labels[boundary..k].fill(Subcategory::DecompositionExecution);
                labels[k] = Subcategory::FirstAnswer;
            }
            None => labels[boundary] = Subcategory::DecompositionExecution,
        }
    } else {
        labels[n - 2] = Subcategory::DecompositionExecution;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    fn cursor(p: usize) -> PhaseCursor {
        PhaseCursor::at(Phase::from_ordinal(p).unwrap())
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_step("Wait, is half of 48 really 24?", cursor(1), Position::Middle),
            (Subcategory::PausingToRethink, cursor(2))
        );
        assert_eq!(
            classify_step("So, the final answer is 72.", cursor(2), Position::Middle),
            (Subcategory::PreparingOutput, cursor(3))
        );
        assert_eq!(
            classify_step("Carrying on with arithmetic.", cursor(1), Position::Middle),
            (Subcategory::DecompositionExecution, cursor(1))
        );
    }

    #[test]
    fn cursor_gates_eligibility() {
        // a first-answer cue is ignored once refinement has started
        assert_eq!(
            classify_step("So, the answer is 5.", cursor(2), Position::Middle),
            (Subcategory::ReExamine, cursor(2))
        );
        // later phases win when several cues match
        assert_eq!(
            classify_step("Wait, so the final answer is 5.", cursor(0), Position::Middle).0,
            Subcategory::PreparingOutput
        );
    }

    #[test]
    fn position_forcing() {
        assert_eq!(classify_step("Wait.", cursor(0), Position::First), (Subcategory::Rephrase, cursor(0)));
        assert_eq!(
            classify_step("I need to find x.", cursor(0), Position::First),
            (Subcategory::DefineGoal, cursor(0))
        );
        assert_eq!(
            classify_step("Let me check that again.", cursor(2), Position::Last),
            (Subcategory::PreparingOutput, cursor(3))
        );
        assert_eq!(
            classify_step("I'm confident this is correct.", cursor(3), Position::Last),
            (Subcategory::StatingConfidence, cursor(3))
        );
    }

    #[test]
    fn whole_word_matching() {
        assert!(cue_hits("Wait, what?").contains(Subcategory::PausingToRethink));
        assert!(!cue_hits("Awaiting input.").contains(Subcategory::PausingToRethink));
        assert!(cue_hits("HERE'S THE RESULT: 4").contains(Subcategory::PreparingOutput));
    }

    #[test]
    fn summaries() {
        assert_eq!(summarize(&["Wait, is half of 48 really 24?", "Let me check…"]), "Wait, is half of 48 really 24?");
        assert_eq!(summarize(&["Ok."]), "Ok.");
        let long = "x".repeat(300);
        let s = summarize(&[long.as_str()]);
        assert_eq!(s.chars().count(), 140);
        assert!(s.ends_with("..."));
        assert_eq!(&s[..137], &long[..137]);
        let exact = "y".repeat(140);
        assert_eq!(summarize(&[exact.as_str()]), exact);
    }

    #[test]
    fn single_step() {
        let t = annotate_heuristic(&SteppedTrace::from_steps(["The answer is 5."]).unwrap());
        assert_eq!(t.groups[3].subphases.len(), 1);
        assert_eq!(t.groups[3].subphases[0].subcategory, Subcategory::PreparingOutput);
        assert!(validate(&t, t.source.as_ref().unwrap()).unwrap().ok);
    }

    #[test]
    fn no_cues() {
        let steps: Vec<String> = (0..6).map(|i| format!("Plain line number {i}.")).collect();
        let t = annotate_heuristic(&SteppedTrace::from_steps(steps).unwrap());
        let ranges: Vec<Option<(usize, usize)>> = t.groups.iter().map(PhaseGroup::step_range).collect();
        assert_eq!(ranges, vec![Some((0, 0)), Some((1, 4)), None, Some((5, 5))]);
        assert!(validate(&t, t.source.as_ref().unwrap()).unwrap().ok);
    }

    #[test]
    fn empty_initial_solution_is_filled() {
        let steps = ["Let me restate the problem.", "Wait, hmm.", "Hold on.", "So, the answer is 3.", "Done."];
        let t = annotate_heuristic(&SteppedTrace::from_steps(steps).unwrap());
        assert!(validate(&t, t.source.as_ref().unwrap()).unwrap().ok);
        assert_eq!(t.groups[1].step_range(), Some((1, 3)));
        assert_eq!(t.groups[1].subphases.last().unwrap().subcategory, Subcategory::FirstAnswer);

        let steps = ["Basically, the goal is x.", "The aim is to y.", "I need to find z.", "Done."];
        let t = annotate_heuristic(&SteppedTrace::from_steps(steps).unwrap());
        assert!(validate(&t, t.source.as_ref().unwrap()).unwrap().ok);
        assert_eq!(t.groups[1].step_range(), Some((2, 2)));
    }

    #[test]
    fn parallel_matches_sequential() {
        let steps: Vec<String> =
            (0..1500).map(|i| if i % 7 == 0 { format!("Wait, {i}") } else { format!("Step {i}.") }).collect();
        let s = SteppedTrace::from_steps(steps).unwrap();
        assert_eq!(annotate_heuristic_with(&s, ExecMode::Sequential), annotate_heuristic_with(&s, ExecMode::Parallel));
    }
}
