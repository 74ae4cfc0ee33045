//! Small hand-labelled traces shared by tests, benches and the CLI demo.

use crate::model::{subphase_id, Phase, PhaseGroup, Provenance, SteppedTrace, StructuredTrace, Subcategory, Subphase};

pub const TOY9_QUESTION: &str = "Natalia sold clips to 48 of her friends in April, and then she sold half as many clips in May. How many clips did Natalia sell altogether in April and May?";

pub const TOY9_ANSWER: &str = "72";

/// Nine steps, one per line, each carrying exactly one taxonomy cue.
pub const TOY9_TEXT: &str = "\
Let me restate the problem: Natalia sold 48 clips in April and half as many in May.
I need to find the total number of clips sold in April and May.
First, I should work out May: 48 / 2 = 24 clips.
So, the answer is 48 + 24 = 72 clips.
Hm, let me verify that the two months add up.
Wait, is half of 48 really 24?
Let me check that again: 24 + 24 = 48, so yes.
I'm confident this is correct.
So, the final answer is 72.
";

/// Hand labels for [`TOY9_TEXT`], one per step.
pub const TOY9_LABELS: [Subcategory; 9] = [
    Subcategory::Rephrase,
    Subcategory::DefineGoal,
    Subcategory::DecompositionExecution,
    Subcategory::FirstAnswer,
    Subcategory::ConfidenceQualification,
    Subcategory::PausingToRethink,
    Subcategory::ReExamine,
    Subcategory::StatingConfidence,
    Subcategory::PreparingOutput,
];

pub fn toy9_stepped() -> SteppedTrace {
    SteppedTrace::new(TOY9_TEXT.lines().map(str::to_owned).collect(), TOY9_QUESTION, TOY9_ANSWER, "deepseek-r1")
        .expect("fixture is well-formed")
}

/// Toy-9 structured by hand: one single-step subphase per label.
pub fn toy9_structured() -> StructuredTrace {
    let summaries = [
        "Restating the clip problem.",
        "Goal: total clips.",
        "Halving April's count.",
        "First total of 72.",
        "Quick plausibility check.",
        "Doubting the halving.",
        "Re-checking the halving.",
        "Declaring confidence.",
        "Stating 72.",
    ];
    let main = [
        "Natalia's April and May clip sales are restated and the total is set as the goal.",
        "May is computed as 24 and the first total of 72 is reached.",
        "The halving is questioned and re-checked.",
        "The model commits to 72.",
    ];
    let mut groups = Phase::ALL.map(PhaseGroup::empty);
    for (i, label) in TOY9_LABELS.iter().enumerate() {
        groups[label.parent().ordinal()].subphases.push(Subphase {
            id: subphase_id(i + 1),
            subcategory: *label,
            summary: summaries[i].to_owned(),
            step_indices: vec![i],
            reference_subphase_id: None,
        });
    }
    for (g, text) in groups.iter_mut().zip(main) {
        g.main_phase_summary = text.to_owned();
    }
    StructuredTrace { groups, step_count: 9, provenance: Provenance::LlmAnnotated, source: Some(toy9_stepped()) }
}
