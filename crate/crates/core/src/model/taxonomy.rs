//! The fixed four-phase, twelve-subcategory reasoning vocabulary and its cue phrases.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// One of the four consecutive top-level reasoning stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    ProblemDefinitionScoping,
    InitialSolutionExploration,
    IterativeRefinementVerification,
    FinalDecision,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::ProblemDefinitionScoping,
        Phase::InitialSolutionExploration,
        Phase::IterativeRefinementVerification,
        Phase::FinalDecision,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Phase> {
        Self::ALL.get(ordinal).copied()
    }

    /// Key of this phase inside the `reasoning_analysis` object.
    pub fn key(self) -> &'static str {
        match self {
            Phase::ProblemDefinitionScoping => "problem_definition_and_scoping",
            Phase::InitialSolutionExploration => "initial_solution_and_exploration",
            Phase::IterativeRefinementVerification => "iterative_refinement_and_verification",
            Phase::FinalDecision => "final_decision",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Phase::ProblemDefinitionScoping => "Problem Definition & Scoping",
            Phase::InitialSolutionExploration => "Initial Solution & Exploration",
            Phase::IterativeRefinementVerification => "Iterative Refinement & Verification",
            Phase::FinalDecision => "Final Decision",
        }
    }

    /// Phases that must hold at least one subphase in a trace of normal length.
    pub fn is_mandatory(self) -> bool {
        self != Phase::IterativeRefinementVerification
    }

    /// Subcategory used for an un-cued step while the scan sits in this phase.
    pub fn continuation_default(self) -> Subcategory {
        match self {
            Phase::ProblemDefinitionScoping => Subcategory::Rephrase,
            Phase::InitialSolutionExploration => Subcategory::DecompositionExecution,
            Phase::IterativeRefinementVerification => Subcategory::ReExamine,
            Phase::FinalDecision => Subcategory::PreparingOutput,
        }
    }

    pub fn subcategories(self) -> impl Iterator<Item = Subcategory> {
        Subcategory::ALL.into_iter().filter(move |s| s.parent() == self)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Fine-grained action label. Declaration order is the taxonomy's row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subcategory {
    Rephrase,
    DefineGoal,
    DecompositionExecution,
    FirstAnswer,
    ConfidenceQualification,
    PausingToRethink,
    Correction,
    ReExamine,
    TryAlternative,
    Abandonment,
    StatingConfidence,
    PreparingOutput,
}

impl Subcategory {
    pub const ALL: [Subcategory; 12] = [
        Subcategory::Rephrase,
        Subcategory::DefineGoal,
        Subcategory::DecompositionExecution,
        Subcategory::FirstAnswer,
        Subcategory::ConfidenceQualification,
        Subcategory::PausingToRethink,
        Subcategory::Correction,
        Subcategory::ReExamine,
        Subcategory::TryAlternative,
        Subcategory::Abandonment,
        Subcategory::StatingConfidence,
        Subcategory::PreparingOutput,
    ];

    pub fn parent(self) -> Phase {
        use Subcategory::*;
        match self {
            Rephrase | DefineGoal => Phase::ProblemDefinitionScoping,
            DecompositionExecution | FirstAnswer | ConfidenceQualification => Phase::InitialSolutionExploration,
            PausingToRethink | Correction | ReExamine | TryAlternative | Abandonment => {
                Phase::IterativeRefinementVerification
            }
            StatingConfidence | PreparingOutput => Phase::FinalDecision,
        }
    }

    /// Wire label, as written in annotation documents.
    pub fn label(self) -> &'static str {
        use Subcategory::*;
        match self {
            Rephrase => "Rephrase",
            DefineGoal => "Define_Goal",
            DecompositionExecution => "Decomposition_&_Execution",
            FirstAnswer => "First_Answer",
            ConfidenceQualification => "Confidence_Qualification",
            PausingToRethink => "Pausing_to_Rethink",
            Correction => "Correction",
            ReExamine => "Re-examine",
            TryAlternative => "Try_Alternative",
            Abandonment => "Abandonment",
            StatingConfidence => "Stating_Confidence",
            PreparingOutput => "Preparing_Output",
        }
    }

    pub fn display_name(self) -> &'static str {
        use Subcategory::*;
        match self {
            Rephrase => "Rephrase",
            DefineGoal => "Define Goal",
            DecompositionExecution => "Decomposition & Execution",
            FirstAnswer => "First Answer",
            ConfidenceQualification => "Confidence Qualification",
            PausingToRethink => "Pausing to Rethink",
            Correction => "Correction",
            ReExamine => "Re-examine",
            TryAlternative => "Try Alternative",
            Abandonment => "Abandonment",
            StatingConfidence => "Stating Confidence",
            PreparingOutput => "Preparing Output",
        }
    }

    /// Resolves a label from an annotation document: canonical names in any
    /// casing/punctuation, plus the drifted labels seen in model output.
    pub fn from_label(raw: &str) -> Option<Subcategory> {
        let key = label_key(raw);
        if key.is_empty() {
            return None;
        }
        Self::ALL
            .into_iter()
            .find(|s| label_key(s.label()) == key || label_key(&format!("{s:?}")) == key)
            .or_else(|| LABEL_ALIASES.iter().find(|(alias, _)| label_key(alias) == key).map(|(_, s)| *s))
    }
}

impl fmt::Display for Subcategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl Serialize for Subcategory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Subcategory {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Subcategory::from_label(&raw).ok_or_else(|| serde::de::Error::custom(format!("unknown subcategory {raw:?}")))
    }
}

/// Labels observed in drifted model output, mapped onto the canonical vocabulary.
pub const LABEL_ALIASES: &[(&str, Subcategory)] = &[
    ("Starting_to_Think", Subcategory::Rephrase),
    ("Reading_the_Question", Subcategory::Rephrase),
    ("Making_a_Plan", Subcategory::DecompositionExecution),
    ("Try_Alternative_(Rebloom)", Subcategory::TryAlternative),
    ("Reexamines_(Rumination)", Subcategory::ReExamine),
    ("Settling_on_Solution", Subcategory::StatingConfidence),
];

fn label_key(raw: &str) -> String {
    raw.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Lowercases, deletes apostrophes, turns every other non-alphanumeric run
/// into a single space, and trims. Cue phrases and step texts share this form.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if matches!(c, '\'' | '\u{2019}' | '\u{2018}') {
            continue;
        }
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyEntry {
    pub parent: Phase,
    /// Normalized (see [`normalize_text`]) cue phrases.
    pub cues: Vec<String>,
    pub definition: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    entries: BTreeMap<Subcategory, TaxonomyEntry>,
}

static STANDARD: LazyLock<Taxonomy> = LazyLock::new(Taxonomy::build_standard);

impl Taxonomy {
    pub fn standard() -> &'static Taxonomy {
        &STANDARD
    }

    fn build_standard() -> Taxonomy {
        let entries = Subcategory::ALL
            .into_iter()
            .map(|s| {
                let (cues, definition) = seed(s);
                let entry = TaxonomyEntry {
                    parent: s.parent(),
                    cues: cues.iter().map(|c| normalize_text(c)).collect(),
                    definition,
                };
                (s, entry)
            })
            .collect();
        Taxonomy { entries }
    }

    pub fn entry(&self, subcategory: Subcategory) -> &TaxonomyEntry {
        &self.entries[&subcategory]
    }

    pub fn cues(&self, subcategory: Subcategory) -> &[String] {
        &self.entry(subcategory).cues
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subcategory, &TaxonomyEntry)> {
        self.entries.iter().map(|(s, e)| (*s, e))
    }
}

fn seed(s: Subcategory) -> (&'static [&'static str], &'static str) {
    use Subcategory::*;
    match s {
        Rephrase => {
            (&["Let me restate the problem…", "Basically, the goal is…"], "Restates the task to confirm understanding")
        }
        DefineGoal => (&["I need to find…", "The aim is to…"], "Specifies the required objective/output"),
        DecompositionExecution => {
            (&["First, I should…", "Let's break this down…"], "Breaks the problem into steps and proceeds")
        }
        FirstAnswer => (&["So, the answer is…", "Therefore, the result is…"], "States a complete initial result"),
        ConfidenceQualification => {
            (&["Hm, let me verify that…", "Does that make sense?…"], "Gives a quick plausibility check")
        }
        PausingToRethink => (&["Wait…", "Hold on…"], "Stops to reconsider direction"),
        Correction => (&["Let me correct that…", "Let me recalculate that part…"], "Fixes assumptions/calculations"),
        ReExamine => {
            (&["Let me check that again…", "Let me review the steps…"], "Re-checks prior work without progress")
        }
        TryAlternative => (&["Alternatively…", "Another way to see this is…"], "Explores a different approach"),
        Abandonment => {
            (&["This approach is a dead end…", "I'll drop this path and try another…"], "Drops an unproductive line")
        }
        StatingConfidence => {
            (&["I'm confident this is correct…", "I think this is right now…"], "Expresses certainty in the answer")
        }
        PreparingOutput => (&["So, the final answer is…", "Here's the result:…"], "Formats and delivers the result"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_two_three_five_two() {
        let counts: Vec<usize> = Phase::ALL.iter().map(|p| p.subcategories().count()).collect();
        assert_eq!(counts, vec![2, 3, 5, 2]);
    }

    #[test]
    fn every_subcategory_has_normalized_cues() {
        let tax = Taxonomy::standard();
        for (s, entry) in tax.iter() {
            assert!(!entry.cues.is_empty(), "{s:?}");
            for cue in &entry.cues {
                assert_eq!(cue, &normalize_text(cue));
                assert!(!cue.is_empty());
            }
        }
        assert_eq!(tax.cues(Subcategory::StatingConfidence)[0], "im confident this is correct");
        assert_eq!(tax.cues(Subcategory::PreparingOutput)[1], "heres the result");
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_text("Wait, is half of 48 really 24?"), "wait is half of 48 really 24");
        assert_eq!(normalize_text("  Let's  break—this down…"), "lets break this down");
        assert_eq!(normalize_text("?!"), "");
    }

    #[test]
    fn labels_resolve() {
        for s in Subcategory::ALL {
            assert_eq!(Subcategory::from_label(s.label()), Some(s));
            assert_eq!(Subcategory::from_label(&format!("{s:?}")), Some(s));
        }
        assert_eq!(Subcategory::from_label("Try_Alternative_(Rebloom)"), Some(Subcategory::TryAlternative));
        assert_eq!(Subcategory::from_label("Making_a_Plan"), Some(Subcategory::DecompositionExecution));
        assert_eq!(Subcategory::from_label("Settling_on_Solution"), Some(Subcategory::StatingConfidence));
        assert_eq!(Subcategory::from_label("Daydreaming"), None);
        assert_eq!(Subcategory::from_label(""), None);
    }

    #[test]
    fn ordinals_are_total() {
        for (i, p) in Phase::ALL.iter().enumerate() {
            assert_eq!(p.ordinal(), i);
            assert_eq!(Phase::from_ordinal(i), Some(*p));
        }
        assert_eq!(Phase::from_ordinal(4), None);
    }
}
