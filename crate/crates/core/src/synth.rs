//! Synthetic traces for fuzzing, accuracy checks and benchmarks. Every
//! generator takes the caller's RNG, so a seeded RNG gives a reproducible
//! corpus.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::model::{
    subphase_id, AnnotationSkeleton, Phase, PhaseGroup, Provenance, SteppedTrace, StructuredTrace, Subcategory,
    Subphase, Taxonomy, MANDATORY_PHASE_MIN_STEPS,
};

/// Words that never form a cue phrase on their own or in any order.
const FILLER_WORDS: &[&str] = &[
    "the",
    "count",
    "of",
    "items",
    "in",
    "each",
    "box",
    "times",
    "plus",
    "gives",
    "total",
    "remaining",
    "value",
    "row",
    "column",
    "apples",
    "pages",
    "minutes",
    "price",
    "units",
    "sum",
    "product",
    "half",
    "twice",
    "per",
];

/// A short cue-free sentence fragment with some numbers in it.
pub fn filler<R: Rng + ?Sized>(rng: &mut R) -> String {
    let len = rng.random_range(3..9);
    let mut words: Vec<String> = (0..len).map(|_| (*FILLER_WORDS.choose(rng).expect("non-empty")).to_owned()).collect();
    let at = rng.random_range(0..words.len());
    words.insert(at, rng.random_range(2..500).to_string());
    words.join(" ")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Step counts per phase, each at least `mins[k]`, summing to `n`.
fn phase_counts<R: Rng + ?Sized>(rng: &mut R, n: usize, mins: [usize; 4]) -> [usize; 4] {
    let mut counts = mins;
    let spare = n - mins.iter().sum::<usize>();
    // uneven weights so some phases dominate, as in real traces
    let weights: [u32; 4] = std::array::from_fn(|_| rng.random_range(1..10));
    let total: u32 = weights.iter().sum();
    for _ in 0..spare {
        let mut pick = rng.random_range(0..total);
        let k = weights.iter().position(|&w| {
            if pick < w {
                true
            } else {
                pick -= w;
                false
            }
        });
        counts[k.expect("pick below total")] += 1;
    }
    counts
}

fn mandatory_mins(n: usize) -> [usize; 4] {
    if n >= MANDATORY_PHASE_MIN_STEPS {
        [1, 1, 0, 1]
    } else {
        [0, 0, 0, 1]
    }
}

/// A trace whose steps each voice one subcategory through a cue phrase, with
/// the generating subcategory per step as ground truth.
#[derive(Debug, Clone)]
pub struct CueTrace {
    pub stepped: SteppedTrace,
    pub truth: Vec<Subcategory>,
}

impl CueTrace {
    pub fn text(&self) -> String {
        self.stepped.steps().join("\n")
    }
}

/// Phases advance monotonically; every step opens with a cue of its
/// subcategory except occasional continuation steps, which carry no cue and
/// belong to their phase's default subcategory. The last step is always
/// output preparation.
///
/// # Panics
/// If `n` is below the mandatory-phase threshold.
pub fn cue_trace<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CueTrace {
    assert!(n >= MANDATORY_PHASE_MIN_STEPS, "cue traces need at least {MANDATORY_PHASE_MIN_STEPS} steps");
    let counts = phase_counts(rng, n, mandatory_mins(n));
    let taxonomy = Taxonomy::standard();
    let mut steps = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for p in Phase::ALL {
        let subs: Vec<Subcategory> = p.subcategories().collect();
        for j in 0..counts[p.ordinal()] {
            let last = steps.len() + 1 == n;
            let continuation = !last && j > 0 && p != Phase::ProblemDefinitionScoping && rng.random_bool(0.15);
            let (label, text) = if continuation {
                (p.continuation_default(), format!("{}.", capitalize(&filler(rng))))
            } else {
                let s = if last { Subcategory::PreparingOutput } else { *subs.choose(rng).expect("non-empty") };
                let cue = taxonomy.cues(s).choose(rng).expect("every subcategory has cues");
                (s, format!("{}, {}.", capitalize(cue), filler(rng)))
            };
            steps.push(text);
            truth.push(label);
        }
    }
    let stepped = SteppedTrace::new(steps, "Synthetic question?", "42", "synthetic").expect("non-empty steps");
    CueTrace { stepped, truth }
}

/// A random trace that passes validation: phases in order, runs of
/// consecutive steps, mandatory phases filled, occasional back-references.
pub fn random_structured<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StructuredTrace {
    assert!(n > 0, "a trace has at least one step");
    let counts = phase_counts(rng, n, mandatory_mins(n));
    let steps: Vec<String> = (0..n).map(|_| format!("{}.", capitalize(&filler(rng)))).collect();
    let stepped = SteppedTrace::new(steps, "Synthetic question?", "42", "synthetic").expect("non-empty steps");

    let mut next_step = 0;
    let mut next_id = 0;
    let groups = Phase::ALL.map(|p| {
        let subs: Vec<Subcategory> = p.subcategories().collect();
        let mut group = PhaseGroup::empty(p);
        group.main_phase_summary = capitalize(&filler(rng));
        let end = next_step + counts[p.ordinal()];
        while next_step < end {
            let mut run = vec![next_step];
            next_step += 1;
            while next_step < end && !rng.random_bool(0.4) {
                run.push(next_step);
                next_step += 1;
            }
            let reference = (next_id > 0 && rng.random_bool(0.1)).then(|| subphase_id(rng.random_range(1..=next_id)));
            next_id += 1;
            group.subphases.push(Subphase {
                id: subphase_id(next_id),
                subcategory: *subs.choose(rng).expect("non-empty"),
                summary: capitalize(&filler(rng)),
                step_indices: run,
                reference_subphase_id: reference,
            });
        }
        group
    });
    let provenance = if rng.random_bool(0.5) { Provenance::LlmAnnotated } else { Provenance::HeuristicAnnotated };
    StructuredTrace { groups, step_count: n, provenance, source: Some(stepped) }
}

/// One defect injected by [`perturb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defect {
    /// An index removed from its subphase.
    Gap,
    /// An index also listed in a neighbouring subphase.
    Overlap,
    /// An index past the end of the trace, or negative.
    OutOfRange,
    /// An index repeated inside its own subphase.
    Duplicate,
    /// Indices of a later phase moved into an earlier one's subphase, or
    /// the reverse.
    Inversion,
}

/// Applies between one and four random defects to `skeleton`.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, skeleton: &mut AnnotationSkeleton, n: usize) -> Vec<Defect> {
    const KINDS: [Defect; 5] = [Defect::Gap, Defect::Overlap, Defect::OutOfRange, Defect::Duplicate, Defect::Inversion];
    let rounds = rng.random_range(1..=4);
    let mut applied = Vec::new();
    for _ in 0..rounds {
        let slots: Vec<(usize, usize)> = skeleton
            .groups
            .iter()
            .enumerate()
            .flat_map(|(g, grp)| (0..grp.subphases.len()).map(move |j| (g, j)))
            .collect();
        if slots.is_empty() {
            break;
        }
        let defect = *KINDS.choose(rng).expect("non-empty");
        let (g, j) = *slots.choose(rng).expect("non-empty");
        let list = &mut skeleton.groups[g].subphases[j].step_indices;
        match defect {
            Defect::Gap if !list.is_empty() => {
                let at = rng.random_range(0..list.len());
                list.remove(at);
            }
            Defect::Duplicate if !list.is_empty() => {
                let v = *list.choose(rng).expect("non-empty");
                list.push(v);
            }
            Defect::OutOfRange => {
                let v = if rng.random_bool(0.5) { n as i64 + rng.random_range(0..5) } else { -rng.random_range(1..5) };
                list.push(v);
            }
            Defect::Overlap => {
                // claim the step just past this run's end (or just before its start)
                let v = match (list.first(), list.last()) {
                    (Some(&a), Some(&b)) => {
                        if rng.random_bool(0.5) {
                            b + 1
                        } else {
                            a - 1
                        }
                    }
                    _ => rng.random_range(0..n as i64),
                };
                if (0..n as i64).contains(&v) {
                    list.push(v);
                }
            }
            Defect::Inversion => {
                let v = rng.random_range(0..n as i64);
                list.push(v);
            }
            _ => continue,
        }
        applied.push(defect);
    }
    applied
}
