//! Deterministic clean-up of model-produced step assignments.
//!
//! Order of operations:
//! 1. drop indices outside `[0, step_count)` and duplicates inside a subphase;
//! 2. an index claimed by several subphases stays with the earliest one in
//!    document order, unless that leaves a whole phase without steps: the
//!    phase then takes back its own claims where the other owner's phase keeps
//!    a step and phase order stays intact;
//! 3. an unassigned index joins the subphase holding the index just before it
//!    (index 0 joins the first non-empty subphase), unless an empty subphase
//!    of a stepless phase sits at that position in document order;
//! 4. if a mandatory phase that lists a subphase is still without steps, the
//!    fewest steps are moved so that it and every phase holding steps keep at
//!    least one, without breaking phase order;
//! 5. empty subphases are dropped;
//! 6. a subphase whose indices are no longer one run is split into runs, and
//!    subphases are sorted by first index within their phase;
//! 7. ids are renumbered `subphase_1..`.
//!
//! Summaries are never rewritten; subphases whose indices moved are reported
//! as [`RepairNote`]s instead. What cannot be fixed is a step assigned to an
//! earlier phase than a step before it.

use std::collections::HashMap;

use log::debug;
use serde::Serialize;

use super::AnnotateError;
use crate::model::{subphase_id, AnnotationSkeleton, Phase, SkeletonSubphase, MANDATORY_PHASE_MIN_STEPS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairNote {
    /// Id of the subphase before renumbering.
    pub original_id: String,
    pub change: String,
}

pub fn repair(skeleton: &AnnotationSkeleton, step_count: usize) -> Result<AnnotationSkeleton, AnnotateError> {
    repair_with_notes(skeleton, step_count).map(|(s, _)| s)
}

pub fn repair_with_notes(
    skeleton: &AnnotationSkeleton,
    step_count: usize,
) -> Result<(AnnotationSkeleton, Vec<RepairNote>), AnnotateError> {
    let n = step_count;
    let mut notes = Vec::new();
    let mut note = |id: &str, change: String| {
        debug!("repair {id}: {change}");
        notes.push(RepairNote { original_id: id.to_owned(), change });
    };

    // (group, subphase) slots in document order.
    let slots: Vec<(usize, usize)> =
        skeleton.groups.iter().enumerate().flat_map(|(g, grp)| (0..grp.subphases.len()).map(move |j| (g, j))).collect();
    let original = |slot: usize| -> &SkeletonSubphase {
        let (g, j) = slots[slot];
        &skeleton.groups[g].subphases[j]
    };

    let mut lists: Vec<Vec<usize>> = Vec::with_capacity(slots.len());
    for slot in 0..slots.len() {
        let sub = original(slot);
        let mut kept: Vec<usize> =
            sub.step_indices.iter().filter_map(|&i| usize::try_from(i).ok().filter(|&i| i < n)).collect();
        let in_range = kept.len();
        kept.sort_unstable();
        kept.dedup();
        if in_range != sub.step_indices.len() {
            note(&sub.id, format!("dropped {} out-of-range index(es)", sub.step_indices.len() - in_range));
        }
        if kept.len() != in_range {
            note(&sub.id, "dropped duplicate indices".into());
        }
        lists.push(kept);
    }

    let claims = lists.clone();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (slot, list) in lists.iter_mut().enumerate() {
        let before = list.len();
        list.retain(|&i| match owner[i] {
            None => {
                owner[i] = Some(slot);
                true
            }
            Some(_) => false,
        });
        if list.len() != before {
            note(&original(slot).id, format!("released {} index(es) claimed earlier", before - list.len()));
        }
    }

    let group_of = |slot: usize| slots[slot].0;
    for g in 0..skeleton.groups.len() {
        let members: Vec<usize> = (0..slots.len()).filter(|&s| group_of(s) == g).collect();
        if members.iter().any(|&s| !lists[s].is_empty()) {
            continue;
        }
        let mut trial = owner.clone();
        let mut held = vec![0usize; skeleton.groups.len()];
        for o in trial.iter().flatten() {
            held[group_of(*o)] += 1;
        }
        for &s in &members {
            for &i in &claims[s] {
                let Some(prev) = trial[i] else { continue };
                if held[group_of(prev)] > 1 {
                    held[group_of(prev)] -= 1;
                    held[g] += 1;
                    trial[i] = Some(s);
                }
            }
        }
        let mut top = 0;
        let monotone = trial.iter().flatten().all(|&o| {
            top = top.max(group_of(o));
            group_of(o) == top
        });
        if monotone && trial != owner {
            for (i, (&now, &was)) in trial.iter().zip(&owner).enumerate() {
                if let (Some(now), Some(was)) = (now, was) {
                    if now != was {
                        lists[was].retain(|&x| x != i);
                        lists[now].push(i);
                        note(&original(now).id, format!("kept step {i} so its phase is not left empty"));
                    }
                }
            }
            owner = trial;
        }
    }

    for i in 0..n {
        if owner[i].is_some() {
            continue;
        }
        let before = if i == 0 { None } else { owner[i - 1] };
        let after = owner[i + 1..].iter().flatten().next().copied();
        let stepless = |s: usize| (0..slots.len()).all(|t| group_of(t) != group_of(s) || lists[t].is_empty());
        let vacant = (before.map_or(0, |b| b + 1)..after.unwrap_or(slots.len())).find(|&s| stepless(s));
        let target = match vacant {
            Some(s) => Some(s),
            None if i == 0 => lists.iter().position(|l| !l.is_empty()),
            None => owner[i - 1],
        };
        let Some(slot) = target else {
            return Err(AnnotateError::Irreparable("no subphase holds any step".into()));
        };
        owner[i] = Some(slot);
        lists[slot].push(i);
        note(&original(slot).id, format!("absorbed unassigned step {i}"));
    }

    // a listed mandatory phase still without steps: reassign as few steps as
    // possible so that it, and every phase that has steps, keeps one
    let listed: Vec<Option<usize>> =
        (0..skeleton.groups.len()).map(|g| (0..slots.len()).find(|&s| group_of(s) == g)).collect();
    if owner.iter().all(Option::is_some) {
        let seq: Vec<usize> = owner.iter().flatten().map(|&o| group_of(o)).collect();
        let mut required = 0u8;
        for &g in &seq {
            required |= 1 << g;
        }
        let missing: Vec<usize> = Phase::ALL
            .iter()
            .map(|p| p.ordinal())
            .filter(|&g| listed[g].is_some() && required & (1 << g) == 0)
            .filter(|&g| {
                (n >= MANDATORY_PHASE_MIN_STEPS && Phase::ALL[g].is_mandatory()) || g == Phase::FinalDecision.ordinal()
            })
            .collect();
        let monotone = seq.windows(2).all(|w| w[0] <= w[1]);
        if monotone && !missing.is_empty() {
            for &g in &missing {
                required |= 1 << g;
            }
            let allowed: Vec<usize> = (0..listed.len()).filter(|&g| listed[g].is_some()).collect();
            if let Some(target) = fewest_changes(&seq, &allowed, required) {
                for (i, (&want, &had)) in target.iter().zip(&seq).enumerate() {
                    if want == had {
                        continue;
                    }
                    // join a neighbouring run of the same phase, else the phase's first subphase
                    let slot = (0..n)
                        .filter(|&j| target[j] == want && seq[j] == want)
                        .min_by_key(|&j| j.abs_diff(i))
                        .and_then(|j| owner[j])
                        .or(listed[want])
                        .expect("allowed phases are listed");
                    let was = owner[i].expect("every step is owned");
                    lists[was].retain(|&x| x != i);
                    lists[slot].push(i);
                    owner[i] = Some(slot);
                    note(&original(slot).id, format!("took step {i} so a required phase is not left empty"));
                }
            }
        }
    }

    let mut groups = skeleton.groups.clone();
    for g in &mut groups {
        g.subphases.clear();
    }
    let mut renamed: HashMap<String, String> = HashMap::new();
    for (slot, mut list) in lists.into_iter().enumerate() {
        let sub = original(slot);
        if list.is_empty() {
            note(&sub.id, "dropped: no steps left".into());
            continue;
        }
        list.sort_unstable();
        let runs = split_runs(&list);
        if runs.len() > 1 {
            note(&sub.id, format!("split into {} runs", runs.len()));
        }
        let (g, _) = slots[slot];
        for run in runs {
            groups[g]
                .subphases
                .push(SkeletonSubphase { step_indices: run.iter().map(|&i| i as i64).collect(), ..sub.clone() });
        }
    }

    let mut k = 0;
    for g in &mut groups {
        g.subphases.sort_by_key(|s| s.step_indices[0]);
        for s in &mut g.subphases {
            k += 1;
            let id = subphase_id(k);
            renamed.entry(s.id.clone()).or_insert_with(|| id.clone());
            s.id = id;
        }
    }
    for g in &mut groups {
        for s in &mut g.subphases {
            if let Some(r) = s.reference_subphase_id.as_mut() {
                if let Some(new) = renamed.get(r) {
                    *r = new.clone();
                }
            }
        }
    }

    let repaired = AnnotationSkeleton { groups };
    let mut previous: Option<(&str, i64, usize)> = None;
    for (phase, s) in repaired.subphases() {
        let first = s.step_indices[0];
        let last = *s.step_indices.last().expect("non-empty run");
        if let Some((prev_id, prev_last, prev_phase)) = previous {
            if prev_last >= first {
                return Err(AnnotateError::Irreparable(format!(
                    "{prev_id} (phase {prev_phase}) ends at step {prev_last} but {} ({phase}) starts at step {first}",
                    s.id
                )));
            }
        }
        previous = Some((&s.id, last, phase.ordinal()));
    }
    Ok((repaired, notes))
}

/// The non-decreasing phase sequence over `allowed` phases that covers every
/// phase in `required` (a bit mask) and differs from `seq` in the fewest
/// places; `None` if no such sequence exists.
fn fewest_changes(seq: &[usize], allowed: &[usize], required: u8) -> Option<Vec<usize>> {
    const UNREACHED: u32 = u32::MAX;
    let n = seq.len();
    let states = 4 * 16;
    let at = |g: usize, mask: u8| g * 16 + mask as usize;
    // cost[i][state] = fewest changes for seq[..=i] ending in that state
    let mut cost = vec![UNREACHED; n * states];
    let mut from = vec![u8::MAX; n * states];
    for &g in allowed {
        cost[at(g, 1 << g)] = u32::from(seq[0] != g);
    }
    for i in 1..n {
        for prev in 0..4 {
            for mask in 0..16u8 {
                let c = cost[(i - 1) * states + at(prev, mask)];
                if c == UNREACHED {
                    continue;
                }
                for &g in allowed.iter().filter(|&&g| g >= prev) {
                    let next = mask | 1 << g;
                    let slot = i * states + at(g, next);
                    let total = c + u32::from(seq[i] != g);
                    if total < cost[slot] {
                        cost[slot] = total;
                        from[slot] = at(prev, mask) as u8;
                    }
                }
            }
        }
    }
    let last = (n - 1) * states;
    let mut state = (0..states)
        .filter(|&s| (s % 16) as u8 & required == required && cost[last + s] != UNREACHED)
        .min_by_key(|&s| cost[last + s])?;
    let mut out = vec![0; n];
    for i in (0..n).rev() {
        out[i] = state / 16;
        if i > 0 {
            state = from[i * states + state] as usize;
        }
    }
    Some(out)
}

fn split_runs(sorted: &[usize]) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    for &i in sorted {
        match runs.last_mut() {
            Some(run) if *run.last().expect("runs are non-empty") + 1 == i => run.push(i),
            _ => runs.push(vec![i]),
        }
    }
    runs
}
