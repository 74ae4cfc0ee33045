use serde::{Deserialize, Serialize};

use super::LayoutError;
use crate::model::{Phase, StructuredTrace};

/// Which phase and subphase the client currently has open. At most one of
/// each; an open subphase always belongs to the open phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpansionState {
    #[serde(default)]
    pub expanded_phase: Option<usize>,
    #[serde(default)]
    pub expanded_subphase: Option<String>,
}

impl ExpansionState {
    pub fn phase(ordinal: usize) -> Self {
        ExpansionState { expanded_phase: Some(ordinal), expanded_subphase: None }
    }

    pub fn subphase(ordinal: usize, id: impl Into<String>) -> Self {
        ExpansionState { expanded_phase: Some(ordinal), expanded_subphase: Some(id.into()) }
    }
}

/// A clickable node: a phase block or a subphase block. Timeline ids carry
/// an `axis_` or `summary_` prefix, which is ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRef {
    Phase(Phase),
    Subphase(String),
}

impl NodeRef {
    pub fn parse(node_id: &str) -> Option<NodeRef> {
        let id = node_id.strip_prefix("summary_").or_else(|| node_id.strip_prefix("axis_")).unwrap_or(node_id);
        if let Some(k) = id.strip_prefix("phase_") {
            let k: usize = k.parse().ok()?;
            return Phase::from_ordinal(k).map(NodeRef::Phase);
        }
        let k = id.strip_prefix("subphase_")?;
        (!k.is_empty() && k.bytes().all(|b| b.is_ascii_digit())).then(|| NodeRef::Subphase(id.to_owned()))
    }
}

pub fn check_state(state: &ExpansionState, structured: &StructuredTrace) -> Result<(), LayoutError> {
    let phase = match state.expanded_phase {
        None if state.expanded_subphase.is_some() => {
            return Err(LayoutError::BadState("expanded_subphase requires expanded_phase".into()))
        }
        None => return Ok(()),
        Some(k) => Phase::from_ordinal(k).ok_or_else(|| LayoutError::BadState(format!("no phase with ordinal {k}")))?,
    };
    if let Some(id) = &state.expanded_subphase {
        match structured.find_subphase(id) {
            Some((p, _)) if p == phase => {}
            Some((p, _)) => {
                return Err(LayoutError::BadState(format!(
                    "{id} belongs to phase {}, not the expanded phase {}",
                    p.ordinal(),
                    phase.ordinal()
                )))
            }
            None => return Err(LayoutError::BadState(format!("no subphase {id}"))),
        }
    }
    Ok(())
}

/// Next state after a click on `node_id`.
pub fn toggle(
    state: &ExpansionState,
    node_id: &str,
    structured: &StructuredTrace,
) -> Result<ExpansionState, LayoutError> {
    let unknown = || LayoutError::UnknownNode(node_id.to_owned());
    match NodeRef::parse(node_id).ok_or_else(unknown)? {
        NodeRef::Phase(p) if state.expanded_phase == Some(p.ordinal()) => Ok(ExpansionState::default()),
        NodeRef::Phase(p) => Ok(ExpansionState::phase(p.ordinal())),
        NodeRef::Subphase(id) => {
            let (p, _) = structured.find_subphase(&id).ok_or_else(unknown)?;
            let k = p.ordinal();
            if state.expanded_phase == Some(k) && state.expanded_subphase.as_deref() == Some(id.as_str()) {
                Ok(ExpansionState::phase(k))
            } else {
                Ok(ExpansionState::subphase(k, id))
            }
        }
    }
}
