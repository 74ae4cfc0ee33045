//! Render geometry for the space-filling and timeline views.
//!
//! Layouts are pure functions of (trace, expansion state, viewport) and emit
//! a [`RenderTree`] that a thin client draws as-is. Coordinates are abstract
//! pixels with the origin at the top-left. Below the viewport sits a footer
//! band of [`FOOTER_HEIGHT`] holding the legend and, in the space-filling
//! view, the phase distribution bar.

mod partition;
mod spacefill;
mod state;
mod svg;
mod timeline;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{Phase, StructuredTrace};
use crate::stats::compute_stats;

pub use partition::{proportional_partition, split_span};
pub use spacefill::layout_spacefill;
pub use state::{check_state, toggle, ExpansionState, NodeRef};
pub use svg::{export_svg, export_svg_with, format_coord, Palette};
pub use timeline::layout_timeline;

/// Width share of the expanded block in the space-filling view.
pub const EXPANSION_FRACTION: f64 = 0.7;
pub const SUBPHASE_MIN_HEIGHT: f64 = 40.0;
pub const STEP_ROW_HEIGHT: f64 = 28.0;
pub const TIMELINE_BAR_HEIGHT: f64 = 48.0;
pub const TIMELINE_MIN_SEGMENT: f64 = 60.0;
pub const FOOTER_HEIGHT: f64 = 56.0;
pub const MIN_VIEWPORT_WIDTH: f64 = 320.0;
pub const MIN_VIEWPORT_HEIGHT: f64 = 240.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("invalid expansion state: {0}")]
    BadState(String),
    #[error("viewport must be at least {MIN_VIEWPORT_WIDTH}x{MIN_VIEWPORT_HEIGHT}")]
    BadViewport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ViewportFields")]
pub struct Viewport {
    width: f64,
    height: f64,
}

#[derive(Deserialize)]
struct ViewportFields {
    width: f64,
    height: f64,
}

impl TryFrom<ViewportFields> for Viewport {
    type Error = LayoutError;

    fn try_from(v: ViewportFields) -> Result<Self, Self::Error> {
        Viewport::new(v.width, v.height)
    }
}

impl Viewport {
    pub fn new(width: f64, height: f64) -> Result<Self, LayoutError> {
        let ok = width.is_finite() && height.is_finite();
        if !ok || width < MIN_VIEWPORT_WIDTH || height < MIN_VIEWPORT_HEIGHT {
            return Err(LayoutError::BadViewport);
        }
        Ok(Viewport { width, height })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.width, self.height)
    }
}

impl Default for Viewport {
    fn default() -> Self {
        Viewport { width: 1200.0, height: 800.0 }
    }
}

/// Axis-aligned rectangle; serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for Rect {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Rect { x, y, w, h }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center_x(&self) -> f64 {
        self.x + self.w / 2.0
    }

    /// Area shared with `other` (zero when they only touch).
    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn contains(&self, other: &Rect, eps: f64) -> bool {
        other.x >= self.x - eps
            && other.y >= self.y - eps
            && other.right() <= self.right() + eps
            && other.bottom() <= self.bottom() + eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    PhaseBlock,
    SubphaseBlock,
    StepText,
    SummaryBox,
    AxisSegment,
    LinkLine,
    LegendEntry,
    DistributionBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderNode {
    pub id: String,
    pub kind: NodeKind,
    pub rect: Rect,
    pub color_key: usize,
    pub label: String,
    pub body: String,
    pub meta: BTreeMap<String, Value>,
    pub children: Vec<RenderNode>,
}

impl RenderNode {
    pub fn new(id: impl Into<String>, kind: NodeKind, rect: Rect, color_key: usize) -> Self {
        RenderNode {
            id: id.into(),
            kind,
            rect,
            color_key,
            label: String::new(),
            body: String::new(),
            meta: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    pub fn with_text(mut self, label: impl Into<String>, body: impl Into<String>) -> Self {
        self.label = label.into();
        self.body = body.into();
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_owned(), value.into());
        self
    }

    /// Pre-order walk over this node and its descendants.
    pub fn walk(&self) -> Box<dyn Iterator<Item = &RenderNode> + '_> {
        Box::new(std::iter::once(self).chain(self.children.iter().flat_map(|c| c.walk())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    #[default]
    SpaceFill,
    Timeline,
}

impl std::str::FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "spacefill" | "space-fill" | "space_fill" => Ok(View::SpaceFill),
            "timeline" => Ok(View::Timeline),
            other => Err(format!("unknown view {other:?} (expected spacefill or timeline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderTree {
    pub view: View,
    pub nodes: Vec<RenderNode>,
    pub legend: Vec<RenderNode>,
    pub viewport: Viewport,
}

impl RenderTree {
    pub fn walk(&self) -> impl Iterator<Item = &RenderNode> {
        self.nodes.iter().chain(&self.legend).flat_map(|n| n.walk())
    }

    pub fn find(&self, id: &str) -> Option<&RenderNode> {
        self.walk().find(|n| n.id == id)
    }

    pub fn phase_blocks(&self) -> impl Iterator<Item = &RenderNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::PhaseBlock)
    }

    pub fn axis_segments(&self) -> impl Iterator<Item = &RenderNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::AxisSegment)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.walk().filter(|n| n.kind == kind).count()
    }
}

/// Checks the state against the trace, then lays out the requested view.
pub fn layout(
    view: View,
    structured: &StructuredTrace,
    state: &ExpansionState,
    vp: Viewport,
) -> Result<RenderTree, LayoutError> {
    check_state(state, structured)?;
    Ok(match view {
        View::SpaceFill => layout_spacefill(structured, state, vp),
        View::Timeline => layout_timeline(structured, state, vp),
    })
}

fn step_range_value(structured: &StructuredTrace, phase: Phase) -> Value {
    match structured.group(phase).step_range() {
        Some((a, b)) => Value::from(vec![a, b]),
        None => Value::Null,
    }
}

fn legend(vp: Viewport) -> Vec<RenderNode> {
    let slots = split_span(0.0, vp.width(), &[vp.width() / 4.0; 4]);
    Phase::ALL
        .iter()
        .zip(slots)
        .map(|(p, (x, w))| {
            let k = p.ordinal();
            RenderNode::new(format!("legend_{k}"), NodeKind::LegendEntry, Rect::new(x, vp.height() + 4.0, w, 20.0), k)
                .with_text(p.display_name(), "")
        })
        .collect()
}

fn phase_node_meta(node: RenderNode, structured: &StructuredTrace, phase: Phase, share: &str) -> RenderNode {
    let g = structured.group(phase);
    node.with_meta("phase", phase.ordinal())
        .with_meta("subphase_count", g.subphases.len())
        .with_meta("step_count", g.step_count())
        .with_meta("step_range", step_range_value(structured, phase))
        .with_meta("share", share)
        .with_meta("empty", g.subphases.is_empty())
}

fn share_labels(structured: &StructuredTrace) -> [String; 4] {
    compute_stats(structured).percent_labels()
}
