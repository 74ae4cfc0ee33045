use super::{
    legend, partition::proportional_partition, phase_node_meta, share_labels, split_span, ExpansionState, NodeKind,
    Rect, RenderNode, RenderTree, View, Viewport, EXPANSION_FRACTION, STEP_ROW_HEIGHT, SUBPHASE_MIN_HEIGHT,
};
use crate::model::{Phase, StructuredTrace, Subphase};

/// Collapsed: a 2x2 grid in row-major phase order. With a phase expanded,
/// that phase takes a full-height left column of [`EXPANSION_FRACTION`] of
/// the width and the other three stack in the right column; its subphases
/// tile it top to bottom in proportion to their step counts, and an
/// expanded subphase is tiled by one row per verbatim step.
pub fn layout_spacefill(structured: &StructuredTrace, state: &ExpansionState, vp: Viewport) -> RenderTree {
    let (w, h) = (vp.width(), vp.height());
    let expanded = state.expanded_phase.and_then(Phase::from_ordinal);
    let rects: [Rect; 4] = match expanded {
        None => {
            let cols = split_span(0.0, w, &[w / 2.0; 2]);
            let rows = split_span(0.0, h, &[h / 2.0; 2]);
            [0, 1, 2, 3].map(|k| {
                let (x, cw) = cols[k % 2];
                let (y, rh) = rows[k / 2];
                Rect::new(x, y, cw, rh)
            })
        }
        Some(open) => {
            let cols = split_span(0.0, w, &[w * EXPANSION_FRACTION, w * (1.0 - EXPANSION_FRACTION)]);
            let rows = split_span(0.0, h, &[h / 3.0; 3]);
            let mut out = [Rect::default(); 4];
            let mut row = rows.iter();
            for p in Phase::ALL {
                out[p.ordinal()] = if p == open {
                    Rect::new(cols[0].0, 0.0, cols[0].1, h)
                } else {
                    let (y, rh) = *row.next().expect("three collapsed phases");
                    Rect::new(cols[1].0, y, cols[1].1, rh)
                };
            }
            out
        }
    };

    let shares = share_labels(structured);
    let nodes = Phase::ALL
        .iter()
        .map(|&p| {
            let k = p.ordinal();
            let g = structured.group(p);
            let is_open = expanded == Some(p);
            let mut node = RenderNode::new(format!("phase_{k}"), NodeKind::PhaseBlock, rects[k], k)
                .with_text(p.display_name(), &g.main_phase_summary)
                .with_meta("expanded", is_open);
            node = phase_node_meta(node, structured, p, &shares[k]);
            if is_open {
                node.children = subphase_blocks(structured, &g.subphases, rects[k], k, state);
            }
            node
        })
        .collect();

    RenderTree { view: View::SpaceFill, nodes, legend: legend(vp), viewport: vp }.with_distribution_bar(structured, vp)
}

fn subphase_blocks(
    structured: &StructuredTrace,
    subphases: &[Subphase],
    area: Rect,
    color_key: usize,
    state: &ExpansionState,
) -> Vec<RenderNode> {
    if subphases.is_empty() {
        return Vec::new();
    }
    let open = state.expanded_subphase.as_deref();
    let counts: Vec<u64> = subphases.iter().map(|s| s.step_indices.len() as u64).collect();
    let base = SUBPHASE_MIN_HEIGHT;
    let spare = area.h - base * (subphases.len() - 1) as f64;
    let mins: Vec<f64> = subphases
        .iter()
        .map(|s| {
            if Some(s.id.as_str()) == open {
                base.max((STEP_ROW_HEIGHT * s.step_indices.len() as f64).min(spare))
            } else {
                base
            }
        })
        .collect();
    let heights = proportional_partition(&counts, area.h, &mins);
    subphases
        .iter()
        .zip(split_span(area.y, area.h, &heights))
        .map(|(s, (y, sh))| {
            let rect = Rect::new(area.x, y, area.w, sh);
            let is_open = Some(s.id.as_str()) == open;
            let mut node = RenderNode::new(&s.id, NodeKind::SubphaseBlock, rect, color_key)
                .with_text(s.subcategory.display_name(), &s.summary)
                .with_meta("subcategory", s.subcategory.label())
                .with_meta("step_count", s.step_indices.len())
                .with_meta("step_range", step_range(s))
                .with_meta("expanded", is_open);
            if is_open {
                node.children = step_rows(structured, s, rect, color_key);
            }
            node
        })
        .collect()
}

fn step_range(s: &Subphase) -> serde_json::Value {
    match (s.first_step(), s.last_step()) {
        (Some(a), Some(b)) => vec![a, b].into(),
        _ => serde_json::Value::Null,
    }
}

fn step_rows(structured: &StructuredTrace, s: &Subphase, area: Rect, color_key: usize) -> Vec<RenderNode> {
    let k = s.step_indices.len();
    let rows = split_span(area.y, area.h, &vec![area.h / k as f64; k]);
    s.step_indices
        .iter()
        .zip(rows)
        .map(|(&i, (y, rh))| {
            RenderNode::new(format!("step_{i}"), NodeKind::StepText, Rect::new(area.x, y, area.w, rh), color_key)
                .with_text(format!("Step {i}"), structured.step_text(i).unwrap_or_default())
                .with_meta("step_index", i)
        })
        .collect()
}

impl RenderTree {
    fn with_distribution_bar(mut self, structured: &StructuredTrace, vp: Viewport) -> Self {
        let counts: Vec<u64> = structured.groups.iter().map(|g| g.step_count() as u64).collect();
        let total: u64 = counts.iter().sum();
        let bar = Rect::new(0.0, vp.height() + 28.0, vp.width(), 24.0);
        let widths: Vec<f64> = if total == 0 {
            vec![bar.w / 4.0; 4]
        } else {
            counts.iter().map(|&c| bar.w * c as f64 / total as f64).collect()
        };
        let shares = share_labels(structured);
        let mut node =
            RenderNode::new("distribution", NodeKind::DistributionBar, bar, 0).with_text("Phase distribution", "");
        node.children = Phase::ALL
            .iter()
            .zip(split_span(bar.x, bar.w, &widths))
            .map(|(p, (x, sw))| {
                let k = p.ordinal();
                RenderNode::new(
                    format!("distribution_{k}"),
                    NodeKind::DistributionBar,
                    Rect::new(x, bar.y, sw, bar.h),
                    k,
                )
                .with_text(p.display_name(), &shares[k])
                .with_meta("share", shares[k].as_str())
                .with_meta("step_count", counts[k])
            })
            .collect();
        self.nodes.push(node);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy9_structured;

    fn vp() -> Viewport {
        Viewport::new(1200.0, 800.0).unwrap()
    }

    fn rects(tree: &RenderTree) -> Vec<Rect> {
        tree.phase_blocks().map(|n| n.rect).collect()
    }

    #[test]
    fn collapsed_quadrants() {
        let tree = layout_spacefill(&toy9_structured(), &ExpansionState::default(), vp());
        assert_eq!(
            rects(&tree),
            vec![
                Rect::new(0.0, 0.0, 600.0, 400.0),
                Rect::new(600.0, 0.0, 600.0, 400.0),
                Rect::new(0.0, 400.0, 600.0, 400.0),
                Rect::new(600.0, 400.0, 600.0, 400.0),
            ]
        );
        assert_eq!(tree.legend.len(), 4);
        assert!(tree.phase_blocks().all(|n| n.children.is_empty()));
        let first = tree.find("phase_0").unwrap();
        assert_eq!(first.meta["subphase_count"], 2);
        assert_eq!(first.meta["step_range"], serde_json::json!([0, 1]));
    }

    #[test]
    fn expanded_column() {
        let tree = layout_spacefill(&toy9_structured(), &ExpansionState::phase(1), vp());
        let r = rects(&tree);
        let close = |a: Rect, b: [f64; 4]| {
            let a: [f64; 4] = a.into();
            a.iter().zip(b).all(|(x, y)| (x - y).abs() < 0.01)
        };
        assert!(close(r[1], [0.0, 0.0, 840.0, 800.0]), "{r:?}");
        assert!(close(r[0], [840.0, 0.0, 360.0, 266.67]), "{r:?}");
        assert!(close(r[2], [840.0, 266.67, 360.0, 266.67]), "{r:?}");
        assert!(close(r[3], [840.0, 533.33, 360.0, 266.67]), "{r:?}");

        let subs: Vec<Rect> = tree.find("phase_1").unwrap().children.iter().map(|c| c.rect).collect();
        assert_eq!(subs.len(), 3);
        for s in &subs {
            assert!((s.h - 800.0 / 3.0).abs() < 1e-9);
            assert_eq!(s.w, 840.0);
        }
    }

    #[test]
    fn expanded_subphase_rows() {
        let mut t = toy9_structured();
        // merge phase 1 into one three-step subphase
        let g = &mut t.groups[1];
        g.subphases.truncate(1);
        g.subphases[0].step_indices = vec![2, 3, 4];
        let state = ExpansionState { expanded_phase: Some(1), expanded_subphase: Some("subphase_3".into()) };
        let tree = layout_spacefill(&t, &state, vp());
        let sub = &tree.find("phase_1").unwrap().children[0];
        assert_eq!(sub.children.len(), 3);
        assert_eq!(sub.children[1].body, "So, the answer is 48 + 24 = 72 clips.");
        let total: f64 = sub.children.iter().map(|c| c.rect.h).sum();
        assert!((total - sub.rect.h).abs() < 1e-9);
    }

    #[test]
    fn distribution_bar_below_viewport() {
        let tree = layout_spacefill(&toy9_structured(), &ExpansionState::default(), vp());
        let bar = tree.find("distribution").unwrap();
        assert_eq!(bar.children.len(), 4);
        assert_eq!(bar.children[1].body, "33.3%");
        assert!(bar.rect.y >= 800.0);
    }
}
