use super::{
    legend, partition::proportional_partition, phase_node_meta, share_labels, split_span, ExpansionState, NodeKind,
    Rect, RenderNode, RenderTree, View, Viewport, STEP_ROW_HEIGHT, TIMELINE_BAR_HEIGHT, TIMELINE_MIN_SEGMENT,
};
use crate::model::{Phase, StructuredTrace, Subphase};

const BOX_GAP: f64 = 16.0;
const LINK_RISE: f64 = 40.0;
const PHASE_BOX_WIDTH: f64 = 220.0;
const PHASE_BOX_HEIGHT: f64 = 96.0;
const SUBPHASE_BOX_WIDTH: f64 = 200.0;
const SUBPHASE_BOX_HEIGHT: f64 = 80.0;
const ROW_GAP: f64 = 24.0;

/// A bar along the bottom edge split into one segment per phase, widths
/// proportional to step counts with a minimum width. Each phase gets a
/// summary box above the bar joined to its segment by a link line. An
/// expanded phase splits its segment per subphase and adds a second row of
/// subphase boxes; an expanded subphase's box grows upward to hold one row
/// per step.
///
/// Boxes sit above the bar and may extend above the viewport when a long
/// subphase is open; clients scroll.
pub fn layout_timeline(structured: &StructuredTrace, state: &ExpansionState, vp: Viewport) -> RenderTree {
    let (w, h) = (vp.width(), vp.height());
    let bar_y = h - TIMELINE_BAR_HEIGHT;
    let counts: Vec<u64> = structured.groups.iter().map(|g| g.step_count() as u64).collect();
    let widths = proportional_partition(&counts, w, &[TIMELINE_MIN_SEGMENT; 4]);
    let spans = split_span(0.0, w, &widths);
    let shares = share_labels(structured);
    let expanded = state.expanded_phase.and_then(Phase::from_ordinal);

    let mut segments = Vec::with_capacity(4);
    for p in Phase::ALL {
        let k = p.ordinal();
        let g = structured.group(p);
        let rect = Rect::new(spans[k].0, bar_y, spans[k].1, TIMELINE_BAR_HEIGHT);
        let body = if g.subphases.is_empty() {
            "empty".to_owned()
        } else {
            format!("{} subphases, {} steps", g.subphases.len(), g.step_count())
        };
        let mut node = RenderNode::new(format!("axis_phase_{k}"), NodeKind::AxisSegment, rect, k)
            .with_text(p.display_name(), body)
            .with_meta("expanded", expanded == Some(p));
        node = phase_node_meta(node, structured, p, &shares[k]);
        if expanded == Some(p) {
            node.children = sub_segments(&g.subphases, rect, k);
        }
        segments.push(node);
    }

    let box_w = PHASE_BOX_WIDTH.min((w - 3.0 * BOX_GAP) / 4.0);
    let box_y = bar_y - LINK_RISE - PHASE_BOX_HEIGHT;
    let centers: Vec<f64> = segments.iter().map(|s| s.rect.center_x()).collect();
    let xs = place_row(&centers, box_w, w);

    let mut boxes = Vec::new();
    let mut links = Vec::new();
    for p in Phase::ALL {
        let k = p.ordinal();
        let g = structured.group(p);
        let rect = Rect::new(xs[k], box_y, box_w, PHASE_BOX_HEIGHT);
        let node = RenderNode::new(format!("summary_phase_{k}"), NodeKind::SummaryBox, rect, k)
            .with_text(p.display_name(), &g.main_phase_summary);
        boxes.push(phase_node_meta(node, structured, p, &shares[k]));
        links.push(link(format!("link_phase_{k}"), k, (centers[k], bar_y), (rect.center_x(), rect.bottom())));
    }

    if let Some(p) = expanded {
        let k = p.ordinal();
        let subs = &structured.group(p).subphases;
        let row_y = box_y - ROW_GAP - SUBPHASE_BOX_HEIGHT;
        let m = subs.len() as f64;
        let sub_w = SUBPHASE_BOX_WIDTH.min((w - (m - 1.0) * BOX_GAP) / m);
        let sub_centers: Vec<f64> = segments[k].children.iter().map(|c| c.rect.center_x()).collect();
        let sub_xs = place_row(&sub_centers, sub_w, w);
        for (i, s) in subs.iter().enumerate() {
            let open = state.expanded_subphase.as_deref() == Some(s.id.as_str());
            let grow = if open { STEP_ROW_HEIGHT * s.step_indices.len() as f64 } else { 0.0 };
            let rect = Rect::new(sub_xs[i], row_y - grow, sub_w, SUBPHASE_BOX_HEIGHT + grow);
            let mut node = subphase_node(format!("summary_{}", s.id), NodeKind::SummaryBox, s, rect, k, open);
            if open {
                node.children = step_rows(structured, s, Rect::new(rect.x, rect.y, rect.w, grow), k);
            }
            boxes.push(node);
            let anchor = (sub_centers[i], bar_y);
            links.push(link(format!("link_{}", s.id), k, anchor, (rect.center_x(), rect.bottom())));
        }
    }

    let mut nodes = segments;
    nodes.extend(boxes);
    nodes.extend(links);
    RenderTree { view: View::Timeline, nodes, legend: legend(vp), viewport: vp }
}

fn sub_segments(subphases: &[Subphase], seg: Rect, color_key: usize) -> Vec<RenderNode> {
    let counts: Vec<u64> = subphases.iter().map(|s| s.step_indices.len() as u64).collect();
    let widths = proportional_partition(&counts, seg.w, &vec![TIMELINE_MIN_SEGMENT; counts.len()]);
    subphases
        .iter()
        .zip(split_span(seg.x, seg.w, &widths))
        .map(|(s, (x, sw))| {
            let rect = Rect::new(x, seg.y, sw, seg.h);
            subphase_node(format!("axis_{}", s.id), NodeKind::SubphaseBlock, s, rect, color_key, false)
        })
        .collect()
}

fn subphase_node(id: String, kind: NodeKind, s: &Subphase, rect: Rect, color_key: usize, open: bool) -> RenderNode {
    let range = match (s.first_step(), s.last_step()) {
        (Some(a), Some(b)) => serde_json::Value::from(vec![a, b]),
        _ => serde_json::Value::Null,
    };
    RenderNode::new(id, kind, rect, color_key)
        .with_text(s.subcategory.display_name(), &s.summary)
        .with_meta("subphase_id", s.id.as_str())
        .with_meta("subcategory", s.subcategory.label())
        .with_meta("step_count", s.step_indices.len())
        .with_meta("step_range", range)
        .with_meta("expanded", open)
}

fn step_rows(structured: &StructuredTrace, s: &Subphase, area: Rect, color_key: usize) -> Vec<RenderNode> {
    s.step_indices
        .iter()
        .enumerate()
        .map(|(row, &i)| {
            let rect = Rect::new(area.x, area.y + STEP_ROW_HEIGHT * row as f64, area.w, STEP_ROW_HEIGHT);
            RenderNode::new(format!("step_{i}"), NodeKind::StepText, rect, color_key)
                .with_text(format!("Step {i}"), structured.step_text(i).unwrap_or_default())
                .with_meta("step_index", i)
        })
        .collect()
}

fn link(id: String, color_key: usize, (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> RenderNode {
    let rect = Rect::new(x1.min(x2), y1.min(y2), (x2 - x1).abs(), (y2 - y1).abs());
    RenderNode::new(id, NodeKind::LinkLine, rect, color_key)
        .with_meta("x1", x1)
        .with_meta("y1", y1)
        .with_meta("x2", x2)
        .with_meta("y2", y2)
}

/// Left edges for boxes of width `bw` centred on `centers` (ascending),
/// pushed apart to at least [`BOX_GAP`] and kept inside `[0, width]`.
fn place_row(centers: &[f64], bw: f64, width: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = centers.iter().map(|c| (c - bw / 2.0).clamp(0.0, (width - bw).max(0.0))).collect();
    for i in 1..xs.len() {
        xs[i] = xs[i].max(xs[i - 1] + bw + BOX_GAP);
    }
    if let Some(last) = xs.last_mut() {
        *last = last.min(width - bw);
    }
    for i in (0..xs.len().saturating_sub(1)).rev() {
        xs[i] = xs[i].min(xs[i + 1] - bw - BOX_GAP);
    }
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy9_structured;

    fn widths(tree: &RenderTree) -> Vec<f64> {
        tree.axis_segments().map(|n| n.rect.w).collect()
    }

    #[test]
    fn toy9_segments() {
        let vp = Viewport::new(900.0, 600.0).unwrap();
        let tree = layout_timeline(&toy9_structured(), &ExpansionState::default(), vp);
        assert_eq!(widths(&tree), vec![200.0, 300.0, 200.0, 200.0]);
        let seg = tree.find("axis_phase_1").unwrap();
        assert_eq!(seg.rect, Rect::new(200.0, 552.0, 300.0, 48.0));
        assert_eq!(tree.count(NodeKind::SummaryBox), 4);
        assert_eq!(tree.count(NodeKind::LinkLine), 4);
    }

    #[test]
    fn summary_boxes_do_not_overlap() {
        let vp = Viewport::new(320.0, 240.0).unwrap();
        let tree = layout_timeline(&toy9_structured(), &ExpansionState::default(), vp);
        let boxes: Vec<Rect> = tree.walk().filter(|n| n.kind == NodeKind::SummaryBox).map(|n| n.rect).collect();
        for (i, a) in boxes.iter().enumerate() {
            assert!(a.x >= 0.0 && a.right() <= 320.0 + 1e-9, "{a:?}");
            for b in &boxes[i + 1..] {
                assert_eq!(a.intersection_area(b), 0.0);
            }
        }
    }

    #[test]
    fn links_join_segment_and_box() {
        let vp = Viewport::new(900.0, 600.0).unwrap();
        let tree = layout_timeline(&toy9_structured(), &ExpansionState::default(), vp);
        let l = tree.find("link_phase_1").unwrap();
        assert_eq!(l.meta["x1"], 350.0);
        assert_eq!(l.meta["y1"], 552.0);
        let b = tree.find("summary_phase_1").unwrap();
        assert_eq!(l.meta["y2"], b.rect.bottom());
    }

    #[test]
    fn expanded_phase_and_subphase() {
        let vp = Viewport::new(900.0, 600.0).unwrap();
        let state = ExpansionState::subphase(1, "subphase_4");
        let tree = layout_timeline(&toy9_structured(), &state, vp);
        let seg = tree.find("axis_phase_1").unwrap();
        let sum: f64 = seg.children.iter().map(|c| c.rect.w).sum();
        assert_eq!(seg.children.len(), 3);
        assert!((sum - 300.0).abs() < 1e-9);
        assert_eq!(tree.count(NodeKind::SummaryBox), 7);
        let open = tree.find("summary_subphase_4").unwrap();
        assert_eq!(open.children.len(), 1);
        assert_eq!(open.rect.h, SUBPHASE_BOX_HEIGHT + STEP_ROW_HEIGHT);
        assert_eq!(open.children[0].body, "So, the answer is 48 + 24 = 72 clips.");
        assert!(open.rect.contains(&open.children[0].rect, 1e-9));
    }

    #[test]
    fn empty_phase_is_clamped_and_labelled() {
        let mut t = toy9_structured();
        let moved = std::mem::take(&mut t.groups[2].subphases);
        t.groups[1].subphases.extend(moved);
        let vp = Viewport::new(900.0, 600.0).unwrap();
        let tree = layout_timeline(&t, &ExpansionState::default(), vp);
        let seg = tree.find("axis_phase_2").unwrap();
        assert_eq!(seg.rect.w, TIMELINE_MIN_SEGMENT);
        assert_eq!(seg.body, "empty");
        assert!((widths(&tree).iter().sum::<f64>() - 900.0).abs() < 1e-9);
    }

    #[test]
    fn row_placement() {
        assert_eq!(place_row(&[100.0, 110.0], 50.0, 400.0), vec![75.0, 141.0]);
        assert_eq!(place_row(&[390.0, 395.0], 50.0, 400.0), vec![284.0, 350.0]);
    }
}
