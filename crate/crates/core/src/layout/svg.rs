use std::fmt::Write as _;

use super::{NodeKind, RenderNode, RenderTree, FOOTER_HEIGHT};

/// Concrete colours for the four phase keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette(pub [String; 4]);

impl Default for Palette {
    fn default() -> Self {
        Palette(["#4e79a7", "#59a14f", "#f28e2b", "#e15759"].map(String::from))
    }
}

impl Palette {
    /// Parses four comma-separated `#rrggbb` colours.
    pub fn parse(s: &str) -> Result<Palette, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let colors: [String; 4] = parts
            .iter()
            .map(|c| {
                let hex = c.strip_prefix('#').filter(|h| h.len() == 6 && h.bytes().all(|b| b.is_ascii_hexdigit()));
                hex.map(|_| c.to_ascii_lowercase()).ok_or_else(|| format!("bad colour {c:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?
            .try_into()
            .map_err(|_| format!("expected 4 colours, got {}", parts.len()))?;
        Ok(Palette(colors))
    }

    fn color(&self, key: usize) -> &str {
        &self.0[key.min(3)]
    }
}

/// Two decimals with trailing zeros trimmed; `-0` prints as `0`.
pub fn format_coord(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

pub fn export_svg(tree: &RenderTree) -> String {
    export_svg_with(tree, &Palette::default())
}

/// Deterministic SVG 1.1 rendering of `tree`. The canvas spans the viewport
/// plus the footer band, widened upward if timeline boxes rise above it.
pub fn export_svg_with(tree: &RenderTree, palette: &Palette) -> String {
    let vp = tree.viewport;
    let top = tree.walk().map(|n| n.rect.y).fold(0.0_f64, f64::min);
    let bottom = tree.walk().map(|n| n.rect.bottom()).fold(vp.height() + FOOTER_HEIGHT, f64::max);
    let (w, h) = (format_coord(vp.width()), format_coord(bottom - top));

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 {} {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">",
        format_coord(top)
    );
    for node in tree.nodes.iter().chain(&tree.legend) {
        write_node(&mut out, node, palette, 1);
    }
    out.push_str("</svg>\n");
    out
}

fn write_node(out: &mut String, n: &RenderNode, palette: &Palette, depth: usize) {
    let pad = "  ".repeat(depth);
    let color = palette.color(n.color_key);
    let r = n.rect;
    let (x, y, w, h) = (format_coord(r.x), format_coord(r.y), format_coord(r.w), format_coord(r.h));
    let _ = writeln!(out, "{pad}<g id=\"{}\" class=\"{}\">", escape(&n.id), kind_class(n.kind));
    let inner = "  ".repeat(depth + 1);
    match n.kind {
        NodeKind::LinkLine => {
            let c = |k: &str| format_coord(n.meta.get(k).and_then(|v| v.as_f64()).unwrap_or_default());
            let _ = writeln!(
                out,
                "{inner}<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                c("x1"),
                c("y1"),
                c("x2"),
                c("y2")
            );
        }
        NodeKind::LegendEntry => {
            let cy = format_coord(r.y + r.h / 2.0);
            let _ = writeln!(
                out,
                "{inner}<circle cx=\"{}\" cy=\"{cy}\" r=\"6\" fill=\"{color}\"/>",
                format_coord(r.x + 10.0)
            );
            text(out, &inner, r.x + 22.0, r.y + r.h / 2.0 + 4.0, &n.label, r.w - 22.0, "");
        }
        NodeKind::StepText => {
            text(out, &inner, r.x + 8.0, r.y + (r.h / 2.0 + 4.0).min(18.0), &n.body, r.w - 16.0, "");
        }
        kind => {
            let (fill, opacity) = match kind {
                NodeKind::SummaryBox => ("#ffffff", "1"),
                NodeKind::PhaseBlock => (color, "0.25"),
                NodeKind::SubphaseBlock => (color, "0.45"),
                _ => (color, "0.85"),
            };
            let _ = writeln!(
                out,
                "{inner}<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{fill}\" fill-opacity=\"{opacity}\" stroke=\"{color}\"/>"
            );
            if r.h >= 16.0 {
                text(out, &inner, r.x + 8.0, r.y + 16.0, &n.label, r.w - 16.0, " font-weight=\"bold\"");
            }
            if r.h >= 34.0 && !n.body.is_empty() {
                text(out, &inner, r.x + 8.0, r.y + 32.0, &n.body, r.w - 16.0, "");
            }
        }
    }
    for c in &n.children {
        write_node(out, c, palette, depth + 1);
    }
    let _ = writeln!(out, "{pad}</g>");
}

fn kind_class(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::PhaseBlock => "phase-block",
        NodeKind::SubphaseBlock => "subphase-block",
        NodeKind::StepText => "step-text",
        NodeKind::SummaryBox => "summary-box",
        NodeKind::AxisSegment => "axis-segment",
        NodeKind::LinkLine => "link-line",
        NodeKind::LegendEntry => "legend-entry",
        NodeKind::DistributionBar => "distribution-bar",
    }
}

/// One line of text, cut with "..." to roughly fit `max_w` at 7px a glyph.
fn text(out: &mut String, pad: &str, x: f64, y: f64, s: &str, max_w: f64, attrs: &str) {
    if s.is_empty() {
        return;
    }
    let max_chars = (max_w / 7.0).floor().max(0.0) as usize;
    let n = s.chars().count();
    let shown: String = if n <= max_chars {
        s.to_owned()
    } else if max_chars > 3 {
        s.chars().take(max_chars - 3).chain("...".chars()).collect()
    } else {
        return;
    };
    let _ = writeln!(
        out,
        "{pad}<text x=\"{}\" y=\"{}\"{attrs}>{}</text>",
        format_coord(x),
        format_coord(y),
        escape(&shown)
    );
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => out.push(' '),
            c => out.push(c),
        }
    }
    out
}
