//! Layered SVG drawing of a recipe, top to bottom like the DOT export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use recipe_calculus::{Kind, NodeId, Recipe};

const ROW: f64 = 84.0;
const GAP: f64 = 28.0;
const MARGIN: f64 = 20.0;
const BOX_H: f64 = 36.0;
const CHAR_W: f64 = 6.8;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn label(r: &Recipe, n: &NodeId) -> String {
    format!("{n}: {}", r.typing()[n])
}

/// Node centres keyed by id, plus the drawing size.
pub struct Layout {
    pub centre: BTreeMap<NodeId, (f64, f64)>,
    pub width: BTreeMap<NodeId, f64>,
    pub size: (f64, f64),
}

/// Longest-path layering; within a layer nodes follow the mean position of
/// their predecessors, which keeps most chains straight.
pub fn layout(r: &Recipe) -> Layout {
    let preds = r.graph().predecessors();
    let mut layer: BTreeMap<NodeId, usize> = BTreeMap::new();
    for n in r.topological_order() {
        let l = preds
            .get(&n)
            .map(|ps| ps.iter().map(|p| layer[*p] + 1).max().unwrap_or(0))
            .unwrap_or(0);
        layer.insert(n, l);
    }
    let depth = layer.values().max().map_or(0, |m| m + 1);
    let width: BTreeMap<NodeId, f64> = r
        .nodes()
        .map(|n| (n.clone(), (label(r, n).chars().count() as f64 * CHAR_W + 20.0).max(60.0)))
        .collect();

    let mut order: Vec<f64> = Vec::new();
    let mut slot: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut rows: Vec<Vec<NodeId>> = vec![Vec::new(); depth];
    for (n, l) in &layer {
        rows[*l].push(n.clone());
    }
    for row in &mut rows {
        let key = |n: &NodeId| -> f64 {
            let ps = preds.get(n).map(Vec::as_slice).unwrap_or(&[]);
            if ps.is_empty() {
                f64::MAX
            } else {
                ps.iter().map(|p| slot[*p]).sum::<f64>() / ps.len() as f64
            }
        };
        row.sort_by(|a, b| key(a).total_cmp(&key(b)).then_with(|| a.cmp(b)));
        for (i, n) in row.iter().enumerate() {
            slot.insert(n.clone(), i as f64);
        }
        order.push(row.iter().map(|n| width[n]).sum::<f64>() + GAP * row.len().saturating_sub(1) as f64);
    }

    let total = order.iter().cloned().fold(0.0, f64::max);
    let mut centre = BTreeMap::new();
    for (l, row) in rows.iter().enumerate() {
        let mut x = MARGIN + (total - order[l]) / 2.0;
        let y = MARGIN + BOX_H / 2.0 + l as f64 * ROW;
        for n in row {
            centre.insert(n.clone(), (x + width[n] / 2.0, y));
            x += width[n] + GAP;
        }
    }
    let height = 2.0 * MARGIN + BOX_H + depth.saturating_sub(1) as f64 * ROW;
    Layout {
        centre,
        width,
        size: (total + 2.0 * MARGIN, height),
    }
}

/// SVG markup for `r`. Nodes in `highlight` get the `changed` class.
pub fn render(r: &Recipe, highlight: &BTreeSet<NodeId>) -> String {
    let lay = layout(r);
    let (w, h) = lay.size;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" class="recipe" viewBox="0 0 {w:.0} {h:.0}" width="{w:.0}" height="{h:.0}">"#
    );
    s.push_str(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z"/></marker></defs>"#,
    );
    s.push('\n');
    for (a, b) in r.arcs() {
        let ((x1, y1), (x2, y2)) = (lay.centre[a], lay.centre[b]);
        let _ = writeln!(
            s,
            r#"<line class="arc" x1="{x1:.1}" y1="{:.1}" x2="{x2:.1}" y2="{:.1}" marker-end="url(#arrow)"/>"#,
            y1 + BOX_H / 2.0,
            y2 - BOX_H / 2.0
        );
    }
    for n in r.nodes() {
        let (cx, cy) = lay.centre[n];
        let bw = lay.width[n];
        let (kind, rx) = match r.kind_of(n) {
            Some(Kind::Comestible) => ("comestible", 12),
            _ => ("action", 0),
        };
        let class = if highlight.contains(n) { format!("{kind} changed") } else { kind.to_owned() };
        let _ = writeln!(
            s,
            r#"<g class="{class}" data-node="{id}"><rect x="{:.1}" y="{:.1}" width="{bw:.1}" height="{BOX_H}" rx="{rx}"/><text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text></g>"#,
            cx - bw / 2.0,
            cy - BOX_H / 2.0,
            cy + 4.5,
            escape(&label(r, n)),
            id = escape(n.as_str()),
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::escape;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape(r#"<a & "b">"#), "&lt;a &amp; &quot;b&quot;&gt;");
    }
}
