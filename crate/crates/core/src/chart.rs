//! Adams chart rendering: ASCII, SVG and JSON.
//!
//! Both Ext charts and spectral sequence pages are first turned into a
//! [`Drawing`]: a list of dots placed at `(n, s)` plus line segments between
//! dots. The renderers only see drawings.

use crate::resolution::{ChartEdge, ExtChart};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("unknown format `{0}` (expected ascii, svg or json)")]
    UnknownFormat(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Glyph {
    /// Free M₂ (solid dot).
    Solid,
    /// M₂/τ (open circle).
    Open,
    /// Free Z₂[τ] on a spectral sequence page (box).
    Box,
}

impl Glyph {
    pub fn ascii(self) -> char {
        match self {
            Glyph::Solid => '*',
            Glyph::Open => 'o',
            Glyph::Box => '#',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// `h0 · g = g'`
    H0,
    /// `h0 · g = τ^e g'`, `e ≥ 1`
    H0Tau,
    H1,
    /// `h1 · g = τ^e g'`, `e ≥ 1`
    H1Tau,
    /// `alpha · g = τ^e g'`, `e ≥ 1`
    AlphaTau,
}

impl EdgeKind {
    pub fn dotted(self) -> bool {
        matches!(self, EdgeKind::H0Tau | EdgeKind::H1Tau | EdgeKind::AlphaTau)
    }
}

/// Sort product edges into drawing kinds. `alpha` edges without a τ are
/// not drawn, matching the usual chart conventions.
pub fn classify_edges(edges: &[ChartEdge]) -> Vec<(EdgeKind, ChartEdge)> {
    let mut out: Vec<(EdgeKind, ChartEdge)> = edges
        .iter()
        .filter_map(|e| {
            let kind = match (e.op.as_str(), e.tau) {
                ("h0", 0) => EdgeKind::H0,
                ("h0", _) => EdgeKind::H0Tau,
                ("h1", 0) => EdgeKind::H1,
                ("h1", _) => EdgeKind::H1Tau,
                ("alpha", t) if t > 0 => EdgeKind::AlphaTau,
                _ => return None,
            };
            Some((kind, e.clone()))
        })
        .collect();
    out.sort_by_key(|a| (a.0, a.1.from, a.1.to));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dot {
    pub n: i32,
    pub s: i32,
    pub glyph: Glyph,
    pub label: String,
    /// Identifies the dot for edges: `[n, s, w, index within cell]`.
    pub key: [i32; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub from: [i32; 4],
    pub to: [i32; 4],
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drawing {
    pub title: String,
    pub n_range: (i32, i32),
    pub s_range: (i32, i32),
    pub dots: Vec<Dot>,
    pub segments: Vec<Segment>,
}

impl Drawing {
    /// Dots sharing a grid point, in label order.
    fn grid(&self) -> BTreeMap<(i32, i32), Vec<&Dot>> {
        let mut g: BTreeMap<(i32, i32), Vec<&Dot>> = BTreeMap::new();
        for d in &self.dots {
            g.entry((d.n, d.s)).or_default().push(d);
        }
        for v in g.values_mut() {
            v.sort_by(|a, b| (&a.label, a.key).cmp(&(&b.label, b.key)));
        }
        g
    }

    /// Glyph counts per `(n, s)`.
    pub fn glyph_counts(&self) -> BTreeMap<(i32, i32, Glyph), usize> {
        let mut out = BTreeMap::new();
        for d in &self.dots {
            *out.entry((d.n, d.s, d.glyph)).or_default() += 1;
        }
        out
    }

    /// Keep only dots (and segments between dots) inside the ranges.
    pub fn clip(&self, n_range: (i32, i32), s_range: (i32, i32)) -> Drawing {
        let inside = |n: i32, s: i32| n >= n_range.0 && n <= n_range.1 && s >= s_range.0 && s <= s_range.1;
        let dots: Vec<Dot> = self.dots.iter().filter(|d| inside(d.n, d.s)).cloned().collect();
        let keys: std::collections::BTreeSet<[i32; 4]> = dots.iter().map(|d| d.key).collect();
        Drawing {
            title: self.title.clone(),
            n_range,
            s_range,
            segments: self
                .segments
                .iter()
                .filter(|e| keys.contains(&e.from) && keys.contains(&e.to))
                .cloned()
                .collect(),
            dots,
        }
    }
}

/// Lay out an Ext chart. Labels read `name(w)`.
pub fn drawing_from_chart(chart: &ExtChart) -> Drawing {
    let mut dots = Vec::new();
    for c in &chart.cells {
        let total = c.free + c.torsion.len();
        for i in 0..total {
            let glyph = if i < c.free { Glyph::Solid } else { Glyph::Open };
            let name = c
                .names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("g{}_{}_{}", c.n, c.s, c.w));
            dots.push(Dot {
                n: c.n,
                s: c.s as i32,
                glyph,
                label: format!("{name}({})", c.w),
                key: [c.n, c.s as i32, c.w, i as i32],
            });
        }
    }
    let segments = classify_edges(&chart.edges)
        .into_iter()
        .map(|(kind, e)| Segment {
            from: e.from,
            to: e.to,
            kind,
        })
        .collect();
    let n_lo = dots.iter().map(|d| d.n).min().unwrap_or(0).min(0);
    let n_hi = dots.iter().map(|d| d.n).max().unwrap_or(0).max(n_lo);
    Drawing {
        title: chart.module.clone(),
        n_range: (n_lo, n_hi),
        s_range: (0, chart.s_max as i32),
        dots,
        segments,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
    Json,
}

impl FromStr for Format {
    type Err = ChartError;
    fn from_str(s: &str) -> Result<Self, ChartError> {
        match s.to_ascii_lowercase().as_str() {
            "ascii" | "txt" => Ok(Format::Ascii),
            "svg" => Ok(Format::Svg),
            "json" => Ok(Format::Json),
            _ => Err(ChartError::UnknownFormat(s.to_string())),
        }
    }
}

/// Render an Ext chart. JSON output is the chart itself, so it round-trips.
pub fn render(chart: &ExtChart, format: &str) -> Result<String, ChartError> {
    Ok(match format.parse::<Format>()? {
        Format::Json => chart.to_json(),
        Format::Ascii => render_ascii(&drawing_from_chart(chart)),
        Format::Svg => render_svg(&drawing_from_chart(chart)),
    })
}

/// Plain text chart: rows are `s` (top down), columns are `n`. Between two
/// rows a line shows `|`/`:` for h0 edges and `/` for h1 edges leaving the
/// row below. Dotted edges that are not vertical are listed under the chart.
pub fn render_ascii(d: &Drawing) -> String {
    let grid = d.grid();
    let width = grid.values().map(Vec::len).max().unwrap_or(1).max(1) + 1;
    let (n0, n1) = d.n_range;
    let (s0, s1) = d.s_range;
    let cols = (n1 - n0 + 1).max(1) as usize;
    let col_of = |n: i32| (n - n0) as usize * width;
    let index: BTreeMap<[i32; 4], (i32, i32)> = d.dots.iter().map(|x| (x.key, (x.n, x.s))).collect();
    let mut out = String::new();
    if !d.title.is_empty() {
        let _ = writeln!(out, "{}", d.title);
    }
    let mut listed = Vec::new();
    for s in (s0..=s1).rev() {
        if s < s1 {
            // Edges from row s up to row s+1.
            let mut line = vec![' '; cols * width];
            for e in &d.segments {
                let (Some(&(fn_, fs)), Some(&(tn, ts))) = (index.get(&e.from), index.get(&e.to)) else {
                    continue;
                };
                if fs != s || ts != s + 1 {
                    continue;
                }
                let ch = match (tn - fn_, e.kind.dotted()) {
                    (0, false) => '|',
                    (0, true) => ':',
                    (1, false) => '/',
                    _ => continue,
                };
                let pos = if tn == fn_ {
                    col_of(fn_)
                } else {
                    col_of(fn_) + width - 1
                };
                if pos < line.len() && line[pos] == ' ' {
                    line[pos] = ch;
                }
            }
            let text: String = line.into_iter().collect();
            let _ = writeln!(out, "{:>4} {}", "", text.trim_end());
        }
        let mut row = vec![' '; cols * width];
        for n in n0..=n1 {
            if let Some(dots) = grid.get(&(n, s)) {
                for (i, x) in dots.iter().enumerate() {
                    row[col_of(n) + i] = x.glyph.ascii();
                }
            } else {
                row[col_of(n)] = '.';
            }
        }
        let text: String = row.into_iter().collect();
        let _ = writeln!(out, "{s:>4} {}", text.trim_end());
    }
    let mut axis = vec![' '; cols * width + 4];
    for n in n0..=n1 {
        let label: Vec<char> = n.to_string().chars().collect();
        let at = col_of(n);
        // Skip labels that would touch the previous one.
        if axis[at.saturating_sub(1)..(at + label.len()).min(axis.len())]
            .iter()
            .all(|&c| c == ' ')
        {
            for (i, ch) in label.into_iter().enumerate() {
                if at + i < axis.len() {
                    axis[at + i] = ch;
                }
            }
        }
    }
    let axis: String = axis.into_iter().collect();
    let _ = writeln!(out, "{:>4} {}", "s/n", axis.trim_end());
    for e in &d.segments {
        let (Some(&(fn_, fs)), Some(&(tn, ts))) = (index.get(&e.from), index.get(&e.to)) else {
            continue;
        };
        if tn - fn_ > 1 || (e.kind.dotted() && tn != fn_) {
            listed.push(format!("({fn_},{fs}) -> ({tn},{ts})"));
        }
    }
    if !listed.is_empty() {
        let _ = writeln!(out, "dotted: {}", listed.join(", "));
    }
    out
}

const CELL: i32 = 40;
const MARGIN: i32 = 40;
const DX: i32 = 7;

/// Self-contained SVG 1.1. Output depends only on the drawing.
pub fn render_svg(d: &Drawing) -> String {
    let (n0, n1) = d.n_range;
    let (s0, s1) = d.s_range;
    let w = (n1 - n0 + 1) * CELL + 2 * MARGIN;
    let h = (s1 - s0 + 1) * CELL + 2 * MARGIN;
    let grid = d.grid();
    let mut pos: BTreeMap<[i32; 4], (i32, i32)> = BTreeMap::new();
    for ((n, s), dots) in &grid {
        let k = dots.len() as i32;
        for (i, x) in dots.iter().enumerate() {
            let cx = MARGIN + (n - n0) * CELL + CELL / 2 + (2 * i as i32 - (k - 1)) * DX / 2;
            let cy = h - MARGIN - (s - s0) * CELL - CELL / 2;
            pos.insert(x.key, (cx, cy));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", xml_escape(&d.title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    // Axes and grid labels.
    let (ox, oy) = (MARGIN, h - MARGIN);
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(out, r#"<line x1="{ox}" y1="{oy}" x2="{}" y2="{oy}"/>"#, w - MARGIN);
    let _ = writeln!(out, r#"<line x1="{ox}" y1="{oy}" x2="{ox}" y2="{}"/>"#, MARGIN);
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g font-family="monospace" font-size="10" fill="black">"#);
    for n in n0..=n1 {
        let x = MARGIN + (n - n0) * CELL + CELL / 2;
        let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="middle">{n}</text>"#, oy + 14);
    }
    for s in s0..=s1 {
        let y = oy - (s - s0) * CELL - CELL / 2 + 3;
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{s}</text>"#, ox - 6);
    }
    let _ = writeln!(out, "</g>");
    // Edges under dots.
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1.2" fill="none">"#);
    for e in &d.segments {
        let (Some(&(x1, y1)), Some(&(x2, y2))) = (pos.get(&e.from), pos.get(&e.to)) else {
            continue;
        };
        let dash = if e.kind.dotted() {
            r#" stroke-dasharray="2,3""#
        } else {
            ""
        };
        let _ = writeln!(out, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"{dash}/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1">"#);
    for dots in grid.values() {
        for x in dots {
            let (cx, cy) = pos[&x.key];
            let label = xml_escape(&x.label);
            match x.glyph {
                Glyph::Solid => {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{cx}" cy="{cy}" r="3" fill="black"><title>{label}</title></circle>"#
                    );
                }
                Glyph::Open => {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{cx}" cy="{cy}" r="3" fill="white"><title>{label}</title></circle>"#
                    );
                }
                Glyph::Box => {
                    let _ = writeln!(
                        out,
                        r#"<rect x="{}" y="{}" width="8" height="8" fill="white"><title>{label}</title></rect>"#,
                        cx - 4,
                        cy - 4
                    );
                }
            }
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::ChartCell;

    fn toy() -> ExtChart {
        ExtChart {
            module: "toy".into(),
            valid_t: 6,
            s_max: 3,
            cells: vec![
                ChartCell {
                    n: 0,
                    s: 0,
                    w: 0,
                    free: 1,
                    torsion: vec![],
                    names: vec!["1".into()],
                    gens: vec![],
                },
                ChartCell {
                    n: 0,
                    s: 1,
                    w: 0,
                    free: 1,
                    torsion: vec![],
                    names: vec!["h0".into()],
                    gens: vec![],
                },
                ChartCell {
                    n: 1,
                    s: 1,
                    w: 1,
                    free: 0,
                    torsion: vec![1],
                    names: vec!["h1".into()],
                    gens: vec![],
                },
            ],
            edges: vec![
                ChartEdge {
                    op: "h0".into(),
                    from: [0, 0, 0, 0],
                    to: [0, 1, 0, 0],
                    tau: 0,
                },
                ChartEdge {
                    op: "h1".into(),
                    from: [0, 0, 0, 0],
                    to: [1, 1, 1, 0],
                    tau: 0,
                },
                ChartEdge {
                    op: "alpha".into(),
                    from: [0, 0, 0, 0],
                    to: [1, 1, 1, 0],
                    tau: 0,
                },
            ],
        }
    }

    #[test]
    fn empty_chart_is_axes_only() {
        let txt = render(&ExtChart::default(), "ascii").unwrap();
        assert!(!txt.contains('*') && !txt.contains('o'));
        assert!(txt.contains("s/n"));
        let svg = render(&ExtChart::default(), "svg").unwrap();
        assert!(!svg.contains("<circle"));
        assert!(svg.contains("<line"));
    }

    #[test]
    fn ascii_glyphs_and_edges() {
        let txt = render(&toy(), "ascii").unwrap();
        let lines: Vec<&str> = txt.lines().collect();
        assert!(lines.iter().any(|l| l.trim_start().starts_with("0 *")));
        assert!(lines.iter().any(|l| l.contains('|')));
        assert!(lines.iter().any(|l| l.contains('/')));
        let body: String = lines[1..].concat();
        assert_eq!(body.matches('*').count(), 2);
        assert_eq!(body.matches('o').count(), 1);
    }

    #[test]
    fn alpha_without_tau_is_not_drawn() {
        let kinds: Vec<EdgeKind> = classify_edges(&toy().edges).into_iter().map(|p| p.0).collect();
        assert_eq!(kinds, vec![EdgeKind::H0, EdgeKind::H1]);
    }

    #[test]
    fn svg_is_deterministic_and_self_contained() {
        let a = render(&toy(), "svg").unwrap();
        assert_eq!(a, render(&toy(), "svg").unwrap());
        assert!(!a.contains("href"));
        assert_eq!(a.matches("<circle").count(), 3);
        assert!(a.contains("h1(1)"));
    }

    #[test]
    fn json_round_trip() {
        let c = toy();
        let back = ExtChart::from_json(&render(&c, "json").unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_format() {
        assert_eq!(render(&toy(), "pdf"), Err(ChartError::UnknownFormat("pdf".into())));
    }
}
