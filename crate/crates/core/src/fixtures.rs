//! Reference data and the checks behind `verify`.
//!
//! A fixture is a small text file:
//!
//! ```text
//! fixture dq14
//! module DQ(14)
//! smax 12
//! tmax 40
//! generator k (1,0,1)
//! generator r{4i-1} (4i-1,0,2i) for i=1..3
//! relation h0 k = 0
//! relation alpha r{4i-1} = h0^3 r{4i+3} for i=1..2
//! figure window n 0..24 s 0..11
//! figure solid (1,0) (2,1)
//! ```
//!
//! `{…}` holds an expression `A i + B`; a `for i=a..` line with no upper
//! bound repeats while the instance stays inside the computed window.

use crate::chart::{classify_edges, drawing_from_chart, EdgeKind, Glyph};
use crate::hfpss::{e_infinity, einfty_report, CoeffRing, Page, Window};
use crate::modules::builtin;
use crate::products::{
    check_sufficiency, parse_relation, presentation, product_edges, Evaluator, ExtElem, ModuleExt, Ring,
};
use crate::resolution::{chart_from_ext, ExtChart, Tri};
use std::collections::BTreeMap;
use std::fmt;

pub const BUILTIN: &[(&str, &str)] = &[
    ("DQinf", include_str!("../fixtures/DQinf.fix")),
    ("KO", include_str!("../fixtures/KO.fix")),
    ("R", include_str!("../fixtures/R.fix")),
    ("dq14", include_str!("../fixtures/dq14.fix")),
    ("dq16", include_str!("../fixtures/dq16.fix")),
    ("dq17", include_str!("../fixtures/dq17.fix")),
    ("dq2", include_str!("../fixtures/dq2.fix")),
    ("ext_M2", include_str!("../fixtures/ext_M2.fix")),
    ("kgl", include_str!("../fixtures/kgl.fix")),
    ("split15", include_str!("../fixtures/split15.fix")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|p| p.0).collect()
}

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|p| p.0 == name).map(|p| p.1)
}

#[derive(Clone, Debug, Default)]
struct Range {
    lo: i32,
    hi: Option<i32>,
}

#[derive(Clone, Debug)]
struct Templated {
    text: String,
    range: Option<Range>,
}

#[derive(Clone, Debug, Default)]
pub struct FigureSpec {
    pub n: (i32, i32),
    pub s: (i32, i32),
    pub shift: i32,
    pub solid: Vec<(i32, i32)>,
    pub open: Vec<(i32, i32)>,
    pub boxes: Vec<(i32, i32)>,
    /// Dotted segments: from, and optionally the exact endpoint.
    pub dotted: Vec<((i32, i32), Option<(i32, i32)>)>,
}

#[derive(Clone, Debug, Default)]
pub struct Fixture {
    pub name: String,
    pub kind: String,
    pub module: String,
    pub s_max: usize,
    pub t_max: i32,
    generators: Vec<(Templated, Templated)>,
    relations: Vec<Templated>,
    pub summands: Vec<String>,
    /// Figures keyed by page (`chart`, `e2`, `einf`).
    pub figures: BTreeMap<String, FigureSpec>,
    pub ring: String,
    pub spectrum: String,
    pub window: Window,
    pub pi: Vec<(String, (i32, i32))>,
    pub verdicts: Vec<(String, bool)>,
    pub presentation_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureError(pub String);

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FixtureError {}

fn err<T>(line: usize, msg: impl fmt::Display) -> Result<T, FixtureError> {
    Err(FixtureError(format!("fixture line {line}: {msg}")))
}

fn parse_points(words: &[&str], line: usize) -> Result<Vec<(i32, i32)>, FixtureError> {
    words
        .iter()
        .map(|w| {
            let t = w.trim_matches(|c| c == '(' || c == ')');
            let (a, b) = t
                .split_once(',')
                .ok_or_else(|| FixtureError(format!("fixture line {line}: bad point {w}")))?;
            match (a.parse(), b.parse()) {
                (Ok(x), Ok(y)) => Ok((x, y)),
                _ => err(line, format!("bad point {w}")),
            }
        })
        .collect()
}

fn parse_range(s: &str, line: usize) -> Result<(i32, i32), FixtureError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| FixtureError(format!("fixture line {line}: bad range {s}")))?;
    match (a.parse(), b.parse()) {
        (Ok(x), Ok(y)) => Ok((x, y)),
        _ => err(line, format!("bad range {s}")),
    }
}

fn split_for(rest: &str, line: usize) -> Result<Templated, FixtureError> {
    match rest.rsplit_once(" for i=") {
        None => Ok(Templated {
            text: rest.trim().to_string(),
            range: None,
        }),
        Some((t, r)) => {
            let (lo, hi) = r
                .split_once("..")
                .ok_or_else(|| FixtureError(format!("fixture line {line}: bad range {r}")))?;
            let lo = lo
                .trim()
                .parse()
                .map_err(|_| FixtureError(format!("fixture line {line}: bad range {r}")))?;
            let hi = match hi.trim() {
                "" => None,
                h => Some(
                    h.parse()
                        .map_err(|_| FixtureError(format!("fixture line {line}: bad range {r}")))?,
                ),
            };
            Ok(Templated {
                text: t.trim().to_string(),
                range: Some(Range { lo, hi }),
            })
        }
    }
}

/// Substitute `{A i + B}` (also `{4i-1}`, `{i}`, `{2i}`) and bare `Ai+B`
/// inside a tridegree.
fn eval_linear(expr: &str, i: i32) -> Option<i32> {
    let e: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = e.parse::<i32>() {
        return Some(v);
    }
    let pos = e.find('i')?;
    let a = match &e[..pos] {
        "" => 1,
        "-" => -1,
        x => x.parse().ok()?,
    };
    let b = match &e[pos + 1..] {
        "" => 0,
        x => x.parse().ok()?,
    };
    Some(a * i + b)
}

fn instantiate(text: &str, i: i32) -> Option<String> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(p) = rest.find('{') {
        out.push_str(&rest[..p]);
        let q = rest[p..].find('}')? + p;
        out.push_str(&eval_linear(&rest[p + 1..q], i)?.to_string());
        rest = &rest[q + 1..];
    }
    out.push_str(rest);
    Some(out)
}

fn parse_tri(s: &str, i: i32) -> Option<Tri> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = t.split(',').collect();
    if parts.len() != 3 {
        return None;
    }
    let n = eval_linear(parts[0], i)?;
    let s = eval_linear(parts[1], i)?;
    let w = eval_linear(parts[2], i)?;
    Some((n, usize::try_from(s).ok()?, w))
}

pub fn parse_fixture(text: &str) -> Result<Fixture, FixtureError> {
    let mut f = Fixture {
        kind: "ext".into(),
        s_max: 12,
        t_max: 36,
        presentation_complete: true,
        ..Fixture::default()
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        let words: Vec<&str> = rest.split_whitespace().collect();
        match key {
            "fixture" => f.name = rest.to_string(),
            "kind" => f.kind = rest.to_string(),
            "module" => f.module = rest.to_string(),
            "summand" => f.summands.push(rest.to_string()),
            "smax" => {
                f.s_max = rest
                    .parse()
                    .map_err(|_| FixtureError(format!("fixture line {line}: bad smax")))?
            }
            "tmax" => {
                f.t_max = rest
                    .parse()
                    .map_err(|_| FixtureError(format!("fixture line {line}: bad tmax")))?
            }
            "complete" => f.presentation_complete = rest == "yes",
            "generator" => {
                let (name, tri) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| FixtureError(format!("fixture line {line}: generator needs a tridegree")))?;
                let tri = split_for(tri, line)?;
                let name = Templated {
                    text: name.to_string(),
                    range: tri.range.clone(),
                };
                if parse_tri(&tri.text, tri.range.as_ref().map_or(0, |r| r.lo)).is_none() {
                    return err(line, format!("bad tridegree {}", tri.text));
                }
                f.generators.push((name, tri));
            }
            "relation" => {
                let t = split_for(rest, line)?;
                let sample = instantiate(&t.text, t.range.as_ref().map_or(0, |r| r.lo))
                    .ok_or_else(|| FixtureError(format!("fixture line {line}: bad template")))?;
                parse_relation(&sample).map_err(|e| FixtureError(format!("fixture line {line}: {e}")))?;
                f.relations.push(t);
            }
            "ring" => f.ring = rest.to_string(),
            "spectrum" => f.spectrum = rest.to_string(),
            "window" => {
                let v: Vec<i32> = words.iter().filter_map(|w| w.parse().ok()).collect();
                if v.len() != 3 {
                    return err(line, "window needs n_lo n_hi p_max");
                }
                f.window = Window {
                    n_lo: v[0],
                    n_hi: v[1],
                    p_max: v[2],
                    ..Window::default()
                };
            }
            "pi" => {
                let pts = parse_points(&words[1..], line)?;
                f.pi.push((
                    words.first().copied().unwrap_or_default().to_string(),
                    pts.first().copied().unwrap_or_default(),
                ));
            }
            "verdict" => {
                let (r, v) = rest.rsplit_once(':').ok_or_else(|| {
                    FixtureError(format!("fixture line {line}: verdict needs `: holds` or `: fails`"))
                })?;
                let holds = match v.trim() {
                    "holds" => true,
                    "fails" => false,
                    x => return err(line, format!("unknown verdict {x}")),
                };
                f.verdicts.push((r.trim().to_string(), holds));
            }
            "figure" => {
                // figure [page] what ...
                let (page, words) = match words.first() {
                    Some(&p) if p == "e2" || p == "einf" => (p.to_string(), &words[1..]),
                    _ => ("chart".to_string(), &words[..]),
                };
                let fig = f.figures.entry(page).or_default();
                match words.first().copied() {
                    Some("window") => {
                        if words.len() != 5 {
                            return err(line, "figure window n A..B s C..D");
                        }
                        fig.n = parse_range(words[2], line)?;
                        fig.s = parse_range(words[4], line)?;
                    }
                    Some("shift") => {
                        fig.shift = words
                            .get(1)
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| FixtureError(format!("fixture line {line}: bad shift")))?;
                    }
                    Some("solid") => fig.solid.extend(parse_points(&words[1..], line)?),
                    Some("open") => fig.open.extend(parse_points(&words[1..], line)?),
                    Some("box") => fig.boxes.extend(parse_points(&words[1..], line)?),
                    Some("dotted") => {
                        for w in &words[1..] {
                            match w.split_once("->") {
                                Some((a, b)) => {
                                    let a = parse_points(&[a], line)?[0];
                                    let b = parse_points(&[b], line)?[0];
                                    fig.dotted.push((a, Some(b)));
                                }
                                None => fig.dotted.push((parse_points(&[w], line)?[0], None)),
                            }
                        }
                    }
                    _ => return err(line, "unknown figure directive"),
                }
            }
            _ => return err(line, format!("unknown directive `{key}`")),
        }
    }
    if f.name.is_empty() {
        return err(0, "missing `fixture NAME`");
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Clone, Debug)]
pub struct Check {
    pub ok: bool,
    pub what: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub fixture: String,
    pub checks: Vec<Check>,
    /// Computed presentation or page report, for display.
    pub detail: String,
}

impl Report {
    pub fn ok(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.ok)
    }

    fn push(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push(Check { ok, what: what.into() });
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {}: {}\n",
                self.fixture,
                if c.ok { "ok  " } else { "FAIL" },
                c.what
            ));
        }
        out
    }
}

/// Generators (name, tridegree) after expanding families inside the window.
fn expand_generators(f: &Fixture, in_window: &dyn Fn(Tri) -> bool) -> Vec<(String, Tri)> {
    let mut out = Vec::new();
    for (name, tri) in &f.generators {
        match &tri.range {
            None => {
                let t = parse_tri(&tri.text, 0).expect("checked when parsing");
                out.push((name.text.clone(), t));
            }
            Some(r) => {
                let mut i = r.lo;
                loop {
                    if r.hi.is_some_and(|h| i > h) {
                        break;
                    }
                    let t = parse_tri(&tri.text, i).expect("checked when parsing");
                    if r.hi.is_none() && !in_window(t) {
                        break;
                    }
                    out.push((instantiate(&name.text, i).expect("template"), t));
                    i += 1;
                    if i > r.lo + 1000 {
                        break;
                    }
                }
            }
        }
    }
    out
}

fn expand_relations(f: &Fixture, fits: &mut dyn FnMut(&str) -> bool) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    for t in &f.relations {
        match &t.range {
            None => out.push((t.text.clone(), true)),
            Some(r) => {
                let mut i = r.lo;
                loop {
                    if r.hi.is_some_and(|h| i > h) || i > r.lo + 1000 {
                        break;
                    }
                    let inst = instantiate(&t.text, i).expect("template");
                    if r.hi.is_none() && !fits(&inst) {
                        break;
                    }
                    out.push((inst, r.hi.is_some()));
                    i += 1;
                }
            }
        }
    }
    out
}

fn glyph_multiset(points: &[(i32, i32)], shift: i32) -> BTreeMap<(i32, i32), usize> {
    let mut m = BTreeMap::new();
    for &(n, s) in points {
        *m.entry((n + shift, s)).or_default() += 1;
    }
    m
}

fn compare_glyphs(report: &mut Report, label: &str, fig: &FigureSpec, computed: &BTreeMap<(i32, i32, Glyph), usize>) {
    let inside = |(n, s): (i32, i32)| n >= fig.n.0 && n <= fig.n.1 && s >= fig.s.0 && s <= fig.s.1;
    for (glyph, pts) in [
        (Glyph::Solid, &fig.solid),
        (Glyph::Open, &fig.open),
        (Glyph::Box, &fig.boxes),
    ] {
        let want: BTreeMap<(i32, i32), usize> = glyph_multiset(pts, fig.shift)
            .into_iter()
            .filter(|(p, _)| inside(*p))
            .collect();
        let have: BTreeMap<(i32, i32), usize> = computed
            .iter()
            .filter(|((n, s, g), _)| *g == glyph && inside((*n, *s)))
            .map(|((n, s, _), c)| ((*n, *s), *c))
            .collect();
        let mut diffs = Vec::new();
        for p in want
            .keys()
            .chain(have.keys())
            .collect::<std::collections::BTreeSet<_>>()
        {
            let (w, h) = (want.get(p).copied().unwrap_or(0), have.get(p).copied().unwrap_or(0));
            if w != h {
                diffs.push(format!("({},{}) figure {w} computed {h}", p.0, p.1));
            }
        }
        let name = format!("{glyph:?}").to_lowercase();
        let total: usize = want.values().sum();
        if diffs.is_empty() {
            report.push(
                true,
                format!(
                    "{label}: {total} {name} glyphs match in n {}..{}, s {}..{}",
                    fig.n.0, fig.n.1, fig.s.0, fig.s.1
                ),
            );
        } else {
            report.push(false, format!("{label}: {name} glyphs differ: {}", diffs.join("; ")));
        }
    }
}

/// Build the Ext chart with product edges, naming generator classes.
pub fn named_chart(ring: &Ring, me: &mut ModuleExt, names: &BTreeMap<Tri, String>) -> Result<ExtChart, String> {
    let edges = product_edges(ring, me).map_err(|e| e.to_string())?;
    let mut chart = chart_from_ext(&me.res, &me.ext, &|c| {
        let t = c.tridegree();
        names
            .get(&t)
            .cloned()
            .unwrap_or_else(|| format!("g{}_{}_{}", t.0, t.1, t.2))
    });
    chart.edges = edges;
    Ok(chart)
}

/// Ring sized so products land inside the module's window.
pub fn ring_for(s_max: usize, t_max: i32, bottom: i32) -> Result<Ring, String> {
    Ring::new(s_max, t_max - bottom.min(0) + 1).map_err(|e| e.to_string())
}

fn verify_ext(f: &Fixture, report: &mut Report) -> Result<(), String> {
    let module = builtin(&f.module, f.t_max).map_err(|e| e.to_string())?;
    let bottom = module.min_degree().unwrap_or(0);
    let ring = ring_for(f.s_max, f.t_max, bottom)?;
    let mut me = ModuleExt::new(&module, f.s_max, f.t_max, &ring).map_err(|e| e.to_string())?;
    let (valid, smax) = (me.res.valid_t, me.res.s_max);
    let in_window = |t: Tri| t.1 <= smax && t.0 + t.1 as i32 <= valid;
    let gens = expand_generators(f, &in_window);
    let names: BTreeMap<Tri, String> = gens.iter().map(|(n, t)| (*t, n.clone())).collect();
    let name_fn = |t: Tri| names.get(&t).cloned();
    let pres = presentation(&ring, &mut me, &name_fn).map_err(|e| e.to_string())?;
    report.detail = pres.to_text();

    // Generators by tridegree.
    let mut want: Vec<Tri> = gens.iter().map(|g| g.1).filter(|t| in_window(*t)).collect();
    let mut have: Vec<Tri> = pres.generators.iter().map(|g| (g.n, g.s, g.w)).collect();
    want.sort_unstable();
    have.sort_unstable();
    if want == have {
        let list: Vec<String> = pres
            .generators
            .iter()
            .map(|g| format!("{}({},{},{})", g.name, g.n, g.s, g.w))
            .collect();
        report.push(true, format!("generators {}", list.join(" ")));
    } else {
        let missing: Vec<String> = want
            .iter()
            .filter(|t| !have.contains(t))
            .map(|t| format!("{t:?}"))
            .collect();
        let extra: Vec<String> = have
            .iter()
            .filter(|t| !want.contains(t))
            .map(|t| format!("{t:?}"))
            .collect();
        report.push(
            false,
            format!(
                "generators differ: missing {} extra {}",
                missing.join(" "),
                extra.join(" ")
            ),
        );
    }

    // Relations, evaluated on the computed cocycles.
    let is_ring = f.module == "M2";
    let mut gen_elems: BTreeMap<String, ExtElem> = BTreeMap::new();
    if is_ring {
        gen_elems.insert(
            "1".into(),
            ExtElem {
                s: 0,
                a: 0,
                b: 0,
                gens: vec![0],
            },
        );
    } else {
        for c in me.ext.iter() {
            if let Some(n) = names.get(&c.tridegree()) {
                if pres.generators.iter().any(|g| &g.name == n) {
                    gen_elems.insert(n.clone(), ExtElem::from_class(c));
                }
            }
        }
    }
    let gen_list: Vec<(String, ExtElem)> = gen_elems.clone().into_iter().collect();
    let mut ev = Evaluator::new(&ring, &mut me, gen_elems);
    let mut parsed = Vec::new();
    {
        let mut fits = |r: &str| {
            let Ok(rel) = parse_relation(r) else { return false };
            rel.lhs
                .iter()
                .chain(&rel.rhs)
                .all(|t| ev.term_degree(t).is_ok_and(|(s, a, _)| s <= smax && a <= valid))
        };
        let rels = expand_relations(f, &mut fits);
        for (r, _) in &rels {
            parsed.push(parse_relation(r).map_err(|e| e.to_string())?);
        }
    }
    for rel in &parsed {
        match ev.holds(rel) {
            Ok(true) => report.push(true, format!("{rel}")),
            Ok(false) => report.push(false, format!("{rel} does not hold")),
            Err(e) => report.push(false, format!("{rel}: {e}")),
        }
    }

    // The fixture relations (with the ring relations) present Ext in the window.
    if f.presentation_complete {
        let positive: Vec<_> = parsed.iter().filter(|r| !r.negated).cloned().collect();
        let suff = check_sufficiency(&ring, ev.me, &gen_list, &positive).map_err(|e| e.to_string())?;
        if suff.ok() {
            report.push(true, "relations determine every cell in the window");
        } else {
            let mut parts: Vec<String> = suff
                .not_generated
                .iter()
                .map(|(t, r, d)| format!("{t:?} generated rank {r} < {d}"))
                .collect();
            parts.extend(
                suff.too_big
                    .iter()
                    .map(|(t, r, d)| format!("{t:?} presented rank {r} > {d}")),
            );
            parts.truncate(6);
            report.push(
                false,
                format!("relations do not determine the chart: {}", parts.join("; ")),
            );
        }
    }

    if let Some(fig) = f.figures.get("chart") {
        let chart = named_chart(&ring, ev.me, &names)?;
        let drawing = drawing_from_chart(&chart);
        compare_glyphs(report, "figure", fig, &drawing.glyph_counts());
        let edges = classify_edges(&chart.edges);
        for (from, to) in &fig.dotted {
            let found = edges.iter().any(|(k, e)| {
                let (fnn, fs) = (e.from[0], e.from[1]);
                let (tn, ts) = (e.to[0], e.to[1]);
                let from_ok = (fnn + fig.shift, fs) == *from;
                match to {
                    Some(t) => k.dotted() && from_ok && (tn + fig.shift, ts) == *t,
                    None => *k == EdgeKind::H0Tau && from_ok && tn == fnn && ts == fs + 1,
                }
            });
            let what = match to {
                Some(t) => format!("dotted segment ({},{}) -> ({},{})", from.0, from.1, t.0, t.1),
                None => format!("dotted h0 segment from ({},{})", from.0, from.1),
            };
            report.push(found, if found { what } else { format!("{what} missing") });
        }
    }
    Ok(())
}

fn page_counts(p: &Page) -> BTreeMap<(i32, i32, Glyph), usize> {
    p.drawing().glyph_counts()
}

fn verify_hfpss(f: &Fixture, report: &mut Report) -> Result<(), String> {
    let ring: CoeffRing = f.ring.parse().map_err(|e: crate::hfpss::HfpssError| e.to_string())?;
    let (e2, _e4, einf) = e_infinity(ring, f.window).map_err(|e| e.to_string())?;
    if let Some(fig) = f.figures.get("e2") {
        compare_glyphs(report, "E2 figure", fig, &page_counts(&e2));
    }
    if let Some(fig) = f.figures.get("einf") {
        compare_glyphs(report, "E-infinity figure", fig, &page_counts(&einf));
    }
    let rep = einfty_report(&f.spectrum, f.window).map_err(|e| e.to_string())?;
    report.detail = rep.to_text();
    for (name, deg) in &f.pi {
        match rep.generators.iter().find(|g| &g.0 == name) {
            Some(g) if g.1 == *deg => report.push(true, format!("{name} in degree {deg:?}")),
            Some(g) => report.push(false, format!("{name} in degree {:?}, expected {deg:?}", g.1)),
            None => report.push(false, format!("{name} not reported")),
        }
    }
    for (rel, holds) in &f.verdicts {
        match rep.relations.iter().find(|r| &r.relation == rel) {
            Some(r) if r.holds == *holds => {
                let note = if r.note.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", r.note)
                };
                report.push(true, format!("{rel}: {}{note}", if *holds { "holds" } else { "fails" }));
            }
            Some(r) => report.push(false, format!("{rel}: computed {}, fixture says {}", r.holds, holds)),
            None => report.push(false, format!("{rel}: not in the report")),
        }
    }
    Ok(())
}

fn verify_split(f: &Fixture, report: &mut Report) -> Result<(), String> {
    let chart_of = |name: &str| -> Result<ExtChart, String> {
        let m = builtin(name, f.t_max).map_err(|e| e.to_string())?;
        let r = crate::resolution::resolve(&m, f.s_max, f.t_max).map_err(|e| e.to_string())?;
        Ok(crate::resolution::ext_chart(&r))
    };
    let total = chart_of(&f.module)?;
    let mut sum: BTreeMap<Tri, crate::tau_linalg::GradedModuleShape> = BTreeMap::new();
    for s in &f.summands {
        for (t, shape) in chart_of(s)?.shapes() {
            let e = sum.entry(t).or_default();
            e.add(&shape);
        }
    }
    let have = total.shapes();
    let mut diffs = Vec::new();
    for t in have.keys().chain(sum.keys()).collect::<std::collections::BTreeSet<_>>() {
        let (a, b) = (
            have.get(t).cloned().unwrap_or_default(),
            sum.get(t).cloned().unwrap_or_default(),
        );
        if a != b {
            diffs.push(format!("{t:?}: {a:?} vs {b:?}"));
        }
    }
    if diffs.is_empty() {
        report.push(
            true,
            format!(
                "Ext({}) = {} cellwise ({} cells)",
                f.module,
                f.summands.join(" + "),
                have.len()
            ),
        );
    } else {
        diffs.truncate(5);
        report.push(
            false,
            format!("Ext({}) differs from the sum: {}", f.module, diffs.join("; ")),
        );
    }
    Ok(())
}

pub fn verify(f: &Fixture) -> Report {
    let mut report = Report {
        fixture: f.name.clone(),
        ..Report::default()
    };
    let result = match f.kind.as_str() {
        "ext" => verify_ext(f, &mut report),
        "hfpss" => verify_hfpss(f, &mut report),
        "split" => verify_split(f, &mut report),
        k => Err(format!("unknown fixture kind {k}")),
    };
    if let Err(e) = result {
        report.push(false, format!("error: {e}"));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates() {
        assert_eq!(
            instantiate("alpha r{4i-1} = h0^3 r{4i+3}", 2).unwrap(),
            "alpha r7 = h0^3 r11"
        );
        assert_eq!(parse_tri("(4i-1,0,2i)", 3), Some((11, 0, 6)));
        assert_eq!(eval_linear("i", 5), Some(5));
        assert_eq!(eval_linear("-i+2", 5), Some(-3));
    }

    #[test]
    fn builtin_fixtures_parse() {
        for (name, text) in BUILTIN {
            let f = parse_fixture(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&f.name, name);
        }
    }

    #[test]
    fn bad_fixture_lines() {
        assert!(parse_fixture("fixture x\nrelation h0 k").is_err());
        assert!(parse_fixture("fixture x\nbogus 1").is_err());
        assert!(parse_fixture("fixture x\ngenerator k (1,0)").is_err());
    }
}
