//! The action of 𝓔 = Ext(M₂, M₂) on Ext(M, M₂), presentations, and long
//! exact sequences.
//!
//! Products are Yoneda composites: a class `u` is lifted to a chain map
//! `Φ` from the resolution of `M` to the resolution of M₂, and
//! `p · u = p ∘ Φ_{s_p}`.

use crate::f2::{BitVec, ColumnReducer, Echelon, Solver};
use crate::modules::{SesSpec, SteenrodModule};
use crate::resolution::{resolve, ChartEdge, ExtClass, ExtData, FreeBasis, Resolution, ResolveError, Tri};
use crate::tau_linalg::BiDegree;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductError {
    #[error("outside the computed window: {0}")]
    WindowExceeded(String),
    #[error("cannot lift: {0}")]
    NotLiftable(String),
    #[error("relation syntax: {0}")]
    Parse(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("relation is not homogeneous: {0}")]
    Inhomogeneous(String),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

/// A cocycle `Σ_{g ∈ gens} τ^{w_g − b} g*` in `Hom(F_s, M₂)` of internal
/// degree `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem {
    pub s: usize,
    pub a: i32,
    pub b: i32,
    pub gens: Vec<usize>,
}

impl ExtElem {
    pub fn from_class(c: &ExtClass) -> Self {
        ExtElem {
            s: c.s,
            a: c.a,
            b: c.w,
            gens: c.support.clone(),
        }
    }

    pub fn tridegree(&self) -> Tri {
        (self.a - self.s as i32, self.s, self.b)
    }

    /// `τ^e · self`: same cocycle, lower weight.
    pub fn tau(&self, e: u32) -> ExtElem {
        ExtElem {
            b: self.b - e as i32,
            ..self.clone()
        }
    }
}

/// Polynomial generators of 𝓔 in the order `h0, h1, alpha, beta`.
pub const THETA_NAMES: [&str; 4] = ["h0", "h1", "alpha", "beta"];
/// `(s, a, b)` of each generator.
pub const THETA_DEGREES: [(usize, i32, i32); 4] = [(1, 1, 0), (1, 2, 1), (3, 7, 2), (4, 12, 4)];

/// Exponents of `h0, h1, alpha, beta`.
pub type Mono = [u32; 4];

pub fn mono_degree(m: &Mono) -> (usize, i32, i32) {
    let mut d = (0usize, 0i32, 0i32);
    for (i, &e) in m.iter().enumerate() {
        let (s, a, b) = THETA_DEGREES[i];
        d.0 += s * e as usize;
        d.1 += a * e as i32;
        d.2 += b * e as i32;
    }
    d
}

pub fn mono_name(m: &Mono) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(THETA_NAMES[i].to_string()),
            e => parts.push(format!("{}^{e}", THETA_NAMES[i])),
        }
    }
    parts.join(" ")
}

fn mono_mul(x: &Mono, y: &Mono) -> Mono {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]]
}

/// All monomials with homological degree `≤ s_max`, internal degree `≤ a_max`.
pub fn monomials(s_max: usize, a_max: i32) -> Vec<Mono> {
    let mut out = Vec::new();
    for l in 0..=(s_max / 4) as u32 {
        for k in 0..=(s_max / 3) as u32 {
            for j in 0..=s_max as u32 {
                for i in 0..=s_max as u32 {
                    let m = [i, j, k, l];
                    let (s, a, _) = mono_degree(&m);
                    if s <= s_max && a <= a_max {
                        out.push(m);
                    }
                }
            }
        }
    }
    out.sort_by_key(|m| (mono_degree(m), std::cmp::Reverse(*m)));
    out
}

// ---------------------------------------------------------------------------
// Lifting

/// Solves `d x = y` in one stage and degree of a resolution.
struct DSolver {
    reducer: ColumnReducer,
    src: FreeBasis,
    rows: HashMap<(usize, usize), usize>,
}

#[derive(Default)]
struct SolveCache {
    map: HashMap<(usize, i32), DSolver>,
}

impl SolveCache {
    fn get(&mut self, res: &Resolution, i: usize, c: i32) -> &DSolver {
        self.map.entry((i, c)).or_insert_with(|| {
            let src = res.free_basis(i, c);
            let (cols, _) = res.d_columns(i, c, &src);
            let rows: Vec<(usize, usize)> = if i == 0 {
                res.module_basis(c).into_iter().map(|m| (0, m)).collect()
            } else {
                res.free_basis(i - 1, c)
            };
            let mut reducer = ColumnReducer::new(rows.len());
            for (col, &e) in cols.into_iter().zip(&src) {
                reducer.push(col, res.weight(i, e));
            }
            DSolver {
                reducer,
                src,
                rows: rows.into_iter().enumerate().map(|(p, e)| (e, p)).collect(),
            }
        })
    }
}

/// Components `Φ_i` of a chain map from a resolution of `M` (starting at
/// stage `s0`, shifted by `shift`) to a resolution of `N`.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub s0: usize,
    pub shift: BiDegree,
    /// `comps[i][h]`: image of generator `h` of `F_{s0+i}` in `G_i`, or
    /// `None` where the target window ends.
    pub comps: Vec<Vec<Option<Vec<(usize, usize)>>>>,
}

fn xor_pairs(acc: &mut BTreeMap<(usize, usize), bool>, k: usize, pairs: &[(usize, usize)], res: &Resolution) {
    let t = res.table();
    for &(k2, g) in pairs {
        if let Some((_, k3)) = t.mul_basis(k, k2) {
            *acc.entry((k3, g)).or_default() ^= true;
        }
    }
}

fn extend_lift(
    src: &Resolution,
    tgt: &Resolution,
    cache: &mut SolveCache,
    map: &mut ChainMap,
    depth: usize,
) -> Result<(), ProductError> {
    while map.comps.len() <= depth {
        let i = map.comps.len();
        let stage = map.s0 + i;
        if stage >= src.stages.len() || i >= tgt.stages.len() {
            return Err(ProductError::WindowExceeded(format!("lift to stage {stage}")));
        }
        let mut comp = Vec::with_capacity(src.stages[stage].gens.len());
        for gen in &src.stages[stage].gens {
            let c = gen.degree.a - map.shift.a;
            if c > tgt.t_max {
                comp.push(None);
                continue;
            }
            let mut acc = BTreeMap::new();
            let mut defined = true;
            for &(k, g) in &gen.d {
                match &map.comps[i - 1][g] {
                    Some(img) => xor_pairs(&mut acc, k, img, tgt),
                    None => defined = false,
                }
            }
            if !defined {
                comp.push(None);
                continue;
            }
            let y: Vec<(usize, usize)> = acc.into_iter().filter(|p| p.1).map(|p| p.0).collect();
            if y.is_empty() {
                comp.push(Some(Vec::new()));
                continue;
            }
            let ds = cache.get(tgt, i, c);
            let yv = BitVec::from_indices(ds.rows.len(), y.iter().map(|e| ds.rows[e]));
            let x = ds
                .reducer
                .solve(&yv, gen.degree.b - map.shift.b)
                .ok_or_else(|| ProductError::NotLiftable(format!("stage {stage} generator at {}", gen.degree)))?;
            comp.push(Some(x.ones().map(|p| ds.src[p]).collect()));
        }
        map.comps.push(comp);
    }
    Ok(())
}

/// Lift a class of `Ext(M)` (given by its cocycle) to a chain map into the
/// resolution `tgt` of M₂.
fn lift_class(
    src: &Resolution,
    tgt: &Resolution,
    cache: &mut SolveCache,
    u: &ExtElem,
    depth: usize,
) -> Result<ChainMap, ProductError> {
    if u.s >= src.stages.len() {
        return Err(ProductError::WindowExceeded(format!("stage {}", u.s)));
    }
    let gens: BTreeSet<usize> = u.gens.iter().copied().collect();
    let comp0 = (0..src.stages[u.s].gens.len())
        .map(|h| Some(if gens.contains(&h) { vec![(0, 0)] } else { Vec::new() }))
        .collect();
    let mut map = ChainMap {
        s0: u.s,
        shift: BiDegree::new(u.a, u.b),
        comps: vec![comp0],
    };
    extend_lift(src, tgt, cache, &mut map, depth)?;
    Ok(map)
}

/// Lift a module map `f: M → N` (basis images) to a chain map between the
/// resolutions.
fn lift_module_map(
    src: &Resolution,
    tgt: &Resolution,
    cache: &mut SolveCache,
    f: &[Vec<usize>],
    depth: usize,
) -> Result<ChainMap, ProductError> {
    let mut comp0 = Vec::new();
    for gen in &src.stages[0].gens {
        let c = gen.degree.a;
        if c > tgt.t_max {
            comp0.push(None);
            continue;
        }
        let mut acc: BTreeSet<usize> = BTreeSet::new();
        for m in src.apply_d0((0, src.stages[0].gens.iter().position(|g| std::ptr::eq(g, gen)).unwrap())) {
            for &q in &f[m] {
                if !acc.remove(&q) {
                    acc.insert(q);
                }
            }
        }
        let ds = cache.get(tgt, 0, c);
        let yv = BitVec::from_indices(ds.rows.len(), acc.iter().map(|&q| ds.rows[&(0, q)]));
        let x = ds
            .reducer
            .solve(&yv, gen.degree.b)
            .ok_or_else(|| ProductError::NotLiftable(format!("augmentation at {}", gen.degree)))?;
        comp0.push(Some(x.ones().map(|p| ds.src[p]).collect()));
    }
    let mut map = ChainMap {
        s0: 0,
        shift: BiDegree::ZERO,
        comps: vec![comp0],
    };
    extend_lift(src, tgt, cache, &mut map, depth)?;
    Ok(map)
}

/// `p ∘ Φ_{p.s}`: pull a cocycle on the target back along a chain map.
fn compose(src: &Resolution, p: &ExtElem, map: &ChainMap) -> Result<ExtElem, ProductError> {
    let stage = map.s0 + p.s;
    let a = map.shift.a + p.a;
    if map.comps.len() <= p.s || stage >= src.stages.len() {
        return Err(ProductError::WindowExceeded(format!("stage {stage}")));
    }
    let pg: BTreeSet<usize> = p.gens.iter().copied().collect();
    let mut out = Vec::new();
    for &h in src.stages[stage].gens_in_degree(a) {
        let img = map.comps[p.s][h]
            .as_ref()
            .ok_or_else(|| ProductError::WindowExceeded(format!("degree {a}")))?;
        let odd = img.iter().filter(|(k, g)| *k == 0 && pg.contains(g)).count() % 2 == 1;
        if odd {
            out.push(h);
        }
    }
    Ok(ExtElem {
        s: stage,
        a,
        b: map.shift.b + p.b,
        gens: out,
    })
}

// ---------------------------------------------------------------------------
// Slices of Ext

/// Ext in one homological degree, topological degree and weight, as an
/// F₂-vector space with basis the τ-multiples of the chart classes.
struct Slice {
    /// Chart classes (indices into the `(s, a)` class list) alive here.
    basis: Vec<usize>,
    solver: Solver,
    ncob: usize,
    pos: HashMap<usize, usize>,
    dim_gens: usize,
}

fn build_slice(res: &Resolution, ext: &ExtData, s: usize, a: i32, b: i32) -> Slice {
    let gens = res.stages.get(s).map_or(&[][..], |st| st.gens_in_degree(a));
    let pos: HashMap<usize, usize> = gens.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let n = gens.len();
    let classes = ext.classes.get(&(s, a)).map_or(&[][..], Vec::as_slice);
    let basis: Vec<usize> = (0..classes.len())
        .filter(|&i| {
            let c = &classes[i];
            c.w >= b && c.torsion.is_none_or(|k| c.w - b < k as i32)
        })
        .collect();
    let mut cols: Vec<BitVec> = basis
        .iter()
        .map(|&i| BitVec::from_indices(n, classes[i].support.iter().map(|g| pos[g])))
        .collect();
    let mut ncob = 0;
    if s > 0 {
        for &g in res.stages[s - 1].gens_in_degree(a) {
            if res.stages[s - 1].gens[g].degree.b < b {
                continue;
            }
            let v = BitVec::from_indices(
                n,
                gens.iter()
                    .enumerate()
                    .filter(|(_, &h)| res.stages[s].gens[h].d.contains(&(0, g)))
                    .map(|(p, _)| p),
            );
            cols.push(v);
            ncob += 1;
        }
    }
    Slice {
        solver: Solver::new(n, &cols),
        basis,
        ncob,
        pos,
        dim_gens: n,
    }
}

/// 𝓔 computed from a resolution of M₂: the four generators, their lifts, and
/// cocycles for every monomial in the window.
pub struct Ring {
    pub module: ModuleExt,
    /// `None` when the generator lies outside the window.
    pub theta: [Option<ExtElem>; 4],
    pub monomials: BTreeMap<Mono, ExtElem>,
}

impl Ring {
    pub fn new(s_max: usize, t_max: i32) -> Result<Ring, ProductError> {
        let mut module = ModuleExt::from_resolution(resolve(&crate::modules::m2(), s_max, t_max)?);
        let find = |(s, a, b): (usize, i32, i32)| -> Result<Option<ExtElem>, ProductError> {
            if s > module.res.s_max || a > module.res.valid_t {
                return Ok(None);
            }
            let c = module
                .classes(s, a)
                .iter()
                .find(|c| c.w == b)
                .ok_or_else(|| ProductError::WindowExceeded(format!("no 𝓔 generator at ({s},{a},{b})")))?;
            Ok(Some(ExtElem::from_class(c)))
        };
        let theta = [
            find(THETA_DEGREES[0])?,
            find(THETA_DEGREES[1])?,
            find(THETA_DEGREES[2])?,
            find(THETA_DEGREES[3])?,
        ];
        let unit = ExtElem {
            s: 0,
            a: 0,
            b: 0,
            gens: vec![0],
        };
        let mut monos: BTreeMap<Mono, ExtElem> = BTreeMap::new();
        for m in monomials(s_max, t_max) {
            let v = match (0..4).find(|&i| m[i] > 0) {
                None => unit.clone(),
                Some(i) => {
                    let mut rest = m;
                    rest[i] -= 1;
                    let (Some(p), Some(th)) = (monos.get(&rest).cloned(), theta[i].as_ref()) else {
                        continue;
                    };
                    let map = match module.lift_depth(th, p.s) {
                        Ok(map) => map.clone(),
                        Err(_) => continue,
                    };
                    match compose(&module.res, &p, &map) {
                        Ok(v) => v,
                        Err(_) => continue,
                    }
                }
            };
            monos.insert(m, v);
        }
        Ok(Ring {
            module,
            theta,
            monomials: monos,
        })
    }

    pub fn monomial(&self, m: &Mono) -> Result<&ExtElem, ProductError> {
        self.monomials
            .get(m)
            .ok_or_else(|| ProductError::WindowExceeded(format!("monomial {}", mono_name(m))))
    }
}

/// Ext of a module with the machinery to multiply by 𝓔.
pub struct ModuleExt {
    pub res: Resolution,
    pub ext: ExtData,
    ring_res: Option<Resolution>,
    cache: SolveCache,
    lifts: HashMap<ExtElem, ChainMap>,
    slices: HashMap<(usize, i32, i32), Slice>,
}

impl ModuleExt {
    fn from_resolution(res: Resolution) -> ModuleExt {
        let ext = res.ext();
        ModuleExt {
            res,
            ext,
            ring_res: None,
            cache: SolveCache::default(),
            lifts: HashMap::new(),
            slices: HashMap::new(),
        }
    }

    /// Resolve `m` and prepare products against `ring`.
    pub fn new(m: &SteenrodModule, s_max: usize, t_max: i32, ring: &Ring) -> Result<ModuleExt, ProductError> {
        let mut me = ModuleExt::from_resolution(resolve(m, s_max, t_max)?);
        me.ring_res = Some(ring.module.res.clone());
        Ok(me)
    }

    fn target(&self) -> &Resolution {
        self.ring_res.as_ref().unwrap_or(&self.res)
    }

    pub fn classes(&self, s: usize, a: i32) -> &[ExtClass] {
        self.ext.classes.get(&(s, a)).map_or(&[], Vec::as_slice)
    }

    fn lift_depth(&mut self, u: &ExtElem, depth: usize) -> Result<&ChainMap, ProductError> {
        let tgt = self.ring_res.take();
        let result = (|| {
            let tgt_ref = tgt.as_ref().unwrap_or(&self.res);
            if let Some(map) = self.lifts.get_mut(u) {
                if map.comps.len() <= depth {
                    extend_lift(&self.res, tgt_ref, &mut self.cache, map, depth)?;
                }
            } else {
                let map = lift_class(&self.res, tgt_ref, &mut self.cache, u, depth)?;
                self.lifts.insert(u.clone(), map);
            }
            Ok::<(), ProductError>(())
        })();
        self.ring_res = tgt;
        result?;
        Ok(&self.lifts[u])
    }

    /// `p · u` for a cocycle `p` of 𝓔.
    pub fn mul(&mut self, p: &ExtElem, u: &ExtElem) -> Result<ExtElem, ProductError> {
        // Cocycles are lifted at their own weight; τ-multiples reuse the lift.
        let map = self.lift_depth(u, p.s)?.clone();
        let _ = self.target();
        compose(&self.res, p, &map)
    }

    /// `θ · u` for one of the four generators of 𝓔.
    pub fn act(&mut self, ring: &Ring, theta: usize, u: &ExtElem) -> Result<ExtElem, ProductError> {
        let th = ring.theta[theta]
            .as_ref()
            .ok_or_else(|| ProductError::WindowExceeded(format!("{} is outside the window", THETA_NAMES[theta])))?;
        self.mul(th, u)
    }

    fn slice(&mut self, s: usize, a: i32, b: i32) -> &Slice {
        let (res, ext) = (&self.res, &self.ext);
        self.slices
            .entry((s, a, b))
            .or_insert_with(|| build_slice(res, ext, s, a, b))
    }

    fn in_window(&self, x: &ExtElem) -> Result<(), ProductError> {
        if x.s > self.res.s_max || x.a > self.res.valid_t {
            return Err(ProductError::WindowExceeded(format!(
                "({},{},{}) beyond s ≤ {}, a ≤ {}",
                x.s, x.a, x.b, self.res.s_max, self.res.valid_t
            )));
        }
        Ok(())
    }

    /// Coordinates of `x` in its slice: indices into `classes(s, a)`, each
    /// meaning `τ^{w_i − b}` times that class.
    pub fn express(&mut self, x: &ExtElem) -> Result<Vec<usize>, ProductError> {
        self.in_window(x)?;
        let slice = self.slice(x.s, x.a, x.b);
        let v = BitVec::from_indices(
            slice.dim_gens,
            x.gens.iter().map(|g| *slice.pos.get(g).expect("cocycle in degree")),
        );
        let sol = slice
            .solver
            .solve(&v)
            .ok_or_else(|| ProductError::NotLiftable("element is not a cocycle".into()))?;
        let _ = slice.ncob;
        Ok(sol
            .ones()
            .filter(|&p| p < slice.basis.len())
            .map(|p| slice.basis[p])
            .collect())
    }

    pub fn is_zero(&mut self, x: &ExtElem) -> Result<bool, ProductError> {
        Ok(self.express(x)?.is_empty())
    }

    /// F₂-dimension of Ext in slice `(s, a, b)`.
    pub fn slice_dim(&mut self, s: usize, a: i32, b: i32) -> usize {
        self.slice(s, a, b).basis.len()
    }

    /// Chart classes alive in a slice, as elements.
    pub fn slice_basis(&mut self, s: usize, a: i32, b: i32) -> Vec<ExtElem> {
        let idx = self.slice(s, a, b).basis.clone();
        let cls = self.classes(s, a);
        idx.iter()
            .map(|&i| ExtElem::from_class(&cls[i]).tau((cls[i].w - b) as u32))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Relations

/// `τ^tau · mono · gen`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub tau: u32,
    pub mono: Mono,
    pub gen: String,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.tau {
            0 => {}
            1 => parts.push("tau".to_string()),
            e => parts.push(format!("tau^{e}")),
        }
        let m = mono_name(&self.mono);
        if !m.is_empty() {
            parts.push(m);
        }
        if self.gen != "1" || parts.is_empty() {
            parts.push(self.gen.clone());
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// `lhs = rhs` (or `lhs != rhs` when `negated`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
    #[serde(default)]
    pub negated: bool,
}

fn side(ts: &[Term]) -> String {
    if ts.is_empty() {
        "0".into()
    } else {
        ts.iter().map(Term::to_string).collect::<Vec<_>>().join(" + ")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.negated { "!=" } else { "=" };
        write!(f, "{} {op} {}", side(&self.lhs), side(&self.rhs))
    }
}

fn parse_term(s: &str) -> Result<Term, ProductError> {
    let mut t = Term {
        tau: 0,
        mono: [0; 4],
        gen: String::new(),
    };
    let s = s.replace(['*', '·'], " ");
    for tok in s.split_whitespace() {
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<u32>()
                    .map_err(|_| ProductError::Parse(format!("bad exponent in {tok}")))?,
            ),
            None => (tok, 1),
        };
        match name {
            "tau" => t.tau += exp,
            "h0" => t.mono[0] += exp,
            "h1" => t.mono[1] += exp,
            "alpha" => t.mono[2] += exp,
            "beta" => t.mono[3] += exp,
            g => {
                if !t.gen.is_empty() || exp != 1 {
                    return Err(ProductError::Parse(format!("term `{s}` needs exactly one generator")));
                }
                t.gen = g.to_string();
            }
        }
    }
    if t.gen.is_empty() {
        t.gen = "1".into();
    }
    Ok(t)
}

fn parse_side(s: &str) -> Result<Vec<Term>, ProductError> {
    let s = s.trim();
    if s == "0" {
        return Ok(Vec::new());
    }
    s.split('+').map(|t| parse_term(t.trim())).collect()
}

/// Parse `h0^2 r3 = tau h1^2 k`, `h0 k = 0` or `h1 r15 != 0`.
pub fn parse_relation(s: &str) -> Result<Relation, ProductError> {
    let (l, r, negated) = if let Some((l, r)) = s.split_once("!=") {
        (l, r, true)
    } else if let Some((l, r)) = s.split_once('=') {
        (l, r, false)
    } else {
        return Err(ProductError::Parse(format!("no `=` in `{s}`")));
    };
    if l.trim().is_empty() || r.trim().is_empty() {
        return Err(ProductError::Parse(format!("empty side in `{s}`")));
    }
    Ok(Relation {
        lhs: parse_side(l)?,
        rhs: parse_side(r)?,
        negated,
    })
}

/// Named 𝓔-module generators, evaluating terms and relations.
pub struct Evaluator<'a> {
    pub ring: &'a Ring,
    pub me: &'a mut ModuleExt,
    pub gens: BTreeMap<String, ExtElem>,
    values: HashMap<(Mono, String), ExtElem>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ring: &'a Ring, me: &'a mut ModuleExt, gens: BTreeMap<String, ExtElem>) -> Self {
        Evaluator {
            ring,
            me,
            gens,
            values: HashMap::new(),
        }
    }

    /// `mono · gen` at its natural weight.
    pub fn product(&mut self, mono: &Mono, gen: &str) -> Result<ExtElem, ProductError> {
        let key = (*mono, gen.to_string());
        if let Some(v) = self.values.get(&key) {
            return Ok(v.clone());
        }
        let g = self
            .gens
            .get(gen)
            .cloned()
            .ok_or_else(|| ProductError::UnknownGenerator(gen.to_string()))?;
        let p = self.ring.monomial(mono)?.clone();
        let v = self.me.mul(&p, &g)?;
        self.values.insert(key, v.clone());
        Ok(v)
    }

    pub fn term(&mut self, t: &Term) -> Result<ExtElem, ProductError> {
        Ok(self.product(&t.mono, &t.gen)?.tau(t.tau))
    }

    /// Degree of a term without evaluating it.
    pub fn term_degree(&self, t: &Term) -> Result<(usize, i32, i32), ProductError> {
        let g = self
            .gens
            .get(&t.gen)
            .ok_or_else(|| ProductError::UnknownGenerator(t.gen.clone()))?;
        let (s, a, b) = mono_degree(&t.mono);
        Ok((g.s + s, g.a + a, g.b + b - t.tau as i32))
    }

    /// Whether the relation holds. Errors for inhomogeneous or out-of-window
    /// relations.
    pub fn holds(&mut self, r: &Relation) -> Result<bool, ProductError> {
        let terms: Vec<&Term> = r.lhs.iter().chain(&r.rhs).collect();
        let degs: Vec<(usize, i32, i32)> = terms.iter().map(|t| self.term_degree(t)).collect::<Result<_, _>>()?;
        if degs.windows(2).any(|w| w[0] != w[1]) {
            let shown: Vec<String> = terms
                .iter()
                .zip(&degs)
                .map(|(t, (s, a, b))| format!("{t} at ({},{s},{b})", a - *s as i32))
                .collect();
            return Err(ProductError::Inhomogeneous(shown.join(", ")));
        }
        let Some(&(s, a, b)) = degs.first() else {
            return Ok(!r.negated);
        };
        let mut acc: BTreeSet<usize> = BTreeSet::new();
        for t in terms {
            for g in self.term(t)?.gens {
                if !acc.remove(&g) {
                    acc.insert(g);
                }
            }
        }
        let x = ExtElem {
            s,
            a,
            b,
            gens: acc.into_iter().collect(),
        };
        let zero = self.me.is_zero(&x)?;
        Ok(zero != r.negated)
    }
}

// ---------------------------------------------------------------------------
// Presentations

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedGenerator {
    pub name: String,
    pub n: i32,
    pub s: usize,
    pub w: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EPresentation {
    pub module: String,
    pub valid_t: i32,
    pub s_max: usize,
    pub generators: Vec<PresentedGenerator>,
    pub relations: Vec<Relation>,
}

impl EPresentation {
    pub fn to_text(&self) -> String {
        let mut out = format!("{}  (s <= {}, a <= {})\n\n", self.module, self.s_max, self.valid_t);
        out.push_str("generator | Adams tridegree\n");
        for g in &self.generators {
            out.push_str(&format!("{} | ({},{},{})\n", g.name, g.n, g.s, g.w));
        }
        out.push_str("\nrelations\n");
        for r in &self.relations {
            out.push_str(&format!("{r}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("presentation serializes")
    }
}

/// Chosen 𝓔-generators of `Ext(M)` with their cocycles.
///
/// With `ring_mode`, products with classes in homological degree 0 do not
/// count as decomposable, which yields algebra generators of 𝓔 itself
/// (plus the unit) when `M = M₂`.
pub fn find_generators(
    ring: &Ring,
    me: &mut ModuleExt,
    names: &dyn Fn(Tri) -> Option<String>,
    ring_mode: bool,
) -> Result<Vec<(String, ExtElem)>, ProductError> {
    let mut out = Vec::new();
    let keys: Vec<(usize, i32)> = me.ext.classes.keys().copied().collect();
    for (s, a) in keys {
        let classes: Vec<ExtClass> = me.classes(s, a).to_vec();
        let weights: BTreeSet<i32> = classes.iter().map(|c| c.w).collect();
        for w in weights {
            // Decomposables: θ-multiples from lower slices and τ-multiples.
            let mut dec: Vec<ExtElem> = Vec::new();
            for (t, &(ts, ta, tb)) in THETA_DEGREES.iter().enumerate() {
                if s < ts || (ring_mode && s == ts) {
                    continue;
                }
                for y in me.slice_basis(s - ts, a - ta, w - tb) {
                    dec.push(me.act(ring, t, &y)?);
                }
            }
            for c in &classes {
                if c.w > w && c.torsion.is_none_or(|k| c.w - w < k as i32) {
                    dec.push(ExtElem::from_class(c).tau((c.w - w) as u32));
                }
            }
            let coords = |me: &mut ModuleExt, x: &ExtElem| -> Result<BitVec, ProductError> {
                let idx = me.express(x)?;
                Ok(BitVec::from_indices(classes.len(), idx))
            };
            let mut span_v = Echelon::new(classes.len());
            for d in &dec {
                span_v.insert(&coords(me, d)?);
            }
            let mut count = 0;
            for c in classes.iter().filter(|c| c.w == w) {
                let x = ExtElem::from_class(c);
                if span_v.insert(&coords(me, &x)?) {
                    let tri = x.tridegree();
                    let base = names(tri).unwrap_or_else(|| format!("g{}_{}_{}", tri.0, tri.1, tri.2));
                    let name = if count == 0 { base } else { format!("{base}_{count}") };
                    count += 1;
                    out.push((name, x));
                }
            }
        }
    }
    Ok(out)
}

/// A slice of the presented module: formal terms and their values.
struct TermSpace {
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
}

fn term_space(gens: &[(String, ExtElem)], s: usize, a: i32, b: i32, monos: &[Mono]) -> TermSpace {
    let mut terms = Vec::new();
    for (name, g) in gens {
        if g.s > s {
            continue;
        }
        for m in monos {
            let (ms, ma, mb) = mono_degree(m);
            if g.s + ms == s && g.a + ma == a && g.b + mb >= b {
                terms.push(Term {
                    tau: (g.b + mb - b) as u32,
                    mono: *m,
                    gen: name.clone(),
                });
            }
        }
    }
    let index = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    TermSpace { terms, index }
}

/// Relations of the ring itself, as seeds for module presentations.
pub fn ring_relations() -> Vec<Relation> {
    ["h0 h1 = 0", "tau h1^3 = 0", "h1 alpha = 0", "alpha^2 = h0^2 beta"]
        .iter()
        .map(|r| parse_relation(r).expect("valid"))
        .collect()
}

/// Relation as a list of terms summing to zero, normalized.
fn relation_terms(r: &Relation) -> Vec<Term> {
    let mut v: Vec<Term> = r.lhs.iter().chain(&r.rhs).cloned().collect();
    v.sort();
    v
}

/// Slices `(s, a, b)` to examine, in the order relations propagate.
fn slices_in_window(me: &ModuleExt, gens: &[(String, ExtElem)], monos: &[Mono]) -> Vec<(usize, i32, i32)> {
    let mut out = Vec::new();
    for s in 0..=me.res.s_max {
        for a in me.res.bottom()..=me.res.valid_t {
            let mut weights: Vec<i32> = Vec::new();
            for c in me.classes(s, a) {
                weights.push(c.w);
                weights.push(c.w - c.torsion.map_or(0, |k| k as i32));
            }
            for (_, g) in gens {
                for m in monos {
                    let (ms, ma, mb) = mono_degree(m);
                    if g.s + ms == s && g.a + ma == a {
                        weights.push(g.b + mb);
                    }
                }
            }
            if let (Some(&lo), Some(&hi)) = (weights.iter().min(), weights.iter().max()) {
                for b in (lo - 1..=hi).rev() {
                    out.push((s, a, b));
                }
            }
        }
    }
    out
}

/// Multiples `τ^f q R` of known relations landing in slice `(s, a, b)`.
fn relation_multiples(
    known: &[(Vec<Term>, (usize, i32, i32))],
    space: &TermSpace,
    s: usize,
    a: i32,
    b: i32,
    monos: &[Mono],
) -> Vec<BitVec> {
    let mut out = Vec::new();
    for (terms, (rs, ra, rb)) in known {
        if *rs > s || *ra > a {
            continue;
        }
        for q in monos {
            let (qs, qa, qb) = mono_degree(q);
            if rs + qs != s || ra + qa != a || rb + qb < b {
                continue;
            }
            let f = (rb + qb - b) as u32;
            let mut v = BitVec::zeros(space.terms.len());
            for t in terms {
                let tt = Term {
                    tau: t.tau + f,
                    mono: mono_mul(&t.mono, q),
                    gen: t.gen.clone(),
                };
                if let Some(&i) = space.index.get(&tt) {
                    v.flip(i);
                }
            }
            out.push(v);
        }
    }
    out
}

fn seeds_for(gens: &[(String, ExtElem)], base: &[Relation]) -> Vec<(Vec<Term>, (usize, i32, i32))> {
    let mut out = Vec::new();
    for r in base {
        for (name, g) in gens {
            let terms: Vec<Term> = relation_terms(r)
                .into_iter()
                .map(|t| Term { gen: name.clone(), ..t })
                .collect();
            let (s, a, b) = mono_degree(&terms[0].mono);
            let deg = (g.s + s, g.a + a, g.b + b - terms[0].tau as i32);
            out.push((terms, deg));
        }
    }
    out
}

fn term_value_coords(ev: &mut Evaluator, t: &Term, dim: usize) -> Result<BitVec, ProductError> {
    let x = ev.term(t)?;
    Ok(BitVec::from_indices(dim, ev.me.express(&x)?))
}

/// Compute a presentation: generators, then relations found slice by slice
/// modulo the multiples of the ones already found.
pub fn presentation(
    ring: &Ring,
    me: &mut ModuleExt,
    names: &dyn Fn(Tri) -> Option<String>,
) -> Result<EPresentation, ProductError> {
    let is_ring = me.res.module.name == "M2";
    let all = find_generators(ring, me, names, is_ring)?;
    // For the ring, relations are among monomials on the unit; the listed
    // generators are the algebra generators.
    let (gens, listed): (Vec<_>, Vec<_>) = if is_ring {
        let (unit, rest): (Vec<_>, Vec<_>) = all.into_iter().partition(|(_, g)| g.s == 0);
        let unit = unit.into_iter().map(|(_, g)| ("1".to_string(), g)).collect();
        let rest = rest
            .into_iter()
            .map(|(name, g)| {
                let t = THETA_DEGREES.iter().position(|&(s, a, b)| (s, a, b) == (g.s, g.a, g.b));
                (t.map_or(name, |t| THETA_NAMES[t].to_string()), g)
            })
            .collect();
        (unit, rest)
    } else {
        (all.clone(), all)
    };
    let monos: Vec<Mono> = ring.monomials.keys().copied().collect();
    let base = if is_ring { Vec::new() } else { ring_relations() };
    let mut known = seeds_for(&gens, &base);
    let mut found: Vec<Relation> = Vec::new();
    let gen_map: BTreeMap<String, ExtElem> = gens.iter().cloned().collect();
    let slices = slices_in_window(me, &gens, &monos);
    let mut ev = Evaluator::new(ring, me, gen_map);
    for (s, a, b) in slices {
        let space = term_space(&gens, s, a, b, &monos);
        if space.terms.is_empty() {
            continue;
        }
        let classes_len = ev.me.classes(s, a).len();
        let values: Vec<BitVec> = space
            .terms
            .iter()
            .map(|t| term_value_coords(&mut ev, t, classes_len))
            .collect::<Result<_, _>>()?;
        let mut span = Echelon::new(space.terms.len());
        for v in relation_multiples(&known, &space, s, a, b, &monos) {
            span.insert(&v);
        }
        // Candidates: single terms, then pairs, then the rest of the kernel.
        let n = space.terms.len();
        let mut cands: Vec<BitVec> = Vec::new();
        for i in 0..n {
            if values[i].is_zero() {
                cands.push(BitVec::from_indices(n, [i]));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if values[i] == values[j] {
                    cands.push(BitVec::from_indices(n, [i, j]));
                }
            }
        }
        let mut red = ColumnReducer::new(classes_len);
        for v in &values {
            red.push(v.clone(), 0);
        }
        cands.extend(red.kernel().map(|(k, _)| k));
        for c in cands {
            if span.insert(&c) {
                let terms: Vec<Term> = c.ones().map(|i| space.terms[i].clone()).collect();
                // Leading term on the left, the rest on the right.
                let (l, r) = terms.split_at(1);
                found.push(Relation {
                    lhs: l.to_vec(),
                    rhs: r.to_vec(),
                    negated: false,
                });
                known.push((terms.clone(), (s, a, b)));
            }
        }
    }
    let mut generators: Vec<PresentedGenerator> = listed
        .iter()
        .map(|(name, g)| {
            let (n, s, w) = g.tridegree();
            PresentedGenerator {
                name: name.clone(),
                n,
                s,
                w,
            }
        })
        .collect();
    generators.sort_by_key(|g| (g.s, g.n, g.w));
    Ok(EPresentation {
        module: ev.me.res.module.name.clone(),
        valid_t: ev.me.res.valid_t,
        s_max: ev.me.res.s_max,
        generators,
        relations: found,
    })
}

/// Outcome of [`check_sufficiency`].
#[derive(Clone, Debug, Default)]
pub struct SufficiencyReport {
    /// Slices where the generators do not span Ext.
    pub not_generated: Vec<(Tri, usize, usize)>,
    /// Slices where the relations leave the presented group too large.
    pub too_big: Vec<(Tri, usize, usize)>,
}

impl SufficiencyReport {
    pub fn ok(&self) -> bool {
        self.not_generated.is_empty() && self.too_big.is_empty()
    }
}

/// Check that `gens` and `relations` (plus the ring relations, unless the
/// module is M₂ itself) present Ext in every slice of the window.
pub fn check_sufficiency(
    ring: &Ring,
    me: &mut ModuleExt,
    gens: &[(String, ExtElem)],
    relations: &[Relation],
) -> Result<SufficiencyReport, ProductError> {
    let is_ring = me.res.module.name == "M2";
    let monos: Vec<Mono> = ring.monomials.keys().copied().collect();
    let base = if is_ring { Vec::new() } else { ring_relations() };
    let mut known = seeds_for(gens, &base);
    let gen_map: BTreeMap<String, ExtElem> = gens.iter().cloned().collect();
    let mut ev = Evaluator::new(ring, me, gen_map);
    for r in relations {
        let terms = relation_terms(r);
        if let Some(t0) = terms.first() {
            let d = ev.term_degree(t0)?;
            known.push((terms, d));
        }
    }
    let mut report = SufficiencyReport::default();
    for (s, a, b) in slices_in_window(ev.me, gens, &monos) {
        let space = term_space(gens, s, a, b, &monos);
        let dim = ev.me.slice_dim(s, a, b);
        let classes_len = ev.me.classes(s, a).len();
        let values: Vec<BitVec> = space
            .terms
            .iter()
            .map(|t| term_value_coords(&mut ev, t, classes_len))
            .collect::<Result<_, _>>()?;
        let rank = crate::f2::rank_of(classes_len, &values);
        let tri = (a - s as i32, s, b);
        if rank < dim {
            report.not_generated.push((tri, rank, dim));
        }
        let rel_rank = crate::f2::rank_of(space.terms.len(), &relation_multiples(&known, &space, s, a, b, &monos));
        if space.terms.len() - rel_rank > dim {
            report.too_big.push((tri, space.terms.len() - rel_rank, dim));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Edges

/// Product edges for `h0`, `h1` and `alpha` from every chart class.
pub fn product_edges(ring: &Ring, me: &mut ModuleExt) -> Result<Vec<ChartEdge>, ProductError> {
    let mut edges = Vec::new();
    let keys: Vec<(usize, i32)> = me.ext.classes.keys().copied().collect();
    for (s, a) in keys {
        let classes = me.classes(s, a).to_vec();
        for (ci, c) in classes.iter().enumerate() {
            let x = ExtElem::from_class(c);
            let (n, _, w) = x.tridegree();
            let from_idx = classes[..ci].iter().filter(|d| d.w == c.w).count() as i32;
            for (t, &(ts, ta, _)) in THETA_DEGREES.iter().enumerate().take(3) {
                if s + ts > me.res.s_max || a + ta > me.res.valid_t {
                    continue;
                }
                let y = me.act(ring, t, &x)?;
                let tgt = me.classes(y.s, y.a).to_vec();
                for i in me.express(&y)? {
                    let d = &tgt[i];
                    let (tn, ts2, tw) = (d.a - d.s as i32, d.s, d.w);
                    let to_idx = tgt[..i].iter().filter(|e| e.w == d.w).count() as i32;
                    edges.push(ChartEdge {
                        op: THETA_NAMES[t].to_string(),
                        from: [n, s as i32, w, from_idx],
                        to: [tn, ts2 as i32, tw, to_idx],
                        tau: (d.w - y.b) as u32,
                    });
                }
            }
        }
    }
    Ok(edges)
}

// ---------------------------------------------------------------------------
// Long exact sequences

#[derive(Clone, Debug, Default)]
pub struct LesReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl LesReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Induced map on Ext, slice by slice: the matrix of `f^*` from `src_ext`
/// (Ext of the target module) to `dst_ext` (Ext of the source module).
fn induced_rank(
    dst: &mut ModuleExt,
    map: &ChainMap,
    src_basis: &[ExtElem],
    first_missing: &mut Option<String>,
) -> Result<(usize, Vec<BitVec>), ProductError> {
    let mut cols = Vec::new();
    for x in src_basis {
        let y = compose(&dst.res, x, map)?;
        let cls_len = dst.classes(y.s, y.a).len();
        match dst.express(&y) {
            Ok(idx) => cols.push(BitVec::from_indices(cls_len, idx)),
            Err(e) => {
                first_missing.get_or_insert(e.to_string());
            }
        }
    }
    let n = cols.first().map_or(0, BitVec::len);
    Ok((crate::f2::rank_of(n, &cols), cols))
}

/// Rank bookkeeping for the long exact sequence of `sub → total → quotient`.
pub fn les_check(ses: &SesSpec, s_max: usize, t_max: i32) -> Result<LesReport, ProductError> {
    let mut report = LesReport::default();
    report.failures.extend(
        crate::modules::check_ses(ses)
            .into_iter()
            .map(|f| format!("structure: {f}")),
    );
    let mut sub = ModuleExt::from_resolution(resolve(&ses.sub, s_max, t_max)?);
    let mut tot = ModuleExt::from_resolution(resolve(&ses.total, s_max, t_max)?);
    let mut quo = ModuleExt::from_resolution(resolve(&ses.quotient, s_max, t_max)?);
    // f: sub → total lifts to F(sub) → F(total); g: total → quotient.
    let mut cache_t = SolveCache::default();
    let mut cache_q = SolveCache::default();
    let fmap = match lift_module_map(&sub.res, &tot.res, &mut cache_t, &ses.inclusion.images, s_max) {
        Ok(m) => m,
        Err(e) => {
            report.failures.push(format!("inclusion does not lift: {e}"));
            return Ok(report);
        }
    };
    let gmap = match lift_module_map(&tot.res, &quo.res, &mut cache_q, &ses.projection.images, s_max) {
        Ok(m) => m,
        Err(e) => {
            report.failures.push(format!("projection does not lift: {e}"));
            return Ok(report);
        }
    };
    let valid = sub.res.valid_t.min(tot.res.valid_t).min(quo.res.valid_t);
    let bottom = [&sub, &tot, &quo]
        .iter()
        .filter_map(|m| m.res.module.min_degree())
        .min()
        .unwrap_or(0);
    let weights = |m: &ModuleExt, s: usize, a: i32| -> Vec<i32> {
        m.classes(s, a)
            .iter()
            .flat_map(|c| [c.w, c.w - c.torsion.map_or(0, |k| k as i32)])
            .collect()
    };
    for s in 0..s_max {
        for a in bottom..=valid {
            let mut ws: Vec<i32> = Vec::new();
            for m in [&sub, &tot, &quo] {
                ws.extend(weights(m, s, a));
                ws.extend(weights(m, s + 1, a));
            }
            let (Some(&lo), Some(&hi)) = (ws.iter().min(), ws.iter().max()) else {
                continue;
            };
            for b in lo - 1..=hi {
                report.checked += 1;
                let mut missing = None;
                let qb = quo.slice_basis(s, a, b);
                let tb = tot.slice_basis(s, a, b);
                let sb = sub.slice_basis(s, a, b);
                let (rg, gcols) = induced_rank(&mut tot, &gmap, &qb, &mut missing)?;
                let (rf, _) = induced_rank(&mut sub, &fmap, &tb, &mut missing)?;
                // f^* ∘ g^* = 0
                let tcls = tot.classes(s, a).to_vec();
                for col in &gcols {
                    let mut acc = BTreeSet::new();
                    for i in col.ones() {
                        let x = ExtElem::from_class(&tcls[i]).tau((tcls[i].w - b) as u32);
                        let y = compose(&sub.res, &x, &fmap)?;
                        for g in y.gens {
                            if !acc.remove(&g) {
                                acc.insert(g);
                            }
                        }
                    }
                    let z = ExtElem {
                        s,
                        a,
                        b,
                        gens: acc.into_iter().collect(),
                    };
                    if !sub.is_zero(&z)? {
                        report.failures.push(format!("f*g* ≠ 0 at ({},{s},{b})", a - s as i32));
                    }
                }
                let qb1 = quo.slice_basis(s + 1, a, b);
                let tb1 = tot.slice_basis(s + 1, a, b);
                let (rg1, _) = induced_rank(&mut tot, &gmap, &qb1, &mut missing)?;
                let _ = tb1;
                if let Some(m) = missing {
                    report.failures.push(format!("window: {m}"));
                    continue;
                }
                let n = a - s as i32;
                if tb.len() != rf + rg {
                    report.failures.push(format!(
                        "not exact at Ext^{s}(total), cell ({n},{s},{b}): dim {} ≠ {rf} + {rg}",
                        tb.len()
                    ));
                }
                if sb.len() - rf != qb1.len() - rg1 {
                    report.failures.push(format!(
                        "connecting map impossible at ({n},{s},{b}): coker f* has dim {}, ker g* at s+1 has dim {}",
                        sb.len() - rf,
                        qb1.len() - rg1
                    ));
                }
                if s == 0 && rg != qb.len() {
                    report
                        .failures
                        .push(format!("g* not injective in degree 0 at ({n},0,{b})"));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_grammar() {
        let r = parse_relation("h0^2 r3 = tau h1^2 k").unwrap();
        assert_eq!(r.to_string(), "h0^2 r3 = tau h1^2 k");
        assert_eq!(r.lhs[0].mono, [2, 0, 0, 0]);
        assert_eq!(r.rhs[0].tau, 1);
        let r = parse_relation("h1 r15 != 0").unwrap();
        assert!(r.negated && r.rhs.is_empty());
        let r = parse_relation("alpha^2 = h0^2 beta").unwrap();
        assert_eq!(r.lhs[0].gen, "1");
        assert!(parse_relation("h0 x y = 0").is_err());
        assert!(parse_relation("h0 x").is_err());
    }

    #[test]
    fn ring_relations_hold() {
        let ring = Ring::new(8, 24).unwrap();
        let mut me = ModuleExt::new(&crate::modules::m2(), 8, 24, &ring).unwrap();
        let unit = ExtElem {
            s: 0,
            a: 0,
            b: 0,
            gens: vec![0],
        };
        let gens = BTreeMap::from([("1".to_string(), unit)]);
        let mut ev = Evaluator::new(&ring, &mut me, gens);
        for r in ring_relations() {
            assert!(ev.holds(&r).unwrap(), "{r}");
        }
        for r in [
            "h1^3 != 0",
            "h0^5 != 0",
            "alpha != 0",
            "h0 alpha != 0",
            "h0^3 beta != 0",
            "h1^2 beta != 0",
            "alpha^2 != 0",
        ] {
            assert!(ev.holds(&parse_relation(r).unwrap()).unwrap(), "{r}");
        }
        assert!(!ev.holds(&parse_relation("h1^3 = 0").unwrap()).unwrap());
        assert!(matches!(
            ev.holds(&parse_relation("h1 = h0").unwrap()),
            Err(ProductError::Inhomogeneous(_))
        ));
    }
}
