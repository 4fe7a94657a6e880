//! M₂-free modules over the finite subalgebras, with the deleted quadrics
//! and related examples built in.
//!
//! A module has an M₂-basis and, for each algebra generator, the image of
//! every basis element as a set of basis elements. τ-coefficients are never
//! stored: `g·m = Σ τ^{e_t} t` where each `e_t` is forced by the weights.

use crate::steenrod::{algebra, MultTable, SubalgebraId};
use crate::tau_linalg::BiDegree;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Homogeneity { line: usize, msg: String },
    #[error("line {line}: unknown basis element {name}")]
    UnknownBasis { line: usize, name: String },
    #[error("unknown module {0}")]
    UnknownName(String),
    #[error("truncation {t_max} too small for {name}")]
    TruncationTooSmall { name: String, t_max: i32 },
    #[error("{name} needs n ≡ {expected} mod 4, got {n}")]
    CongruenceMismatch { name: String, n: i32, expected: String },
    #[error("invalid module: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub name: String,
    pub degree: BiDegree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteenrodModule {
    pub name: String,
    pub algebra: SubalgebraId,
    pub basis: Vec<BasisElement>,
    /// `actions[g][i]`: sorted basis indices in `gen_g · basis_i`.
    pub actions: Vec<Vec<Vec<usize>>>,
    /// Degrees above this were dropped, unless `complete` is set.
    pub t_max: i32,
    /// True when the basis is the whole module (no truncation happened).
    pub complete: bool,
}

fn xor_into(acc: &mut BTreeSet<usize>, items: &[usize]) {
    for &i in items {
        if !acc.remove(&i) {
            acc.insert(i);
        }
    }
}

impl SteenrodModule {
    pub fn new(name: &str, algebra_id: SubalgebraId, basis: Vec<(String, BiDegree)>) -> Self {
        let gens = algebra(algebra_id).generator_names.len();
        let n = basis.len();
        let t_max = basis.iter().map(|b| b.1.a).max().unwrap_or(0);
        SteenrodModule {
            name: name.to_string(),
            algebra: algebra_id,
            basis: basis
                .into_iter()
                .map(|(name, degree)| BasisElement { name, degree })
                .collect(),
            actions: vec![vec![Vec::new(); n]; gens],
            t_max,
            complete: true,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn degree(&self, i: usize) -> BiDegree {
        self.basis[i].degree
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn table(&self) -> &'static MultTable {
        algebra(self.algebra)
    }

    pub fn set_action(&mut self, gen: usize, src: usize, targets: impl IntoIterator<Item = usize>) {
        let mut t: Vec<usize> = targets.into_iter().collect();
        t.sort_unstable();
        t.dedup();
        self.actions[gen][src] = t;
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.basis.iter().map(|b| b.degree.a).min()
    }

    /// Apply a word in the generators (rightmost letter acts first).
    pub fn act_word(&self, word: &[u8], src: &[usize]) -> Vec<usize> {
        let mut cur: BTreeSet<usize> = src.iter().copied().collect();
        for &g in word.iter().rev() {
            let mut next = BTreeSet::new();
            for i in cur {
                xor_into(&mut next, &self.actions[g as usize][i]);
            }
            cur = next;
        }
        cur.into_iter().collect()
    }

    /// `mono_action()[k][i]` = basis monomial `k` applied to basis element `i`.
    pub fn mono_action(&self) -> Vec<Vec<Vec<usize>>> {
        let t = self.table();
        t.basis
            .iter()
            .map(|m| (0..self.len()).map(|i| self.act_word(&m.word, &[i])).collect())
            .collect()
    }

    /// Every degree shifted by `(k, l)`.
    pub fn suspend(&self, k: i32, l: i32) -> SteenrodModule {
        let mut m = self.clone();
        m.name = format!("Sigma({k},{l},{})", self.name);
        for b in &mut m.basis {
            b.degree = b.degree + BiDegree::new(k, l);
        }
        m.t_max = self.t_max + k;
        m
    }

    pub fn direct_sum(&self, other: &SteenrodModule) -> Result<SteenrodModule, ModuleError> {
        if self.algebra != other.algebra {
            return Err(ModuleError::Invalid("direct sum over different algebras".into()));
        }
        let off = self.len();
        let mut m = self.clone();
        m.name = format!("DirectSum({},{})", self.name, other.name);
        let taken: BTreeSet<String> = self.basis.iter().map(|b| b.name.clone()).collect();
        for b in &other.basis {
            let mut b = b.clone();
            if taken.contains(&b.name) {
                b.name = format!("{}'", b.name);
            }
            m.basis.push(b);
        }
        for (g, acts) in m.actions.iter_mut().enumerate() {
            for t in &other.actions[g] {
                acts.push(t.iter().map(|&j| j + off).collect());
            }
        }
        m.t_max = self.t_max.min(other.t_max);
        m.complete = self.complete && other.complete;
        Ok(m)
    }

    /// Keep basis elements with topological degree in `(lo, hi]`. The result
    /// is a module when nothing below `lo` is hit from above it, which holds
    /// because actions raise degree.
    pub fn degree_window(&self, lo: i32, hi: i32) -> SteenrodModule {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.degree(i).a > lo && self.degree(i).a <= hi)
            .collect();
        let newi: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let mut m = self.clone();
        m.basis = keep.iter().map(|&i| self.basis[i].clone()).collect();
        m.actions = self
            .actions
            .iter()
            .map(|acts| {
                keep.iter()
                    .map(|&i| acts[i].iter().filter_map(|j| newi.get(j).copied()).collect())
                    .collect()
            })
            .collect();
        if hi < self.t_max || !self.complete {
            m.t_max = hi.min(self.t_max);
            m.complete = self.complete && self.basis.iter().all(|b| b.degree.a <= hi);
        }
        m
    }

    /// The same module over the classical algebra (τ = 1, weights zero).
    pub fn to_classical(&self) -> SteenrodModule {
        assert_eq!(
            self.algebra,
            SubalgebraId::A1,
            "classical specialization is for A1 modules"
        );
        let mut m = self.clone();
        m.algebra = SubalgebraId::A1Classical;
        m.name = format!("{}_classical", self.name);
        for b in &mut m.basis {
            b.degree.b = 0;
        }
        m
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check homogeneity, truncation and every defining relation of the algebra.
pub fn validate(m: &SteenrodModule) -> ValidationReport {
    let mut failures = Vec::new();
    let t = m.table();
    for (g, acts) in m.actions.iter().enumerate() {
        let gdeg = t.generator_degrees[g];
        for (i, targets) in acts.iter().enumerate() {
            let d = m.degree(i) + gdeg;
            for &j in targets {
                let dj = m.degree(j);
                if dj.a != d.a || dj.b > d.b {
                    failures.push(format!(
                        "{} {}: target {} at {} cannot sit in degree {}",
                        t.generator_names[g], m.basis[i].name, m.basis[j].name, dj, d
                    ));
                }
            }
        }
    }
    for b in &m.basis {
        if !m.complete && b.degree.a > m.t_max {
            failures.push(format!("{} at {} exceeds t_max {}", b.name, b.degree, m.t_max));
        }
    }
    // Relations: any two words with the same normal form must act alike,
    // and words reducing to zero must act by zero.
    for len in 2..=5usize {
        for code in 0..t.generator_names.len().pow(len as u32) {
            let mut w = Vec::with_capacity(len);
            let mut c = code;
            for _ in 0..len {
                w.push((c % t.generator_names.len()) as u8);
                c /= t.generator_names.len();
            }
            let nf = t.reduce_word(&w);
            for i in 0..m.len() {
                // Only meaningful where every intermediate degree is kept.
                if !m.complete && m.degree(i).a + 6 > m.t_max {
                    continue;
                }
                let lhs = m.act_word(&w, &[i]);
                let rhs = match nf {
                    None => Vec::new(),
                    Some((_, k)) => m.act_word(&t.basis[k].word, &[i]),
                };
                if lhs != rhs {
                    let wname: String = w.iter().map(|&g| t.generator_names[g as usize]).collect();
                    let rname = match nf {
                        None => "0".to_string(),
                        Some((0, k)) => t.basis[k].name.clone(),
                        Some((e, k)) => format!("tau^{e} {}", t.basis[k].name),
                    };
                    failures.push(format!("relation {wname} = {rname} fails on {}", m.basis[i].name));
                }
            }
        }
    }
    failures.dedup();
    ValidationReport { failures }
}

/// A degree-preserving map given on bases: `images[i]` is a set of target
/// basis elements (τ-coefficients forced by weights).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    pub images: Vec<Vec<usize>>,
}

/// Check that `f` is A-linear and degree preserving.
pub fn check_module_map(src: &SteenrodModule, tgt: &SteenrodModule, f: &ModuleMap) -> Result<(), String> {
    if f.images.len() != src.len() {
        return Err("map has wrong number of images".into());
    }
    for (i, img) in f.images.iter().enumerate() {
        for &j in img {
            let (di, dj) = (src.degree(i), tgt.degree(j));
            if di.a != dj.a || dj.b > di.b {
                return Err(format!(
                    "{} -> {} is not homogeneous",
                    src.basis[i].name, tgt.basis[j].name
                ));
            }
        }
    }
    let apply = |v: &[usize]| -> Vec<usize> {
        let mut acc = BTreeSet::new();
        for &i in v {
            xor_into(&mut acc, &f.images[i]);
        }
        acc.into_iter().collect()
    };
    for g in 0..src.actions.len() {
        for i in 0..src.len() {
            if !tgt.complete && src.degree(i).a + 2 > tgt.t_max {
                continue;
            }
            let lhs = apply(&src.actions[g][i]);
            let rhs = tgt.act_word(&[g as u8], &f.images[i]);
            if lhs != rhs {
                return Err(format!(
                    "map does not commute with {} on {}",
                    src.table().generator_names[g],
                    src.basis[i].name
                ));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Built-in modules

fn dq_name(is_a: bool, k: i32) -> String {
    let base = if is_a { "a" } else { "" };
    match (is_a, k) {
        (true, 0) => "a".into(),
        (_, 1) => format!("{base}b"),
        _ => format!("{base}b^{k}"),
    }
}

/// Reduced cohomology of DQ∞ through topological degree `top`.
fn dq_upto(top: i32) -> SteenrodModule {
    let mut basis = Vec::new();
    let mut d = 1;
    while d <= top {
        if d % 2 == 1 {
            let k = (d - 1) / 2;
            basis.push((dq_name(true, k), BiDegree::new(2 * k + 1, k + 1)));
        } else {
            let k = d / 2;
            basis.push((dq_name(false, k), BiDegree::new(2 * k, k)));
        }
        d += 1;
    }
    let mut m = SteenrodModule::new("DQ", SubalgebraId::A1, basis);
    let idx = |m: &SteenrodModule, s: &str| m.index_of(s);
    for d in 1..=top {
        let (is_a, k) = if d % 2 == 1 {
            (true, (d - 1) / 2)
        } else {
            (false, d / 2)
        };
        let i = idx(&m, &dq_name(is_a, k)).expect("present");
        if is_a {
            if let Some(j) = idx(&m, &dq_name(false, k + 1)) {
                m.set_action(0, i, [j]);
            }
            if k % 2 == 1 {
                if let Some(j) = idx(&m, &dq_name(true, k + 1)) {
                    m.set_action(1, i, [j]);
                }
            }
        } else if k % 2 == 1 {
            if let Some(j) = idx(&m, &dq_name(false, k + 1)) {
                m.set_action(1, i, [j]);
            }
        }
    }
    m
}

pub fn dq(n: i32) -> SteenrodModule {
    let mut m = dq_upto(n);
    m.name = format!("DQ({n})");
    m
}

pub fn dq_inf(t_max: i32) -> SteenrodModule {
    let mut m = dq_upto(t_max);
    m.name = "DQinf".into();
    m.t_max = t_max;
    m.complete = false;
    m
}

/// DQ∞ plus a bottom cell `x0` at (−1,0) with `Sq2 x0 = a`. The generators
/// `x_i` (i ≥ 1) are the classes `ab^{2i−1}`.
pub fn r_module(t_max: i32) -> SteenrodModule {
    let dq = dq_inf(t_max);
    let mut basis = vec![("x0".to_string(), BiDegree::new(-1, 0))];
    basis.extend(dq.basis.iter().map(|b| (b.name.clone(), b.degree)));
    let mut m = SteenrodModule::new("R", SubalgebraId::A1, basis);
    for g in 0..2 {
        for i in 0..dq.len() {
            m.set_action(g, i + 1, dq.actions[g][i].iter().map(|j| j + 1));
        }
    }
    if m.len() > 1 {
        m.set_action(1, 0, [1]);
    }
    m.t_max = t_max;
    m.complete = false;
    m
}

pub fn m2() -> SteenrodModule {
    SteenrodModule::new("M2", SubalgebraId::A1, vec![("1".into(), BiDegree::ZERO)])
}

/// Split `s` at top-level commas.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn int_arg(name: &str, s: &str) -> Result<i32, ModuleError> {
    s.trim()
        .parse()
        .map_err(|_| ModuleError::UnknownName(format!("{name}: bad integer {s}")))
}

/// Build a module from a name such as `DQ(16)`, `Sigma(15,8,M2)` or
/// `DirectSum(DQ(14),Sigma(15,8,M2))`. Infinite modules are truncated at
/// topological degree `t_max`; finite ones are truncated only if they reach
/// past it.
pub fn builtin(name: &str, t_max: i32) -> Result<SteenrodModule, ModuleError> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(p) if name.ends_with(')') => (&name[..p], split_args(&name[p + 1..name.len() - 1])),
        _ => (name, Vec::new()),
    };
    let m = match (head, args.len()) {
        ("M2", 0) => m2(),
        ("R", 0) => r_module(t_max),
        ("DQinf", 0) => dq_inf(t_max),
        ("DQ", 1) => {
            let n = int_arg(name, args[0])?;
            if n < 1 {
                return Err(ModuleError::UnknownName(format!("{name}: need n >= 1")));
            }
            dq(n)
        }
        ("DQquot", 2) => {
            let (n, lo) = (int_arg(name, args[0])?, int_arg(name, args[1])?);
            let mut m = dq(n).degree_window(lo, n);
            m.name = format!("DQquot({n},{lo})");
            m
        }
        ("Sigma", 3) => {
            let (k, l) = (int_arg(name, args[0])?, int_arg(name, args[1])?);
            builtin(args[2], t_max - k)?.suspend(k, l)
        }
        ("DirectSum", 2) => builtin(args[0], t_max)?.direct_sum(&builtin(args[1], t_max)?)?,
        _ => return Err(ModuleError::UnknownName(name.to_string())),
    };
    if m.is_empty() && !m.complete {
        return Err(ModuleError::TruncationTooSmall {
            name: name.to_string(),
            t_max,
        });
    }
    let mut m = if m.complete && m.basis.iter().any(|b| b.degree.a > t_max) {
        m.degree_window(i32::MIN, t_max)
    } else {
        m
    };
    if m.complete {
        m.t_max = m.t_max.max(t_max);
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Short exact sequences

#[derive(Clone, Debug)]
pub struct SesSpec {
    pub name: String,
    pub sub: SteenrodModule,
    pub total: SteenrodModule,
    pub quotient: SteenrodModule,
    pub inclusion: ModuleMap,
    pub projection: ModuleMap,
}

/// Map sending each basis element to the element of the same degree and
/// name in `tgt` (or to zero), with an index shift on the DQ names.
fn map_by(src: &SteenrodModule, tgt: &SteenrodModule, rename: impl Fn(&str) -> Option<String>) -> ModuleMap {
    ModuleMap {
        images: src
            .basis
            .iter()
            .map(|b| rename(&b.name).and_then(|n| tgt.index_of(&n)).into_iter().collect())
            .collect(),
    }
}

/// Shift a DQ basis name by `b^j`.
fn shift_dq_name(name: &str, j: i32) -> Option<String> {
    let (is_a, rest) = match name.strip_prefix('a') {
        Some(r) => (true, r),
        None => (false, name),
    };
    let k = match rest {
        "" => 0,
        "b" => 1,
        r => r.strip_prefix("b^")?.parse().ok()?,
    };
    Some(dq_name(is_a, k + j))
}

pub fn ses_builtin(name: &str, n: i32, t_max: i32) -> Result<SesSpec, ModuleError> {
    let mismatch = |expected: &str| ModuleError::CongruenceMismatch {
        name: name.to_string(),
        n,
        expected: expected.to_string(),
    };
    let ses = match name {
        "DQinf_over_DQn" => {
            if n <= 0 || n % 4 != 0 {
                return Err(mismatch("0"));
            }
            let sub = dq_inf(t_max - n).suspend(n, n / 2);
            let total = dq_inf(t_max);
            let quotient = dq(n);
            let inclusion = map_by(&sub, &total, |s| shift_dq_name(s, n / 2));
            let projection = map_by(&total, &quotient, |s| Some(s.to_string()));
            SesSpec {
                name: format!("{name}({n})"),
                sub,
                total,
                quotient,
                inclusion,
                projection,
            }
        }
        "DQ2_block" => {
            if n <= 2 || n % 4 != 2 {
                return Err(mismatch("2 (n > 2)"));
            }
            let sub = dq(2).suspend(n, n / 2);
            let total = dq(n + 2);
            let quotient = dq(n);
            let inclusion = map_by(&sub, &total, |s| shift_dq_name(s, n / 2));
            let projection = map_by(&total, &quotient, |s| Some(s.to_string()));
            SesSpec {
                name: format!("{name}({n})"),
                sub,
                total,
                quotient,
                inclusion,
                projection,
            }
        }
        "top_cell" => {
            if n <= 1 || n % 4 != 1 {
                return Err(mismatch("1 (n > 1)"));
            }
            let sub = m2().suspend(n + 1, (n + 1) / 2);
            let total = dq(n + 1);
            let quotient = dq(n);
            let top = dq_name(false, (n + 1) / 2);
            let inclusion = map_by(&sub, &total, |_| Some(top.clone()));
            let projection = map_by(&total, &quotient, |s| Some(s.to_string()));
            SesSpec {
                name: format!("{name}({n})"),
                sub,
                total,
                quotient,
                inclusion,
                projection,
            }
        }
        "R_over_DQinf" => {
            let sub = dq_inf(t_max);
            let total = r_module(t_max);
            let quotient = m2().suspend(-1, 0);
            let inclusion = map_by(&sub, &total, |s| Some(s.to_string()));
            let projection = map_by(&total, &quotient, |s| (s == "x0").then(|| "1".to_string()));
            SesSpec {
                name: name.to_string(),
                sub,
                total,
                quotient,
                inclusion,
                projection,
            }
        }
        _ => return Err(ModuleError::UnknownName(name.to_string())),
    };
    let report = check_ses(&ses);
    if !report.is_empty() {
        return Err(ModuleError::Invalid(report.join("; ")));
    }
    Ok(ses)
}

/// The parameterless family names with an example parameter each.
pub const SES_FAMILIES: [(&str, i32); 4] = [
    ("DQinf_over_DQn", 16),
    ("DQ2_block", 14),
    ("top_cell", 17),
    ("R_over_DQinf", 0),
];

/// F₂-dimension of a module in bidegree `(a, b)`.
fn slice_basis(m: &SteenrodModule, a: i32, b: i32) -> Vec<usize> {
    (0..m.len())
        .filter(|&i| m.degree(i).a == a && m.degree(i).b <= b)
        .collect()
}

fn slice_rank(src: &SteenrodModule, tgt: &SteenrodModule, f: &ModuleMap, a: i32, b: i32) -> usize {
    let rows = slice_basis(tgt, a, b);
    let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let cols: Vec<crate::f2::BitVec> = slice_basis(src, a, b)
        .into_iter()
        .map(|i| crate::f2::BitVec::from_indices(rows.len(), f.images[i].iter().map(|j| pos[j])))
        .collect();
    crate::f2::rank_of(rows.len(), &cols)
}

/// Structural checks of a short exact sequence; empty when all pass.
pub fn check_ses(s: &SesSpec) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(e) = check_module_map(&s.sub, &s.total, &s.inclusion) {
        out.push(format!("inclusion: {e}"));
    }
    if let Err(e) = check_module_map(&s.total, &s.quotient, &s.projection) {
        out.push(format!("projection: {e}"));
    }
    for (i, img) in s.inclusion.images.iter().enumerate() {
        let mut acc = BTreeSet::new();
        for &j in img {
            xor_into(&mut acc, &s.projection.images[j]);
        }
        if !acc.is_empty() {
            out.push(format!("composite nonzero on {}", s.sub.basis[i].name));
        }
    }
    let top = s.total.t_max.min(s.sub.t_max).min(s.quotient.t_max);
    let degrees: BTreeSet<(i32, i32)> = s
        .total
        .basis
        .iter()
        .chain(&s.sub.basis)
        .chain(&s.quotient.basis)
        .filter(|b| b.degree.a <= top)
        .map(|b| (b.degree.a, b.degree.b))
        .collect();
    let max_w = degrees.iter().map(|d| d.1).max().unwrap_or(0);
    for &(a, _) in &degrees {
        for b in degrees.iter().map(|d| d.1).min().unwrap_or(0)..=max_w {
            let ds = slice_basis(&s.sub, a, b).len();
            let dt = slice_basis(&s.total, a, b).len();
            let dq = slice_basis(&s.quotient, a, b).len();
            let rf = slice_rank(&s.sub, &s.total, &s.inclusion, a, b);
            let rg = slice_rank(&s.total, &s.quotient, &s.projection, a, b);
            if rf != ds || rg != dq || dt != ds + dq {
                out.push(format!("not exact at ({a},{b}): dims {ds},{dt},{dq}, ranks {rf},{rg}"));
            }
        }
    }
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// File format

fn err_syntax(line: usize, msg: impl Into<String>) -> ModuleError {
    ModuleError::Syntax { line, msg: msg.into() }
}

pub fn parse_module(text: &str) -> Result<SteenrodModule, ModuleError> {
    let mut alg: Option<SubalgebraId> = None;
    let mut name = String::from("module");
    let mut t_max: Option<i32> = None;
    let mut basis: Vec<(String, BiDegree)> = Vec::new();
    let mut actions: Vec<(usize, String, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "algebra" if toks.len() == 2 => {
                alg = Some(toks[1].parse().map_err(|e| err_syntax(line_no, format!("{e}")))?)
            }
            "module" if toks.len() == 2 => name = toks[1].to_string(),
            "tmax" if toks.len() == 2 => t_max = Some(toks[1].parse().map_err(|_| err_syntax(line_no, "bad tmax"))?),
            "basis" if toks.len() == 4 => {
                let a = toks[2].parse().map_err(|_| err_syntax(line_no, "bad degree"))?;
                let b = toks[3].parse().map_err(|_| err_syntax(line_no, "bad weight"))?;
                if basis.iter().any(|(n, _)| n == toks[1]) {
                    return Err(err_syntax(line_no, format!("duplicate basis element {}", toks[1])));
                }
                basis.push((toks[1].to_string(), BiDegree::new(a, b)));
            }
            _ if toks.len() >= 4 && toks[2] == "=" => {
                actions.push((line_no, format!("{} {}", toks[0], toks[1]), toks[3..].join(" ")))
            }
            _ => return Err(err_syntax(line_no, format!("cannot parse `{line}`"))),
        }
    }
    let alg = alg.ok_or_else(|| err_syntax(0, "missing `algebra` line"))?;
    let mut m = SteenrodModule::new(&name, alg, basis);
    let table = m.table();
    for (line_no, lhs, rhs) in actions {
        let mut parts = lhs.split_whitespace();
        let (gname, src) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
        let g = table
            .generator_id(gname)
            .ok_or_else(|| err_syntax(line_no, format!("unknown generator {gname}")))?;
        let i = m.index_of(src).ok_or_else(|| ModuleError::UnknownBasis {
            line: line_no,
            name: src.to_string(),
        })?;
        let target_deg = m.degree(i) + table.generator_degrees[g];
        let mut targets = BTreeSet::new();
        for term in rhs.split('+') {
            let toks: Vec<&str> = term.split_whitespace().collect();
            let (e, bname) = match toks.as_slice() {
                [b] if *b == "0" => continue,
                [b] => (0, *b),
                [t, b] => {
                    let e = match *t {
                        "tau" => 1,
                        t => t
                            .strip_prefix("tau^")
                            .and_then(|x| x.parse::<i32>().ok())
                            .ok_or_else(|| err_syntax(line_no, format!("bad coefficient {t}")))?,
                    };
                    (e, *b)
                }
                _ => return Err(err_syntax(line_no, format!("bad term `{}`", term.trim()))),
            };
            let j = m.index_of(bname).ok_or_else(|| ModuleError::UnknownBasis {
                line: line_no,
                name: bname.to_string(),
            })?;
            let d = m.degree(j) + BiDegree::new(0, e);
            if d != target_deg {
                return Err(ModuleError::Homogeneity {
                    line: line_no,
                    msg: format!(
                        "{gname} {src} has degree {target_deg} but {} has degree {d}",
                        term.trim()
                    ),
                });
            }
            if !targets.remove(&j) {
                targets.insert(j);
            }
        }
        m.set_action(g, i, targets);
    }
    if let Some(t) = t_max {
        m.t_max = t;
        m.complete = false;
    }
    Ok(m)
}

pub fn render_module(m: &SteenrodModule) -> String {
    let t = m.table();
    let mut s = String::new();
    let _ = writeln!(s, "algebra {}", m.algebra);
    let _ = writeln!(s, "module {}", m.name.replace(char::is_whitespace, "_"));
    if !m.complete {
        let _ = writeln!(s, "tmax {}", m.t_max);
    }
    for b in &m.basis {
        let _ = writeln!(s, "basis {} {} {}", b.name, b.degree.a, b.degree.b);
    }
    for (g, acts) in m.actions.iter().enumerate() {
        let gdeg = t.generator_degrees[g];
        for (i, targets) in acts.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let w = m.degree(i).b + gdeg.b;
            let terms: Vec<String> = targets
                .iter()
                .map(|&j| match w - m.degree(j).b {
                    0 => m.basis[j].name.clone(),
                    1 => format!("tau {}", m.basis[j].name),
                    e => format!("tau^{e} {}", m.basis[j].name),
                })
                .collect();
            let _ = writeln!(
                s,
                "{} {} = {}",
                t.generator_names[g],
                m.basis[i].name,
                terms.join(" + ")
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(m: &SteenrodModule, g: usize, src: &str) -> Vec<String> {
        let i = m.index_of(src).unwrap();
        m.actions[g][i].iter().map(|&j| m.basis[j].name.clone()).collect()
    }

    #[test]
    fn dq2_and_dqinf() {
        let m = dq(2);
        let names: Vec<(&str, BiDegree)> = m.basis.iter().map(|b| (b.name.as_str(), b.degree)).collect();
        assert_eq!(names, vec![("a", BiDegree::new(1, 1)), ("b", BiDegree::new(2, 1))]);
        assert_eq!(act(&m, 0, "a"), ["b"]);
        assert!(act(&m, 1, "a").is_empty());
        assert!(act(&m, 0, "b").is_empty() && act(&m, 1, "b").is_empty());
        let inf = dq_inf(20);
        assert_eq!(act(&inf, 1, "b"), ["b^2"]);
        assert_eq!(act(&inf, 0, "ab^3"), ["b^4"]);
        assert!(act(&inf, 1, "b^2").is_empty());
    }

    #[test]
    fn r_relation() {
        let r = r_module(20);
        let x0 = r.index_of("x0").unwrap();
        let x1 = r.index_of("ab").unwrap();
        assert_eq!(r.degree(x0), BiDegree::new(-1, 0));
        assert_eq!(r.degree(x1), BiDegree::new(3, 2));
        // Sq2 Sq1 Sq2 x0 = Sq1 x1
        assert_eq!(r.act_word(&[1, 0, 1], &[x0]), r.act_word(&[0], &[x1]));
        for i in 1..4 {
            let xi = r.index_of(&dq_name(true, 2 * i - 1)).unwrap();
            let xn = r.index_of(&dq_name(true, 2 * i + 1)).unwrap();
            assert_eq!(r.degree(xi), BiDegree::new(4 * i - 1, 2 * i));
            assert_eq!(r.act_word(&[1, 0, 1], &[xi]), r.act_word(&[0], &[xn]));
        }
    }

    #[test]
    fn r_periodicity_corrected() {
        // R above degree 3, modulo the M₂-span of b², is Σ^{4,2} R.
        let r = r_module(30);
        let upper = r.degree_window(2, 30);
        let b2 = upper.index_of("b^2").unwrap();
        let keep: Vec<usize> = (0..upper.len()).filter(|&i| i != b2).collect();
        let shifted = r_module(26).suspend(4, 2);
        assert_eq!(keep.len(), shifted.len());
        for (p, &i) in keep.iter().enumerate() {
            assert_eq!(upper.degree(i), shifted.degree(p));
            for g in 0..2 {
                let lhs: Vec<usize> = upper.actions[g][i]
                    .iter()
                    .filter(|&&j| j != b2)
                    .map(|j| keep.iter().position(|k| k == j).unwrap())
                    .collect();
                assert_eq!(lhs, shifted.actions[g][p], "{}", upper.basis[i].name);
            }
        }
        // The uncorrected statement fails: Sq1 x1 = b² has no counterpart.
        let x1 = upper.index_of("ab").unwrap();
        assert_eq!(upper.actions[0][x1], vec![b2]);
        assert!(shifted.actions[0][0].is_empty());
    }

    #[test]
    fn builtins_validate() {
        for name in [
            "M2",
            "R",
            "DQinf",
            "DQ(2)",
            "DQ(14)",
            "DQ(16)",
            "DQ(17)",
            "DQ(15)",
            "DQquot(16,8)",
            "Sigma(1,0,M2)",
            "DirectSum(DQ(14),Sigma(15,8,M2))",
        ] {
            let m = builtin(name, 30).unwrap();
            let rep = validate(&m);
            assert!(rep.ok(), "{name}: {:?}", rep.failures);
        }
        let s = builtin("Sigma(1,0,M2)", 10).unwrap();
        assert_eq!(s.basis[0].degree, BiDegree::new(1, 0));
        assert!(s.actions.iter().all(|a| a[0].is_empty()));
    }

    #[test]
    fn mutated_dq6_fails() {
        let mut m = dq(6);
        let b2 = m.index_of("b^2").unwrap();
        let b3 = m.index_of("b^3").unwrap();
        m.set_action(1, b2, [b3]);
        let rep = validate(&m);
        assert!(!rep.ok());
        assert!(rep.failures.iter().any(|f| f.contains("Sq2Sq2") && f.ends_with(" b")));
    }

    #[test]
    fn dq3_splits() {
        let m = dq(3);
        let s = builtin("DirectSum(DQ(2),Sigma(3,2,M2))", 10).unwrap();
        let f = ModuleMap {
            images: vec![vec![0], vec![1], vec![2]],
        };
        assert_eq!(
            m.basis.iter().map(|b| b.degree).collect::<Vec<_>>(),
            s.basis.iter().map(|b| b.degree).collect::<Vec<_>>()
        );
        check_module_map(&m, &s, &f).unwrap();
        check_module_map(&s, &m, &f).unwrap();
    }

    #[test]
    fn dq_inclusions_commute() {
        for n in 1..16 {
            let (small, big) = (dq(n), dq(n + 1));
            // DQ(n+1) -> DQ(n) is the quotient by the top cell.
            let f = map_by(&big, &small, |s| Some(s.to_string()));
            check_module_map(&big, &small, &f).unwrap();
        }
    }

    #[test]
    fn file_roundtrip_and_errors() {
        let text = "algebra A1\nmodule DQ2\nbasis a 1 1\nbasis b 2 1\nSq1 a = b\n";
        let m = parse_module(text).unwrap();
        let mut d = dq(2);
        d.name = "DQ2".into();
        assert_eq!(m, d);
        for name in ["R", "DQ(17)", "DirectSum(DQ(2),Sigma(3,2,M2))"] {
            let m = builtin(name, 20).unwrap();
            assert_eq!(parse_module(&render_module(&m)).unwrap().basis, m.basis);
            assert_eq!(parse_module(&render_module(&m)).unwrap().actions, m.actions);
        }
        let bad = "algebra A1\nbasis a 1 1\nbasis b 2 1\nSq1 a = tau^1 b\n";
        assert!(matches!(
            parse_module(bad),
            Err(ModuleError::Homogeneity { line: 4, .. })
        ));
        let bad = "algebra A1\nbasis a 1 1\nSq1 a = c\n";
        assert!(matches!(parse_module(bad), Err(ModuleError::UnknownBasis { .. })));
        let bad = "algebra A1\nbasis a 1\n";
        assert!(matches!(parse_module(bad), Err(ModuleError::Syntax { line: 2, .. })));
        let e1 = "algebra E1\nbasis x 0 0\nbasis y 1 0\nQ0 x = y\n";
        assert_eq!(parse_module(e1).unwrap().actions[0][0], vec![1]);
    }

    #[test]
    fn ses_builtins() {
        for (name, n) in SES_FAMILIES {
            let s = ses_builtin(name, n, 30).unwrap();
            assert!(check_ses(&s).is_empty());
        }
        assert!(matches!(
            ses_builtin("DQ2_block", 16, 30),
            Err(ModuleError::CongruenceMismatch { .. })
        ));
        assert!(matches!(
            ses_builtin("top_cell", 16, 30),
            Err(ModuleError::CongruenceMismatch { .. })
        ));
        let s = ses_builtin("top_cell", 17, 30).unwrap();
        assert_eq!(s.sub.basis[0].degree, BiDegree::new(18, 9));
        let s = ses_builtin("R_over_DQinf", 0, 30).unwrap();
        assert_eq!(s.quotient.basis[0].degree, BiDegree::new(-1, 0));
        // A wrong inclusion is caught.
        let mut bad = ses_builtin("top_cell", 17, 30).unwrap();
        bad.inclusion.images[0] = vec![0];
        assert!(!check_ses(&bad).is_empty());
    }

    #[test]
    fn unknown_and_truncation() {
        assert!(matches!(builtin("Foo", 10), Err(ModuleError::UnknownName(_))));
        assert!(matches!(
            builtin("DQinf", 0),
            Err(ModuleError::TruncationTooSmall { .. })
        ));
    }
}
