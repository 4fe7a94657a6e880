//! Minimal free resolutions and Ext charts.
//!
//! A free module `F_s` has M₂-basis `(monomial, generator)`. In a fixed
//! topological degree every element is an F₂-combination of those pairs,
//! each implicitly multiplied by the τ-power its weight demands, so the
//! whole computation is bit-matrix reduction ordered by weight.

use crate::f2::{BitVec, ColumnReducer, Echelon};
use crate::modules::SteenrodModule;
use crate::steenrod::MultTable;
use crate::tau_linalg::{graded_homology, BiDegree, GradedModuleShape, TauMatrix, TauPoly};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("module {name} is truncated at {have}, need {need}")]
    TruncationTooSmall { name: String, have: i32, need: i32 },
    #[error("stage {s} generator at degree {a} breaks connectivity (bottom {bottom})")]
    Connectivity { s: usize, a: i32, bottom: i32 },
}

/// A generator of a free stage together with its differential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub degree: BiDegree,
    /// `(monomial, target)` pairs; at stage 0 the targets are module basis
    /// indices and the monomial is always the unit.
    pub d: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default)]
pub struct FreeStage {
    pub s: usize,
    pub gens: Vec<Generator>,
    by_degree: BTreeMap<i32, Vec<usize>>,
}

impl FreeStage {
    fn push(&mut self, g: Generator) -> usize {
        let id = self.gens.len();
        self.by_degree.entry(g.degree.a).or_default().push(id);
        self.gens.push(g);
        id
    }

    /// Generators of topological degree exactly `a`.
    pub fn gens_in_degree(&self, a: i32) -> &[usize] {
        self.by_degree.get(&a).map_or(&[], Vec::as_slice)
    }
}

/// A minimal free resolution through `(s_max, t_max)`.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub module: SteenrodModule,
    pub s_max: usize,
    pub t_max: i32,
    pub valid_t: i32,
    /// Stages `0..=s_max + 1`; the last one only exists to compute Ext at
    /// `s_max`.
    pub stages: Vec<FreeStage>,
    table: &'static MultTable,
    mono_action: Vec<Vec<Vec<usize>>>,
}

/// `(monomial, generator)` basis of a free stage in one degree, sorted by
/// weight.
pub type FreeBasis = Vec<(usize, usize)>;

fn thread_count() -> usize {
    std::env::var("MOTIVIC_EXT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or(1)
}

impl Resolution {
    pub fn table(&self) -> &'static MultTable {
        self.table
    }

    pub fn bottom(&self) -> i32 {
        self.module.min_degree().unwrap_or(0)
    }

    /// Weight of a free basis element.
    pub fn weight(&self, s: usize, (k, g): (usize, usize)) -> i32 {
        self.table.degree(k).b + self.stages[s].gens[g].degree.b
    }

    pub fn free_basis(&self, s: usize, a: i32) -> FreeBasis {
        free_basis(self.table, &self.stages[s], a)
    }

    /// Module basis elements in degree `a`, sorted by weight.
    pub fn module_basis(&self, a: i32) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.module.len())
            .filter(|&i| self.module.degree(i).a == a)
            .collect();
        v.sort_by_key(|&i| (self.module.degree(i).b, i));
        v
    }

    /// `d(k · g)` for a basis element of stage `s ≥ 1`, as pairs in stage `s−1`.
    pub fn apply_d(&self, s: usize, (k, g): (usize, usize)) -> Vec<(usize, usize)> {
        let mut out: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        for &(k2, h) in &self.stages[s].gens[g].d {
            if let Some((_, k3)) = self.table.mul_basis(k, k2) {
                let e = out.entry((k3, h)).or_insert(false);
                *e = !*e;
            }
        }
        out.into_iter().filter(|p| p.1).map(|p| p.0).collect()
    }

    /// `d(k · g)` for a stage-0 basis element, as module basis indices.
    pub fn apply_d0(&self, (k, g): (usize, usize)) -> Vec<usize> {
        apply_augmentation(&self.mono_action, &self.stages[0].gens[g].d, k)
    }

    /// Check `d ∘ d = 0` on every generator.
    pub fn check_d_squared(&self) -> Result<(), String> {
        for s in 1..self.stages.len() {
            for (g, gen) in self.stages[s].gens.iter().enumerate() {
                let mut acc: BTreeMap<(usize, usize), bool> = BTreeMap::new();
                let mut acc0: BTreeMap<usize, bool> = BTreeMap::new();
                for &(k, h) in &gen.d {
                    if s == 1 {
                        for x in self.apply_d0((k, h)) {
                            *acc0.entry(x).or_default() ^= true;
                        }
                    } else {
                        for x in self.apply_d(s - 1, (k, h)) {
                            *acc.entry(x).or_default() ^= true;
                        }
                    }
                }
                if acc.values().any(|&v| v) || acc0.values().any(|&v| v) {
                    return Err(format!("d∘d ≠ 0 on stage {s} generator {g} at {}", gen.degree));
                }
            }
        }
        Ok(())
    }

    /// Image of `d_s` on `F_s(a)` as columns over the target basis.
    pub(crate) fn d_columns(&self, s: usize, a: i32, src: &FreeBasis) -> (Vec<BitVec>, Vec<i32>) {
        if s == 0 {
            let rows = self.module_basis(a);
            let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let cols = src
                .iter()
                .map(|&e| BitVec::from_indices(rows.len(), self.apply_d0(e).into_iter().map(|i| pos[&i])))
                .collect();
            let w = rows.iter().map(|&i| self.module.degree(i).b).collect();
            (cols, w)
        } else {
            let rows = self.free_basis(s - 1, a);
            let pos: BTreeMap<(usize, usize), usize> = rows.iter().enumerate().map(|(p, &e)| (e, p)).collect();
            let cols = src
                .iter()
                .map(|&e| BitVec::from_indices(rows.len(), self.apply_d(s, e).into_iter().map(|x| pos[&x])))
                .collect();
            let w = rows.iter().map(|&e| self.weight(s - 1, e)).collect();
            (cols, w)
        }
    }

    /// F₂-rank checks of exactness at `F_s` in degree `a`, for each weight.
    pub fn check_exact(&self, s: usize, a: i32) -> Result<(), String> {
        let src = self.free_basis(s, a);
        let sw: Vec<i32> = src.iter().map(|&e| self.weight(s, e)).collect();
        let (cols, _) = self.d_columns(s, a, &src);
        let up = self.free_basis(s + 1, a);
        let uw: Vec<i32> = up.iter().map(|&e| self.weight(s + 1, e)).collect();
        let (ucols, _) = self.d_columns(s + 1, a, &up);
        let lo = sw.iter().chain(&uw).copied().min().unwrap_or(0);
        let hi = sw.iter().chain(&uw).copied().max().unwrap_or(0);
        let target_dim = |b: i32| -> usize {
            if s == 0 {
                self.module_basis(a)
                    .iter()
                    .filter(|&&i| self.module.degree(i).b <= b)
                    .count()
            } else {
                0
            }
        };
        for b in lo..=hi {
            let dim = sw.iter().filter(|&&w| w <= b).count();
            let sel: Vec<&BitVec> = cols.iter().zip(&sw).filter(|(_, &w)| w <= b).map(|p| p.0).collect();
            let rank_d = crate::f2::rank_of(sel.first().map_or(0, |c| c.len()), sel);
            let usel: Vec<&BitVec> = ucols.iter().zip(&uw).filter(|(_, &w)| w <= b).map(|p| p.0).collect();
            let rank_u = crate::f2::rank_of(src.len(), usel);
            if dim - rank_d != rank_u {
                return Err(format!("not exact at stage {s}, degree ({a},{b})"));
            }
            if s == 0 && rank_d != target_dim(b) {
                return Err(format!("augmentation not onto at ({a},{b})"));
            }
        }
        Ok(())
    }

    /// Minimality: no differential has a unit coefficient on a generator.
    pub fn check_minimal(&self) -> Result<(), String> {
        for s in 1..self.stages.len() {
            for (g, gen) in self.stages[s].gens.iter().enumerate() {
                for &(k, h) in &gen.d {
                    if k == 0 && self.stages[s - 1].gens[h].degree == gen.degree {
                        return Err(format!("stage {s} generator {g} hits generator {h} with a unit"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dual differential `Hom(F_{s-1}, M₂) → Hom(F_s, M₂)` in degree `a`.
    /// Rows are stage-`s` generators in degree `a`, columns stage-`s−1`
    /// generators; the entry is `τ^{w_row − w_col}`.
    pub fn dual_matrix(&self, s: usize, a: i32) -> TauMatrix {
        let rows = self.stages.get(s).map_or(&[][..], |st| st.gens_in_degree(a));
        if s == 0 {
            return TauMatrix::zeros(rows.len(), 0);
        }
        let cols = self.stages[s - 1].gens_in_degree(a);
        let mut m = TauMatrix::zeros(rows.len(), cols.len());
        for (i, &h) in rows.iter().enumerate() {
            let hw = self.stages[s].gens[h].degree.b;
            for &(k, g) in &self.stages[s].gens[h].d {
                if k != 0 {
                    continue;
                }
                if let Some(j) = cols.iter().position(|&c| c == g) {
                    let e = hw - self.stages[s - 1].gens[g].degree.b;
                    m.set(i, j, TauPoly::monomial(e as u32)).expect("in range");
                }
            }
        }
        m
    }

    /// Additive Ext: cyclic summands with representing cocycles.
    pub fn ext(&self) -> ExtData {
        let mut classes = BTreeMap::new();
        for s in 0..=self.s_max {
            for a in self.bottom() + s as i32..=self.valid_t {
                let gens = self.stages[s].gens_in_degree(a);
                if gens.is_empty() {
                    continue;
                }
                let d_in = self.dual_matrix(s, a);
                let d_out = self.dual_matrix(s + 1, a);
                let grades: Vec<i32> = gens.iter().map(|&g| -self.stages[s].gens[g].degree.b).collect();
                let summands =
                    graded_homology(&d_in, &d_out, Some(&grades)).expect("dual complex of a resolution is a complex");
                let mut list: Vec<ExtClass> = summands
                    .into_iter()
                    .map(|h| {
                        let w = -h.grade.expect("nonzero representative");
                        let support = h
                            .rep
                            .iter()
                            .enumerate()
                            .filter(|(_, p)| !p.is_zero())
                            .map(|(i, _)| gens[i])
                            .collect();
                        ExtClass {
                            s,
                            a,
                            w,
                            torsion: h.torsion,
                            support,
                        }
                    })
                    .collect();
                list.sort_by(|x, y| {
                    (x.w, x.torsion.is_some(), x.torsion, &x.support).cmp(&(
                        y.w,
                        y.torsion.is_some(),
                        y.torsion,
                        &y.support,
                    ))
                });
                classes.insert((s, a), list);
            }
        }
        ExtData { classes }
    }
}

fn free_basis(table: &MultTable, stage: &FreeStage, a: i32) -> FreeBasis {
    let mut out = Vec::new();
    for (&ga, ids) in stage.by_degree.range(..=a) {
        for k in 0..table.len() {
            if table.degree(k).a + ga == a {
                for &g in ids {
                    out.push((k, g));
                }
            }
        }
    }
    out.sort_by_key(|&(k, g)| (table.degree(k).b + stage.gens[g].degree.b, g, k));
    out
}

fn apply_augmentation(mono_action: &[Vec<Vec<usize>>], image: &[(usize, usize)], k: usize) -> Vec<usize> {
    let mut acc: BTreeMap<usize, bool> = BTreeMap::new();
    for &(_, m) in image {
        for &x in &mono_action[k][m] {
            *acc.entry(x).or_default() ^= true;
        }
    }
    acc.into_iter().filter(|p| p.1).map(|p| p.0).collect()
}

/// One cyclic summand of Ext in homological degree `s`, internal degree
/// `(a, w)`. The cocycle is `Σ_{g ∈ support} τ^{w_g − w} g*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtClass {
    pub s: usize,
    pub a: i32,
    pub w: i32,
    /// `None` for a free M₂ summand, `Some(k)` for M₂/τᵏ.
    pub torsion: Option<u32>,
    pub support: Vec<usize>,
}

impl ExtClass {
    /// Adams tridegree `(a − s, s, w)`.
    pub fn tridegree(&self) -> (i32, usize, i32) {
        (self.a - self.s as i32, self.s, self.w)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExtData {
    /// Keyed by `(s, a)`.
    pub classes: BTreeMap<(usize, i32), Vec<ExtClass>>,
}

impl ExtData {
    pub fn iter(&self) -> impl Iterator<Item = &ExtClass> {
        self.classes.values().flatten()
    }
}

/// Build a minimal resolution. Stages `0..=s_max+1` are computed through
/// topological degree `t_max`.
pub fn resolve(module: &SteenrodModule, s_max: usize, t_max: i32) -> Result<Resolution, ResolveError> {
    if !module.complete && module.t_max < t_max {
        return Err(ResolveError::TruncationTooSmall {
            name: module.name.clone(),
            have: module.t_max,
            need: t_max,
        });
    }
    let table = module.table();
    let mut r = Resolution {
        module: module.clone(),
        s_max,
        t_max,
        valid_t: t_max - 6,
        stages: Vec::new(),
        table,
        mono_action: module.mono_action(),
    };
    let bottom = r.bottom();
    let threads = thread_count();
    for s in 0..=s_max + 1 {
        let degrees: Vec<i32> = (bottom + s as i32..=t_max).collect();
        // Kernels of d_{s-1} (or the module itself at s = 0) per degree are
        // independent of each other.
        let kernels: Vec<Vec<(BitVec, i32)>> = if s == 0 {
            degrees
                .iter()
                .map(|&a| {
                    let rows = r.module_basis(a);
                    (0..rows.len())
                        .map(|p| (BitVec::from_indices(rows.len(), [p]), r.module.degree(rows[p]).b))
                        .collect()
                })
                .collect()
        } else {
            let compute = |a: i32| -> Vec<(BitVec, i32)> {
                let src = r.free_basis(s - 1, a);
                let (cols, _) = r.d_columns(s - 1, a, &src);
                let rows = cols.first().map_or_else(
                    || {
                        if s == 1 {
                            r.module_basis(a).len()
                        } else {
                            r.free_basis(s - 2, a).len()
                        }
                    },
                    |c| c.len(),
                );
                let mut red = ColumnReducer::new(rows);
                for (c, &e) in cols.into_iter().zip(&src) {
                    red.push(c, r.weight(s - 1, e));
                }
                red.kernel().collect()
            };
            if threads > 1 {
                let chunk = degrees.len().div_ceil(threads).max(1);
                std::thread::scope(|sc| {
                    let handles: Vec<_> = degrees
                        .chunks(chunk)
                        .map(|ch| sc.spawn(move || ch.iter().map(|&a| compute(a)).collect::<Vec<_>>()))
                        .collect();
                    handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
                })
            } else {
                degrees.iter().map(|&a| compute(a)).collect()
            }
        };
        r.stages.push(FreeStage {
            s,
            ..Default::default()
        });
        for (&a, kernel) in degrees.iter().zip(kernels) {
            // Source basis of d_{s-1} in degree a (or module basis).
            let src: Vec<(usize, usize)> = if s == 0 {
                r.module_basis(a).into_iter().map(|i| (0, i)).collect()
            } else {
                r.free_basis(s - 1, a)
            };
            let pos: BTreeMap<(usize, usize), usize> = src.iter().enumerate().map(|(p, &e)| (e, p)).collect();
            let dim = src.len();
            // Images of existing generators of this stage, by weight.
            let mut image: Vec<(BitVec, i32)> = Vec::new();
            for (k, g) in r.free_basis(s, a) {
                let v = if s == 0 {
                    let img = r.apply_d0((k, g));
                    BitVec::from_indices(dim, img.into_iter().map(|i| pos[&(0, i)]))
                } else {
                    let img = r.apply_d(s, (k, g));
                    BitVec::from_indices(dim, img.into_iter().map(|e| pos[&e]))
                };
                image.push((v, r.weight(s, (k, g))));
            }
            image.sort_by_key(|p| p.1);
            let mut ech = Echelon::new(dim);
            let mut ii = 0;
            for (kv, kw) in kernel {
                while ii < image.len() && image[ii].1 <= kw {
                    ech.insert(&image[ii].0);
                    ii += 1;
                }
                if ech.insert(&kv) {
                    let d: Vec<(usize, usize)> = kv.ones().map(|p| src[p]).collect();
                    let degree = BiDegree::new(a, kw);
                    if a < bottom + s as i32 {
                        return Err(ResolveError::Connectivity { s, a, bottom });
                    }
                    r.stages[s].push(Generator { degree, d });
                }
            }
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Charts

/// Adams tridegree `(n, s, w)`.
pub type Tri = (i32, usize, i32);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartCell {
    pub n: i32,
    pub s: usize,
    pub w: i32,
    pub free: usize,
    pub torsion: Vec<u32>,
    /// Class labels in drawing order (free classes first).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
    /// Resolution generators supporting the representing cocycles.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gens: Vec<usize>,
}

impl ChartCell {
    pub fn shape(&self) -> GradedModuleShape {
        GradedModuleShape {
            free_rank: self.free,
            torsion: self.torsion.clone(),
        }
    }
}

/// A product edge: `op · (class at from) = τ^tau · (class at to)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEdge {
    pub op: String,
    /// `[n, s, w, index within cell]`
    pub from: [i32; 4],
    pub to: [i32; 4],
    pub tau: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtChart {
    #[serde(default)]
    pub module: String,
    #[serde(default)]
    pub valid_t: i32,
    #[serde(default)]
    pub s_max: usize,
    pub cells: Vec<ChartCell>,
    #[serde(default)]
    pub edges: Vec<ChartEdge>,
}

impl ExtChart {
    pub fn cell(&self, t: Tri) -> Option<&ChartCell> {
        self.cells.iter().find(|c| (c.n, c.s, c.w) == t)
    }

    pub fn shape(&self, t: Tri) -> GradedModuleShape {
        self.cell(t).map(ChartCell::shape).unwrap_or_default()
    }

    pub fn shapes(&self) -> BTreeMap<Tri, GradedModuleShape> {
        self.cells.iter().map(|c| ((c.n, c.s, c.w), c.shape())).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart serializes")
    }

    pub fn from_json(s: &str) -> Result<ExtChart, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Keep cells with `n ≤ n_max` and `s ≤ s_max` (edges likewise).
    pub fn window(&self, n_max: i32, s_max: usize) -> ExtChart {
        let keep = |t: &[i32; 4]| t[0] <= n_max && t[1] as usize <= s_max;
        ExtChart {
            module: self.module.clone(),
            valid_t: self.valid_t,
            s_max: self.s_max.min(s_max),
            cells: self
                .cells
                .iter()
                .filter(|c| c.n <= n_max && c.s <= s_max)
                .cloned()
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| keep(&e.from) && keep(&e.to))
                .cloned()
                .collect(),
        }
    }
}

fn default_name(c: &ExtClass) -> String {
    let (n, s, w) = c.tridegree();
    format!("g{n}_{s}_{w}")
}

/// Cells of the chart for `r` (no product edges).
pub fn ext_chart(r: &Resolution) -> ExtChart {
    chart_from_ext(r, &r.ext(), &|c| default_name(c))
}

pub fn chart_from_ext(r: &Resolution, ext: &ExtData, name: &dyn Fn(&ExtClass) -> String) -> ExtChart {
    let mut cells: BTreeMap<Tri, ChartCell> = BTreeMap::new();
    for c in ext.iter() {
        let (n, s, w) = c.tridegree();
        let cell = cells.entry((n, s, w)).or_insert_with(|| ChartCell {
            n,
            s,
            w,
            free: 0,
            torsion: Vec::new(),
            names: Vec::new(),
            gens: Vec::new(),
        });
        match c.torsion {
            None => cell.free += 1,
            Some(k) => cell.torsion.push(k),
        }
        cell.names.push(name(c));
        cell.gens.extend(&c.support);
    }
    for c in cells.values_mut() {
        c.torsion.sort_unstable();
        c.gens.sort_unstable();
        c.gens.dedup();
    }
    ExtChart {
        module: r.module.name.clone(),
        valid_t: r.valid_t,
        s_max: r.s_max,
        cells: cells.into_values().collect(),
        edges: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{builtin, m2};

    #[test]
    fn m2_low_stages() {
        let r = resolve(&m2(), 4, 14).unwrap();
        let degs =
            |s: usize| -> Vec<(i32, i32)> { r.stages[s].gens.iter().map(|g| (g.degree.a, g.degree.b)).collect() };
        assert_eq!(degs(0), vec![(0, 0)]);
        assert_eq!(degs(1), vec![(1, 0), (2, 1)]);
        assert!(degs(3).contains(&(7, 2)));
        assert!(degs(4).contains(&(12, 4)));
        r.check_d_squared().unwrap();
        r.check_minimal().unwrap();
        for s in 0..=4 {
            for a in 0..=14 {
                r.check_exact(s, a).unwrap();
            }
        }
    }

    #[test]
    fn m2_cells() {
        let r = resolve(&m2(), 6, 16).unwrap();
        let c = ext_chart(&r);
        assert_eq!(
            c.shape((3, 3, 3)),
            GradedModuleShape {
                free_rank: 0,
                torsion: vec![1]
            }
        );
        assert_eq!(
            c.shape((1, 1, 1)),
            GradedModuleShape {
                free_rank: 1,
                torsion: vec![]
            }
        );
        assert_eq!(c.shape((0, 1, 0)).free_rank, 1);
        assert_eq!(c.shape((4, 3, 2)).free_rank, 1);
        assert!(c.cells.iter().all(|x| !(x.n == 2 && x.s == 1)));
        let back = ExtChart::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn dq2_bottom_cell() {
        let r = resolve(&builtin("DQ(2)", 20).unwrap(), 3, 12).unwrap();
        let c = ext_chart(&r);
        assert_eq!(c.shape((1, 0, 1)).free_rank, 1);
    }

    #[test]
    fn truncation_is_checked() {
        let m = builtin("DQinf", 10).unwrap();
        assert!(matches!(
            resolve(&m, 2, 20),
            Err(ResolveError::TruncationTooSmall { .. })
        ));
    }
}
