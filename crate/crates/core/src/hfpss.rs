//! Homotopy fixed point spectral sequence for Z/2 acting on KGL and kgl by
//! β ↦ −β.
//!
//! Tridegrees are `(n, p, u)`: stem, filtration, weight, with
//! `E₂^{n,p,u} = H^p(Z/2; π_{n+p,u})`. Groups are 2-local and finitely
//! generated: free 2-adic rank plus 2-power torsion.

use crate::chart::{Dot, Drawing, Glyph};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HfpssError {
    #[error("empty window")]
    WindowEmpty,
    #[error("unknown ring `{0}` (expected KGL or kgl)")]
    UnknownRing(String),
    #[error("{0} is not a cycle")]
    NotACycle(String),
}

// ---------------------------------------------------------------------------
// Integer linear algebra

type Mat = Vec<Vec<i64>>;

fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0; c]; r]
}

fn ident(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn ncols(m: &Mat, c: usize) -> usize {
    m.first().map_or(c, Vec::len)
}

#[cfg(test)]
fn matmul(a: &Mat, b: &Mat, inner: usize, c: usize) -> Mat {
    let mut out = zeros(a.len(), c);
    for i in 0..a.len() {
        for k in 0..inner {
            if a[i][k] != 0 {
                for j in 0..c {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

/// Smith normal form `U · m · V = D` over Z, with `Uinv = U⁻¹` and
/// `Vinv = V⁻¹`. Diagonal entries are non-negative and each divides the next.
struct Smith {
    d: Vec<i64>,
    u: Mat,
    uinv: Mat,
    v: Mat,
    #[cfg_attr(not(test), allow(dead_code))]
    vinv: Mat,
}

fn smith(m: &Mat, rows: usize, cols: usize) -> Smith {
    let mut a = m.clone();
    if a.is_empty() {
        a = zeros(rows, cols);
    }
    let (mut u, mut uinv, mut v, mut vinv) = (ident(rows), ident(rows), ident(cols), ident(cols));
    // Row op: row_i += q·row_j ; U updates the same way, U⁻¹ by the inverse column op.
    let row_add = |a: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize, j: usize, q: i64| {
        for c in 0..cols {
            a[i][c] += q * a[j][c];
        }
        for c in 0..rows {
            u[i][c] += q * u[j][c];
        }
        for r in 0..rows {
            uinv[r][j] -= q * uinv[r][i];
        }
    };
    let col_add = |a: &mut Mat, v: &mut Mat, vinv: &mut Mat, i: usize, j: usize, q: i64| {
        for r in 0..rows {
            a[r][i] += q * a[r][j];
        }
        for r in 0..cols {
            v[r][i] += q * v[r][j];
        }
        for c in 0..cols {
            vinv[j][c] -= q * vinv[i][c];
        }
    };
    let row_swap = |a: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize, j: usize| {
        a.swap(i, j);
        u.swap(i, j);
        for r in uinv.iter_mut() {
            r.swap(i, j);
        }
    };
    let col_swap = |a: &mut Mat, v: &mut Mat, vinv: &mut Mat, i: usize, j: usize| {
        for r in a.iter_mut() {
            r.swap(i, j);
        }
        for r in v.iter_mut() {
            r.swap(i, j);
        }
        vinv.swap(i, j);
    };
    let row_neg = |a: &mut Mat, u: &mut Mat, uinv: &mut Mat, i: usize| {
        for x in a[i].iter_mut() {
            *x = -*x;
        }
        for x in u[i].iter_mut() {
            *x = -*x;
        }
        for r in uinv.iter_mut() {
            r[i] = -r[i];
        }
    };
    let mut d = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the remaining block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            row_swap(&mut a, &mut u, &mut uinv, t, bi);
            col_swap(&mut a, &mut v, &mut vinv, t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[i][t] / a[t][t];
                if q != 0 {
                    row_add(&mut a, &mut u, &mut uinv, i, t, -q);
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = a[t][j] / a[t][t];
                if q != 0 {
                    col_add(&mut a, &mut v, &mut vinv, j, t, -q);
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and retry.
            let p = a[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => row_add(&mut a, &mut u, &mut uinv, t, i, 1),
                None => break,
            }
        }
        if a[t][t] < 0 {
            row_neg(&mut a, &mut u, &mut uinv, t);
        }
        d.push(a[t][t]);
    }
    Smith { d, u, uinv, v, vinv }
}

/// Columns spanning `{x : m x = 0}`.
fn kernel(m: &Mat, rows: usize, cols: usize) -> Vec<Vec<i64>> {
    let s = smith(m, rows, cols);
    let rank = s.d.iter().filter(|&&x| x != 0).count();
    (rank..cols).map(|j| (0..cols).map(|r| s.v[r][j]).collect()).collect()
}

/// A basis of the lattice spanned by `vs` in Z^dim.
fn lattice_basis(vs: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let m: Mat = (0..dim).map(|r| vs.iter().map(|v| v[r]).collect()).collect();
    let s = smith(&m, dim, vs.len());
    s.d.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .map(|(i, &x)| (0..dim).map(|r| s.uinv[r][i] * x).collect())
        .collect()
}

/// Solve `Σ y_i basis_i = v` over Z, if possible.
fn solve_in(basis: &[Vec<i64>], dim: usize, v: &[i64]) -> Option<Vec<i64>> {
    if basis.is_empty() {
        return v.iter().all(|&x| x == 0).then(Vec::new);
    }
    let q = basis.len();
    let m: Mat = (0..dim).map(|r| basis.iter().map(|b| b[r]).collect()).collect();
    let s = smith(&m, dim, q);
    let uv: Vec<i64> = (0..dim).map(|i| (0..dim).map(|k| s.u[i][k] * v[k]).sum()).collect();
    let mut z = vec![0i64; q];
    for i in 0..dim {
        let di = s.d.get(i).copied().unwrap_or(0);
        if di == 0 {
            if uv[i] != 0 {
                return None;
            }
        } else {
            if uv[i] % di != 0 {
                return None;
            }
            z[i] = uv[i] / di;
        }
    }
    Some((0..q).map(|r| (0..q).map(|c| s.v[r][c] * z[c]).sum()).collect())
}

// ---------------------------------------------------------------------------
// Groups

/// A 2-local finitely generated abelian group: 2-adic free rank plus cyclic
/// summands `Z/2^e`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group2 {
    pub free: usize,
    pub torsion: Vec<u32>,
}

impl Group2 {
    pub fn is_zero(&self) -> bool {
        self.free == 0 && self.torsion.is_empty()
    }

    fn from_invariants(factors: &[i64], rank_free: usize) -> Group2 {
        let mut torsion: Vec<u32> = factors
            .iter()
            .filter(|&&d| d != 0)
            .map(|d| d.trailing_zeros())
            .filter(|&e| e > 0)
            .collect();
        torsion.sort_unstable();
        Group2 {
            free: rank_free,
            torsion,
        }
    }
}

impl fmt::Display for Group2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free {
            0 => {}
            1 => parts.push("Z2".to_string()),
            r => parts.push(format!("Z2^{r}")),
        }
        for e in &self.torsion {
            parts.push(if *e == 1 { "Z/2".into() } else { format!("Z/2^{e}") });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coeff {
    Trivial,
    Sign,
}

/// `H^p(Z/2; Z)` or `H^p(Z/2; Z(−1))`, from the 2-periodic resolution
/// `… → Z[C₂] --(1+σ)--> Z[C₂] --(1−σ)--> Z[C₂] → Z`.
pub fn group_cohomology(p: u32, coeff: Coeff) -> Group2 {
    let sigma: i64 = match coeff {
        Coeff::Trivial => 1,
        Coeff::Sign => -1,
    };
    // Cochain maps d^p: Hom(P_p, M) = M → M; even p: 1 − σ, odd p: 1 + σ.
    let d = |q: u32| -> Mat { vec![vec![if q.is_multiple_of(2) { 1 - sigma } else { 1 + sigma }]] };
    let out = d(p);
    let cycles = kernel(&out, 1, 1);
    let boundaries: Vec<Vec<i64>> = if p == 0 { Vec::new() } else { vec![vec![d(p - 1)[0][0]]] };
    quotient(&cycles, &boundaries, 1).0
}

/// `K / S` for lattices `S ⊆ K ⊆ Z^dim`. Returns the group and, for each
/// summand, a representative in Z^dim and its order exponent (`None` = free).
fn quotient(k: &[Vec<i64>], s: &[Vec<i64>], dim: usize) -> (Group2, Vec<(Vec<i64>, Option<u32>)>) {
    let kb = lattice_basis(k, dim);
    let q = kb.len();
    let coords: Vec<Vec<i64>> = s
        .iter()
        .map(|v| solve_in(&kb, dim, v).expect("subgroup lies in the kernel"))
        .filter(|c| c.iter().any(|&x| x != 0))
        .collect();
    let y: Mat = (0..q).map(|r| coords.iter().map(|c| c[r]).collect()).collect();
    let sm = smith(&y, q, coords.len());
    let mut reps = Vec::new();
    let mut factors = Vec::new();
    let mut free = 0;
    for i in 0..q {
        let di = sm.d.get(i).copied().unwrap_or(0);
        let order = if di == 0 {
            free += 1;
            None
        } else {
            let e = di.trailing_zeros();
            factors.push(di);
            if e == 0 {
                continue;
            }
            Some(e)
        };
        let rep: Vec<i64> = (0..dim)
            .map(|r| (0..q).map(|c| kb[c][r] * sm.uinv[c][i]).sum())
            .collect();
        reps.push((rep, order));
    }
    let _ = ncols(&y, 0);
    (Group2::from_invariants(&factors, free), reps)
}

// ---------------------------------------------------------------------------
// Coefficient rings and monomials

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffRing {
    /// `Z₂[τ, β^{±1}]`
    #[serde(rename = "KGL")]
    Kgl,
    /// `Z₂[τ, β]`
    #[serde(rename = "kgl")]
    Connective,
}

impl FromStr for CoeffRing {
    type Err = HfpssError;
    fn from_str(s: &str) -> Result<Self, HfpssError> {
        match s {
            "KGL" => Ok(CoeffRing::Kgl),
            "kgl" => Ok(CoeffRing::Connective),
            _ => Err(HfpssError::UnknownRing(s.into())),
        }
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffRing::Kgl => "KGL",
            CoeffRing::Connective => "kgl",
        })
    }
}

impl CoeffRing {
    /// The monomial `τ^k β^j` spanning `π_{m,u}`, if any.
    pub fn homotopy_monomial(self, m: i32, u: i32) -> Option<(u32, i32)> {
        if m % 2 != 0 {
            return None;
        }
        let j = m / 2;
        let k = j - u;
        if k < 0 || (self == CoeffRing::Connective && j < 0) {
            return None;
        }
        Some((k as u32, j))
    }

    /// The involution on `τ^k β^j` is `(−1)^j`.
    pub fn action(j: i32) -> Coeff {
        if j % 2 == 0 {
            Coeff::Trivial
        } else {
            Coeff::Sign
        }
    }
}

/// `τ^k h1^i c^m` in E₂, with `h1 ∈ (1,1,1)` and `c ∈ (4,0,2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HMono {
    pub k: u32,
    pub i: u32,
    pub m: i32,
}

impl HMono {
    pub fn new(k: u32, i: u32, m: i32) -> HMono {
        HMono { k, i, m }
    }

    pub fn tridegree(&self) -> (i32, i32, i32) {
        let i = self.i as i32;
        (i + 4 * self.m, i, i + 2 * self.m - self.k as i32)
    }

    pub fn mul(&self, o: &HMono) -> HMono {
        HMono::new(self.k + o.k, self.i + o.i, self.m + o.m)
    }

    /// Whether the monomial lives in E₂ of `ring` (β-exponent `i + 2m ≥ 0`
    /// for kgl).
    pub fn exists_in(&self, ring: CoeffRing) -> bool {
        ring == CoeffRing::Kgl || self.i as i32 + 2 * self.m >= 0
    }

    /// Additive order in E₂: free when `i = 0`, else 2 (`2h1 = 0`).
    fn order(&self) -> Option<u32> {
        (self.i > 0).then_some(1)
    }

    pub fn name(&self, ring: CoeffRing) -> String {
        let mut parts = Vec::new();
        let pw = |s: &str, e: i64| if e == 1 { s.to_string() } else { format!("{s}^{e}") };
        if self.k > 0 {
            parts.push(pw("tau", self.k as i64));
        }
        let (mut i, m) = (self.i as i64, self.m as i64);
        if ring == CoeffRing::Connective && m < 0 {
            // h1^i c^m = h1^{i+2m} z^{-m} using cz = h1².
            i += 2 * m;
            if i > 0 {
                parts.push(pw("h1", i));
            }
            parts.push(pw("z", -m));
        } else {
            if i > 0 {
                parts.push(pw("h1", i));
            }
            if m != 0 {
                parts.push(pw("c", m));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

/// The E₂ monomial in tridegree `(n, p, u)`, if any.
pub fn monomial_at(ring: CoeffRing, n: i32, p: i32, u: i32) -> Option<HMono> {
    if p < 0 || (n - p) % 4 != 0 {
        return None;
    }
    let m = (n - p) / 4;
    let k = p + 2 * m - u;
    let mono = HMono::new(u32::try_from(k).ok()?, p as u32, m);
    mono.exists_in(ring).then_some(mono)
}

/// `d₃` on generators: `d₃(τ) = 0`, `d₃(h1) = 0`, `d₃(c) = τ h1³`. On a
/// monomial it is the derivation extension: `m · τ^{k+1} h1^{i+3} c^{m−1}`.
pub fn d3_generator(g: char) -> Option<(i64, HMono)> {
    match g {
        'c' => Some((1, HMono::new(1, 3, 0))),
        _ => None,
    }
}

pub fn d3(x: &HMono) -> (i64, HMono) {
    // Leibniz over the exponent of c; τ and h1 are cycles.
    let (coef, dc) = d3_generator('c').expect("d3(c) is given");
    let rest = HMono::new(x.k, x.i, x.m - 1);
    (coef * x.m as i64, rest.mul(&dc))
}

// ---------------------------------------------------------------------------
// Pages

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n_lo: i32,
    pub n_hi: i32,
    pub p_max: i32,
    pub u_lo: i32,
    pub u_hi: i32,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            n_lo: -10,
            n_hi: 10,
            p_max: 9,
            u_lo: -12,
            u_hi: 12,
        }
    }
}

impl Window {
    fn check(&self) -> Result<(), HfpssError> {
        if self.n_lo > self.n_hi || self.p_max < 0 || self.u_lo > self.u_hi {
            return Err(HfpssError::WindowEmpty);
        }
        Ok(())
    }

    fn contains(&self, (n, p, u): (i32, i32, i32)) -> bool {
        n >= self.n_lo && n <= self.n_hi && p >= 0 && p <= self.p_max && u >= self.u_lo && u <= self.u_hi
    }

    fn widen(&self, r: i32) -> Window {
        Window {
            n_lo: self.n_lo - 1,
            n_hi: self.n_hi + 1,
            p_max: self.p_max + r,
            ..*self
        }
    }
}

/// One tridegree of a page: a subquotient `K / S` of the E₂ lattice on the
/// monomial basis, with chosen summand representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageCell {
    pub n: i32,
    pub p: i32,
    pub u: i32,
    pub group: Group2,
    /// Representatives as `coefficient · monomial`.
    pub reps: Vec<String>,
    #[serde(skip)]
    basis: Vec<HMono>,
    #[serde(skip)]
    cycles: Vec<Vec<i64>>,
    #[serde(skip)]
    boundaries: Vec<Vec<i64>>,
    #[serde(skip)]
    rep_vecs: Vec<(Vec<i64>, Option<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub ring: CoeffRing,
    pub r: u32,
    pub window: Window,
    pub cells: Vec<PageCell>,
    #[serde(skip)]
    all: BTreeMap<(i32, i32, i32), PageCell>,
}

fn fmt_rep(ring: CoeffRing, basis: &[HMono], v: &[i64]) -> String {
    let parts: Vec<String> = basis
        .iter()
        .zip(v)
        .filter(|(_, &c)| c != 0)
        .map(|(b, &c)| {
            if c == 1 {
                b.name(ring)
            } else {
                format!("{c} {}", b.name(ring))
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl Page {
    pub fn cell(&self, t: (i32, i32, i32)) -> Option<&PageCell> {
        self.all.get(&t)
    }

    pub fn group(&self, t: (i32, i32, i32)) -> Group2 {
        self.cell(t).map(|c| c.group.clone()).unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("page serializes")
    }

    /// Is `coef · mono` zero on this page? Errors if it is not a cycle.
    pub fn is_zero(&self, coef: i64, mono: &HMono) -> Result<bool, HfpssError> {
        let t = mono.tridegree();
        let Some(cell) = self.all.get(&t) else {
            return Ok(true);
        };
        let Some(pos) = cell.basis.iter().position(|b| b == mono) else {
            return Ok(true);
        };
        let mut v = vec![0i64; cell.basis.len()];
        v[pos] = coef;
        if solve_in(&lattice_basis(&cell.cycles, v.len()), v.len(), &v).is_none() {
            return Err(HfpssError::NotACycle(mono.name(self.ring)));
        }
        Ok(solve_in(&lattice_basis(&cell.boundaries, v.len()), v.len(), &v).is_some())
    }

    /// `(n, p)` columns as τ-towers: for each column, the top weight of
    /// each run of nonzero groups, its length (None when it reaches the
    /// bottom of the window) and whether the top is free.
    pub fn towers(&self) -> Vec<(i32, i32, i32, Option<u32>, bool, String)> {
        let mut cols: BTreeMap<(i32, i32), Vec<&PageCell>> = BTreeMap::new();
        for c in &self.cells {
            cols.entry((c.n, c.p)).or_default().push(c);
        }
        let mut out = Vec::new();
        for ((n, p), mut cells) in cols {
            cells.sort_by_key(|c| std::cmp::Reverse(c.u));
            let mut i = 0;
            while i < cells.len() {
                let top = cells[i];
                let mut j = i;
                while j + 1 < cells.len() && cells[j + 1].u == cells[j].u - 1 {
                    j += 1;
                }
                let len = (j - i + 1) as u32;
                let infinite = cells[j].u == self.window.u_lo;
                out.push((
                    n,
                    p,
                    top.u,
                    (!infinite).then_some(len),
                    top.group.free > 0,
                    top.reps.join(", "),
                ));
                i = j + 1;
            }
        }
        out
    }

    /// Chart drawing: boxes for free Z₂[τ] towers, solid dots for F₂[τ]
    /// towers, open circles for τ-torsion.
    pub fn drawing(&self) -> Drawing {
        let dots: Vec<Dot> = self
            .towers()
            .into_iter()
            .enumerate()
            .map(|(idx, (n, p, u, len, free, rep))| Dot {
                n,
                s: p,
                glyph: match (len, free) {
                    (None, true) => Glyph::Box,
                    (None, false) => Glyph::Solid,
                    (Some(_), _) => Glyph::Open,
                },
                label: format!("{rep}({u})"),
                key: [n, p, u, idx as i32],
            })
            .collect();
        Drawing {
            title: format!(
                "{} E{}",
                self.ring,
                if self.r == u32::MAX {
                    "inf".into()
                } else {
                    self.r.to_string()
                }
            ),
            n_range: (self.window.n_lo, self.window.n_hi),
            s_range: (0, self.window.p_max),
            dots,
            segments: Vec::new(),
        }
    }

    fn publish(ring: CoeffRing, r: u32, window: Window, all: BTreeMap<(i32, i32, i32), PageCell>) -> Page {
        let cells = all
            .values()
            .filter(|c| window.contains((c.n, c.p, c.u)) && !c.group.is_zero())
            .cloned()
            .collect();
        Page {
            ring,
            r,
            window,
            cells,
            all,
        }
    }
}

/// E₂ in the window (computed on a slightly larger window so that d₃ at
/// the edges is known).
pub fn e2_page(ring: CoeffRing, window: Window) -> Result<Page, HfpssError> {
    window.check()?;
    let big = window.widen(3);
    let mut all = BTreeMap::new();
    for n in big.n_lo..=big.n_hi {
        for p in 0..=big.p_max {
            for u in big.u_lo..=big.u_hi {
                let Some((_k, j)) = ring.homotopy_monomial(n + p, u) else {
                    continue;
                };
                let g = group_cohomology(p as u32, CoeffRing::action(j));
                if g.is_zero() {
                    continue;
                }
                let mono = monomial_at(ring, n, p, u).expect("nonzero cohomology has a monomial name");
                debug_assert_eq!(mono.order(), g.torsion.first().copied());
                let boundaries = g.torsion.iter().map(|e| vec![1i64 << e]).collect();
                all.insert(
                    (n, p, u),
                    PageCell {
                        n,
                        p,
                        u,
                        reps: vec![mono.name(ring)],
                        group: g.clone(),
                        basis: vec![mono],
                        cycles: vec![vec![1]],
                        boundaries,
                        rep_vecs: vec![(vec![1], g.torsion.first().copied())],
                    },
                );
            }
        }
    }
    Ok(Page::publish(ring, 2, window, all))
}

/// Matrix of d₃ from the E₂ basis at `src` to the E₂ basis at `tgt`.
fn d3_matrix(src: &[HMono], tgt: &[HMono]) -> Mat {
    let mut m = zeros(tgt.len(), src.len());
    for (j, x) in src.iter().enumerate() {
        let (c, y) = d3(x);
        if let Some(i) = tgt.iter().position(|t| *t == y) {
            m[i][j] += c;
        }
    }
    m
}

/// Homology of E₂ = E₃ under d₃, giving E₄.
pub fn run_d3(page: &Page) -> Page {
    let ring = page.ring;
    let mut all = BTreeMap::new();
    for (&(n, p, u), cell) in &page.all {
        let b = cell.basis.len();
        // Cycles: x with d₃ x ∈ relations of the target.
        let tgt = page.all.get(&(n - 1, p + 3, u));
        let cycles: Vec<Vec<i64>> = match tgt {
            None => cell.cycles.clone(),
            Some(t) => {
                let d = d3_matrix(&cell.basis, &t.basis);
                let c = t.basis.len();
                // [d | -R_t] (c × (b + #rels))
                let rels = &t.boundaries;
                let m: Mat = (0..c)
                    .map(|r| d[r].iter().copied().chain(rels.iter().map(|v| -v[r])).collect())
                    .collect();
                kernel(&m, c, b + rels.len())
                    .into_iter()
                    .map(|v| v[..b].to_vec())
                    .collect()
            }
        };
        let mut boundaries = cell.boundaries.clone();
        if let Some(s) = page.all.get(&(n + 1, p - 3, u)) {
            let d = d3_matrix(&s.basis, &cell.basis);
            for j in 0..s.basis.len() {
                boundaries.push((0..b).map(|i| d[i][j]).collect());
            }
        }
        let (group, rep_vecs) = quotient(&cycles, &boundaries, b);
        let reps = rep_vecs.iter().map(|(v, _)| fmt_rep(ring, &cell.basis, v)).collect();
        all.insert(
            (n, p, u),
            PageCell {
                n,
                p,
                u,
                group,
                reps,
                basis: cell.basis.clone(),
                cycles: lattice_basis(&cycles, b),
                boundaries,
                rep_vecs,
            },
        );
    }
    Page::publish(ring, 4, page.window, all)
}

/// Pairs `(source, target, r)` with both groups nonzero on E₄, for
/// `4 ≤ r ≤ p_max`. Empty means E₄ = E∞ in the window.
pub fn degree_audit(e4: &Page) -> Vec<((i32, i32, i32), (i32, i32, i32), i32)> {
    let w = e4.window;
    let mut out = Vec::new();
    for c in &e4.cells {
        for r in 4..=w.p_max {
            let t = (c.n - 1, c.p + r, c.u);
            if !w.contains(t) {
                continue;
            }
            if !e4.group(t).is_zero() {
                out.push(((c.n, c.p, c.u), t, r));
            }
        }
    }
    out
}

/// E∞ after checking that no differential beyond d₃ fits in the window.
pub fn e_infinity(ring: CoeffRing, window: Window) -> Result<(Page, Page, Page), HfpssError> {
    let e2 = e2_page(ring, window)?;
    let e4 = run_d3(&e2);
    let audit = degree_audit(&e4);
    assert!(audit.is_empty(), "room for a longer differential: {audit:?}");
    let mut einf = e4.clone();
    einf.r = u32::MAX;
    Ok((e2, e4, einf))
}

// ---------------------------------------------------------------------------
// Reading off homotopy

/// A named element of E∞: `coef · mono`.
#[derive(Clone, Debug)]
pub struct Named {
    pub name: &'static str,
    pub coef: i64,
    pub mono: HMono,
}

impl Named {
    /// Degree in π_{n,u}.
    pub fn pi_degree(&self) -> (i32, i32) {
        let (n, _, u) = self.mono.tridegree();
        (n, u)
    }
}

/// Verdict on one relation.
#[derive(Clone, Debug, Serialize)]
pub struct RelationVerdict {
    pub relation: String,
    pub holds: bool,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyReport {
    pub spectrum: String,
    pub presentation: String,
    pub generators: Vec<(String, (i32, i32), String)>,
    pub relations: Vec<RelationVerdict>,
    pub extensions: String,
    pub remarks: Vec<String>,
}

impl HomotopyReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "pi_*,* {} = {}\n\ngenerator | (n,u) | E-infinity representative\n",
            self.spectrum, self.presentation
        );
        for (g, (n, u), rep) in &self.generators {
            out.push_str(&format!("{g} | ({n},{u}) | {rep}\n"));
        }
        out.push_str("\nrelations\n");
        for r in &self.relations {
            let mark = if r.holds { "holds" } else { "FAILS" };
            if r.note.is_empty() {
                out.push_str(&format!("{}: {mark}\n", r.relation));
            } else {
                out.push_str(&format!("{}: {mark} ({})\n", r.relation, r.note));
            }
        }
        out.push_str(&format!("\n{}\n", self.extensions));
        for r in &self.remarks {
            out.push_str(&format!("{r}\n"));
        }
        out
    }
}

/// `Σ coef_i mono_i = 0` on a page, all terms in the same tridegree.
fn relation_zero(page: &Page, terms: &[(i64, HMono)]) -> Result<bool, HfpssError> {
    let Some((_, first)) = terms.first() else {
        return Ok(true);
    };
    let t = first.tridegree();
    let Some(cell) = page.cell(t) else {
        return Ok(true);
    };
    let mut v = vec![0i64; cell.basis.len()];
    for (c, m) in terms {
        assert_eq!(m.tridegree(), t, "relation terms share a tridegree");
        if let Some(p) = cell.basis.iter().position(|b| b == m) {
            v[p] += c;
        }
    }
    if v.iter().all(|&x| x == 0) {
        return Ok(true);
    }
    if solve_in(&cell.cycles, v.len(), &v).is_none() {
        return Err(HfpssError::NotACycle(fmt_rep(page.ring, &cell.basis, &v)));
    }
    Ok(solve_in(&lattice_basis(&cell.boundaries, v.len()), v.len(), &v).is_some())
}

fn product(xs: &[&Named]) -> (i64, HMono) {
    xs.iter()
        .fold((1, HMono::new(0, 0, 0)), |(c, m), x| (c * x.coef, m.mul(&x.mono)))
}

fn verdict(page: &Page, relation: &str, lhs: &[&Named], rhs: Option<(i64, &[&Named])>, note: &str) -> RelationVerdict {
    let (cl, ml) = product(lhs);
    let mut terms = vec![(cl, ml)];
    if let Some((k, r)) = rhs {
        let (cr, mr) = product(r);
        terms.push((-k * cr, mr));
    }
    let holds = if terms.iter().any(|(_, m)| m.tridegree() != ml.tridegree()) {
        false
    } else {
        relation_zero(page, &terms).unwrap_or(false)
    };
    RelationVerdict {
        relation: relation.to_string(),
        holds,
        note: note.to_string(),
    }
}

/// Generators and relations of π_{*,*} read off E∞, with each relation
/// checked on the page. `spectrum` is `KO`, `ko` or `kgl`.
pub fn einfty_report(spectrum: &str, window: Window) -> Result<HomotopyReport, HfpssError> {
    let ring = if spectrum == "kgl" {
        CoeffRing::Connective
    } else {
        CoeffRing::Kgl
    };
    if !matches!(spectrum, "KO" | "ko" | "kgl") {
        return Err(HfpssError::UnknownRing(spectrum.into()));
    }
    let (_, _, einf) = e_infinity(ring, window)?;
    let h1 = Named {
        name: "h1",
        coef: 1,
        mono: HMono::new(0, 1, 0),
    };
    let tau = Named {
        name: "tau",
        coef: 1,
        mono: HMono::new(1, 0, 0),
    };
    let two = Named {
        name: "2",
        coef: 2,
        mono: HMono::new(0, 0, 0),
    };
    let a = Named {
        name: "a",
        coef: 2,
        mono: HMono::new(0, 0, 1),
    };
    let b = Named {
        name: "b",
        coef: 1,
        mono: HMono::new(0, 0, 2),
    };
    let binv = Named {
        name: "b^-1",
        coef: 1,
        mono: HMono::new(0, 0, -2),
    };
    let x = Named {
        name: "x",
        coef: 1,
        mono: HMono::new(0, 4, -2),
    };
    let mut gens = vec![&h1, &a, &b];
    if spectrum == "KO" {
        gens.push(&binv);
    }
    if spectrum == "kgl" {
        gens.push(&x);
    }
    let mut generators = Vec::new();
    let mut remarks = Vec::new();
    for g in &gens {
        let ok = !einf.is_zero(g.coef, &g.mono).unwrap_or(true);
        let rep = if g.coef == 1 {
            g.mono.name(ring)
        } else {
            format!("{} {}", g.coef, g.mono.name(ring))
        };
        let inside = window.contains(g.mono.tridegree());
        if !inside {
            remarks.push(format!("generator {} lies outside the window", g.name));
        } else if !ok {
            remarks.push(format!(
                "generator {} is zero or not a permanent cycle in E-infinity",
                g.name
            ));
        }
        generators.push((g.name.to_string(), g.pi_degree(), rep));
    }
    let mut rels = vec![
        verdict(&einf, "2 h1 = 0", &[&two, &h1], None, ""),
        verdict(&einf, "tau h1^3 = 0", &[&tau, &h1, &h1, &h1], None, ""),
        verdict(&einf, "a^2 = 4 b", &[&a, &a], Some((4, &[&b])), ""),
        verdict(&einf, "h1 a = 0", &[&h1, &a], None, ""),
    ];
    if spectrum == "KO" {
        rels.push(verdict(&einf, "b b^-1 = 1", &[&b, &binv], Some((1, &[])), ""));
    }
    let presentation = match spectrum {
        "KO" => "Z2[tau, h1, a, b^(+-1)]/(2h1, tau h1^3, a^2 = 4b, h1 a)",
        "ko" => "Z2[tau, h1, a, b]/(2h1, tau h1^3, a^2 = 4b, h1 a)",
        _ => "Z2[tau, h1, a, b, x]/(2h1, tau h1^3, h1 a, ax, a^2 = 4b, bx = h1^4)",
    };
    if spectrum == "kgl" {
        rels.push(verdict(&einf, "a x = 0", &[&a, &x], None, ""));
        // bx against h1^4 and tau h1^4.
        let bx = product(&[&b, &x]);
        let h14 = HMono::new(0, 4, 0);
        let th14 = HMono::new(1, 4, 0);
        let (bn, bp, bu) = bx.1.tridegree();
        let (hn, hp, hu) = h14.tridegree();
        let (tn, tp, tu) = th14.tridegree();
        let homog = (bn, bp, bu) == (hn, hp, hu);
        let v1 = verdict(&einf, "b x = h1^4", &[&b, &x], Some((1, &[&h1, &h1, &h1, &h1])), "");
        let bx_nonzero = !einf.is_zero(bx.0, &bx.1).unwrap_or(true);
        let v2 = RelationVerdict {
            relation: "b x = tau h1^4".into(),
            holds: false,
            note: format!(
                "inhomogeneous: b x sits at ({bn},{bp},{bu}) and tau h1^4 at ({tn},{tp},{tu}); b x is {} in E-infinity",
                if bx_nonzero { "nonzero" } else { "zero" }
            ),
        };
        remarks.push(format!(
            "bx discrepancy: the relation bx = h1^4 is {} (both at ({hn},{hp},{hu})) and {}; the variant bx = tau h1^4 is not homogeneous since tau h1^4 has weight {tu}.",
            if homog { "homogeneous" } else { "inhomogeneous" },
            if v1.holds { "holds in E-infinity" } else { "fails in E-infinity" }
        ));
        rels.push(v1);
        rels.push(v2);
    }
    if spectrum == "ko" {
        generators.retain(|(_, (n, _), _)| *n >= 0);
        remarks.push("ko: the connective cover keeps the towers with n >= 0; b is not inverted.".into());
    }
    Ok(HomotopyReport {
        spectrum: spectrum.to_string(),
        presentation: presentation.to_string(),
        generators,
        relations: rels,
        extensions: "There are no extensions to resolve: every E-infinity group is Z2 or Z/2 and the products above are read off the page.".into(),
        remarks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(free: usize, torsion: &[u32]) -> Group2 {
        Group2 {
            free,
            torsion: torsion.to_vec(),
        }
    }

    #[test]
    fn cohomology_of_c2() {
        assert_eq!(group_cohomology(0, Coeff::Trivial), g(1, &[]));
        assert_eq!(group_cohomology(1, Coeff::Sign), g(0, &[1]));
        assert_eq!(group_cohomology(2, Coeff::Trivial), g(0, &[1]));
        assert_eq!(group_cohomology(1, Coeff::Trivial), g(0, &[]));
        assert_eq!(group_cohomology(0, Coeff::Sign), g(0, &[]));
        assert_eq!(group_cohomology(4, Coeff::Sign), g(0, &[]));
    }

    #[test]
    fn smith_divisibility() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let s = smith(&m, 3, 3);
        assert_eq!(s.d, vec![2, 6, 12]);
        let prod = matmul(&matmul(&s.u, &m, 3, 3), &s.v, 3, 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(prod[i][j], if i == j { s.d[i] } else { 0 });
            }
        }
        assert_eq!(matmul(&s.u, &s.uinv, 3, 3), ident(3));
        assert_eq!(matmul(&s.v, &s.vinv, 3, 3), ident(3));
    }

    #[test]
    fn e2_examples() {
        let e2 = e2_page(CoeffRing::Kgl, Window::default()).unwrap();
        assert_eq!(e2.group((1, 1, 1)), g(0, &[1]));
        assert_eq!(e2.group((4, 0, 2)), g(1, &[]));
        let e2k = e2_page(CoeffRing::Connective, Window::default()).unwrap();
        assert_eq!(e2k.group((-2, 2, 0)), g(0, &[1]));
        assert_eq!(e2k.cell((-2, 2, 0)).unwrap().reps, vec!["z".to_string()]);
        // cz = h1²
        assert_eq!(HMono::new(0, 0, 1).mul(&HMono::new(0, 2, -1)), HMono::new(0, 2, 0));
    }

    #[test]
    fn d3_values() {
        assert_eq!(d3(&HMono::new(0, 0, 1)), (1, HMono::new(1, 3, 0)));
        let (c, _) = d3(&HMono::new(0, 0, 2));
        assert_eq!(c % 2, 0);
    }

    #[test]
    fn window_empty() {
        let w = Window {
            n_lo: 3,
            n_hi: 2,
            ..Window::default()
        };
        assert_eq!(e2_page(CoeffRing::Kgl, w).unwrap_err(), HfpssError::WindowEmpty);
    }
}
