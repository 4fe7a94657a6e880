//! Linear algebra over the graded PID F₂[τ].

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use thiserror::Error;

/// Topological degree `a` and weight `b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BiDegree {
    pub a: i32,
    pub b: i32,
}

impl BiDegree {
    pub const ZERO: BiDegree = BiDegree { a: 0, b: 0 };

    pub const fn new(a: i32, b: i32) -> Self {
        BiDegree { a, b }
    }
}

impl Add for BiDegree {
    type Output = BiDegree;
    fn add(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for BiDegree {
    type Output = BiDegree;
    fn sub(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for BiDegree {
    type Output = BiDegree;
    fn neg(self) -> BiDegree {
        BiDegree::new(-self.a, -self.b)
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// A polynomial in τ over F₂, stored as a bitset of exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct TauPoly {
    bits: Vec<u64>,
}

impl TauPoly {
    pub fn zero() -> Self {
        TauPoly { bits: Vec::new() }
    }

    pub fn one() -> Self {
        TauPoly::monomial(0)
    }

    pub fn monomial(e: u32) -> Self {
        let e = e as usize;
        let mut bits = vec![0u64; e / 64 + 1];
        bits[e / 64] = 1u64 << (e % 64);
        TauPoly { bits }
    }

    pub fn from_exponents(exps: impl IntoIterator<Item = u32>) -> Self {
        let mut p = TauPoly::zero();
        for e in exps {
            p += &TauPoly::monomial(e);
        }
        p
    }

    fn normalize(&mut self) {
        while self.bits.last() == Some(&0) {
            self.bits.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_empty()
    }

    /// Units of F₂[τ] are the nonzero constants, i.e. exactly `1`.
    pub fn is_unit(&self) -> bool {
        self.bits.len() == 1 && self.bits[0] == 1
    }

    pub fn degree(&self) -> Option<u32> {
        let w = *self.bits.last()?;
        Some(((self.bits.len() - 1) * 64 + 63 - w.leading_zeros() as usize) as u32)
    }

    /// Lowest exponent present.
    pub fn valuation(&self) -> Option<u32> {
        for (i, &w) in self.bits.iter().enumerate() {
            if w != 0 {
                return Some((i * 64 + w.trailing_zeros() as usize) as u32);
            }
        }
        None
    }

    pub fn exponents(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, &w) in self.bits.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push((i * 64 + w.trailing_zeros() as usize) as u32);
                w &= w - 1;
            }
        }
        out
    }

    /// `Some(e)` if the polynomial is exactly `τ^e`.
    pub fn as_monomial(&self) -> Option<u32> {
        let d = self.degree()?;
        (self.valuation() == Some(d)).then_some(d)
    }

    fn shl(&self, k: u32) -> TauPoly {
        if self.is_zero() {
            return TauPoly::zero();
        }
        let (words, bits) = ((k / 64) as usize, k % 64);
        let mut out = vec![0u64; self.bits.len() + words + 1];
        for (i, &w) in self.bits.iter().enumerate() {
            out[i + words] ^= w << bits;
            if bits > 0 {
                out[i + words + 1] ^= w >> (64 - bits);
            }
        }
        let mut p = TauPoly { bits: out };
        p.normalize();
        p
    }

    pub fn mul(&self, other: &TauPoly) -> TauPoly {
        let mut acc = TauPoly::zero();
        for e in other.exponents() {
            acc += &self.shl(e);
        }
        acc
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &TauPoly) -> (TauPoly, TauPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.clone();
        let mut q = TauPoly::zero();
        while let Some(rd) = r.degree() {
            if rd < dd {
                break;
            }
            let k = rd - dd;
            q += &TauPoly::monomial(k);
            r += &d.shl(k);
        }
        (q, r)
    }

    pub fn divides(&self, other: &TauPoly) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.divrem(self).1.is_zero()
    }

    pub fn gcd(&self, other: &TauPoly) -> TauPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a
    }
}

impl std::ops::AddAssign<&TauPoly> for TauPoly {
    fn add_assign(&mut self, o: &TauPoly) {
        if self.bits.len() < o.bits.len() {
            self.bits.resize(o.bits.len(), 0);
        }
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a ^= *b;
        }
        self.normalize();
    }
}

impl Add<&TauPoly> for &TauPoly {
    type Output = TauPoly;
    fn add(self, o: &TauPoly) -> TauPoly {
        let mut r = self.clone();
        r += o;
        r
    }
}

impl fmt::Display for TauPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "tau".to_string(),
                e => format!("tau^{e}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Debug for TauPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({row},{col}) = {entry} is not homogeneous for degrees {row_deg} <- {col_deg}")]
    Inhomogeneous {
        row: usize,
        col: usize,
        entry: String,
        row_deg: BiDegree,
        col_deg: BiDegree,
    },
    #[error("index ({0},{1}) out of range")]
    OutOfRange(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("d_out * d_in is nonzero")]
    CompositionNonzero,
    #[error("homology has a non-monomial torsion summand {0}")]
    NonMonomialTorsion(String),
}

/// Sparse matrix over F₂[τ]. Columns are the source basis, rows the target.
///
/// When degrees are attached, a nonzero entry from column degree `(a₁,b₁)`
/// to row degree `(a₂,b₂)` must be `τ^e` with `a₁ = a₂` and `e = b₁ − b₂`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TauMatrix {
    rows: usize,
    cols: usize,
    row_deg: Option<Vec<BiDegree>>,
    col_deg: Option<Vec<BiDegree>>,
    entries: BTreeMap<(usize, usize), TauPoly>,
}

impl TauMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TauMatrix {
            rows,
            cols,
            row_deg: None,
            col_deg: None,
            entries: BTreeMap::new(),
        }
    }

    pub fn graded(row_deg: Vec<BiDegree>, col_deg: Vec<BiDegree>) -> Self {
        TauMatrix {
            rows: row_deg.len(),
            cols: col_deg.len(),
            row_deg: Some(row_deg),
            col_deg: Some(col_deg),
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = TauMatrix::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i), TauPoly::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<TauPoly>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = TauMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, p) in r.iter().enumerate() {
                if !p.is_zero() {
                    m.entries.insert((i, j), p.clone());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_degrees(&self) -> Option<&[BiDegree]> {
        self.row_deg.as_deref()
    }

    pub fn col_degrees(&self) -> Option<&[BiDegree]> {
        self.col_deg.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> TauPoly {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &TauPoly)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn set(&mut self, i: usize, j: usize, p: TauPoly) -> Result<(), LinalgError> {
        if i >= self.rows || j >= self.cols {
            return Err(LinalgError::OutOfRange(i, j));
        }
        if p.is_zero() {
            self.entries.remove(&(i, j));
            return Ok(());
        }
        if let (Some(rd), Some(cd)) = (&self.row_deg, &self.col_deg) {
            let (r, c) = (rd[i], cd[j]);
            let ok = r.a == c.a && c.b >= r.b && p.as_monomial() == Some((c.b - r.b) as u32);
            if !ok {
                return Err(LinalgError::Inhomogeneous {
                    row: i,
                    col: j,
                    entry: p.to_string(),
                    row_deg: r,
                    col_deg: c,
                });
            }
        }
        self.entries.insert((i, j), p);
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<TauPoly>> {
        let mut d = vec![vec![TauPoly::zero(); self.cols]; self.rows];
        for (&(i, j), p) in &self.entries {
            d[i][j] = p.clone();
        }
        d
    }

    pub fn mul(&self, other: &TauMatrix) -> Result<TauMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut by_row: BTreeMap<usize, Vec<(usize, &TauPoly)>> = BTreeMap::new();
        for (&(k, j), p) in &other.entries {
            by_row.entry(k).or_default().push((j, p));
        }
        let mut out: BTreeMap<(usize, usize), TauPoly> = BTreeMap::new();
        for (&(i, k), p) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, q) in row {
                    *out.entry((i, j)).or_default() += &p.mul(q);
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        Ok(TauMatrix {
            rows: self.rows,
            cols: other.cols,
            row_deg: self.row_deg.clone(),
            col_deg: other.col_deg.clone(),
            entries: out,
        })
    }

    /// Column `j` as a dense vector.
    pub fn column(&self, j: usize) -> Vec<TauPoly> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> TauMatrix {
        let mut m = TauMatrix::zeros(self.rows, self.cols);
        for (&(i, j), p) in &self.entries {
            m.entries.insert((row_perm[i], col_perm[j]), p.clone());
        }
        m
    }
}

/// Result of [`snf`]: `left · m · right = diag(diagonal)`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diagonal: Vec<TauPoly>,
    pub left: TauMatrix,
    pub left_inv: TauMatrix,
    pub right: TauMatrix,
    pub right_inv: TauMatrix,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|d| !d.is_zero()).count()
    }
}

struct Dense {
    a: Vec<Vec<TauPoly>>,
}

impl Dense {
    fn add_row(&mut self, src: usize, dst: usize, q: &TauPoly) {
        if q.is_zero() {
            return;
        }
        let row: Vec<TauPoly> = self.a[src].iter().map(|p| p.mul(q)).collect();
        for (x, y) in self.a[dst].iter_mut().zip(&row) {
            *x += y;
        }
    }

    fn add_col(&mut self, src: usize, dst: usize, q: &TauPoly) {
        if q.is_zero() {
            return;
        }
        for r in self.a.iter_mut() {
            let v = r[src].mul(q);
            r[dst] += &v;
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in self.a.iter_mut() {
            r.swap(i, j);
        }
    }

    fn into_matrix(self, rows: usize, cols: usize) -> TauMatrix {
        let mut m = TauMatrix::zeros(rows, cols);
        for (i, r) in self.a.into_iter().enumerate() {
            for (j, p) in r.into_iter().enumerate() {
                if !p.is_zero() {
                    m.entries.insert((i, j), p);
                }
            }
        }
        m
    }
}

fn dense_identity(n: usize) -> Dense {
    let mut a = vec![vec![TauPoly::zero(); n]; n];
    for (i, r) in a.iter_mut().enumerate() {
        r[i] = TauPoly::one();
    }
    Dense { a }
}

/// Smith normal form with transforms. Pivots are chosen by minimal τ-degree
/// over the whole remaining block, which keeps homogeneous input homogeneous.
pub fn snf(m: &TauMatrix) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = Dense { a: m.to_dense() };
    let mut left = dense_identity(rows);
    let mut left_inv = dense_identity(rows);
    let mut right = dense_identity(cols);
    let mut right_inv = dense_identity(cols);

    // Elementary operations, mirrored on the transforms.
    macro_rules! row_add {
        ($src:expr, $dst:expr, $q:expr) => {{
            let q: &TauPoly = $q;
            a.add_row($src, $dst, q);
            left.add_row($src, $dst, q);
            left_inv.add_col($dst, $src, q);
        }};
    }
    macro_rules! col_add {
        ($src:expr, $dst:expr, $q:expr) => {{
            let q: &TauPoly = $q;
            a.add_col($src, $dst, q);
            right.add_col($src, $dst, q);
            right_inv.add_row($dst, $src, q);
        }};
    }

    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if let Some(d) = a.a[i][j].degree() {
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        if pi != t {
            a.a.swap(pi, t);
            left.a.swap(pi, t);
            left_inv.swap_cols(pi, t);
        }
        if pj != t {
            a.swap_cols(pj, t);
            right.swap_cols(pj, t);
            right_inv.a.swap(pj, t);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if a.a[i][t].is_zero() {
                continue;
            }
            let (q, r) = a.a[i][t].divrem(&a.a[t][t]);
            row_add!(t, i, &q);
            clean &= r.is_zero();
        }
        for j in t + 1..cols {
            if a.a[t][j].is_zero() {
                continue;
            }
            let (q, r) = a.a[t][j].divrem(&a.a[t][t]);
            col_add!(t, j, &q);
            clean &= r.is_zero();
        }
        if !clean {
            // A remainder of smaller degree appeared; pick a new pivot.
            continue;
        }
        let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.a[t][t].divides(&a.a[i][j])));
        if let Some(i) = bad {
            row_add!(i, t, &TauPoly::one());
            continue;
        }
        t += 1;
    }
    let diagonal = (0..n).map(|i| a.a[i][i].clone()).collect();
    Snf {
        diagonal,
        left: left.into_matrix(rows, rows),
        left_inv: left_inv.into_matrix(rows, rows),
        right: right.into_matrix(cols, cols),
        right_inv: right_inv.into_matrix(cols, cols),
    }
}

/// Free rank plus τ-torsion exponents (each `k` is a summand `M₂/τᵏ`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedModuleShape {
    pub free_rank: usize,
    pub torsion: Vec<u32>,
}

impl GradedModuleShape {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn add(&mut self, other: &GradedModuleShape) {
        self.free_rank += other.free_rank;
        self.torsion.extend_from_slice(&other.torsion);
        self.torsion.sort_unstable();
    }

    /// Number of cyclic summands.
    pub fn generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }
}

/// One cyclic summand of a homology module with a representing cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologySummand {
    /// `None` for a free summand, `Some(k)` for `M₂/τᵏ`.
    pub torsion: Option<u32>,
    pub rep: Vec<TauPoly>,
    /// Grade of `rep` when grades were supplied (τ raises grade by one).
    pub grade: Option<i32>,
}

/// `ker(d_out) / im(d_in)` split into cyclic summands.
///
/// `grades` optionally assigns a grade to each basis vector of the middle
/// term, in which case the returned representatives carry their grade.
pub fn graded_homology(
    d_in: &TauMatrix,
    d_out: &TauMatrix,
    grades: Option<&[i32]>,
) -> Result<Vec<HomologySummand>, LinalgError> {
    let m = d_in.rows();
    if d_out.cols() != m {
        return Err(LinalgError::ShapeMismatch(format!(
            "d_in has {} rows but d_out has {} columns",
            m,
            d_out.cols()
        )));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(LinalgError::CompositionNonzero);
    }
    let s1 = snf(d_out);
    let r = s1.rank();
    let coords = s1.right_inv.mul(d_in)?;
    let k = m - r;
    let mut c = TauMatrix::zeros(k, d_in.cols());
    for (&(i, j), p) in coords.entries() {
        if i >= r {
            c.entries.insert((i - r, j), p.clone());
        } else {
            debug_assert!(false, "image not inside kernel");
        }
    }
    let s2 = snf(&c);
    // Kernel basis K = right[:, r..]; new basis columns are K · left2⁻¹.
    let mut kb = TauMatrix::zeros(m, k);
    for (&(i, j), p) in s1.right.entries() {
        if j >= r {
            kb.entries.insert((i, j - r), p.clone());
        }
    }
    let basis = kb.mul(&s2.left_inv)?;
    let mut out = Vec::new();
    for col in 0..k {
        let d = s2.diagonal.get(col).cloned().unwrap_or_default();
        let torsion = if d.is_zero() {
            None
        } else if d.is_unit() {
            continue;
        } else {
            match d.as_monomial() {
                Some(e) => Some(e),
                None => return Err(LinalgError::NonMonomialTorsion(d.to_string())),
            }
        };
        let rep = basis.column(col);
        let grade = grades.and_then(|g| {
            rep.iter()
                .enumerate()
                .find_map(|(i, p)| p.valuation().map(|v| g[i] + v as i32))
        });
        out.push(HomologySummand { torsion, rep, grade });
    }
    Ok(out)
}

pub fn homology_shape(d_in: &TauMatrix, d_out: &TauMatrix) -> Result<GradedModuleShape, LinalgError> {
    let mut shape = GradedModuleShape::default();
    for s in graded_homology(d_in, d_out, None)? {
        match s.torsion {
            None => shape.free_rank += 1,
            Some(k) => shape.torsion.push(k),
        }
    }
    shape.torsion.sort_unstable();
    Ok(shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(e: u32) -> TauPoly {
        TauPoly::monomial(e)
    }

    fn diag_matrix(s: &Snf, rows: usize, cols: usize) -> TauMatrix {
        let mut d = TauMatrix::zeros(rows, cols);
        for (i, p) in s.diagonal.iter().enumerate() {
            d.set(i, i, p.clone()).unwrap();
        }
        d
    }

    #[test]
    fn poly_arithmetic() {
        let p = TauPoly::from_exponents([0, 1]);
        assert_eq!(p.mul(&p), TauPoly::from_exponents([0, 2]));
        assert!((&p + &p).is_zero());
        let (q, r) = TauPoly::from_exponents([0, 2]).divrem(&p);
        assert_eq!(q, p);
        assert!(r.is_zero());
        assert_eq!(t(70).mul(&t(3)), t(73));
        assert_eq!(t(5).gcd(&t(3)), t(3));
        assert_eq!(t(4).to_string(), "tau^4");
    }

    #[test]
    fn snf_examples() {
        let s = snf(&TauMatrix::from_rows(&[vec![t(1)]]));
        assert_eq!(s.diagonal, vec![t(1)]);
        let s = snf(&TauMatrix::from_rows(&[vec![t(0)]]));
        assert_eq!(s.diagonal, vec![t(0)]);
        let m = TauMatrix::from_rows(&[vec![t(2), t(1)], vec![t(3), t(2)]]);
        let s = snf(&m);
        assert_eq!(s.diagonal, vec![t(1), TauPoly::zero()]);
        let prod = s.left.mul(&m).unwrap().mul(&s.right).unwrap();
        assert_eq!(prod, diag_matrix(&s, 2, 2));
    }

    #[test]
    fn homology_examples() {
        let z = TauMatrix::zeros(1, 0);
        let zo = TauMatrix::zeros(0, 1);
        assert_eq!(
            homology_shape(&z, &zo).unwrap(),
            GradedModuleShape {
                free_rank: 1,
                torsion: vec![]
            }
        );
        let d = TauMatrix::from_rows(&[vec![t(1)]]);
        assert_eq!(homology_shape(&d, &zo).unwrap().torsion, vec![1]);
        let d = TauMatrix::from_rows(&[vec![t(2)]]);
        assert_eq!(homology_shape(&d, &zo).unwrap().torsion, vec![2]);
        let bad_in = TauMatrix::from_rows(&[vec![t(0)]]);
        let bad_out = TauMatrix::from_rows(&[vec![t(0)]]);
        assert_eq!(homology_shape(&bad_in, &bad_out), Err(LinalgError::CompositionNonzero));
    }

    #[test]
    fn graded_validation_rejects_wrong_power() {
        let mut m = TauMatrix::graded(vec![BiDegree::new(2, 2)], vec![BiDegree::new(2, 1)]);
        assert!(m.set(0, 0, t(1)).is_err());
        let mut m = TauMatrix::graded(vec![BiDegree::new(2, 1)], vec![BiDegree::new(2, 2)]);
        assert!(m.set(0, 0, t(1)).is_ok());
        assert!(m.set(0, 0, t(0)).is_err());
    }

    #[test]
    fn graded_reps_carry_grades() {
        // C: basis e0 (grade 0), e1 (grade 1); d_in hits τ² e0 from a grade-2 class.
        let d_in = TauMatrix::from_rows(&[vec![t(2)], vec![TauPoly::zero()]]);
        let d_out = TauMatrix::zeros(0, 2);
        let h = graded_homology(&d_in, &d_out, Some(&[0, 1])).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.iter().any(|s| s.torsion == Some(2) && s.grade == Some(0)));
        assert!(h.iter().any(|s| s.torsion.is_none() && s.grade == Some(1)));
    }

    fn homogeneous_matrix() -> impl Strategy<Value = TauMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            (
                proptest::collection::vec(0i32..4, r),
                proptest::collection::vec(0i32..4, c),
                proptest::collection::vec(any::<bool>(), r * c),
            )
                .prop_map(move |(rg, cg, mask)| {
                    // Grades: entry (i,j) may be τ^{cg_j - rg_i} when nonnegative.
                    let mut rows = vec![vec![TauPoly::zero(); c]; r];
                    for i in 0..r {
                        for j in 0..c {
                            let e = cg[j] - rg[i];
                            if e >= 0 && mask[i * c + j] {
                                rows[i][j] = TauPoly::monomial(e as u32);
                            }
                        }
                    }
                    TauMatrix::from_rows(&rows)
                })
        })
    }

    fn multiset(d: &[TauPoly]) -> Vec<TauPoly> {
        let mut v: Vec<TauPoly> = d.to_vec();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn snf_transforms_diagonalize(m in homogeneous_matrix()) {
            let s = snf(&m);
            let prod = s.left.mul(&m).unwrap().mul(&s.right).unwrap();
            prop_assert_eq!(prod, diag_matrix(&s, m.rows(), m.cols()));
            prop_assert_eq!(s.left.mul(&s.left_inv).unwrap(), TauMatrix::identity(m.rows()));
            prop_assert_eq!(s.right.mul(&s.right_inv).unwrap(), TauMatrix::identity(m.cols()));
            let nz: Vec<&TauPoly> = s.diagonal.iter().filter(|p| !p.is_zero()).collect();
            for w in nz.windows(2) {
                prop_assert!(w[0].divides(w[1]));
            }
        }

        #[test]
        fn snf_general_polynomials(entries in proptest::collection::vec(0u8..16, 9)) {
            let rows: Vec<Vec<TauPoly>> = entries.chunks(3).map(|ch| ch.iter().map(|&b| TauPoly::from_exponents((0..4).filter(|k| b >> k & 1 == 1))).collect()).collect();
            let m = TauMatrix::from_rows(&rows);
            let s = snf(&m);
            let prod = s.left.mul(&m).unwrap().mul(&s.right).unwrap();
            prop_assert_eq!(prod, diag_matrix(&s, 3, 3));
        }

        #[test]
        fn snf_permutation_invariant(m in homogeneous_matrix(), seed in any::<u64>()) {
            let mut rp: Vec<usize> = (0..m.rows()).collect();
            let mut cp: Vec<usize> = (0..m.cols()).collect();
            let mut x = seed;
            for v in [&mut rp, &mut cp] {
                for i in (1..v.len()).rev() {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    v.swap(i, (x >> 33) as usize % (i + 1));
                }
            }
            let a = snf(&m).diagonal;
            let b = snf(&m.permuted(&rp, &cp)).diagonal;
            prop_assert_eq!(multiset(&a), multiset(&b));
        }

        #[test]
        fn exact_complex_has_no_homology(m in homogeneous_matrix()) {
            // 0 -> ker(m) -> C -> im(m): build d_in as a kernel basis via SNF.
            let s = snf(&m);
            let r = s.rank();
            let mut k = TauMatrix::zeros(m.cols(), m.cols() - r);
            for j in r..m.cols() {
                for i in 0..m.cols() {
                    k.set(i, j - r, s.right.get(i, j)).unwrap();
                }
            }
            let shape = homology_shape(&k, &m).unwrap();
            prop_assert!(shape.is_zero());
        }
    }
}
