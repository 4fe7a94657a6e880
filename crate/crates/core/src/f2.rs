//! Bit-packed linear algebra over F₂.
//!
//! Every M₂-linear map between M₂-free modules in this crate is a matrix of
//! τ-monomials whose exponents are forced by the weights, so in a fixed
//! topological degree the map is an F₂ matrix plus a weight per row and
//! column. The helpers here do the elimination on those bit matrices.

use std::fmt;

const WORD: usize = 64;

/// A fixed-length vector over F₂.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// `self += other`; `other` may be shorter (missing bits are zero).
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert!(other.len <= self.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the highest set bit.
    pub fn last_one(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(i * WORD + (WORD - 1 - w.leading_zeros() as usize));
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * WORD + t)
                }
            })
        })
    }

    /// Grow (or shrink) to `len`, keeping the existing low bits.
    pub fn resize(&mut self, len: usize) {
        self.words.resize(len.div_ceil(WORD), 0);
        if len < self.len {
            for i in len..self.words.len() * WORD {
                let mask = 1u64 << (i % WORD);
                self.words[i / WORD] &= !mask;
            }
        }
        self.len = len;
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        write!(f, "]")
    }
}

/// Incremental column reduction with weight-ordered columns.
///
/// Columns must be pushed in nondecreasing weight. A column may only be
/// reduced by earlier columns, so every reduction step is a homogeneous
/// operation over F₂[τ] (multiply the earlier column by the τ-power that
/// makes up the weight difference). Zero columns after reduction yield an
/// F₂[τ]-basis of the kernel; the surviving columns have distinct pivots
/// and span the image.
#[derive(Clone, Debug)]
pub struct ColumnReducer {
    rows: usize,
    weights: Vec<i32>,
    reduced: Vec<Option<BitVec>>,
    combos: Vec<BitVec>,
    pivot_of_row: Vec<Option<usize>>,
    kernel: Vec<usize>,
}

impl ColumnReducer {
    pub fn new(rows: usize) -> Self {
        ColumnReducer {
            rows,
            weights: Vec::new(),
            reduced: Vec::new(),
            combos: Vec::new(),
            pivot_of_row: vec![None; rows],
            kernel: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, col: usize) -> i32 {
        self.weights[col]
    }

    /// Add a column; returns `Some(combination)` when it reduces to zero,
    /// i.e. when it contributes a new kernel element.
    pub fn push(&mut self, column: BitVec, weight: i32) -> Option<&BitVec> {
        assert_eq!(column.len(), self.rows, "column length mismatch");
        if let Some(&last) = self.weights.last() {
            assert!(weight >= last, "columns must be pushed in weight order");
        }
        let idx = self.weights.len();
        self.weights.push(weight);
        let mut col = column;
        let mut combo = BitVec::zeros(idx + 1);
        combo.set(idx, true);
        while let Some(p) = col.last_one() {
            match self.pivot_of_row[p] {
                Some(j) => {
                    col.xor_assign(self.reduced[j].as_ref().expect("pivot column"));
                    combo.xor_assign(&self.combos[j]);
                }
                None => break,
            }
        }
        self.combos.push(combo);
        match col.last_one() {
            Some(p) => {
                self.pivot_of_row[p] = Some(idx);
                self.reduced.push(Some(col));
                None
            }
            None => {
                self.reduced.push(None);
                self.kernel.push(idx);
                Some(&self.combos[idx])
            }
        }
    }

    /// Kernel elements, each with the weight of the column that produced it.
    /// Combinations are padded to the current number of columns.
    pub fn kernel(&self) -> impl Iterator<Item = (BitVec, i32)> + '_ {
        let n = self.weights.len();
        self.kernel.iter().map(move |&j| {
            let mut c = self.combos[j].clone();
            c.resize(n);
            (c, self.weights[j])
        })
    }

    pub fn rank(&self) -> usize {
        self.reduced.iter().filter(|c| c.is_some()).count()
    }

    /// Find `x` supported on columns of weight `<= max_weight` with `A x = y`.
    pub fn solve(&self, y: &BitVec, max_weight: i32) -> Option<BitVec> {
        let mut r = y.clone();
        let mut x = BitVec::zeros(self.weights.len());
        while let Some(p) = r.last_one() {
            let j = self.pivot_of_row[p]?;
            if self.weights[j] > max_weight {
                return None;
            }
            r.xor_assign(self.reduced[j].as_ref().expect("pivot column"));
            x.xor_assign(&self.combos[j]);
        }
        Some(x)
    }
}

/// A subspace of F₂ⁿ kept in echelon form (pivot = highest set bit).
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    rows: Vec<BitVec>,
    pivot: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(dim: usize) -> Self {
        Echelon {
            dim,
            rows: Vec::new(),
            pivot: vec![None; dim],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Fully reduce `v`: no set bit of the result is a pivot.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut r = v.clone();
        let Some(top) = r.last_one() else {
            return r;
        };
        for p in (0..=top).rev() {
            if r.get(p) {
                if let Some(j) = self.pivot[p] {
                    r.xor_assign(&self.rows[j]);
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Insert `v`; returns `true` if it enlarged the subspace.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        match r.last_one() {
            Some(p) => {
                self.pivot[p] = Some(self.rows.len());
                self.rows.push(r);
                true
            }
            None => false,
        }
    }
}

/// Rank of a list of vectors.
pub fn rank_of<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a BitVec>) -> usize {
    let mut e = Echelon::new(dim);
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Solves `sum x_i columns[i] = target`, returning the chosen coefficients.
#[derive(Clone, Debug)]
pub struct Solver {
    reducer: ColumnReducer,
}

impl Solver {
    pub fn new(dim: usize, columns: &[BitVec]) -> Self {
        let mut reducer = ColumnReducer::new(dim);
        for c in columns {
            reducer.push(c.clone(), 0);
        }
        Solver { reducer }
    }

    pub fn solve(&self, target: &BitVec) -> Option<BitVec> {
        self.reducer.solve(target, 0)
    }

    pub fn rank(&self) -> usize {
        self.reducer.rank()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bits_roundtrip() {
        let v = BitVec::from_indices(130, [0, 3, 64, 129]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 3, 64, 129]);
        assert_eq!(v.last_one(), Some(129));
        assert_eq!(v.count_ones(), 4);
    }

    #[test]
    fn reducer_kernel_and_solve() {
        // columns: e0, e1, e0+e1  -> kernel {c0+c1+c2}
        let mut r = ColumnReducer::new(2);
        assert!(r.push(BitVec::from_indices(2, [0]), 0).is_none());
        assert!(r.push(BitVec::from_indices(2, [1]), 1).is_none());
        let k = r.push(BitVec::from_indices(2, [0, 1]), 1).cloned().unwrap();
        assert_eq!(r.kernel().count(), 1);
        assert_eq!(k.ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(r.solve(&BitVec::from_indices(2, [1]), 0).is_none());
        assert!(r.solve(&BitVec::from_indices(2, [1]), 1).is_some());
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_in_kernel(cols in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 7), 1..12)) {
            let mut r = ColumnReducer::new(7);
            let columns: Vec<BitVec> = cols.iter().map(|c| BitVec::from_indices(7, c.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))).collect();
            for c in &columns { r.push(c.clone(), 0); }
            let n = columns.len();
            prop_assert_eq!(r.rank() + r.kernel().count(), n);
            for (k, _) in r.kernel() {
                let mut acc = BitVec::zeros(7);
                for j in k.ones() { acc.xor_assign(&columns[j]); }
                prop_assert!(acc.is_zero());
            }
            prop_assert_eq!(r.rank(), rank_of(7, &columns));
        }
    }
}
