//! Finite subalgebras of the motivic Steenrod algebra as rewriting systems.
//!
//! Each algebra is a free M₂-module on its normal-form words. Every rule
//! rewrites a word to `τᵉ · word` or to zero, so every product of basis
//! monomials is again zero or a single τ-multiple of a basis monomial.

use crate::tau_linalg::{BiDegree, TauPoly};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubalgebraId {
    E0,
    E1,
    A1,
    A1Classical,
}

impl SubalgebraId {
    pub const ALL: [SubalgebraId; 4] = [
        SubalgebraId::E0,
        SubalgebraId::E1,
        SubalgebraId::A1,
        SubalgebraId::A1Classical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SubalgebraId::E0 => "E0",
            SubalgebraId::E1 => "E1",
            SubalgebraId::A1 => "A1",
            SubalgebraId::A1Classical => "A1_classical",
        }
    }

    /// Whether τ is present. The classical algebra lives over F₂ with all
    /// weights zero.
    pub fn motivic(self) -> bool {
        self != SubalgebraId::A1Classical
    }

    fn generators(self) -> Vec<(&'static str, BiDegree)> {
        match self {
            SubalgebraId::E0 => vec![("Sq1", BiDegree::new(1, 0))],
            SubalgebraId::E1 => vec![("Q0", BiDegree::new(1, 0)), ("Q1", BiDegree::new(3, 1))],
            SubalgebraId::A1 => vec![("Sq1", BiDegree::new(1, 0)), ("Sq2", BiDegree::new(2, 1))],
            SubalgebraId::A1Classical => {
                vec![("Sq1", BiDegree::new(1, 0)), ("Sq2", BiDegree::new(2, 0))]
            }
        }
    }

    fn rules(self) -> Vec<Rule> {
        let r = |lhs: &[u8], rhs: Option<(u32, &[u8])>| Rule {
            lhs: lhs.to_vec(),
            rhs: rhs.map(|(e, w)| (e, w.to_vec())),
        };
        match self {
            SubalgebraId::E0 => vec![r(&[0, 0], None)],
            SubalgebraId::E1 => vec![r(&[0, 0], None), r(&[1, 1], None), r(&[1, 0], Some((0, &[0, 1])))],
            SubalgebraId::A1 | SubalgebraId::A1Classical => {
                let tau = u32::from(self == SubalgebraId::A1);
                vec![
                    r(&[0, 0], None),
                    r(&[1, 1], Some((tau, &[0, 1, 0]))),
                    r(&[0, 1, 0, 1], Some((0, &[1, 0, 1, 0]))),
                ]
            }
        }
    }
}

impl fmt::Display for SubalgebraId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SubalgebraId {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E0" => Ok(SubalgebraId::E0),
            "E1" => Ok(SubalgebraId::E1),
            "A1" => Ok(SubalgebraId::A1),
            "A1_classical" | "A1Classical" => Ok(SubalgebraId::A1Classical),
            other => Err(AlgebraError::UnknownAlgebra(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("overlap {word} does not resolve: {left} vs {right}")]
    NonConfluent { word: String, left: String, right: String },
    #[error("algebra mismatch: {0} vs {1}")]
    AlgebraMismatch(SubalgebraId, SubalgebraId),
    #[error("unknown algebra {0}")]
    UnknownAlgebra(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("element is not homogeneous")]
    Inhomogeneous,
}

/// `lhs -> τ^e · word`, or `lhs -> 0` when `rhs` is `None`.
#[derive(Clone, Debug)]
struct Rule {
    lhs: Vec<u8>,
    rhs: Option<(u32, Vec<u8>)>,
}

type Reduced = Option<(u32, Vec<u8>)>;

fn rewrite_once(rules: &[Rule], word: &[u8]) -> Option<Reduced> {
    for pos in 0..word.len() {
        for rule in rules {
            if word[pos..].starts_with(&rule.lhs) {
                return Some(rule.rhs.as_ref().map(|(e, rhs)| {
                    let mut w = word[..pos].to_vec();
                    w.extend_from_slice(rhs);
                    w.extend_from_slice(&word[pos + rule.lhs.len()..]);
                    (*e, w)
                }));
            }
        }
    }
    None
}

fn normalize(rules: &[Rule], word: &[u8]) -> Reduced {
    let mut cur = (0u32, word.to_vec());
    for _ in 0..10_000 {
        match rewrite_once(rules, &cur.1) {
            None => return Some(cur),
            Some(None) => return None,
            Some(Some((e, w))) => cur = (cur.0 + e, w),
        }
    }
    panic!("rewriting did not terminate on {word:?}");
}

/// One normal-form monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub word: Vec<u8>,
    pub name: String,
    pub degree: BiDegree,
}

/// Overlap resolved during the confluence check.
#[derive(Clone, Debug)]
pub struct OverlapCheck {
    pub word: String,
    pub result: String,
}

/// The precomputed algebra: normal-form basis and multiplication table.
#[derive(Debug)]
pub struct MultTable {
    pub id: SubalgebraId,
    pub generator_names: Vec<&'static str>,
    pub generator_degrees: Vec<BiDegree>,
    pub basis: Vec<Monomial>,
    /// `products[i][j] = Some((e, k))` means `bᵢ·bⱼ = τᵉ b_k`.
    pub products: Vec<Vec<Option<(u32, usize)>>>,
    /// Local confluence certificate: every overlap and its common reduct.
    pub certificate: Vec<OverlapCheck>,
    /// Basis index of each generator.
    pub generator_index: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
}

impl MultTable {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn degree(&self, i: usize) -> BiDegree {
        self.basis[i].degree
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> Option<(u32, usize)> {
        self.products[i][j]
    }

    pub fn find_word(&self, word: &[u8]) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn generator_id(&self, name: &str) -> Option<usize> {
        self.generator_names.iter().position(|g| *g == name)
    }

    /// Basis monomials other than 1 (the augmentation ideal).
    pub fn augmentation_ideal_basis(&self) -> Vec<usize> {
        (0..self.basis.len())
            .filter(|&i| !self.basis[i].word.is_empty())
            .collect()
    }

    /// Normal form of an arbitrary word in the generators.
    pub fn reduce_word(&self, word: &[u8]) -> Option<(u32, usize)> {
        normalize(&self.id.rules(), word).map(|(e, w)| (e, self.index[&w]))
    }

    /// Parse a word like `Sq2Sq1Sq2` (or `1`) into generator indices.
    pub fn parse_word(&self, s: &str) -> Result<Vec<u8>, AlgebraError> {
        let s = s.trim();
        if s == "1" {
            return Ok(Vec::new());
        }
        let mut rest = s;
        let mut out = Vec::new();
        'outer: while !rest.is_empty() {
            // Longest match first so that e.g. "Q1" is not read as a prefix.
            let mut gens: Vec<(usize, &str)> = self.generator_names.iter().copied().enumerate().collect();
            gens.sort_by_key(|(_, g)| std::cmp::Reverse(g.len()));
            for (i, g) in gens {
                if let Some(r) = rest.strip_prefix(g) {
                    out.push(i as u8);
                    rest = r;
                    continue 'outer;
                }
            }
            return Err(AlgebraError::UnknownGenerator(rest.to_string()));
        }
        Ok(out)
    }
}

fn word_name(names: &[&str], word: &[u8]) -> String {
    if word.is_empty() {
        "1".to_string()
    } else {
        word.iter().map(|&g| names[g as usize]).collect()
    }
}

fn word_degree(degs: &[BiDegree], word: &[u8]) -> BiDegree {
    word.iter().fold(BiDegree::ZERO, |d, &g| d + degs[g as usize])
}

fn show(names: &[&str], r: &Reduced) -> String {
    match r {
        None => "0".to_string(),
        Some((0, w)) => word_name(names, w),
        Some((e, w)) => format!("tau^{e} {}", word_name(names, w)),
    }
}

fn confluence(id: SubalgebraId, names: &[&str]) -> Result<Vec<OverlapCheck>, AlgebraError> {
    let rules = id.rules();
    let mut out = Vec::new();
    for r1 in &rules {
        for r2 in &rules {
            // Proper overlaps: a nonempty suffix of lhs1 equals a prefix of lhs2.
            for k in 1..r1.lhs.len().min(r2.lhs.len()) {
                if r1.lhs[r1.lhs.len() - k..] != r2.lhs[..k] {
                    continue;
                }
                let mut word = r1.lhs.clone();
                word.extend_from_slice(&r2.lhs[k..]);
                let apply = |rule: &Rule, pos: usize| -> Reduced {
                    let (e, rhs) = rule.rhs.clone()?;
                    let mut w = word[..pos].to_vec();
                    w.extend_from_slice(&rhs);
                    w.extend_from_slice(&word[pos + rule.lhs.len()..]);
                    normalize(&rules, &w).map(|(f, w)| (e + f, w))
                };
                let left = apply(r1, 0);
                let right = apply(r2, r1.lhs.len() - k);
                if left != right {
                    return Err(AlgebraError::NonConfluent {
                        word: word_name(names, &word),
                        left: show(names, &left),
                        right: show(names, &right),
                    });
                }
                out.push(OverlapCheck {
                    word: word_name(names, &word),
                    result: show(names, &left),
                });
            }
        }
    }
    Ok(out)
}

/// Build the multiplication table of a subalgebra.
pub fn build_algebra(id: SubalgebraId) -> Result<MultTable, AlgebraError> {
    let gens = id.generators();
    let names: Vec<&'static str> = gens.iter().map(|g| g.0).collect();
    let degs: Vec<BiDegree> = gens.iter().map(|g| g.1).collect();
    let rules = id.rules();
    let certificate = confluence(id, &names)?;

    // Irreducible words, found breadth first.
    let mut words = Vec::new();
    let mut queue = VecDeque::from([Vec::<u8>::new()]);
    while let Some(w) = queue.pop_front() {
        assert!(w.len() <= 32, "normal forms are not finite");
        for g in 0..names.len() as u8 {
            let mut v = w.clone();
            v.push(g);
            if rewrite_once(&rules, &v).is_none() {
                queue.push_back(v);
            }
        }
        words.push(w);
    }
    words.sort_by(|x, y| (word_degree(&degs, x).a, x.len(), x).cmp(&(word_degree(&degs, y).a, y.len(), y)));
    let basis: Vec<Monomial> = words
        .iter()
        .map(|w| Monomial {
            word: w.clone(),
            name: word_name(&names, w),
            degree: word_degree(&degs, w),
        })
        .collect();
    let index: HashMap<Vec<u8>, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let products = words
        .iter()
        .map(|x| {
            words
                .iter()
                .map(|y| {
                    let mut w = x.clone();
                    w.extend_from_slice(y);
                    normalize(&rules, &w).map(|(e, w)| (e, index[&w]))
                })
                .collect()
        })
        .collect();
    let generator_index = (0..names.len() as u8).map(|g| index[&vec![g]]).collect();
    Ok(MultTable {
        id,
        generator_names: names,
        generator_degrees: degs,
        basis,
        products,
        certificate,
        generator_index,
        index,
    })
}

/// Shared, immutable table for `id`.
pub fn algebra(id: SubalgebraId) -> &'static MultTable {
    static TABLES: [OnceLock<MultTable>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = SubalgebraId::ALL.iter().position(|&a| a == id).expect("listed");
    TABLES[slot].get_or_init(|| build_algebra(id).expect("built-in relations are confluent"))
}

pub fn augmentation_ideal_basis(id: SubalgebraId) -> Vec<usize> {
    algebra(id).augmentation_ideal_basis()
}

/// An M₂-combination of normal-form monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgElem {
    pub algebra: SubalgebraId,
    pub terms: BTreeMap<usize, TauPoly>,
}

impl AlgElem {
    pub fn zero(algebra: SubalgebraId) -> Self {
        AlgElem {
            algebra,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(algebra: SubalgebraId, i: usize) -> Self {
        Self::term(algebra, TauPoly::one(), i)
    }

    pub fn term(algebra: SubalgebraId, c: TauPoly, i: usize) -> Self {
        let mut e = AlgElem::zero(algebra);
        e.add_term(c, i);
        e
    }

    pub fn add_term(&mut self, c: TauPoly, i: usize) {
        let slot = self.terms.entry(i).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Bidegree, counting τ in the weight. `None` for zero.
    pub fn degree(&self) -> Result<Option<BiDegree>, AlgebraError> {
        let table = algebra(self.algebra);
        let mut deg = None;
        for (&i, c) in &self.terms {
            for e in c.exponents() {
                let tau = if self.algebra.motivic() { e as i32 } else { 0 };
                let d = table.degree(i) + BiDegree::new(0, tau);
                match deg {
                    None => deg = Some(d),
                    Some(d0) if d0 != d => return Err(AlgebraError::Inhomogeneous),
                    _ => {}
                }
            }
        }
        Ok(deg)
    }

    pub fn mul(&self, other: &AlgElem) -> Result<AlgElem, AlgebraError> {
        if self.algebra != other.algebra {
            return Err(AlgebraError::AlgebraMismatch(self.algebra, other.algebra));
        }
        let table = algebra(self.algebra);
        let mut out = AlgElem::zero(self.algebra);
        for (&i, ci) in &self.terms {
            for (&j, cj) in &other.terms {
                if let Some((e, k)) = table.mul_basis(i, j) {
                    let c = ci.mul(cj).mul(&TauPoly::monomial(e));
                    out.add_term(c, k);
                }
            }
        }
        Ok(out)
    }

    /// Multiply by τ (central).
    pub fn tau(&self) -> AlgElem {
        let t = TauPoly::monomial(1);
        AlgElem {
            algebra: self.algebra,
            terms: self.terms.iter().map(|(&i, c)| (i, c.mul(&t))).collect(),
        }
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let table = algebra(self.algebra);
        let mut parts = Vec::new();
        for (&i, c) in &self.terms {
            let name = &table.basis[i].name;
            if c.is_unit() {
                parts.push(name.clone());
            } else {
                parts.push(format!("({c}) {name}"));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> &'static MultTable {
        algebra(SubalgebraId::A1)
    }

    fn word(t: &MultTable, s: &str) -> Vec<u8> {
        t.parse_word(s).unwrap()
    }

    #[test]
    fn a1_basis_matches() {
        let t = a1();
        let names: Vec<&str> = t.basis.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "1",
                "Sq1",
                "Sq2",
                "Sq1Sq2",
                "Sq2Sq1",
                "Sq1Sq2Sq1",
                "Sq2Sq1Sq2",
                "Sq2Sq1Sq2Sq1"
            ]
        );
        let degs: Vec<(i32, i32)> = t.basis.iter().map(|m| (m.degree.a, m.degree.b)).collect();
        assert_eq!(degs, [(0, 0), (1, 0), (2, 1), (3, 1), (3, 1), (4, 1), (5, 2), (6, 2)]);
        assert!(!t.certificate.is_empty());
    }

    #[test]
    fn a1_rewrites() {
        let t = a1();
        let sq121 = t.find_word(&word(t, "Sq1Sq2Sq1")).unwrap();
        assert_eq!(t.reduce_word(&word(t, "Sq2Sq2")), Some((1, sq121)));
        assert_eq!(t.reduce_word(&word(t, "Sq1Sq1")), None);
        let top = t.find_word(&word(t, "Sq2Sq1Sq2Sq1")).unwrap();
        assert_eq!(t.reduce_word(&word(t, "Sq1Sq2Sq1Sq2")), Some((0, top)));
        assert_eq!(t.reduce_word(&word(t, "Sq1Sq2Sq1Sq2Sq1")), None);
    }

    #[test]
    fn other_algebras() {
        let e1 = algebra(SubalgebraId::E1);
        assert_eq!(e1.len(), 4);
        let names: Vec<&str> = e1.basis.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["1", "Q0", "Q1", "Q0Q1"]);
        assert_eq!(algebra(SubalgebraId::E0).len(), 2);
        assert_eq!(augmentation_ideal_basis(SubalgebraId::E0), vec![1]);
        assert_eq!(augmentation_ideal_basis(SubalgebraId::E1).len(), 3);
        assert_eq!(augmentation_ideal_basis(SubalgebraId::A1).len(), 7);
    }

    #[test]
    fn associativity_and_degrees() {
        for id in SubalgebraId::ALL {
            let t = algebra(id);
            let n = t.len();
            for i in 0..n {
                for j in 0..n {
                    if let Some((e, k)) = t.mul_basis(i, j) {
                        let tau = if id.motivic() { e as i32 } else { 0 };
                        assert_eq!(t.degree(i) + t.degree(j), t.degree(k) + BiDegree::new(0, tau));
                    }
                    for l in 0..n {
                        let x = AlgElem::basis(id, i);
                        let y = AlgElem::basis(id, j);
                        let z = AlgElem::basis(id, l);
                        let lhs = x.mul(&y).unwrap().mul(&z).unwrap();
                        let rhs = x.mul(&y.mul(&z).unwrap()).unwrap();
                        assert_eq!(lhs, rhs, "{id}: ({i}{j}){l}");
                    }
                }
            }
        }
    }

    #[test]
    fn classical_is_tau_erased() {
        let m = a1();
        let c = algebra(SubalgebraId::A1Classical);
        assert_eq!(c.len(), 8);
        for i in 0..8 {
            assert_eq!(m.basis[i].word, c.basis[i].word);
            assert_eq!(m.basis[i].degree.a, c.basis[i].degree.a);
            assert_eq!(c.basis[i].degree.b, 0);
            for j in 0..8 {
                assert_eq!(m.mul_basis(i, j).map(|p| p.1), c.mul_basis(i, j).map(|p| p.1));
                assert!(c.mul_basis(i, j).is_none_or(|p| p.0 == 0));
            }
        }
    }

    #[test]
    fn unit_tau_and_mismatch() {
        let id = SubalgebraId::A1;
        let sq2 = AlgElem::basis(id, 2);
        assert_eq!(AlgElem::basis(id, 0).mul(&sq2).unwrap(), sq2);
        let t = AlgElem::term(id, TauPoly::monomial(1), 0);
        assert_eq!(t.mul(&sq2).unwrap(), sq2.mul(&t).unwrap());
        assert_eq!(sq2.tau().degree().unwrap(), Some(BiDegree::new(2, 2)));
        let e = AlgElem::basis(SubalgebraId::E1, 1);
        assert!(matches!(sq2.mul(&e), Err(AlgebraError::AlgebraMismatch(..))));
        // Sq2 · Sq1Sq2Sq1 = Sq2Sq1Sq2Sq1
        let r = sq2.mul(&AlgElem::basis(id, 5)).unwrap();
        assert_eq!(r, AlgElem::basis(id, 7));
    }
}
