//! Exact arithmetic for group elements and finite subsets of Z^d.
//!
//! The concrete group is Z^d under addition, kept behind an abstract
//! composition interface (`compose`, `inverse`, `identity`, `dim`) so the set
//! algebra never assumes more than the group axioms. All sets are finite,
//! deduplicated, and iterate in a canonical lexicographic order, which makes
//! every downstream greedy choice reproducible.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operation `{0}` requires a nonempty set")]
    EmptySet(&'static str),
    #[error("function undefined at {0}")]
    Undefined(GroupElement),
}

/// An element of Z^d. Ordering is lexicographic on coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<i64>,
}

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "group elements have dimension >= 1");
        Self { coords }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Group product. For Z^d this is coordinate-wise addition.
    pub fn compose(&self, other: &Self) -> Result<Self, GroupError> {
        if self.dim() != other.dim() {
            return Err(GroupError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.coords.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<i64> for GroupElement {
    fn from(v: i64) -> Self {
        Self::new(vec![v])
    }
}

impl From<(i64, i64)> for GroupElement {
    fn from((a, b): (i64, i64)) -> Self {
        Self::new(vec![a, b])
    }
}

/// A finite subset of Z^d: deduplicated, sorted lexicographically.
///
/// The empty set carries no dimension and composes with sets of any
/// dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupSet {
    elements: Vec<GroupElement>,
    dim: Option<usize>,
}

impl FiniteGroupSet {
    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
            dim: None,
        }
    }

    pub fn from_elements(mut elements: Vec<GroupElement>) -> Result<Self, GroupError> {
        let mut dim = None;
        for e in &elements {
            match dim {
                None => dim = Some(e.dim()),
                Some(d) if d != e.dim() => {
                    return Err(GroupError::DimensionMismatch {
                        left: d,
                        right: e.dim(),
                    })
                }
                _ => {}
            }
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(Self { elements, dim })
    }

    /// Elements must already be sorted, deduplicated, and of one dimension.
    pub(crate) fn from_sorted_unchecked(elements: Vec<GroupElement>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        let dim = elements.first().map(|e| e.dim());
        Self { elements, dim }
    }

    pub fn singleton(e: GroupElement) -> Self {
        Self {
            dim: Some(e.dim()),
            elements: vec![e],
        }
    }

    /// Integer points of one dimension, convenience for tests and the Z case.
    pub fn from_i64s(values: impl IntoIterator<Item = i64>) -> Self {
        Self::from_elements(values.into_iter().map(GroupElement::from).collect()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.elements.binary_search(e).is_ok()
    }

    fn check_dims(&self, other: &Self) -> Result<(), GroupError> {
        match (self.dim, other.dim) {
            (Some(a), Some(b)) if a != b => Err(GroupError::DimensionMismatch { left: a, right: b }),
            _ => Ok(()),
        }
    }

    /// { a^{-1} : a in A }.
    pub fn inverse(&self) -> Self {
        let mut elements: Vec<GroupElement> = self.elements.iter().map(|e| e.inverse()).collect();
        elements.sort_unstable();
        Self {
            elements,
            dim: self.dim,
        }
    }

    /// { a . b : a in A, b in B }, deduplicated.
    pub fn product(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_dims(other)?;
        if self.is_empty() || other.is_empty() {
            return Ok(Self::empty());
        }
        let mut elements = Vec::with_capacity(self.len() * other.len());
        for a in &self.elements {
            for b in &other.elements {
                elements.push(a.compose(b)?);
            }
        }
        elements.sort_unstable();
        elements.dedup();
        let dim = elements.first().map(|e| e.dim());
        Ok(Self { elements, dim })
    }

    /// Right translate A . g. Translation preserves lexicographic order.
    pub fn translate(&self, g: &GroupElement) -> Result<Self, GroupError> {
        if let Some(d) = self.dim {
            if d != g.dim() {
                return Err(GroupError::DimensionMismatch {
                    left: d,
                    right: g.dim(),
                });
            }
        }
        let elements: Vec<GroupElement> = self
            .elements
            .iter()
            .map(|e| e.compose(g))
            .collect::<Result<_, _>>()?;
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Ok(Self {
            elements,
            dim: self.dim,
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_dims(other)?;
        let mut elements = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.elements.len() && j < other.elements.len() {
            match self.elements[i].cmp(&other.elements[j]) {
                std::cmp::Ordering::Less => {
                    elements.push(self.elements[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    elements.push(other.elements[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    elements.push(self.elements[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        elements.extend_from_slice(&self.elements[i..]);
        elements.extend_from_slice(&other.elements[j..]);
        let dim = elements.first().map(|e| e.dim());
        Ok(Self { elements, dim })
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut elements = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.elements.len() && j < other.elements.len() {
            match self.elements[i].cmp(&other.elements[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    elements.push(self.elements[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        let dim = elements.first().map(|e| e.dim());
        Self { elements, dim }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut elements = Vec::new();
        let mut j = 0;
        for e in &self.elements {
            while j < other.elements.len() && other.elements[j] < *e {
                j += 1;
            }
            if j >= other.elements.len() || other.elements[j] != *e {
                elements.push(e.clone());
            }
        }
        let dim = elements.first().map(|e| e.dim());
        Self { elements, dim }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.elements.len() && j < other.elements.len() {
            match self.elements[i].cmp(&other.elements[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.elements.iter().all(|e| other.contains(e))
    }
}

impl<'a> IntoIterator for &'a FiniteGroupSet {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;
    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// The R-boundary of S: points s whose translate R.s meets both S and its
/// complement. Candidates are drawn from R^{-1}.S ∪ S, which provably
/// contains the boundary; `universe_hint` may prune that candidate set but
/// is assumed to contain the true boundary.
pub fn boundary(
    r: &FiniteGroupSet,
    s: &FiniteGroupSet,
    universe_hint: Option<&FiniteGroupSet>,
) -> Result<FiniteGroupSet, GroupError> {
    if r.is_empty() {
        return Err(GroupError::EmptySet("boundary reference R"));
    }
    if s.is_empty() {
        return Ok(FiniteGroupSet::empty());
    }
    let candidates = r.inverse().product(s)?.union(s)?;
    let mut out = Vec::new();
    'cand: for cand in &candidates {
        if let Some(hint) = universe_hint {
            if !hint.contains(cand) {
                continue;
            }
        }
        let mut meets_s = false;
        let mut meets_complement = false;
        for g in r {
            let translated = g.compose(cand)?;
            if s.contains(&translated) {
                meets_s = true;
            } else {
                meets_complement = true;
            }
            if meets_s && meets_complement {
                out.push(cand.clone());
                continue 'cand;
            }
        }
    }
    Ok(FiniteGroupSet::from_sorted_unchecked(out))
}

/// Arithmetic mean of `f` over a nonempty set. The evaluator returns `None`
/// where it is undefined, which is an error here.
pub fn average<F>(set: &FiniteGroupSet, f: F) -> Result<f64, GroupError>
where
    F: Fn(&GroupElement) -> Option<f64>,
{
    if set.is_empty() {
        return Err(GroupError::EmptySet("average"));
    }
    let mut sum = 0.0;
    for e in set {
        match f(e) {
            Some(v) => sum += v,
            None => return Err(GroupError::Undefined(e.clone())),
        }
    }
    Ok(sum / set.len() as f64)
}
