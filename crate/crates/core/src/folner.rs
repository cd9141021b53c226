//! Folner sequences on Z^d and their Tempelman/tempered ratio reports.
//!
//! The default family is the box family F_n = [0,n)^d. Custom increasing
//! families can be supplied; they are validated for monotonicity on the
//! prefix actually used. All ratios are exact rationals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::Zero;
use thiserror::Error;

use crate::group::{boundary, FiniteGroupSet, GroupElement, GroupError};
use crate::ratio::{ceil_to_u64, rat_int, Rational};

#[derive(Debug, Error)]
pub enum FolnerError {
    #[error("Folner indices start at 1")]
    ZeroIndex,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("family is not increasing: F_{smaller} is not contained in F_{larger}")]
    NotIncreasing { smaller: usize, larger: usize },
    #[error("index {requested} exceeds the available prefix {max}")]
    PrefixExceeded { requested: usize, max: usize },
    #[error("custom family produced an invalid set at index {index}: {reason}")]
    BadCustomSet { index: usize, reason: String },
}

type CustomGenerator = dyn Fn(usize) -> FiniteGroupSet + Send + Sync;

enum Family {
    Boxes,
    Custom {
        generator: Arc<CustomGenerator>,
        max_index: usize,
    },
}

/// Which union the ratio report uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnionVariant {
    /// Union over k <= n.
    Tempelman,
    /// Union over k < n.
    Tempered,
}

/// Per-index ratio evidence for a finite prefix of the sequence.
///
/// A prefix report cannot certify the defining condition for all n; it is
/// prefix evidence only. For the box family the analytic constant 2^d is
/// recorded alongside.
#[derive(Debug, Clone)]
pub struct TempelmanReport {
    pub variant: UnionVariant,
    pub prefix: usize,
    /// ratios[i] is the exact ratio at index n = i + 1.
    pub ratios: Vec<Rational>,
    /// set_sizes[i] = |F_{i+1}|.
    pub set_sizes: Vec<u64>,
    pub sup_ratio: Rational,
    /// Least integer dominating every ratio in the prefix.
    pub least_integer_c: u64,
    /// Known analytic constant of the family, when there is one (2^d for boxes).
    pub analytic_constant: Option<u64>,
}

impl TempelmanReport {
    /// Reports are evidence on a finite prefix, not a certificate for all n.
    pub const SCOPE_NOTE: &'static str = "prefix evidence";
}

pub struct FolnerSequence {
    dim: usize,
    family: Family,
    cache: Mutex<HashMap<usize, Arc<FiniteGroupSet>>>,
}

/// Sets up to this many cells are kept in the append-only cache; larger ones
/// are regenerated on demand.
const CACHE_CELL_LIMIT: u64 = 100_000;

impl FolnerSequence {
    pub fn boxes(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            dim,
            family: Family::Boxes,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// A user-supplied family. `generator(n)` must return the n-th set; the
    /// family is validated lazily for monotonicity on the indices used.
    pub fn custom<G>(dim: usize, max_index: usize, generator: G) -> Self
    where
        G: Fn(usize) -> FiniteGroupSet + Send + Sync + 'static,
    {
        Self {
            dim,
            family: Family::Custom {
                generator: Arc::new(generator),
                max_index,
            },
        cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_boxes(&self) -> bool {
        matches!(self.family, Family::Boxes)
    }

    /// None means the family is generated on demand without a fixed bound.
    pub fn max_index(&self) -> Option<usize> {
        match &self.family {
            Family::Boxes => None,
            Family::Custom { max_index, .. } => Some(*max_index),
        }
    }

    /// |F_n| without materializing the set.
    pub fn set_size(&self, n: usize) -> Result<u64, FolnerError> {
        match &self.family {
            Family::Boxes => {
                if n == 0 {
                    return Err(FolnerError::ZeroIndex);
                }
                Ok((n as u64).pow(self.dim as u32))
            }
            Family::Custom { .. } => Ok(self.folner_set(n)?.len() as u64),
        }
    }

    pub fn folner_set(&self, n: usize) -> Result<Arc<FiniteGroupSet>, FolnerError> {
        if n == 0 {
            return Err(FolnerError::ZeroIndex);
        }
        if let Some(max) = self.max_index() {
            if n > max {
                return Err(FolnerError::PrefixExceeded {
                    requested: n,
                    max,
                });
            }
        }
        if let Some(hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit.clone());
        }
        let set = match &self.family {
            Family::Boxes => Arc::new(box_set(self.dim, n)),
            Family::Custom { generator, .. } => {
                let set = generator(n);
                if set.is_empty() {
                    return Err(FolnerError::BadCustomSet {
                        index: n,
                        reason: "empty set".into(),
                    });
                }
                if set.dim() != Some(self.dim) {
                    return Err(FolnerError::BadCustomSet {
                        index: n,
                        reason: format!("dimension {:?}, expected {}", set.dim(), self.dim),
                    });
                }
                Arc::new(set)
            }
        };
        if set.len() as u64 <= CACHE_CELL_LIMIT {
            self.cache.lock().unwrap().entry(n).or_insert_with(|| set.clone());
        }
        Ok(set)
    }

    /// Exact |boundary(R, F_n)| / |F_n|.
    pub fn folner_ratio(&self, r: &FiniteGroupSet, n: usize) -> Result<Rational, FolnerError> {
        let f_n = self.folner_set(n)?;
        let b = boundary(r, &f_n, None)?;
        Ok(Rational::new(
            BigInt::from(b.len()),
            BigInt::from(f_n.len()),
        ))
    }

    /// Exact |boundary(F_r_index, F_n)| / |F_n| computed analytically for the
    /// box family. Returns None for custom families.
    pub fn box_to_box_ratio(&self, r_index: usize, n: usize) -> Option<Rational> {
        if !self.is_boxes() || r_index == 0 || n == 0 {
            return None;
        }
        let count = box_boundary_count(r_index as u64, n as u64, self.dim as u32);
        let size = BigInt::from(n as u64).pow(self.dim as u32);
        Some(Rational::new(count, size))
    }

    /// F_t^{-1} F_t, the domination collar shape at scale t. For boxes this
    /// is the symmetric box [-(t-1), t-1]^d, generated directly rather than
    /// through the quadratic set product.
    pub fn inverse_product_set(&self, t: usize) -> Result<Arc<FiniteGroupSet>, FolnerError> {
        if t == 0 {
            return Err(FolnerError::ZeroIndex);
        }
        if self.is_boxes() {
            return Ok(Arc::new(symmetric_box_set(self.dim, t as i64 - 1)));
        }
        let f_t = self.folner_set(t)?;
        Ok(Arc::new(f_t.inverse().product(&f_t)?))
    }

    /// |union over k <= t of F_k^{-1} F_t|. For nested boxes the union
    /// collapses to F_t^{-1} F_t of size (2t-1)^d.
    pub fn tempelman_union_size(&self, t: usize) -> Result<BigInt, FolnerError> {
        if t == 0 {
            return Err(FolnerError::ZeroIndex);
        }
        if self.is_boxes() {
            return Ok(BigInt::from(2 * t as u64 - 1).pow(self.dim as u32));
        }
        let f_t = self.folner_set(t)?;
        let mut union = FiniteGroupSet::empty();
        for k in 1..=t {
            union = union.union(&self.folner_set(k)?.inverse().product(&f_t)?)?;
        }
        Ok(BigInt::from(union.len()))
    }

    /// Checks F_k <= F_n for k <= n on the given prefix.
    pub fn validate_increasing(&self, up_to: usize) -> Result<(), FolnerError> {
        if self.is_boxes() {
            return Ok(()); // nested by construction
        }
        let mut prev: Option<Arc<FiniteGroupSet>> = None;
        for n in 1..=up_to {
            let cur = self.folner_set(n)?;
            if let Some(p) = &prev {
                if !p.is_subset(&cur) {
                    return Err(FolnerError::NotIncreasing {
                        smaller: n - 1,
                        larger: n,
                    });
                }
            }
            prev = Some(cur);
        }
        Ok(())
    }

    pub fn tempelman_report(&self, prefix: usize) -> Result<TempelmanReport, FolnerError> {
        self.union_report(prefix, UnionVariant::Tempelman)
    }

    pub fn tempered_report(&self, prefix: usize) -> Result<TempelmanReport, FolnerError> {
        self.union_report(prefix, UnionVariant::Tempered)
    }

    fn union_report(&self, prefix: usize, variant: UnionVariant) -> Result<TempelmanReport, FolnerError> {
        if prefix == 0 {
            return Err(FolnerError::ZeroIndex);
        }
        self.validate_increasing(prefix)?;
        let mut ratios = Vec::with_capacity(prefix);
        let mut set_sizes = Vec::with_capacity(prefix);
        for n in 1..=prefix {
            let f_n = self.folner_set(n)?;
            let upper = match variant {
                UnionVariant::Tempelman => n,
                UnionVariant::Tempered => n - 1,
            };
            let mut union = FiniteGroupSet::empty();
            for k in 1..=upper {
                let f_k = self.folner_set(k)?;
                union = union.union(&f_k.inverse().product(&f_n)?)?;
            }
            ratios.push(Rational::new(
                BigInt::from(union.len()),
                BigInt::from(f_n.len()),
            ));
            set_sizes.push(f_n.len() as u64);
        }
        let sup_ratio = ratios
            .iter()
            .cloned()
            .fold(Rational::zero(), |acc, r| if r > acc { r } else { acc });
        let least_integer_c = ceil_to_u64(&sup_ratio).expect("ratio is nonnegative and finite");
        let analytic_constant = if self.is_boxes() {
            Some(2u64.pow(self.dim as u32))
        } else {
            None
        };
        Ok(TempelmanReport {
            variant,
            prefix,
            ratios,
            set_sizes,
            sup_ratio,
            least_integer_c,
            analytic_constant,
        })
    }
}

/// The box [0,n)^d in lexicographic order.
fn box_set(dim: usize, n: usize) -> FiniteGroupSet {
    let total = (n as u64).pow(dim as u32) as usize;
    let mut elements = Vec::with_capacity(total);
    let mut coords = vec![0i64; dim];
    loop {
        elements.push(GroupElement::new(coords.clone()));
        // increment least-significant (last) coordinate, lex order
        let mut idx = dim;
        loop {
            if idx == 0 {
                return FiniteGroupSet::from_sorted_unchecked(elements);
            }
            idx -= 1;
            coords[idx] += 1;
            if coords[idx] < n as i64 {
                break;
            }
            coords[idx] = 0;
        }
    }
}

/// The symmetric box [-radius, radius]^d in lexicographic order.
fn symmetric_box_set(dim: usize, radius: i64) -> FiniteGroupSet {
    let side = (2 * radius + 1) as usize;
    let total = (side as u64).pow(dim as u32) as usize;
    let mut elements = Vec::with_capacity(total);
    let mut coords = vec![-radius; dim];
    loop {
        elements.push(GroupElement::new(coords.clone()));
        let mut idx = dim;
        loop {
            if idx == 0 {
                return FiniteGroupSet::from_sorted_unchecked(elements);
            }
            idx -= 1;
            coords[idx] += 1;
            if coords[idx] <= radius {
                break;
            }
            coords[idx] = -radius;
        }
    }
}

/// |boundary(F_r, F_n)| for the box family, where F_r = [0,r)^d:
/// the candidate box [-(r-1), n-1]^d minus the fully-interior box [0, n-r]^d.
pub fn box_boundary_count(r: u64, n: u64, dim: u32) -> BigInt {
    let outer = BigInt::from(n + r - 1).pow(dim);
    let inner = if n >= r {
        BigInt::from(n - r + 1).pow(dim)
    } else {
        BigInt::zero()
    };
    outer - inner
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn box_sets_match_definition() {
        let seq1 = FolnerSequence::boxes(1);
        assert_eq!(*seq1.folner_set(3).unwrap(), FiniteGroupSet::from_i64s([0, 1, 2]));
        assert_eq!(*seq1.folner_set(1).unwrap(), FiniteGroupSet::from_i64s([0]));

        let seq2 = FolnerSequence::boxes(2);
        let expect = FiniteGroupSet::from_elements(
            [(0, 0), (0, 1), (1, 0), (1, 1)]
                .into_iter()
                .map(GroupElement::from)
                .collect(),
        )
        .unwrap();
        assert_eq!(*seq2.folner_set(2).unwrap(), expect);
        assert_eq!(seq2.folner_set(5).unwrap().len(), 25);
        assert!(matches!(seq2.folner_set(0), Err(FolnerError::ZeroIndex)));
    }

    #[test]
    fn box_sets_contain_identity_and_are_increasing() {
        for dim in 1..=3 {
            let seq = FolnerSequence::boxes(dim);
            let mut prev = seq.folner_set(1).unwrap();
            assert!(prev.contains(&GroupElement::identity(dim)));
            for n in 2..=5 {
                let cur = seq.folner_set(n).unwrap();
                assert!(prev.is_subset(&cur), "F_{} not in F_{} at d={}", n - 1, n, dim);
                assert!(cur.contains(&GroupElement::identity(dim)));
                prev = cur;
            }
        }
    }

    #[test]
    fn folner_ratio_interval() {
        let seq = FolnerSequence::boxes(1);
        let r = FiniteGroupSet::from_i64s([-1, 0, 1]);
        assert_eq!(seq.folner_ratio(&r, 10).unwrap(), rat(4, 10));
    }

    #[test]
    fn folner_ratio_singleton_identity_is_zero() {
        let seq = FolnerSequence::boxes(1);
        let r = FiniteGroupSet::singleton(GroupElement::identity(1));
        for n in [1, 5, 40] {
            assert_eq!(seq.folner_ratio(&r, n).unwrap(), rat(0, 1));
        }
    }

    #[test]
    fn folner_ratio_square_decays() {
        let seq = FolnerSequence::boxes(2);
        let r_elems: Vec<GroupElement> = (-1..=1)
            .flat_map(|a| (-1..=1).map(move |b| GroupElement::from((a, b))))
            .collect();
        let r = FiniteGroupSet::from_elements(r_elems).unwrap();
        let at_10 = seq.folner_ratio(&r, 10).unwrap();
        assert!(at_10 < rat(4 * (2 * 10 + 2), 100));
        let at_40 = seq.folner_ratio(&r, 40).unwrap();
        assert!(at_40 < at_10);
    }

    #[test]
    fn symmetric_r_ratio_nonincreasing_beyond_radius() {
        let seq = FolnerSequence::boxes(1);
        let r = FiniteGroupSet::from_i64s([-2, -1, 0, 1, 2]);
        let mut prev = seq.folner_ratio(&r, 3).unwrap();
        for n in [4, 6, 9, 14, 21, 30] {
            let cur = seq.folner_ratio(&r, n).unwrap();
            assert!(cur <= prev, "ratio increased from n={} to n={}", n - 1, n);
            prev = cur;
        }
    }

    #[test]
    fn tempelman_interval_prefix() {
        let seq = FolnerSequence::boxes(1);
        let report = seq.tempelman_report(64).unwrap();
        for (i, ratio) in report.ratios.iter().enumerate() {
            let n = (i + 1) as i64;
            assert_eq!(*ratio, rat(2 * n - 1, n), "ratio mismatch at n={n}");
        }
        assert_eq!(report.sup_ratio, rat(127, 64));
        assert_eq!(report.least_integer_c, 2);
        assert_eq!(report.analytic_constant, Some(2));
    }

    #[test]
    fn tempelman_square_prefix() {
        let seq = FolnerSequence::boxes(2);
        let report = seq.tempelman_report(16).unwrap();
        for (i, ratio) in report.ratios.iter().enumerate() {
            let n = (i + 1) as i64;
            let side = rat(2 * n - 1, n);
            assert_eq!(*ratio, side.clone() * side, "ratio mismatch at n={n}");
        }
        assert_eq!(report.least_integer_c, 4);
        assert_eq!(report.analytic_constant, Some(4));
    }

    #[test]
    fn singleton_prefix_reports() {
        for dim in 1..=2 {
            let seq = FolnerSequence::boxes(dim);
            let full = seq.tempelman_report(1).unwrap();
            assert_eq!(full.ratios, vec![rat(1, 1)]);
            assert_eq!(full.least_integer_c, 1);
            let strict = seq.tempered_report(1).unwrap();
            assert_eq!(strict.ratios, vec![rat(0, 1)]);
            assert_eq!(strict.least_integer_c, 0);
        }
    }

    #[test]
    fn tempered_interval_prefix() {
        let seq = FolnerSequence::boxes(1);
        let report = seq.tempered_report(64).unwrap();
        for (i, ratio) in report.ratios.iter().enumerate() {
            let n = (i + 1) as i64;
            let expect = if n == 1 { rat(0, 1) } else { rat(2 * n - 2, n) };
            assert_eq!(*ratio, expect, "ratio mismatch at n={n}");
        }
        assert_eq!(report.sup_ratio, rat(126, 64));
        assert_eq!(report.least_integer_c, 2);
    }

    #[test]
    fn tempered_never_exceeds_tempelman_and_dimension_bound() {
        for dim in 1..=2 {
            let seq = FolnerSequence::boxes(dim);
            let n_max = if dim == 1 { 32 } else { 10 };
            let full = seq.tempelman_report(n_max).unwrap();
            let strict = seq.tempered_report(n_max).unwrap();
            let bound = rat_int(2u64.pow(dim as u32));
            for n in 0..n_max {
                assert!(strict.ratios[n] <= full.ratios[n]);
                assert!(full.ratios[n] <= bound);
            }
        }
    }

    #[test]
    fn box_boundary_count_matches_enumeration() {
        for dim in 1..=2u32 {
            let seq = FolnerSequence::boxes(dim as usize);
            for r in 1..=4usize {
                let r_set = seq.folner_set(r).unwrap();
                for n in 1..=9usize {
                    let f_n = seq.folner_set(n).unwrap();
                    let enumerated = boundary(&r_set, &f_n, None).unwrap().len();
                    assert_eq!(
                        box_boundary_count(r as u64, n as u64, dim),
                        BigInt::from(enumerated),
                        "mismatch at d={dim} r={r} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn collar_and_union_fast_paths_match_enumeration() {
        for dim in 1..=2usize {
            let seq = FolnerSequence::boxes(dim);
            for t in 1..=5usize {
                let f_t = seq.folner_set(t).unwrap();
                let generic = f_t.inverse().product(&f_t).unwrap();
                assert_eq!(*seq.inverse_product_set(t).unwrap(), generic);

                let mut union = FiniteGroupSet::empty();
                for k in 1..=t {
                    let f_k = seq.folner_set(k).unwrap();
                    union = union.union(&f_k.inverse().product(&f_t).unwrap()).unwrap();
                }
                assert_eq!(
                    seq.tempelman_union_size(t).unwrap(),
                    BigInt::from(union.len()),
                    "union size mismatch at d={dim} t={t}"
                );
            }
        }
    }

    #[test]
    fn custom_family_monotonicity_is_validated() {
        // A deliberately shrinking family.
        let seq = FolnerSequence::custom(1, 10, |n| {
            if n == 2 {
                FiniteGroupSet::from_i64s([5])
            } else {
                FiniteGroupSet::from_i64s(0..n as i64)
            }
        });
        assert!(matches!(
            seq.tempelman_report(3),
            Err(FolnerError::NotIncreasing { .. })
        ));

        let good = FolnerSequence::custom(1, 10, |n| FiniteGroupSet::from_i64s(0..n as i64));
        assert_eq!(good.tempelman_report(8).unwrap().least_integer_c, 2);
        assert!(matches!(
            good.folner_set(11),
            Err(FolnerError::PrefixExceeded { .. })
        ));
    }

    #[test]
    fn reports_recount_against_brute_force() {
        // Independent recount with raw integer sets.
        let seq = FolnerSequence::boxes(1);
        let report = seq.tempelman_report(12).unwrap();
        for n in 1..=12usize {
            let mut union = std::collections::HashSet::new();
            for k in 1..=n {
                for a in 0..k as i64 {
                    for b in 0..n as i64 {
                        union.insert(b - a);
                    }
                }
            }
            assert_eq!(
                report.ratios[n - 1],
                rat(union.len() as i64, n as i64)
            );
        }
    }
}
