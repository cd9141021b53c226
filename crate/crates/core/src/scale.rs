//! Scale function families: for each point x an increasing sequence of
//! admissible tile sizes l_1(x) < l_2(x) < ...
//!
//! Families are evaluated lazily; `None` means the family has fewer than
//! `index` values at that point (partial domain).

use crate::group::GroupElement;

/// A pointwise increasing family of scale functions. For every point where
/// values exist, `scale(x, i+1) > scale(x, i)`.
pub trait ScaleFamily: Sync {
    /// l_index(point), with index starting at 1. None when the family has
    /// fewer than `index` values at this point.
    fn scale(&self, point: &GroupElement, index: usize) -> Option<u64>;
}

impl<F> ScaleFamily for F
where
    F: Fn(&GroupElement, usize) -> Option<u64> + Sync,
{
    fn scale(&self, point: &GroupElement, index: usize) -> Option<u64> {
        self(point, index)
    }
}

/// l_i(x) = i everywhere: every scale is admissible at every point.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScales;

impl ScaleFamily for UniformScales {
    fn scale(&self, _point: &GroupElement, index: usize) -> Option<u64> {
        Some(index as u64)
    }
}

/// l_i(x) = i * (1 + parity of the first coordinate). Exercises partial
/// bands: odd points only admit even scales.
#[derive(Debug, Clone, Copy)]
pub struct ParityScales;

impl ScaleFamily for ParityScales {
    fn scale(&self, point: &GroupElement, index: usize) -> Option<u64> {
        let parity = (point.coords()[0].rem_euclid(2)) as u64;
        Some(index as u64 * (1 + parity))
    }
}

/// Least value of the family at `point` that is >= `lo`, together with its
/// index. Exploits monotonicity in the index: values are strictly increasing
/// integers, so l_j >= l_1 + (j - 1) and a binary search applies.
///
/// Returns None when every value is below `lo` or the family is undefined.
pub fn least_value_at_least(
    family: &dyn ScaleFamily,
    point: &GroupElement,
    lo: u64,
    index_cap: usize,
) -> Option<(usize, u64)> {
    let first = family.scale(point, 1)?;
    if first >= lo {
        return Some((1, first));
    }
    // Strictly increasing integer values: l_j >= first + (j - 1), so any j
    // past lo - first + 1 already has l_j >= lo. That gives a finite search
    // range; index_cap guards degenerate families.
    let mut hi_idx = ((lo - first) as usize + 1).min(index_cap.max(1));
    // Values may be undefined beyond some index; find the last defined index
    // below hi_idx if needed.
    let value_at = |j: usize| family.scale(point, j);
    match value_at(hi_idx) {
        Some(v) if v >= lo => {}
        Some(_) => return None, // even the capped index is below lo
        None => {
            // Walk back to the last defined index.
            let mut lo_idx = 1usize;
            let mut hi = hi_idx;
            while lo_idx + 1 < hi {
                let mid = lo_idx + (hi - lo_idx) / 2;
                if value_at(mid).is_some() {
                    lo_idx = mid;
                } else {
                    hi = mid;
                }
            }
            hi_idx = lo_idx;
            match value_at(hi_idx) {
                Some(v) if v >= lo => {}
                _ => return None,
            }
        }
    }
    // Binary search the least index with value >= lo on [1, hi_idx].
    let mut below = 0usize; // values at indices <= below are < lo
    let mut at_or_above = hi_idx;
    while below + 1 < at_or_above {
        let mid = below + (at_or_above - below) / 2;
        match value_at(mid) {
            Some(v) if v >= lo => at_or_above = mid,
            Some(_) => below = mid,
            None => at_or_above = mid, // undefined counts as unusable upper part
        }
    }
    let v = value_at(at_or_above)?;
    if v >= lo {
        Some((at_or_above, v))
    } else {
        None
    }
}

/// Checks strict monotonicity in the index at `point` for the first few
/// defined values. Used to validate user-supplied families on samples.
pub fn validate_increasing_at(family: &dyn ScaleFamily, point: &GroupElement, depth: usize) -> bool {
    let mut prev: Option<u64> = None;
    for i in 1..=depth {
        match family.scale(point, i) {
            Some(v) => {
                if let Some(p) = prev {
                    if v <= p {
                        return false;
                    }
                }
                prev = Some(v);
            }
            None => return true, // partial domain is fine; values must stop cleanly
        }
    }
    true
}
