//! Greedy Vitali covering: from a finite seed set S and a scale assignment l,
//! select pairwise-disjoint tiles F_{l(x)}.x whose union K captures at least
//! a 1/C fraction of S ∪ K.
//!
//! The loop is the standard greedy: repeatedly take the largest remaining
//! scale, pick the canonically least seed with that scale that is not yet
//! dominated, lay its tile, and dominate the collar F_t^{-1} F_t . x around
//! it. Domination (not tile overlap) is what guarantees disjointness.

use std::collections::{BTreeMap, HashSet};

use num::bigint::BigInt;
use thiserror::Error;

use crate::folner::{FolnerError, FolnerSequence};
use crate::group::{FiniteGroupSet, GroupElement, GroupError};
use crate::ratio::Rational;

#[derive(Debug, Error)]
pub enum VitaliError {
    #[error("scale assignment undefined at seed {0}")]
    MissingScale(GroupElement),
    #[error("scale indices start at 1 (seed {0})")]
    ZeroScale(GroupElement),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Scale per seed point, stored sorted by point for canonical iteration.
#[derive(Debug, Clone, Default)]
pub struct ScaleAssignment {
    entries: Vec<(GroupElement, u64)>,
}

impl ScaleAssignment {
    pub fn from_pairs(mut pairs: Vec<(GroupElement, u64)>) -> Self {
        pairs.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        Self { entries: pairs }
    }

    pub fn from_fn<F>(points: &FiniteGroupSet, f: F) -> Self
    where
        F: Fn(&GroupElement) -> u64,
    {
        Self {
            entries: points.iter().map(|p| (p.clone(), f(p))).collect(),
        }
    }

    pub fn get(&self, point: &GroupElement) -> Option<u64> {
        self.entries
            .binary_search_by(|(p, _)| p.cmp(point))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u64)> {
        self.entries.iter().map(|(p, s)| (p, *s))
    }
}

/// One selected tile F_scale . center.
#[derive(Debug, Clone)]
pub struct Tile {
    pub center: GroupElement,
    pub scale: u64,
    pub footprint: FiniteGroupSet,
}

/// Output of the greedy cover, with the exact packing certificate.
#[derive(Debug, Clone)]
pub struct VitaliResult {
    /// Tiles in selection order (scales nonincreasing).
    pub tiles: Vec<Tile>,
    /// K: union of the tile footprints.
    pub covered: FiniteGroupSet,
    /// D: the dominated set; contains S and K at termination.
    pub dominated: FiniteGroupSet,
    /// |K| / |S ∪ K|, exact.
    pub packing_ratio: Rational,
    /// The Tempelman integer the certificate is measured against.
    pub tempelman_c: u64,
}

pub fn vitali_cover(
    seeds: &FiniteGroupSet,
    scales: &ScaleAssignment,
    seq: &FolnerSequence,
    tempelman_c: u64,
) -> Result<VitaliResult, VitaliError> {
    // Bucket seed indices by scale; within a bucket indices are ascending,
    // i.e. canonical order, which fixes the "least j" tie-break.
    let mut buckets: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (idx, point) in seeds.iter().enumerate() {
        let scale = scales
            .get(point)
            .ok_or_else(|| VitaliError::MissingScale(point.clone()))?;
        if scale == 0 {
            return Err(VitaliError::ZeroScale(point.clone()));
        }
        if let Some(max) = seq.max_index() {
            if scale as usize > max {
                return Err(FolnerError::PrefixExceeded {
                    requested: scale as usize,
                    max,
                }
                .into());
            }
        }
        buckets.entry(scale).or_default().push(idx);
    }

    let mut tiles = Vec::new();
    let mut covered_cells: Vec<GroupElement> = Vec::new();
    let mut dominated_cells: Vec<GroupElement> = Vec::new();
    let mut dominated: HashSet<GroupElement> = HashSet::new();

    while let Some((&scale, _)) = buckets.iter().next_back() {
        let bucket = buckets.remove(&scale).unwrap();
        let footprint_shape = seq.folner_set(scale as usize)?;
        let collar_shape = seq.inverse_product_set(scale as usize)?;
        for idx in bucket {
            let center = &seeds.elements()[idx];
            if dominated.contains(center) {
                continue;
            }
            let footprint = footprint_shape.translate(center)?;
            covered_cells.extend(footprint.iter().cloned());
            let collar = collar_shape.translate(center)?;
            for cell in &collar {
                if dominated.insert(cell.clone()) {
                    dominated_cells.push(cell.clone());
                }
            }
            tiles.push(Tile {
                center: center.clone(),
                scale,
                footprint,
            });
        }
    }

    covered_cells.sort_unstable();
    debug_assert!(covered_cells.windows(2).all(|w| w[0] < w[1]), "tiles overlap");
    covered_cells.dedup();
    let covered = FiniteGroupSet::from_sorted_unchecked(covered_cells);
    dominated_cells.sort_unstable();
    let dominated = FiniteGroupSet::from_sorted_unchecked(dominated_cells);

    let s_union_k = seeds.union(&covered)?;
    let packing_ratio = Rational::new(BigInt::from(covered.len()), BigInt::from(s_union_k.len().max(1)));

    Ok(VitaliResult {
        tiles,
        covered,
        dominated,
        packing_ratio,
        tempelman_c,
    })
}

/// One clause of a verification verdict.
#[derive(Debug, Clone)]
pub struct VerdictClause {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VitaliVerdict {
    pub clauses: Vec<VerdictClause>,
    pub pass: bool,
}

impl VitaliVerdict {
    pub fn failed_clauses(&self) -> impl Iterator<Item = &VerdictClause> {
        self.clauses.iter().filter(|c| !c.pass)
    }
}

/// Re-checks a cover's claims from scratch, independently of the greedy
/// bookkeeping: pairwise disjointness, recounted union, the exact packing
/// bound C|K| >= |S ∪ K|, tile provenance, and the Tempelman precondition at
/// the scales actually used.
pub fn verify_vitali(
    result: &VitaliResult,
    seeds: &FiniteGroupSet,
    scales: &ScaleAssignment,
    seq: &FolnerSequence,
    tempelman_c: u64,
) -> Result<VitaliVerdict, VitaliError> {
    let mut clauses = Vec::new();
    let mut push = |name: &'static str, pass: bool, detail: String| {
        clauses.push(VerdictClause { name, pass, detail });
    };

    // Pairwise disjointness by explicit pairwise intersection.
    let mut overlap = None;
    'outer: for i in 0..result.tiles.len() {
        for j in i + 1..result.tiles.len() {
            if !result.tiles[i]
                .footprint
                .is_disjoint(&result.tiles[j].footprint)
            {
                overlap = Some((i, j));
                break 'outer;
            }
        }
    }
    push(
        "tiles-pairwise-disjoint",
        overlap.is_none(),
        match overlap {
            None => format!("{} tiles", result.tiles.len()),
            Some((i, j)) => format!("tiles {i} and {j} intersect"),
        },
    );

    // Recount K from the raw footprints.
    let mut recount = FiniteGroupSet::empty();
    for tile in &result.tiles {
        recount = recount.union(&tile.footprint)?;
    }
    push(
        "covered-recount",
        recount == result.covered,
        format!("recounted |K| = {}, stored |K| = {}", recount.len(), result.covered.len()),
    );

    // Exact packing bound with recomputed sizes.
    let s_union_k = seeds.union(&recount)?;
    let lhs = tempelman_c as u128 * recount.len() as u128;
    let rhs = s_union_k.len() as u128;
    push(
        "packing-bound",
        lhs >= rhs,
        format!("C|K| = {lhs} vs |S ∪ K| = {rhs}"),
    );
    let recomputed_ratio = Rational::new(
        BigInt::from(recount.len()),
        BigInt::from(s_union_k.len().max(1)),
    );
    push(
        "ratio-matches",
        recomputed_ratio == result.packing_ratio,
        format!("recomputed {recomputed_ratio}"),
    );

    // Tile provenance: centers are seeds and carry their assigned scale.
    let provenance_ok = result.tiles.iter().all(|t| {
        seeds.contains(&t.center) && scales.get(&t.center) == Some(t.scale)
    });
    push("centers-are-seeds", provenance_ok, String::new());

    let mut footprints_ok = true;
    for tile in &result.tiles {
        let expect = seq.folner_set(tile.scale as usize)?.translate(&tile.center)?;
        if expect != tile.footprint {
            footprints_ok = false;
            break;
        }
    }
    push("footprints-exact", footprints_ok, String::new());

    // Seeds are dominated at termination.
    push(
        "seeds-dominated",
        seeds.is_subset(&result.dominated),
        String::new(),
    );

    // The packing argument silently assumes the Tempelman property at the
    // used scales; check it exactly.
    let mut used_scales: Vec<u64> = result.tiles.iter().map(|t| t.scale).collect();
    used_scales.sort_unstable();
    used_scales.dedup();
    let mut precondition_ok = true;
    let mut precondition_detail = String::new();
    for t in used_scales {
        let union_size = seq.tempelman_union_size(t as usize)?;
        let bound = BigInt::from(tempelman_c) * BigInt::from(seq.set_size(t as usize)?);
        if union_size > bound {
            precondition_ok = false;
            precondition_detail = format!("scale {t}: union {union_size} > C|F_t| = {bound}");
            break;
        }
    }
    push("tempelman-precondition", precondition_ok, precondition_detail);

    let pass = clauses.iter().all(|c| c.pass);
    Ok(VitaliVerdict { clauses, pass })
}
