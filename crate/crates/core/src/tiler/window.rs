//! The tiling pass engine. The window is rasterized onto a dense grid over
//! its bounding box; seed eligibility and the three exclusion categories are
//! counted exactly per pass via d-dimensional prefix sums.

use std::sync::Arc;

use num::bigint::BigInt;

use super::{partial_scale, TilerError, TilingParameters};
use crate::folner::FolnerSequence;
use crate::group::{FiniteGroupSet, GroupElement};
use crate::ratio::Rational;
use crate::scale::{validate_increasing_at, ScaleFamily};
use crate::vitali::{vitali_cover, ScaleAssignment, Tile};

/// Dense raster over the bounding box of a finite set, indexed in
/// lexicographic order (first coordinate most significant).
pub(crate) struct Grid {
    origin: Vec<i64>,
    sides: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn from_set(set: &FiniteGroupSet) -> Self {
        let dim = set.dim().expect("nonempty set");
        let mut lo = vec![i64::MAX; dim];
        let mut hi = vec![i64::MIN; dim];
        for e in set {
            for (axis, &c) in e.coords().iter().enumerate() {
                lo[axis] = lo[axis].min(c);
                hi[axis] = hi[axis].max(c);
            }
        }
        let sides: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .collect();
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * sides[axis + 1];
        }
        let len = sides.iter().product();
        Self {
            origin: lo,
            sides,
            strides,
            len,
        }
    }

    fn index_of(&self, e: &GroupElement) -> Option<usize> {
        let mut idx = 0usize;
        for (axis, &c) in e.coords().iter().enumerate() {
            let local = c - self.origin[axis];
            if local < 0 || local as usize >= self.sides[axis] {
                return None;
            }
            idx += local as usize * self.strides[axis];
        }
        Some(idx)
    }

    fn local_coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.sides.len()];
        for axis in 0..self.sides.len() {
            out[axis] = idx / self.strides[axis];
            idx %= self.strides[axis];
        }
        out
    }

    fn element_at(&self, idx: usize) -> GroupElement {
        let local = self.local_coords(idx);
        GroupElement::new(
            local
                .iter()
                .zip(&self.origin)
                .map(|(&l, &o)| l as i64 + o)
                .collect(),
        )
    }
}

/// Padded inclusive prefix sums supporting half-open box queries.
struct PrefixSum {
    sides: Vec<usize>, // padded (side + 1)
    strides: Vec<usize>,
    data: Vec<i64>,
}

impl PrefixSum {
    fn build<F>(grid: &Grid, value: F) -> Self
    where
        F: Fn(usize) -> i64,
    {
        let dim = grid.sides.len();
        let sides: Vec<usize> = grid.sides.iter().map(|s| s + 1).collect();
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * sides[axis + 1];
        }
        let len: usize = sides.iter().product();
        let mut data = vec![0i64; len];
        for idx in 0..grid.len {
            let local = grid.local_coords(idx);
            let mut pad_idx = 0usize;
            for (axis, &c) in local.iter().enumerate() {
                pad_idx += (c + 1) * strides[axis];
            }
            data[pad_idx] = value(idx);
        }
        for axis in 0..dim {
            let stride = strides[axis];
            let side = sides[axis];
            for i in 0..len {
                if (i / stride) % side > 0 {
                    data[i] += data[i - stride];
                }
            }
        }
        Self {
            sides,
            strides,
            data,
        }
    }

    /// Sum over the half-open box [lo, hi) in local grid coordinates; the
    /// caller must pre-clip so that hi[a] <= side[a].
    fn box_sum(&self, lo: &[usize], hi: &[usize]) -> i64 {
        let dim = self.sides.len();
        let mut total = 0i64;
        for mask in 0..(1usize << dim) {
            let mut idx = 0usize;
            let mut sign = 1i64;
            for (axis, stride) in self.strides.iter().enumerate() {
                let corner = if mask & (1 << axis) != 0 {
                    sign = -sign;
                    lo[axis]
                } else {
                    hi[axis]
                };
                idx += corner * stride;
            }
            total += sign * self.data[idx];
        }
        total
    }
}

/// Everything measured during one pass. Exclusion counts are exact, not the
/// coarse strip estimates.
#[derive(Debug, Clone)]
pub struct PassRecord {
    pub pass: usize,
    /// [L, R] of the band used by this pass.
    pub band: (usize, usize),
    pub seed_count: usize,
    pub tile_count: usize,
    /// |K_k|, cells covered by this pass.
    pub covered_cells: usize,
    pub cumulative_covered: usize,
    pub uncovered_after: usize,
    /// Uncovered points whose top-band footprint pokes out of the window.
    pub exclusion_window_boundary: u64,
    /// Uncovered points where the band's partial scale is undefined.
    pub exclusion_scale_undefined: u64,
    /// Per earlier pass j: uncovered points whose footprint would hit K_j.
    pub exclusion_collars: Vec<u64>,
    /// |uncovered \ S_k|, counted directly.
    pub missing_total: u64,
    pub tiles: Vec<Tile>,
}

/// Outcome of a full cascade run over one window.
#[derive(Debug)]
pub struct TilingState {
    pub window: Arc<FiniteGroupSet>,
    pub params: TilingParameters,
    pub passes: Vec<PassRecord>,
    /// Points of the window where every band admits a partial scale.
    pub p_member_count: usize,
    pub window_size: usize,
    pub final_uncovered: usize,
    grid: Grid,
    pass_of: Vec<u8>,
    in_window: Vec<bool>,
}

impl TilingState {
    pub fn p_density(&self) -> Rational {
        Rational::new(
            BigInt::from(self.p_member_count),
            BigInt::from(self.window_size),
        )
    }

    pub fn uncovered_fraction_after(&self, pass: usize) -> Rational {
        Rational::new(
            BigInt::from(self.passes[pass - 1].uncovered_after),
            BigInt::from(self.window_size),
        )
    }

    pub fn final_uncovered_fraction(&self) -> Rational {
        Rational::new(
            BigInt::from(self.final_uncovered),
            BigInt::from(self.window_size),
        )
    }

    pub fn covered_fraction(&self) -> Rational {
        Rational::new(
            BigInt::from(self.window_size - self.final_uncovered),
            BigInt::from(self.window_size),
        )
    }

    /// Window cells in canonical order with the pass index that covered each
    /// (0 = uncovered). Feeds the cell-map dump.
    pub fn cell_map(&self) -> impl Iterator<Item = (Vec<i64>, u8)> + '_ {
        (0..self.grid.len).filter_map(move |idx| {
            if self.in_window[idx] {
                Some((self.grid.element_at(idx).coords().to_vec(), self.pass_of[idx]))
            } else {
                None
            }
        })
    }

    /// Pass index covering the given point, if it lies in the window.
    pub fn pass_at(&self, point: &GroupElement) -> Option<u8> {
        let idx = self.grid.index_of(point)?;
        if self.in_window[idx] {
            Some(self.pass_of[idx])
        } else {
            None
        }
    }
}

/// Tiles the window in r passes, largest band first. Per pass: the seed set
/// S_k keeps the uncovered points whose whole top-of-band footprint sits in
/// uncovered window territory, the greedy cover lays disjoint tiles there,
/// and the points left out of S_k are attributed exactly to the three
/// exclusion categories (window boundary, undefined scale, collars of
/// earlier passes).
pub fn tile_window(
    window: Arc<FiniteGroupSet>,
    family: &dyn ScaleFamily,
    params: &TilingParameters,
    seq: &FolnerSequence,
) -> Result<TilingState, TilerError> {
    if window.is_empty() || window.dim() != Some(seq.dim()) {
        return Err(TilerError::BadWindow);
    }
    if params.passes > 250 {
        return Err(TilerError::BadLadder("more than 250 passes".into()));
    }
    if window.len() as u64 > params.cell_budget {
        return Err(TilerError::BudgetExceeded {
            constraint: "window size".into(),
            frontier: window.len(),
            cap: params.cell_budget as usize,
            budget: params.cell_budget,
        });
    }
    let grid = Grid::from_set(&window);
    if grid.len as u64 > params.cell_budget.max(window.len() as u64 * 16) {
        return Err(TilerError::BudgetExceeded {
            constraint: "window bounding box".into(),
            frontier: grid.len,
            cap: params.cell_budget as usize,
            budget: params.cell_budget,
        });
    }

    let mut in_window = vec![false; grid.len];
    for e in window.iter() {
        in_window[grid.index_of(e).expect("window cell inside its bounding box")] = true;
    }
    let mut pass_of = vec![0u8; grid.len];

    let r = params.passes;
    // Spot-check the family's contract on a few window points.
    for idx in [0usize, grid.len / 2, grid.len - 1] {
        let point = grid.element_at(idx);
        if !validate_increasing_at(family, &point, 16) {
            return Err(TilerError::FamilyNotIncreasing(point));
        }
    }

    // Partial scales per band per cell (0 = absent).
    let mut band_scales: Vec<Vec<u32>> = vec![vec![0u32; grid.len]; r];
    let mut p_member_count = 0usize;
    for idx in 0..grid.len {
        if !in_window[idx] {
            continue;
        }
        let point = grid.element_at(idx);
        let mut all_defined = true;
        for (band, scales) in band_scales.iter_mut().enumerate() {
            match partial_scale(&point, band, family, params) {
                Some(v) => {
                    scales[idx] = u32::try_from(v)
                        .map_err(|_| TilerError::BadLadder(format!("scale {v} overflows the raster")))?;
                }
                None => all_defined = false,
            }
        }
        if all_defined {
            p_member_count += 1;
        }
    }

    let dim = seq.dim();
    let window_size = window.len();
    let mut uncovered = window_size;
    let mut cumulative_covered = 0usize;
    let mut records: Vec<PassRecord> = Vec::with_capacity(r);

    for k in 1..=r {
        let band_idx = r - k;
        let (band_lo, band_hi) = params.bands[band_idx];
        let reach = band_hi; // footprint edge of F_{R_{band}} on the grid

        let blocked = PrefixSum::build(&grid, |i| i64::from(!in_window[i] || pass_of[i] != 0));
        let outside = PrefixSum::build(&grid, |i| i64::from(!in_window[i]));
        let earlier: Vec<PrefixSum> = (1..k)
            .map(|j| PrefixSum::build(&grid, |i| i64::from(pass_of[i] == j as u8)))
            .collect();

        let mut seeds: Vec<GroupElement> = Vec::new();
        let mut seed_scales: Vec<(GroupElement, u64)> = Vec::new();
        let mut e1 = 0u64;
        let mut e2 = 0u64;
        let mut e3 = vec![0u64; k - 1];
        let mut missing = 0u64;

        let mut clip_hi = vec![0usize; dim];
        for idx in 0..grid.len {
            if !in_window[idx] || pass_of[idx] != 0 {
                continue;
            }
            let local = grid.local_coords(idx);
            let mut fits_bbox = true;
            for axis in 0..dim {
                let hi = local[axis] + reach;
                if hi > grid.sides[axis] {
                    fits_bbox = false;
                }
                clip_hi[axis] = hi.min(grid.sides[axis]);
            }
            let pokes_out = !fits_bbox || outside.box_sum(&local, &clip_hi) > 0;
            if pokes_out {
                e1 += 1;
            }
            let scale = band_scales[band_idx][idx];
            if scale == 0 {
                e2 += 1;
            }
            for (j, ps) in earlier.iter().enumerate() {
                if ps.box_sum(&local, &clip_hi) > 0 {
                    e3[j] += 1;
                }
            }
            let eligible =
                !pokes_out && scale != 0 && blocked.box_sum(&local, &clip_hi) == 0;
            if eligible {
                let point = grid.element_at(idx);
                seed_scales.push((point.clone(), scale as u64));
                seeds.push(point);
            } else {
                missing += 1;
            }
        }

        let seed_set = FiniteGroupSet::from_sorted_unchecked(seeds);
        let assignment = ScaleAssignment::from_pairs(seed_scales);
        let seed_count = seed_set.len();
        let cover = vitali_cover(&seed_set, &assignment, seq, params.tempelman_c)?;

        for tile in &cover.tiles {
            if tile.scale < band_lo as u64 || tile.scale > band_hi as u64 {
                return Err(TilerError::BadLadder(format!(
                    "pass {k} produced scale {} outside band [{band_lo},{band_hi}]",
                    tile.scale
                )));
            }
            for cell in &tile.footprint {
                let idx = grid
                    .index_of(cell)
                    .ok_or_else(|| TilerError::TilePlacement(cell.clone()))?;
                if !in_window[idx] || pass_of[idx] != 0 {
                    return Err(TilerError::TilePlacement(cell.clone()));
                }
                pass_of[idx] = k as u8;
            }
        }

        let covered_cells = cover.covered.len();
        cumulative_covered += covered_cells;
        uncovered -= covered_cells;
        records.push(PassRecord {
            pass: k,
            band: (band_lo, band_hi),
            seed_count,
            tile_count: cover.tiles.len(),
            covered_cells,
            cumulative_covered,
            uncovered_after: uncovered,
            exclusion_window_boundary: e1,
            exclusion_scale_undefined: e2,
            exclusion_collars: e3,
            missing_total: missing,
            tiles: cover.tiles,
        });
    }

    Ok(TilingState {
        window,
        params: params.clone(),
        passes: records,
        p_member_count,
        window_size,
        final_uncovered: uncovered,
        grid,
        pass_of,
        in_window,
    })
}
