//! Multi-scale tiling cascade: derive the parameter ladder (pass count r,
//! error budgets G_i and eta, scale bands [L_i, R_i], window threshold),
//! choose a window, and tile it in r greedy passes from the largest band
//! down, certifying coverage and exclusion bounds with exact counts.

mod certify;
mod window;

pub use certify::{certify_coverage, CoverageCertificate};
pub use window::{tile_window, PassRecord, TilingState};

use std::sync::Arc;

use num::bigint::BigInt;
use num::{One, Zero};
use thiserror::Error;

use crate::folner::{FolnerError, FolnerSequence};
use crate::group::{GroupElement, GroupError};
use crate::ratio::{rat, rat_int, Rational};
use crate::scale::{least_value_at_least, ScaleFamily};
use crate::vitali::VitaliError;

#[derive(Debug, Error)]
pub enum TilerError {
    #[error("epsilon must lie strictly between 0 and 1")]
    InvalidEpsilon,
    #[error("the Tempelman integer must be at least 2, got {0}")]
    InvalidConstant(u64),
    #[error("eta degenerated to zero; epsilon {0} is too small to bisect")]
    DegenerateEta(String),
    #[error("cell budget exceeded while satisfying `{constraint}`: needs index > {frontier} but |F_n| <= {budget} caps the index at {cap}")]
    BudgetExceeded {
        constraint: String,
        frontier: usize,
        cap: usize,
        budget: u64,
    },
    #[error("sequence prefix exhausted while satisfying `{constraint}` (max index {max})")]
    PrefixExhausted { constraint: String, max: usize },
    #[error("no band top reaches the required sample fraction for band starting at {band_start}: achieved {achieved} of {required} points")]
    BandTopUnreachable {
        band_start: usize,
        achieved: usize,
        required: usize,
    },
    #[error("band sample is empty")]
    EmptySample,
    #[error("scale family is not strictly increasing at {0}")]
    FamilyNotIncreasing(GroupElement),
    #[error("window is empty or has mismatched dimension")]
    BadWindow,
    #[error("tile placement escaped the uncovered region at {0}; the scale family or sequence violates its contract")]
    TilePlacement(GroupElement),
    #[error("invalid band ladder: {0}")]
    BadLadder(String),
    #[error(transparent)]
    Folner(#[from] FolnerError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Vitali(#[from] VitaliError),
}

/// How aggressively the ladder spreads its scale bands.
///
/// `Paper` uses the band-gap threshold eta/|F_{R_i}| and window threshold
/// delta = eta/|F_{R_{r-1}}|, which guarantees the exclusion bounds even
/// through coarse strip estimates but grows doubly exponentially and fails
/// any desk-scale cell budget almost immediately.
///
/// `ExactStrip` uses threshold eta for band gaps and the window. Because
/// exclusion strips are counted exactly (never through the |boundary| x |F|
/// over-estimate), this still guarantees every certified bound a priori, at
/// roughly (2/eta)^r growth.
///
/// `Desk` (default) uses the run's epsilon for band gaps and eta for the
/// window. The window-boundary bound stays guaranteed; the collar bounds are
/// certified per run from exact counts instead of a priori. This is the only
/// policy whose ladders fit a desk-scale budget at moderate epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LadderPolicy {
    Paper,
    ExactStrip,
    #[default]
    Desk,
}

impl LadderPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            LadderPolicy::Paper => "paper",
            LadderPolicy::ExactStrip => "exact-strip",
            LadderPolicy::Desk => "desk",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "paper" => Some(LadderPolicy::Paper),
            "exact-strip" | "exact" => Some(LadderPolicy::ExactStrip),
            "desk" => Some(LadderPolicy::Desk),
            _ => None,
        }
    }

    fn gap_threshold(&self, eta: &Rational, epsilon: &Rational, band_top_size: u64) -> Rational {
        match self {
            LadderPolicy::Paper => eta / rat_int(band_top_size),
            LadderPolicy::ExactStrip => eta.clone(),
            LadderPolicy::Desk => epsilon.clone(),
        }
    }

    fn window_threshold(&self, eta: &Rational, delta: &Rational) -> Rational {
        match self {
            LadderPolicy::Paper => delta.clone(),
            LadderPolicy::ExactStrip | LadderPolicy::Desk => eta.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LadderOptions {
    pub policy: LadderPolicy,
    /// Fail fast once any ladder index needs |F_n| beyond this many cells.
    pub cell_budget: u64,
    /// For custom families, how many indices past a found threshold are
    /// re-checked (boxes have monotone ratios and need no span).
    pub check_span: usize,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            policy: LadderPolicy::default(),
            cell_budget: 100_000_000,
            check_span: 32,
        }
    }
}

/// The full parameter ladder for one cascade run.
#[derive(Debug, Clone)]
pub struct TilingParameters {
    pub epsilon: Rational,
    pub tempelman_c: u64,
    /// r, the number of passes.
    pub passes: usize,
    /// Slope of the linear error polynomial G_i, i = 1..=r (index i-1).
    pub g_slopes: Vec<Rational>,
    pub alpha: Rational,
    pub eta: Rational,
    /// Threshold index of the F_r boundary condition.
    pub l0: usize,
    /// Scale bands [L_i, R_i], smallest first; band i feeds pass r - i.
    pub bands: Vec<(usize, usize)>,
    /// eta / |F_{R_{r-1}}|, the window ratio threshold as defined.
    pub delta: Rational,
    /// The window ratio threshold this run actually uses (policy-dependent).
    pub window_threshold: Rational,
    pub policy: LadderPolicy,
    pub cell_budget: u64,
    /// False for hand-built ladders, where no epsilon chain is claimed.
    pub derived_from_epsilon: bool,
}

impl TilingParameters {
    /// (C-1)/C.
    pub fn shrink_factor(&self) -> Rational {
        rat(self.tempelman_c as i64 - 1, self.tempelman_c as i64)
    }

    /// G_k(x) for 1 <= k <= r.
    pub fn g_value(&self, k: usize, x: &Rational) -> Rational {
        &self.g_slopes[k - 1] * x
    }

    /// ((C-1)/C)^k + G_k(eta), the claimed uncovered bound after pass k.
    pub fn pass_bound(&self, k: usize) -> Rational {
        pow_rational(&self.shrink_factor(), k) + self.g_value(k, &self.eta)
    }

    pub fn top_band(&self) -> (usize, usize) {
        *self.bands.last().expect("at least one band")
    }

    /// A hand-built ladder for demonstrations and degenerate-case tests.
    /// Structural checks only; no epsilon chain is claimed and the
    /// certificate marks the run accordingly.
    pub fn custom(
        tempelman_c: u64,
        eta: Rational,
        bands: Vec<(usize, usize)>,
        window_threshold: Rational,
        cell_budget: u64,
    ) -> Result<Self, TilerError> {
        if tempelman_c < 2 {
            return Err(TilerError::InvalidConstant(tempelman_c));
        }
        if eta <= Rational::zero() || eta >= Rational::one() {
            return Err(TilerError::BadLadder("eta must lie in (0,1)".into()));
        }
        if bands.is_empty() {
            return Err(TilerError::BadLadder("at least one band".into()));
        }
        let mut prev_top = 0usize;
        for &(lo, hi) in &bands {
            if lo == 0 || hi < lo || lo <= prev_top {
                return Err(TilerError::BadLadder(format!(
                    "bands must be disjoint, increasing, and positive; offending band ({lo},{hi})"
                )));
            }
            prev_top = hi;
        }
        let passes = bands.len();
        let g_slopes = g_slopes(tempelman_c, passes);
        Ok(Self {
            epsilon: Rational::one(),
            tempelman_c,
            passes,
            g_slopes,
            alpha: eta.clone(),
            eta,
            l0: bands[0].0,
            bands,
            delta: window_threshold.clone(),
            window_threshold,
            policy: LadderPolicy::Desk,
            cell_budget,
            derived_from_epsilon: false,
        })
    }
}

fn pow_rational(base: &Rational, exp: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Slopes of the linear family G_i(x) = ((C-1)/C)^i x + sum_{k=1}^{i+1} k x,
/// which satisfies G_1(x) >= (2/C) x and
/// G_i(x) >= ((C-1)/C) G_{i-1}(x) + (i+1) x.
fn g_slopes(c: u64, passes: usize) -> Vec<Rational> {
    let shrink = rat(c as i64 - 1, c as i64);
    (1..=passes)
        .map(|i| {
            let tri = (i as i64 + 1) * (i as i64 + 2) / 2;
            pow_rational(&shrink, i) + rat(tri, 1)
        })
        .collect()
}

/// Largest box index whose cell count fits the budget.
pub(crate) fn budget_index(dim: usize, cell_budget: u64) -> usize {
    let mut lo = 1u64;
    let mut hi = cell_budget.max(1);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let cells = BigInt::from(mid).pow(dim as u32);
        if cells <= BigInt::from(cell_budget) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as usize
}

/// Exact |boundary(F_r, F_n)| / |F_n| through the sequence's fast path when
/// available, otherwise by enumeration.
fn boundary_ratio(seq: &FolnerSequence, r_index: usize, n: usize) -> Result<Rational, TilerError> {
    if let Some(ratio) = seq.box_to_box_ratio(r_index, n) {
        return Ok(ratio);
    }
    let r_set = seq.folner_set(r_index)?;
    Ok(seq.folner_ratio(&r_set, n)?)
}

/// Least n in (frontier, cap] whose F_r-boundary ratio is below `threshold`,
/// verified on the checked range. Box ratios are monotone nonincreasing in n
/// (tested), so a binary search is exact there; custom families are scanned.
fn least_index_below(
    seq: &FolnerSequence,
    r_index: usize,
    threshold: &Rational,
    frontier: usize,
    constraint: &str,
    opts: &LadderOptions,
) -> Result<usize, TilerError> {
    let cap_budget = budget_index(seq.dim(), opts.cell_budget);
    let cap = match seq.max_index() {
        Some(max) => max.min(cap_budget),
        None => cap_budget,
    };
    if frontier >= cap {
        return Err(TilerError::BudgetExceeded {
            constraint: constraint.into(),
            frontier,
            cap,
            budget: opts.cell_budget,
        });
    }
    if seq.is_boxes() {
        if boundary_ratio(seq, r_index, cap)? >= *threshold {
            return Err(TilerError::BudgetExceeded {
                constraint: constraint.into(),
                frontier,
                cap,
                budget: opts.cell_budget,
            });
        }
        let mut lo = frontier; // ratio(lo) >= threshold or lo == frontier
        let mut hi = cap; // ratio(hi) < threshold
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if boundary_ratio(seq, r_index, mid)? < *threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(hi);
    }
    // Custom family: scan, then re-check a span of following indices.
    let mut found = None;
    for n in (frontier + 1)..=cap {
        if boundary_ratio(seq, r_index, n)? < *threshold {
            found = Some(n);
            break;
        }
    }
    let n = found.ok_or_else(|| match seq.max_index() {
        Some(max) if max <= cap_budget => TilerError::PrefixExhausted {
            constraint: constraint.into(),
            max,
        },
        _ => TilerError::BudgetExceeded {
            constraint: constraint.into(),
            frontier,
            cap,
            budget: opts.cell_budget,
        },
    })?;
    for m in (n + 1)..=cap.min(n + opts.check_span) {
        if boundary_ratio(seq, r_index, m)? >= *threshold {
            return Err(TilerError::PrefixExhausted {
                constraint: format!("{constraint}: ratio rises again at n = {m}"),
                max: cap,
            });
        }
    }
    Ok(n)
}

/// Least band top p* >= band_start so that more than a (1 - eta^2/r)
/// fraction of the sample points admit some scale value in
/// [band_start, p*]. Values beyond `index_cap` cannot be used and count as
/// absent.
pub fn select_band_top(
    band_start: usize,
    family: &dyn ScaleFamily,
    sample: &[GroupElement],
    eta: &Rational,
    passes: usize,
    index_cap: usize,
) -> Result<usize, TilerError> {
    if sample.is_empty() {
        return Err(TilerError::EmptySample);
    }
    let mut hits: Vec<u64> = Vec::with_capacity(sample.len());
    for point in sample {
        if let Some((_, value)) =
            least_value_at_least(family, point, band_start as u64, index_cap + 1)
        {
            if value <= index_cap as u64 {
                hits.push(value);
            }
        }
    }
    hits.sort_unstable();
    // required = least integer count with count/N > 1 - eta^2/r, exactly.
    let n = sample.len();
    let target = (Rational::one() - eta * eta / rat_int(passes as u64)) * rat_int(n as u64);
    let required = (target.floor().to_integer() + BigInt::one())
        .try_into()
        .unwrap_or(usize::MAX);
    if hits.len() < required {
        return Err(TilerError::BandTopUnreachable {
            band_start,
            achieved: hits.len(),
            required,
        });
    }
    Ok(hits[required - 1] as usize)
}

/// The chosen window: the smallest family set whose top-band boundary ratio
/// is below the threshold.
#[derive(Debug, Clone)]
pub struct WindowChoice {
    pub index: usize,
    pub set: Arc<crate::group::FiniteGroupSet>,
    pub achieved_ratio: Rational,
}

pub fn choose_window(
    threshold: &Rational,
    seq: &FolnerSequence,
    top_band: usize,
    cell_budget: u64,
) -> Result<WindowChoice, TilerError> {
    if *threshold <= Rational::zero() {
        return Err(TilerError::BadLadder("window threshold must be positive".into()));
    }
    let opts = LadderOptions {
        cell_budget,
        ..LadderOptions::default()
    };
    let index = least_index_below(seq, top_band, threshold, 0, "window boundary condition", &opts)?;
    let achieved_ratio = boundary_ratio(seq, top_band, index)?;
    Ok(WindowChoice {
        index,
        set: seq.folner_set(index)?,
        achieved_ratio,
    })
}

/// p_i at one point: the least-index scale value landing in band i, if any.
pub fn partial_scale(
    point: &GroupElement,
    band: usize,
    family: &dyn ScaleFamily,
    params: &TilingParameters,
) -> Option<u64> {
    let (lo, hi) = params.bands[band];
    let (_, value) = least_value_at_least(family, point, lo as u64, hi + 1)?;
    if value <= hi as u64 {
        Some(value)
    } else {
        None
    }
}

/// Builds the full ladder from a coverage target.
///
/// The sample points feed the band-top selection; they stand in for the
/// abstract density argument, and the certificate later measures the
/// realized density of the actual window exactly.
pub fn derive_parameters(
    epsilon: &Rational,
    tempelman_c: u64,
    seq: &FolnerSequence,
    family: &dyn ScaleFamily,
    band_sample: &[GroupElement],
    opts: &LadderOptions,
) -> Result<TilingParameters, TilerError> {
    if *epsilon <= Rational::zero() || *epsilon >= Rational::one() {
        return Err(TilerError::InvalidEpsilon);
    }
    if tempelman_c < 2 {
        return Err(TilerError::InvalidConstant(tempelman_c));
    }

    let half_epsilon = epsilon / rat_int(2);
    let shrink = rat(tempelman_c as i64 - 1, tempelman_c as i64);

    // r: least pass count with ((C-1)/C)^r < eps/2.
    let mut passes = 0usize;
    let mut power = Rational::one();
    while power >= half_epsilon {
        power *= &shrink;
        passes += 1;
    }

    let g_slopes = g_slopes(tempelman_c, passes);
    let top_slope = g_slopes.last().expect("r >= 1").clone();

    // alpha: largest dyadic grid value with G_r(alpha) < eps/2, by bisection.
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for _ in 0..64 {
        let mid = (&lo + &hi) / rat_int(2);
        if &top_slope * &mid < half_epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = lo;
    if alpha.is_zero() {
        return Err(TilerError::DegenerateEta(epsilon.to_string()));
    }
    let eta = alpha.clone().min(epsilon.clone());

    let index_cap = match seq.max_index() {
        Some(max) => max.min(budget_index(seq.dim(), opts.cell_budget)),
        None => budget_index(seq.dim(), opts.cell_budget),
    };

    // L_0: sizes above it have small F_r-boundary (r = pass count, taken
    // literally). The first good index minus one is the least threshold.
    let first_good = least_index_below(seq, passes, &eta, 0, "L_0 boundary condition", opts)?;
    let l0 = first_good.saturating_sub(1).max(1);

    let mut bands: Vec<(usize, usize)> = Vec::with_capacity(passes);
    let mut band_start = l0;
    for i in 0..passes {
        let band_top = select_band_top(band_start, family, band_sample, &eta, passes, index_cap)?;
        let top_cells = BigInt::from(band_top as u64).pow(seq.dim() as u32);
        if seq.is_boxes() && top_cells > BigInt::from(opts.cell_budget) {
            return Err(TilerError::BudgetExceeded {
                constraint: format!("band {i} top (p*)"),
                frontier: band_top,
                cap: index_cap,
                budget: opts.cell_budget,
            });
        }
        bands.push((band_start, band_top));
        if i + 1 < passes {
            let gap = opts
                .policy
                .gap_threshold(&eta, epsilon, seq.set_size(band_top)?);
            band_start = least_index_below(
                seq,
                band_top,
                &gap,
                band_top,
                &format!("L_{} band gap", i + 1),
                opts,
            )?;
        }
    }

    let top = bands.last().unwrap().1;
    let delta = &eta / rat_int(seq.set_size(top)?);
    let window_threshold = opts.policy.window_threshold(&eta, &delta);

    Ok(TilingParameters {
        epsilon: epsilon.clone(),
        tempelman_c,
        passes,
        g_slopes,
        alpha,
        eta,
        l0,
        bands,
        delta,
        window_threshold,
        policy: opts.policy,
        cell_budget: opts.cell_budget,
        derived_from_epsilon: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{ParityScales, UniformScales};

    fn sample_1d(n: i64) -> Vec<GroupElement> {
        (0..n).map(GroupElement::from).collect()
    }

    #[test]
    fn pass_count_examples() {
        let seq = FolnerSequence::boxes(1);
        let params = derive_parameters(
            &rat(3, 10),
            2,
            &seq,
            &UniformScales,
            &sample_1d(16),
            &LadderOptions::default(),
        )
        .unwrap();
        // (1/2)^3 = 0.125 < 0.15
        assert_eq!(params.passes, 3);

        // C=4, eps=0.05: (3/4)^13 < 0.025 <= (3/4)^12.
        let mut power = Rational::one();
        let shrink = rat(3, 4);
        for _ in 0..12 {
            power *= &shrink;
        }
        assert!(power >= rat(1, 40));
        assert!(power.clone() * &shrink < rat(1, 40));
        let mut r = 0;
        let mut p = Rational::one();
        while p >= rat(5, 100) / rat_int(2) {
            p *= &shrink;
            r += 1;
        }
        assert_eq!(r, 13);
    }

    #[test]
    fn g_family_satisfies_paper_conditions() {
        for c in [2u64, 3, 4] {
            let slopes = g_slopes(c, 6);
            let shrink = rat(c as i64 - 1, c as i64);
            // G_1(x) >= (2/C) x
            assert!(slopes[0] >= rat(2, c as i64));
            // G_i(x) >= ((C-1)/C) G_{i-1}(x) + (i+1) x
            for i in 2..=6 {
                let lhs = slopes[i - 1].clone();
                let rhs = &shrink * &slopes[i - 2] + rat(i as i64 + 1, 1);
                assert!(lhs >= rhs, "G_{i} violates the recursion at C={c}");
            }
        }
        // Worked instance: C=2 gives G_1 slope 1/2 + 3 = 3.5 >= 2/2 = 1.
        assert_eq!(g_slopes(2, 1)[0], rat(7, 2));
    }

    #[test]
    fn alpha_and_eta_meet_their_inequalities() {
        let seq = FolnerSequence::boxes(1);
        let eps = rat(3, 10);
        let params = derive_parameters(
            &eps,
            2,
            &seq,
            &UniformScales,
            &sample_1d(16),
            &LadderOptions::default(),
        )
        .unwrap();
        let half = &eps / rat_int(2);
        assert!(params.g_value(params.passes, &params.alpha) < half);
        assert!(params.g_value(params.passes, &params.eta) < half);
        assert!(params.eta <= eps);
        assert!(params.eta > Rational::zero());
        let mut power = Rational::one();
        for _ in 0..params.passes {
            power *= params.shrink_factor();
        }
        assert!(power < half);
    }

    #[test]
    fn band_top_uniform_family_is_band_start() {
        let got = select_band_top(3, &UniformScales, &sample_1d(10), &rat(1, 10), 3, 1 << 20).unwrap();
        assert_eq!(got, 3);
    }

    #[test]
    fn band_top_parity_family() {
        // Even points have values i, odd points 2i; from band start 4 both
        // classes hit value 4 (i=4 and i=2 respectively).
        let sample: Vec<GroupElement> = (0..10).map(GroupElement::from).collect();
        let got = select_band_top(4, &ParityScales, &sample, &rat(1, 10), 3, 1 << 20).unwrap();
        assert_eq!(got, 4);
    }

    #[test]
    fn band_top_reports_achieved_fraction_on_failure() {
        // No point has any value: unreachable regardless of eta.
        let nowhere = |_: &GroupElement, _: usize| None;
        let err = select_band_top(2, &nowhere, &sample_1d(8), &rat(1, 10), 2, 1 << 20).unwrap_err();
        match err {
            TilerError::BandTopUnreachable {
                achieved, required, ..
            } => {
                assert_eq!(achieved, 0);
                assert!(required >= 8);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn band_top_empty_sample_is_an_error() {
        assert!(matches!(
            select_band_top(2, &UniformScales, &[], &rat(1, 10), 2, 1 << 20),
            Err(TilerError::EmptySample)
        ));
    }

    #[test]
    fn window_choice_examples() {
        let seq = FolnerSequence::boxes(1);
        // F_4 = [0,4): boundary size 6, least m with 6/m < 1/10 is 61.
        let w = choose_window(&rat(1, 10), &seq, 4, 1_000_000).unwrap();
        assert_eq!(w.index, 61);
        assert_eq!(w.achieved_ratio, rat(6, 61));

        // Vacuous threshold 1: first window with ratio < 1 is m = 2R-1.
        let w = choose_window(&rat(1, 1), &seq, 4, 1_000_000).unwrap();
        assert_eq!(w.index, 7);

        // Unachievable threshold within the budget.
        let err = choose_window(&rat(1, 1_000_000_000), &seq, 4, 10_000).unwrap_err();
        assert!(matches!(err, TilerError::BudgetExceeded { .. }));
    }

    #[test]
    fn partial_scale_examples() {
        let params = TilingParameters::custom(
            2,
            rat(1, 10),
            vec![(3, 5)],
            rat(1, 10),
            1_000_000,
        )
        .unwrap();
        assert_eq!(
            partial_scale(&GroupElement::from(0i64), 0, &UniformScales, &params),
            Some(3)
        );
        let doubler = |_: &GroupElement, i: usize| Some(2 * i as u64);
        assert_eq!(
            partial_scale(&GroupElement::from(0i64), 0, &doubler, &params),
            Some(4)
        );
        let skip = TilingParameters::custom(2, rat(1, 10), vec![(5, 5)], rat(1, 10), 1_000_000).unwrap();
        assert_eq!(
            partial_scale(&GroupElement::from(0i64), 0, &doubler, &skip),
            None
        );
    }

    #[test]
    fn desk_ladder_shape_for_the_reference_run() {
        // d=1, C=2, eps=0.3: eta is the largest dyadic just below 2/135, so
        // L_0 = 270 and the desk gaps spread by a factor 2/eps.
        let seq = FolnerSequence::boxes(1);
        let params = derive_parameters(
            &rat(3, 10),
            2,
            &seq,
            &UniformScales,
            &sample_1d(32),
            &LadderOptions::default(),
        )
        .unwrap();
        assert_eq!(params.passes, 3);
        assert!(params.eta < rat(2, 135));
        assert!(params.eta > rat(2, 135) - rat(1, 1 << 40));
        assert_eq!(params.l0, 270);
        assert_eq!(params.bands[0], (270, 270));
        assert_eq!(params.bands[1], (1794, 1794));
        assert_eq!(params.bands[2], (11954, 11954));
        assert_eq!(params.delta, &params.eta / rat_int(11954));

        let w = choose_window(&params.window_threshold, &seq, params.top_band().1, params.cell_budget)
            .unwrap();
        // Window must hold the top-band boundary below eta.
        assert!(w.achieved_ratio < params.eta);
        assert!(w.index >= 11954 * 2);
    }

    #[test]
    fn paper_policy_reports_binding_constraint() {
        let seq = FolnerSequence::boxes(1);
        let opts = LadderOptions {
            policy: LadderPolicy::Paper,
            ..LadderOptions::default()
        };
        let err = derive_parameters(&rat(3, 10), 2, &seq, &UniformScales, &sample_1d(16), &opts)
            .unwrap_err();
        match err {
            TilerError::BudgetExceeded { constraint, .. } => {
                assert!(constraint.contains("band gap") || constraint.contains("window"));
            }
            other => panic!("expected a named budget failure, got {other:?}"),
        }
    }

    #[test]
    fn tiny_epsilon_fails_fast_with_named_constraint() {
        let seq = FolnerSequence::boxes(2);
        let err = derive_parameters(
            &rat(1, 1_000_000),
            4,
            &seq,
            &UniformScales,
            &sample_1d(16),
            &LadderOptions::default(),
        )
        .unwrap_err();
        match err {
            TilerError::BudgetExceeded { constraint, .. } => {
                assert_eq!(constraint, "L_0 boundary condition");
            }
            other => panic!("expected budget failure, got {other:?}"),
        }
    }

    #[test]
    fn custom_ladder_validation() {
        assert!(TilingParameters::custom(2, rat(1, 10), vec![(2, 4), (4, 9)], rat(1, 2), 1000).is_err());
        assert!(TilingParameters::custom(2, rat(1, 10), vec![(0, 4)], rat(1, 2), 1000).is_err());
        assert!(TilingParameters::custom(2, rat(11, 10), vec![(1, 4)], rat(1, 2), 1000).is_err());
        assert!(TilingParameters::custom(1, rat(1, 10), vec![(1, 4)], rat(1, 2), 1000).is_err());
        let ok = TilingParameters::custom(2, rat(1, 10), vec![(2, 4), (5, 9)], rat(1, 2), 1000).unwrap();
        assert_eq!(ok.passes, 2);
        assert!(!ok.derived_from_epsilon);
    }

    #[test]
    fn budget_index_is_exact() {
        assert_eq!(budget_index(1, 100), 100);
        assert_eq!(budget_index(2, 100), 10);
        assert_eq!(budget_index(2, 99), 9);
        assert_eq!(budget_index(3, 1_000_000), 100);
        assert_eq!(budget_index(1, 1), 1);
    }

    #[test]
    fn box_ratio_is_monotone_nonincreasing() {
        for dim in 1..=3usize {
            let seq = FolnerSequence::boxes(dim);
            for r in [2usize, 5] {
                let mut prev = boundary_ratio(&seq, r, 1).unwrap();
                for n in 2..=60 {
                    let cur = boundary_ratio(&seq, r, n).unwrap();
                    assert!(cur <= prev, "ratio rose at d={dim} r={r} n={n}");
                    prev = cur;
                }
            }
        }
    }
}
