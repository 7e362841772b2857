//! Gap-sequence analytics: weighted sequence norms, the gap-length ⇔
//! potential-regularity consistency checks, decay-exponent estimation and
//! the smooth-approximation convergence experiment.
//!
//! All verdicts here are finite-evidence statements over a sampled range,
//! never proofs; the reports carry the tables they were derived from so a
//! reader can audit the call.

use std::fmt;

use crate::galerkin::{self, GalerkinError};
use crate::potential::{hormander_norm_partial, truncate, FourierPotential};
use crate::weights::Weight;

/// Nonnegative gap lengths `γ(n)`, `n = 1..=len`, with per-entry error
/// bounds inherited from the solver that produced them.
#[derive(Debug, Clone)]
pub struct GapSequence {
    gamma: Vec<f64>,
    err: Vec<f64>,
}

impl GapSequence {
    pub fn new(gamma: Vec<f64>, err: Vec<f64>) -> Self {
        assert_eq!(gamma.len(), err.len());
        Self { gamma, err }
    }

    /// Wraps a plain nonnegative sequence (zero error bounds).
    pub fn from_values(gamma: Vec<f64>) -> Self {
        let err = vec![0.0; gamma.len()];
        Self { gamma, err }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// `γ(n)` for `n` in `1..=len`.
    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma[n - 1]
    }

    pub fn err(&self, n: usize) -> f64 {
        self.err[n - 1]
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    pub fn errs(&self) -> &[f64] {
        &self.err
    }

    pub fn max_err(&self) -> f64 {
        self.err.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// Fit window shorter than the required minimum.
    RangeTooShort { n_lo: usize, n_hi: usize },
    /// Not enough entries above the error floor for a meaningful fit.
    TooFewPositiveEntries { have: usize, need: usize },
    /// Sup-differences grew across three successive truncation radii.
    NonMonotoneDivergence { at_k: usize },
    /// Gap computation inside an analysis routine failed.
    Galerkin(GalerkinError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::RangeTooShort { n_lo, n_hi } => {
                write!(f, "fit range [{n_lo}, {n_hi}] must span at least 9 indices")
            }
            AnalysisError::TooFewPositiveEntries { have, need } => {
                write!(f, "only {have} entries above the floor, need {need}")
            }
            AnalysisError::NonMonotoneDivergence { at_k } => {
                write!(f, "sup-differences diverge around K = {at_k}")
            }
            AnalysisError::Galerkin(e) => write!(f, "gap computation failed: {e}"),
        }
    }
}

impl std::error::Error for AnalysisError {}

impl From<GalerkinError> for AnalysisError {
    fn from(e: GalerkinError) -> Self {
        AnalysisError::Galerkin(e)
    }
}

/// Partial weighted sequence norm `sqrt( Σ_{k<=n} ω(k)² a(k)² )`.
pub fn weighted_norm_partial(a: &GapSequence, w: &Weight, n: usize) -> f64 {
    assert!(n <= a.len(), "cutoff beyond the sequence length");
    (1..=n)
        .map(|k| (w.eval(k as i64) * a.gamma(k)).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Signed remainder `r(n) = γ(n) - 2|q̂(n)|` of the first-order gap
/// asymptotics.
pub fn remainder(q: &FourierPotential, g: &GapSequence) -> Vec<f64> {
    (1..=g.len())
        .map(|n| g.gamma(n) - 2.0 * q.coeff(n as i64).norm())
        .collect()
}

/// Least-squares decay exponent: fits `log a(n) ~ -p log n` over
/// `n ∈ [n_lo, n_hi]` using entries with `a(n) > floor`, and returns
/// `(p, r²)`. The sequence is 1-indexed: `a[0]` is `a(1)`.
pub fn decay_fit(a: &[f64], n_lo: usize, n_hi: usize, floor: f64) -> Result<(f64, f64), AnalysisError> {
    if n_lo < 1 || n_hi > a.len() || n_hi < n_lo + 8 {
        return Err(AnalysisError::RangeTooShort { n_lo, n_hi });
    }
    let points: Vec<(f64, f64)> = (n_lo..=n_hi)
        .filter(|&n| a[n - 1] > floor)
        .map(|n| ((n as f64).ln(), a[n - 1].ln()))
        .collect();
    let need = (n_hi - n_lo + 1) / 2 + 1;
    if points.len() < need {
        return Err(AnalysisError::TooFewPositiveEntries { have: points.len(), need });
    }

    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let intercept = (sy - slope * sx) / m;

    let mean_y = sy / m;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((-slope, r2))
}

/// Default start of the fit window used by [`regularity_estimate`]; early
/// gaps carry preasymptotic structure.
pub const FIT_WINDOW_START: usize = 8;

/// Estimated critical Sobolev index `ŝ = p - 1/2` from the fitted decay
/// exponent of the gap sequence: under a clean power law `γ ∈ h^s`
/// exactly for `s < ŝ`. Fits over `[min(8, len/2), len]` with the maximal
/// error estimate as the floor.
pub fn regularity_estimate(g: &GapSequence) -> Result<f64, AnalysisError> {
    let n_hi = g.len();
    let n_lo = FIT_WINDOW_START.min((n_hi / 2).max(1));
    let (p, _r2) = decay_fit(g.gammas(), n_lo, n_hi, g.max_err())?;
    Ok(p - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceVerdict {
    Consistent,
    Inconsistent,
}

/// One cutoff row of the norm comparison table.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceRow {
    pub cutoff: usize,
    pub norm_q: f64,
    pub norm_gamma: f64,
    pub ratio: f64,
}

/// Finite-evidence comparison of `‖γ‖_{h^ω}` against `‖q‖_{H^ω}` over a
/// range of cutoffs.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub weight: String,
    pub rows: Vec<EquivalenceRow>,
    pub ratio_band: (f64, f64),
    pub verdict: EquivalenceVerdict,
    /// First cutoff whose ratio left the acceptance band.
    pub offending_cutoff: Option<usize>,
    /// Both partial norms were still growing at the last doubling; the
    /// ratio band is then a statement about two divergent sequences.
    pub both_divergent: bool,
}

/// First cutoff of the ratio scan.
pub const EQUIVALENCE_N0: usize = 8;

/// Growth factor over the last cutoff doubling beyond which a partial
/// norm is flagged as still divergent.
const DIVERGENCE_GROWTH: f64 = 1.25;

/// Checks the norm-equivalence consistency `‖γ‖/‖q‖ ∈ [1/C, C]` over
/// cutoffs `n ∈ [8, n_max]` with `C = tol`, using precomputed gaps.
pub fn equivalence_check_with_gaps(
    q: &FourierPotential,
    g: &GapSequence,
    w: &Weight,
    tol: f64,
) -> EquivalenceReport {
    assert!(tol > 1.0, "the acceptance band constant must exceed 1");
    let n_max = g.len();
    let n0 = EQUIVALENCE_N0.min(n_max);
    let mut rows = Vec::with_capacity(n_max - n0 + 1);
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    let mut offending = None;
    for cutoff in n0..=n_max {
        let norm_q = hormander_norm_partial(q, w, cutoff as i64);
        let norm_gamma = weighted_norm_partial(g, w, cutoff);
        // 0/0 is the degenerate zero-potential case and counts as ratio 1.
        let ratio = if norm_q == 0.0 && norm_gamma == 0.0 {
            1.0
        } else if norm_q == 0.0 {
            f64::INFINITY
        } else {
            norm_gamma / norm_q
        };
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        if (ratio < 1.0 / tol || ratio > tol) && offending.is_none() {
            offending = Some(cutoff);
        }
        rows.push(EquivalenceRow { cutoff, norm_q, norm_gamma, ratio });
    }

    let growth_of = |f: fn(&EquivalenceRow) -> f64| -> f64 {
        let last = rows.last().map(f).unwrap_or(0.0);
        let half = rows
            .iter()
            .min_by_key(|r| r.cutoff.abs_diff(n_max / 2))
            .map(f)
            .unwrap_or(0.0);
        if half > 0.0 {
            last / half
        } else {
            1.0
        }
    };
    let both_divergent =
        growth_of(|r| r.norm_q) > DIVERGENCE_GROWTH && growth_of(|r| r.norm_gamma) > DIVERGENCE_GROWTH;

    EquivalenceReport {
        weight: w.descriptor().to_string(),
        rows,
        ratio_band: (ratio_min, ratio_max),
        verdict: if offending.is_none() {
            EquivalenceVerdict::Consistent
        } else {
            EquivalenceVerdict::Inconsistent
        },
        offending_cutoff: offending,
        both_divergent,
    }
}

/// [`equivalence_check_with_gaps`] with the gaps computed here (adaptive
/// Galerkin, per-edge tolerance `tol_gaps`).
pub fn equivalence_check(
    q: &FourierPotential,
    w: &Weight,
    n_max: usize,
    tol: f64,
) -> Result<EquivalenceReport, AnalysisError> {
    let tol_gaps = 1e-6;
    let sr = galerkin::band_edges(q, n_max, tol_gaps)?;
    let g = galerkin::gaps(&sr);
    Ok(equivalence_check_with_gaps(q, &g, w, tol))
}

/// Outcome of the embedding check `h^{ω₁} ↪ h^{ω₂}`.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingOutcome {
    /// `ω₁ ≥ c ω₂` held on the range and the norm inequality followed.
    Pass { c: f64 },
    /// The norm inequality failed at some cutoff (numerical evidence of a
    /// broken precondition).
    Fail { c: f64, cutoff: usize },
    /// No valid constant: the ratio `ω₁/ω₂` drifts to zero, so the
    /// domination premise is untenable and the check does not apply.
    Inapplicable { ratio_at_end: f64 },
}

/// Verifies `ω₁(k) ≥ c ω₂(k)` on `[1, n_max]` (reporting the best `c`)
/// and then checks `‖a‖_{ω₂,n} ≤ (1/c) ‖a‖_{ω₁,n}` for every cutoff.
/// A ratio that keeps shrinking dyadically means no asymptotic `c`
/// exists, and the check is reported as inapplicable.
pub fn embedding_check(w1: &Weight, w2: &Weight, a: &GapSequence, n_max: usize) -> EmbeddingOutcome {
    let n_max = n_max.min(a.len());
    let mut c = f64::INFINITY;
    for k in 1..=n_max {
        let r = w1.eval(k as i64) / w2.eval(k as i64);
        c = c.min(r);
    }
    // Dyadic drift of the domination ratio: compare block minima.
    let mut block_min: Vec<f64> = Vec::new();
    for k in 1..=n_max {
        let j = (k as i64).ilog2() as usize;
        let r = w1.eval(k as i64) / w2.eval(k as i64);
        if j >= block_min.len() {
            block_min.push(r);
        } else {
            block_min[j] = block_min[j].min(r);
        }
    }
    let drifting = block_min.len() >= 4 && {
        let tail = &block_min[block_min.len() - 4..];
        tail.windows(2).all(|w| w[1] < w[0]) && tail[0] / tail[3] >= 2.0
    };
    if drifting || !(c > 0.0) {
        return EmbeddingOutcome::Inapplicable { ratio_at_end: *block_min.last().unwrap_or(&0.0) };
    }

    for cutoff in 1..=n_max {
        let lhs = weighted_norm_partial(a, w2, cutoff);
        let rhs = weighted_norm_partial(a, w1, cutoff) / c;
        if lhs > rhs * (1.0 + 1e-12) {
            return EmbeddingOutcome::Fail { c, cutoff };
        }
    }
    EmbeddingOutcome::Pass { c }
}

/// One truncation step of the smooth-approximation experiment.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingRow {
    pub k_cut: usize,
    /// `max_{n<=n_max} |γ_{q_K}(n) - γ_q(n)|`
    pub sup_diff: f64,
}

/// Gap convergence of the truncated potentials `q_K` toward the gaps of
/// `q` — the computable shadow of norm-resolvent convergence of the
/// smooth-potential approximations.
#[derive(Debug, Clone)]
pub struct SmoothingTable {
    pub rows: Vec<SmoothingRow>,
    /// Solver error bound on the reference gap sequence.
    pub reference_err: f64,
}

/// Runs the smooth-limit experiment: for each `K` in the increasing
/// `k_list`, gaps of `truncate(q, K)` are compared against the gaps of
/// `q` itself. Errors out if the sup-differences grow across three
/// successive radii. Gap solves run at per-edge tolerance `tol / 20`.
pub fn smoothing_convergence(
    q: &FourierPotential,
    k_list: &[usize],
    n_max: usize,
    tol: f64,
) -> Result<SmoothingTable, AnalysisError> {
    assert!(k_list.windows(2).all(|w| w[0] < w[1]), "k_list must be strictly increasing");
    assert!(!k_list.is_empty());
    let inner_tol = tol / 20.0;

    let reference = galerkin::gaps(&galerkin::band_edges(q, n_max, inner_tol)?);
    let mut rows = Vec::with_capacity(k_list.len());
    for &k_cut in k_list {
        let qk = truncate(q, k_cut as i64);
        let g = galerkin::gaps(&galerkin::band_edges(&qk, n_max, inner_tol)?);
        let sup_diff = (1..=n_max)
            .map(|n| (g.gamma(n) - reference.gamma(n)).abs())
            .fold(0.0f64, f64::max);
        rows.push(SmoothingRow { k_cut, sup_diff });
    }
    for w in rows.windows(3) {
        if w[1].sup_diff > w[0].sup_diff && w[2].sup_diff > w[1].sup_diff {
            return Err(AnalysisError::NonMonotoneDivergence { at_k: w[2].k_cut });
        }
    }
    Ok(SmoothingTable { rows, reference_err: reference.max_err() })
}
