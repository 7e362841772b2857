//! Floquet-discriminant oracle.
//!
//! `Δ(λ)` is the trace of the monodromy matrix of `-u'' + q u = λ u` over
//! one period. Its sign structure encodes the spectrum: `|Δ| ≤ 2` on the
//! bands (all solutions bounded), `|Δ| > 2` strictly inside the gaps, and
//! band edges are the roots of `Δ = ±2` — `Δ = +2` for the periodic
//! family (even gap index), `Δ = -2` for the antiperiodic one (odd). That
//! makes this module an oracle fully independent of the Galerkin path:
//! trigonometric-polynomial potentials go through an adaptive
//! Runge–Kutta integration of the monodromy system, and the Dirac comb
//! has a closed-form transfer matrix.
//!
//! Root location walks the gaps in ascending order. Between gap `n-1`
//! and gap `n` the shifted function `h(λ) = σΔ(λ) - 4` (σ the gap's edge
//! level) rises monotonically from -8, tops out inside the closure of
//! gap `n`, and falls again, so the walk looks for the first positive
//! sample or the first local maximum. A positive top yields two
//! bisections; a nonpositive top within the refined bracket is a
//! collapsed gap (`Δ` tangent to ±2), recorded with zero length.

use std::fmt;

use crate::galerkin::SpectrumResult;
use crate::ode::{integrate, OdeError};
use crate::potential::FourierPotential;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    /// The ODE path needs a pointwise-evaluable (finitely supported)
    /// potential.
    NotFinitelySupported,
    Ode(OdeError),
    /// Monodromy determinant strayed from 1 beyond `10 × rk_tol`.
    WronskianDrift { lambda: f64, defect: f64 },
    /// Could not find the region `Δ > 2` below the ground state.
    GroundEdgeNotFound,
    /// A root search wandered past its window; after one grid
    /// refinement this is reported as a failure.
    MissedRoots { near: f64 },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::NotFinitelySupported => {
                write!(f, "potential is not finitely supported; use the Galerkin path")
            }
            TraceError::Ode(e) => write!(f, "monodromy integration failed: {e}"),
            TraceError::WronskianDrift { lambda, defect } => {
                write!(f, "monodromy determinant off by {defect:.3e} at lambda = {lambda}")
            }
            TraceError::GroundEdgeNotFound => write!(f, "could not bracket the ground state"),
            TraceError::MissedRoots { near } => {
                write!(f, "band-edge search failed near lambda = {near}")
            }
        }
    }
}

impl std::error::Error for TraceError {}

impl From<OdeError> for TraceError {
    fn from(e: OdeError) -> Self {
        TraceError::Ode(e)
    }
}

/// `Δ(λ)` for a trigonometric-polynomial potential by integrating the
/// two-solution monodromy system over one period. The Wronskian
/// (determinant) is checked against 1 within `10 × rk_tol`.
pub fn monodromy_trace(q: &FourierPotential, lambda: f64, rk_tol: f64) -> Result<f64, TraceError> {
    let poly = q.as_trig_poly().ok_or(TraceError::NotFinitelySupported)?;
    let rhs = move |x: f64, y: &[f64; 4]| {
        let qv = poly.eval(x) - lambda;
        [y[1], qv * y[0], y[3], qv * y[2]]
    };
    // Columns (u1, u1') and (u2, u2') with initial data (1,0) and (0,1).
    // The local controller tolerance is tightened well below rk_tol. Two
    // consumers need that headroom: the accumulated determinant defect
    // must land within the 10 × rk_tol acceptance, and the edge searches
    // bisect Δ = ±2 where narrow gaps leave Δ only quadratically above
    // the level — locating those edges to δλ demands trace errors below
    // |Δ'(edge)| · δλ, which is orders of magnitude below the gap scale.
    let local_tol = (rk_tol * 1e-4).max(5e-15);
    let m = integrate(&rhs, 0.0, 1.0, [1.0, 0.0, 0.0, 1.0], local_tol)?;
    let det = m[0] * m[3] - m[1] * m[2];
    let defect = (det - 1.0).abs();
    if defect > 10.0 * rk_tol {
        return Err(TraceError::WronskianDrift { lambda, defect });
    }
    Ok(m[0] + m[3])
}

/// Entire-function evaluation of `sin(√λ)/√λ` (λ > 0), `sinh(√-λ)/√-λ`
/// (λ < 0), with the series through λ = 0.
fn sinc_sqrt(lambda: f64) -> f64 {
    if lambda.abs() < 1e-8 {
        return 1.0 - lambda / 6.0 + lambda * lambda / 120.0;
    }
    if lambda > 0.0 {
        let w = lambda.sqrt();
        w.sin() / w
    } else {
        let w = (-lambda).sqrt();
        w.sinh() / w
    }
}

fn cos_sqrt(lambda: f64) -> f64 {
    if lambda >= 0.0 {
        lambda.sqrt().cos()
    } else {
        (-lambda).sqrt().cosh()
    }
}

/// Exact Kronig–Penney discriminant for the comb `α Σ δ(x - j)`:
/// `Δ(λ) = 2 cos(√λ) + α sin(√λ)/√λ`, continued through `λ <= 0`.
pub fn delta_comb_trace(alpha: f64, lambda: f64) -> f64 {
    2.0 * cos_sqrt(lambda) + alpha * sinc_sqrt(lambda)
}

/// Discriminant of the free operator, `2 cos(√λ)`.
pub fn free_trace(lambda: f64) -> f64 {
    delta_comb_trace(0.0, lambda)
}

/// Which edge level a bracket refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeTarget {
    Plus2,
    Minus2,
}

/// An interval on which `Δ ∓ 2` changes sign.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub target: EdgeTarget,
}

/// Uniformly sampled discriminant with the sign-change brackets of
/// `Δ = ±2`; the plotting/export view of the oracle.
#[derive(Debug, Clone)]
pub struct DiscriminantTrace {
    pub lambda_grid: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub brackets: Vec<Bracket>,
}

/// Samples `Δ` on a uniform grid over `[lo, hi]`.
pub fn scan_trace<F>(trace: &F, lo: f64, hi: f64, points: usize) -> Result<DiscriminantTrace, TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    assert!(points >= 2 && hi > lo);
    let mut lambda_grid = Vec::with_capacity(points);
    let mut delta_values = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        lambda_grid.push(x);
        delta_values.push(trace(x)?);
    }
    let mut brackets = Vec::new();
    for i in 0..points - 1 {
        for (target, level) in [(EdgeTarget::Plus2, 2.0), (EdgeTarget::Minus2, -2.0)] {
            let a = delta_values[i] - level;
            let b = delta_values[i + 1] - level;
            if a * b < 0.0 {
                brackets.push(Bracket { lo: lambda_grid[i], hi: lambda_grid[i + 1], target });
            }
        }
    }
    Ok(DiscriminantTrace { lambda_grid, delta_values, brackets })
}

/// Bisection for a root of `f` on `[a, b]` with `f(a) < 0 < f(b)` or the
/// reverse; refines to interval width `tol`.
fn bisect<F>(f: &F, mut a: f64, mut b: f64, fa_neg: bool, tol: f64) -> Result<f64, TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if (fm < 0.0) == fa_neg {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the maximum of a locally unimodal `f` on
/// `[a, b]`, refined to interval width `tol`. Returns `(x*, f(x*))`.
fn golden_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    let xm = 0.5 * (a + b);
    Ok((xm, f(xm)?))
}

/// Sharpens a summit located by [`golden_max`]. Near the top the function
/// is quadratically flat, so samples closer than `√(noise/|f''|)` cannot
/// order themselves reliably; fitting a parabola across a span where the
/// curvature signal dominates recovers the vertex far below that plateau.
fn parabola_vertex<F>(f: &F, mut center: f64, mut span: f64) -> Result<(f64, f64), TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    for _ in 0..2 {
        let fa = f(center - span)?;
        let fm = f(center)?;
        let fb = f(center + span)?;
        let denom = fa + fb - 2.0 * fm;
        if denom >= 0.0 {
            break; // no usable concavity at this span
        }
        let vertex = center + span * (fa - fb) / (2.0 * denom);
        center = vertex.clamp(center - span, center + span);
        span *= 0.1;
    }
    Ok((center, f(center)?))
}

/// Relative scale below which a summit of `σΔ - 4` counts as trace noise
/// rather than an open gap.
const TANGENCY_FLOOR: f64 = 1e-13;

/// Marching step near position `x`: uniform in `u = √λ` (the natural
/// oscillation variable) above 1, floor-limited below.
fn march_step(x: f64, refine: f64) -> f64 {
    let base = if x > 1.0 {
        2.0 * x.sqrt() * (std::f64::consts::PI / 32.0)
    } else {
        0.25 * (1.0 + x.abs() / 8.0)
    };
    base / refine
}

struct GapEdges {
    lower: f64,
    upper: f64,
}

/// Locates the two `Δ = σ` edges of gap `n`, walking right from
/// `prev_edge` (where `h = σΔ - 4 = -8`).
fn locate_gap<F>(
    trace: &F,
    prev_edge: f64,
    sigma: f64,
    cap: f64,
    root_tol: f64,
    refine: f64,
) -> Result<GapEdges, TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    let h = |x: f64| -> Result<f64, TraceError> { Ok(sigma * trace(x)? - 4.0) };

    let mut x_prev2 = prev_edge;
    let mut h_prev2 = h(x_prev2)?;
    let mut x_prev = x_prev2;
    let mut h_prev = h_prev2;
    loop {
        let x = x_prev + march_step(x_prev, refine);
        if x > cap {
            return Err(TraceError::MissedRoots { near: x_prev });
        }
        let hx = h(x)?;
        if hx > 0.0 {
            // Walked into the open gap: lower edge behind us, upper ahead.
            let lower = bisect(&h, x_prev, x, true, root_tol)?;
            let mut inside = x;
            loop {
                let next = inside + march_step(inside, refine);
                if next > cap {
                    return Err(TraceError::MissedRoots { near: inside });
                }
                if h(next)? <= 0.0 {
                    let upper = bisect(&h, inside, next, false, root_tol)?;
                    return Ok(GapEdges { lower, upper });
                }
                inside = next;
            }
        }
        if h_prev > h_prev2 && h_prev >= hx {
            // The walk passed a summit without seeing h > 0: refine it
            // coarsely, then sharpen the vertex through the noise plateau.
            let coarse = ((x - x_prev2) * 1e-2).max(root_tol);
            let (x_mid, _) = golden_max(&h, x_prev2, x, coarse)?;
            let (x_star, h_star) = parabola_vertex(&h, x_mid, coarse)?;
            // A summit is an open gap only when it clears the evaluation
            // noise of the trace; quadratically flat bumps below that
            // floor are indistinguishable from tangencies and bisecting
            // them would hand back noise-driven edges.
            let noise_floor = TANGENCY_FLOOR * (1.0 + x_star.abs());
            if h_star > noise_floor {
                let lower = bisect(&h, x_prev2, x_star, true, root_tol)?;
                let upper = bisect(&h, x_star, x, false, root_tol)?;
                return Ok(GapEdges { lower, upper });
            }
            // Tangency: Δ touches σ without crossing — collapsed gap.
            return Ok(GapEdges { lower: x_star, upper: x_star });
        }
        x_prev2 = x_prev;
        h_prev2 = h_prev;
        x_prev = x;
        h_prev = hx;
    }
}

fn scan_edges<F>(
    trace: &F,
    n_max: usize,
    root_tol: f64,
    refine: f64,
) -> Result<SpectrumResult, TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    // Start below the ground state: walk down until Δ > 2 persists.
    let mut start = -1.0;
    let mut tries = 0;
    while trace(start)? <= 2.1 {
        start = 2.0 * start - 10.0;
        tries += 1;
        if tries > 60 {
            return Err(TraceError::GroundEdgeNotFound);
        }
    }

    let cap = ((n_max as f64 + 2.0) * std::f64::consts::PI).powi(2) + 100.0 + 4.0 * start.abs();

    // λ₀: first root of Δ - 2 (always a genuine sign change).
    let f0 = |x: f64| -> Result<f64, TraceError> { Ok(trace(x)? - 2.0) };
    let mut x_prev = start;
    let lambda0 = loop {
        let x = x_prev + march_step(x_prev, refine);
        if x > cap {
            return Err(TraceError::MissedRoots { near: x_prev });
        }
        if f0(x)? < 0.0 {
            break bisect(&f0, x_prev, x, false, root_tol)?;
        }
        x_prev = x;
    };

    let mut pairs = Vec::with_capacity(n_max);
    let mut prev_edge = lambda0;
    for n in 1..=n_max {
        let sigma = if n % 2 == 1 { -2.0 } else { 2.0 };
        let gap_cap = prev_edge + (2.0 * n as f64 + 12.0) * std::f64::consts::PI.powi(2) + 100.0;
        let edges = locate_gap(trace, prev_edge, sigma, gap_cap.min(cap + prev_edge.abs()), root_tol, refine)?;
        pairs.push((edges.lower, edges.upper));
        prev_edge = edges.upper;
    }

    Ok(SpectrumResult {
        lambda0,
        err_lambda0: root_tol,
        err_pairs: vec![(root_tol, root_tol); pairs.len()],
        pairs,
        n_used_periodic: 0,
        n_used_antiperiodic: 0,
    })
}

/// Band edges as roots of `Δ(λ) = ±2`, assembled with the same pairing
/// contract as the Galerkin path. Retries once with a four-fold finer
/// walk when roots come out misordered, then reports failure.
pub fn band_edges_from_trace<F>(
    trace: F,
    n_max: usize,
    root_tol: f64,
) -> Result<SpectrumResult, TraceError>
where
    F: Fn(f64) -> Result<f64, TraceError>,
{
    assert!(n_max >= 1, "n_max must be at least 1");
    assert!(root_tol > 0.0, "root tolerance must be positive");
    let mut last_err = None;
    for attempt in 0..2 {
        let refine = if attempt == 0 { 1.0 } else { 4.0 };
        match scan_edges(&trace, n_max, root_tol, refine) {
            Ok(sr) => match sr.check_interlacing(2.0 * root_tol) {
                Ok(()) => return Ok(sr),
                Err((i, a, _)) => {
                    last_err = Some(TraceError::MissedRoots { near: a });
                    let _ = i;
                }
            },
            Err(e @ TraceError::MissedRoots { .. }) => last_err = Some(e),
            Err(fatal) => return Err(fatal),
        }
    }
    Err(last_err.unwrap_or(TraceError::GroundEdgeNotFound))
}

/// Convenience: band edges of a trigonometric-polynomial potential via
/// the ODE monodromy path.
pub fn band_edges_from_monodromy(
    q: &FourierPotential,
    n_max: usize,
    root_tol: f64,
    rk_tol: f64,
) -> Result<SpectrumResult, TraceError> {
    if q.as_trig_poly().is_none() {
        return Err(TraceError::NotFinitelySupported);
    }
    let q = q.clone();
    band_edges_from_trace(move |lambda| monodromy_trace(&q, lambda, rk_tol), n_max, root_tol)
}

/// Convenience: exact band edges of the Kronig–Penney comb.
pub fn band_edges_from_comb(
    alpha: f64,
    n_max: usize,
    root_tol: f64,
) -> Result<SpectrumResult, TraceError> {
    band_edges_from_trace(move |lambda| Ok(delta_comb_trace(alpha, lambda)), n_max, root_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::gaps;
    use crate::potential::{make_potential, mathieu};
    use std::f64::consts::PI;

    const RK_TOL: f64 = 1e-10;

    #[test]
    fn free_monodromy_closed_forms() {
        let zero = make_potential(&[]).unwrap();
        let d = monodromy_trace(&zero, PI * PI, RK_TOL).unwrap();
        assert!((d + 2.0).abs() < 10.0 * RK_TOL, "Δ(π²) = {d}");
        let d = monodromy_trace(&zero, -1.0, RK_TOL).unwrap();
        assert!((d - 2.0 * 1.0f64.cosh()).abs() < 10.0 * RK_TOL, "Δ(-1) = {d}");
    }

    #[test]
    fn comb_trace_reduces_to_free_at_alpha_zero() {
        let zero = make_potential(&[]).unwrap();
        let mut lambda = -10.0;
        while lambda <= 500.0 {
            let exact = delta_comb_trace(0.0, lambda);
            let ode = monodromy_trace(&zero, lambda, RK_TOL).unwrap();
            assert!(
                (exact - ode).abs() <= 10.0 * RK_TOL * (1.0 + lambda.abs().sqrt()),
                "λ = {lambda}: {exact} vs {ode}"
            );
            lambda += 23.7;
        }
    }

    #[test]
    fn comb_trace_special_values() {
        // sin(nπ) = 0: Δ((nπ)²) = ±2 exactly, for every α.
        for alpha in [0.0, 1.0, -3.5] {
            for n in 1..=4u32 {
                let lam = (n as f64 * PI).powi(2);
                let expect = if n % 2 == 0 { 2.0 } else { -2.0 };
                assert!((delta_comb_trace(alpha, lam) - expect).abs() < 1e-12);
            }
        }
        assert!((delta_comb_trace(0.7, 0.0) - 2.7).abs() < 1e-12);
        // continuity through λ = 0: the slope there is -(1 + α/6)
        let a = delta_comb_trace(1.0, -1e-9);
        let b = delta_comb_trace(1.0, 1e-9);
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn mathieu_discriminant_crosses_minus_two_twice_near_pi_squared() {
        // Sign-change scan with step 0.01 around π², the stated oracle for
        // the first-gap bracket.
        let q = mathieu(0.05);
        let mut crossings = 0;
        let mut lambda = PI * PI - 0.5;
        let mut prev = monodromy_trace(&q, lambda, RK_TOL).unwrap() + 2.0;
        while lambda < PI * PI + 0.5 {
            lambda += 0.01;
            let cur = monodromy_trace(&q, lambda, RK_TOL).unwrap() + 2.0;
            if prev * cur < 0.0 {
                crossings += 1;
            }
            prev = cur;
        }
        assert_eq!(crossings, 2, "Δ = -2 should bracket the first gap");
    }

    #[test]
    fn free_band_edges_are_tangencies_at_n_pi_squared() {
        let sr = band_edges_from_trace(|l| Ok(free_trace(l)), 5, 1e-9).unwrap();
        assert!(sr.lambda0.abs() < 1e-8, "λ₀ = {}", sr.lambda0);
        for n in 1..=5usize {
            let expect = (n as f64 * PI).powi(2);
            let (lo, hi) = sr.pairs[n - 1];
            assert!((lo - expect).abs() < 1e-6, "n = {n}: {lo} vs {expect}");
            assert!(hi - lo < 1e-8, "free gaps must collapse, γ({n}) = {}", hi - lo);
        }
    }

    /// Independent oracle for the first comb gap: bisection on the exact
    /// edge equation 2cos(ε) = 2 - sin(ε)/(π+ε) for the upper edge
    /// √λ = π + ε.
    #[test]
    fn comb_alpha_one_first_gap_matches_edge_equation() {
        let g = |eps: f64| 2.0 * eps.cos() - 2.0 + eps.sin() / (PI + eps);
        let (mut a, mut b) = (1e-6, 1.5);
        assert!(g(a) > 0.0 && g(b) < 0.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let eps = 0.5 * (a + b);
        let upper_exact = (PI + eps).powi(2);

        let sr = band_edges_from_comb(1.0, 1, 1e-12).unwrap();
        let (lo, hi) = sr.pairs[0];
        assert!((lo - PI * PI).abs() < 1e-9, "lower edge sits at π²: {lo}");
        assert!((hi - upper_exact).abs() < 1e-9, "upper edge {hi} vs {upper_exact}");
    }

    #[test]
    fn comb_gaps_increase_toward_two_alpha() {
        let sr = band_edges_from_comb(1.0, 12, 1e-10).unwrap();
        let g = gaps(&sr);
        for n in 5..=12 {
            assert!((g.gamma(n) - 2.0).abs() < 0.5, "γ({n}) = {}", g.gamma(n));
        }
        for n in 1..12 {
            assert!(g.gamma(n + 1) > g.gamma(n), "gaps should increase toward 2α");
        }
    }

    #[test]
    fn mathieu_edges_from_ode_match_first_order_theory() {
        let sr = band_edges_from_monodromy(&mathieu(0.05), 2, 1e-9, 1e-10).unwrap();
        let g = gaps(&sr);
        assert!((g.gamma(1) - 0.1).abs() < 0.005, "γ₁ = {}", g.gamma(1));
        assert!(g.gamma(2) < 0.01 * g.gamma(1) * 10.0, "γ₂ = {}", g.gamma(2));
        let zero = make_potential(&[]).unwrap();
        assert!(
            matches!(
                band_edges_from_monodromy(&crate::potential::delta_comb(1.0), 2, 1e-9, 1e-10),
                Err(TraceError::NotFinitelySupported)
            ),
            "combs have no pointwise values"
        );
        let _ = zero;
    }

    #[test]
    fn scan_collects_brackets() {
        let t = scan_trace(&|l| Ok(delta_comb_trace(1.0, l)), -2.0, 60.0, 800).unwrap();
        assert_eq!(t.lambda_grid.len(), 800);
        assert!(!t.brackets.is_empty());
        // band/gap sign structure: values beyond ±2 exist (gaps) and
        // values inside (-2,2) exist (bands)
        assert!(t.delta_values.iter().any(|&d| d.abs() > 2.0));
        assert!(t.delta_values.iter().any(|&d| d.abs() < 2.0));
    }
}
