//! Band edges of `S(q) = -d²/dx² + q` by truncated Fourier–Galerkin
//! eigenproblems.
//!
//! In the exponential basis the operator acts as the matrix
//! `(2πj)² δ_jk + q̂(j-k)` on the periodic sector and
//! `((2j+1)π)² δ_jk + q̂(j-k)` on the antiperiodic one; for potentials
//! that are only distributions this is exactly the matrix of the
//! form-sum realization, so the same assembly serves `L²` and `H⁻¹`
//! potentials alike. Band edges come out of the two sectors interleaved
//! according to the classical ordering
//! `λ₀ < λ₁⁻ ≤ λ₁⁺ < λ₂⁻ ≤ λ₂⁺ < …`, with even-index edges periodic and
//! odd-index edges antiperiodic.
//!
//! Truncation is adaptive: each sector doubles its half-size `N` until
//! every tracked eigenvalue moves by less than the requested tolerance,
//! and the final per-edge movement is kept as the error estimate.

use num_complex::Complex64;
use std::fmt;

use crate::analysis::GapSequence;
use crate::linalg::{EigenError, HermitianDense};
use crate::potential::FourierPotential;

/// Hard ceiling for the truncation half-size.
pub const DEFAULT_N_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Periodic,
    Antiperiodic,
}

impl Sector {
    /// Matrix size at truncation half-size `n_trunc`: `2N+1` basis
    /// exponentials `e^{i2πkx}` for the periodic sector, `2N` basis
    /// exponentials `e^{iπ(2k+1)x}` for the antiperiodic one.
    pub fn matrix_size(self, n_trunc: usize) -> usize {
        match self {
            Sector::Periodic => 2 * n_trunc + 1,
            Sector::Antiperiodic => 2 * n_trunc,
        }
    }

    /// Frequency of basis element `row` (integer offset `row - N`).
    fn frequency(self, row: usize, n_trunc: usize) -> f64 {
        let k = row as i64 - n_trunc as i64;
        match self {
            Sector::Periodic => std::f64::consts::TAU * k as f64,
            Sector::Antiperiodic => (2 * k + 1) as f64 * std::f64::consts::PI,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Periodic => f.write_str("periodic"),
            Sector::Antiperiodic => f.write_str("antiperiodic"),
        }
    }
}

/// Truncated sector operator, Hermitian by construction.
#[derive(Debug, Clone)]
pub struct SectorMatrix {
    pub sector: Sector,
    pub n_trunc: usize,
    matrix: HermitianDense,
}

impl SectorMatrix {
    pub fn matrix(&self) -> &HermitianDense {
        &self.matrix
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GalerkinError {
    Eigen(EigenError),
    /// Doubling would exceed the truncation cap before convergence.
    TruncationCapExceeded { cap: usize },
    /// Merged edges violate the interlacing ordering beyond tolerance;
    /// the potential is under-resolved or inadmissible.
    Interlacing { edge_index: usize, upper: f64, next_lower: f64 },
}

impl fmt::Display for GalerkinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalerkinError::Eigen(e) => write!(f, "eigensolver failure: {e}"),
            GalerkinError::TruncationCapExceeded { cap } => {
                write!(f, "truncation cap N = {cap} exceeded before convergence")
            }
            GalerkinError::Interlacing { edge_index, upper, next_lower } => write!(
                f,
                "interlacing violated at edge {edge_index}: {upper} > {next_lower}"
            ),
        }
    }
}

impl std::error::Error for GalerkinError {}

impl From<EigenError> for GalerkinError {
    fn from(e: EigenError) -> Self {
        GalerkinError::Eigen(e)
    }
}

/// Assembles the truncated sector matrix. The coefficient band is
/// Toeplitz, so the needed coefficients are materialized once; the upper
/// triangle is filled and mirrored, which keeps the stored matrix
/// Hermitian exactly.
pub fn build_matrix(q: &FourierPotential, sector: Sector, n_trunc: usize) -> SectorMatrix {
    assert!(n_trunc >= 1, "truncation half-size must be at least 1");
    let size = sector.matrix_size(n_trunc);
    // band[d] = q̂(-d) = value of A[r][r+d] for all rows r
    let band: Vec<Complex64> = (0..size as i64).map(|d| q.coeff(-d)).collect();
    let q0 = band[0].re;

    let mut m = HermitianDense::zeros(size);
    for r in 0..size {
        let freq = sector.frequency(r, n_trunc);
        m.set_mirrored(r, r, Complex64::new(freq * freq + q0, 0.0));
        for c in r + 1..size {
            m.set_mirrored(r, c, band[c - r]);
        }
    }
    SectorMatrix { sector, n_trunc, matrix: m }
}

/// All eigenvalues of a sector matrix, ascending.
pub fn hermitian_eigenvalues(m: &SectorMatrix) -> Result<Vec<f64>, EigenError> {
    m.matrix.clone().into_eigenvalues()
}

/// Band edges `λ₀, (λₙ⁻, λₙ⁺)` with truncation metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub lambda0: f64,
    /// `pairs[n-1] = (λₙ⁻, λₙ⁺)` for `n = 1..=n_max`.
    pub pairs: Vec<(f64, f64)>,
    pub err_lambda0: f64,
    pub err_pairs: Vec<(f64, f64)>,
    /// Final truncation half-sizes (0 when the result did not come from a
    /// Galerkin run, e.g. from the discriminant oracle).
    pub n_used_periodic: usize,
    pub n_used_antiperiodic: usize,
}

impl SpectrumResult {
    pub fn n_max(&self) -> usize {
        self.pairs.len()
    }

    /// Sector that owns edge index `n`: periodic for even `n` (including
    /// `λ₀`), antiperiodic for odd `n`.
    pub fn sector_of(n: usize) -> Sector {
        if n % 2 == 0 {
            Sector::Periodic
        } else {
            Sector::Antiperiodic
        }
    }

    /// Flattened edges `λ₀, λ₁⁻, λ₁⁺, λ₂⁻, …` with their error estimates.
    pub fn merged_edges(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(1 + 2 * self.pairs.len());
        out.push((self.lambda0, self.err_lambda0));
        for (pair, err) in self.pairs.iter().zip(self.err_pairs.iter()) {
            out.push((pair.0, err.0));
            out.push((pair.1, err.1));
        }
        out
    }

    /// Checks the interlacing ordering within the per-edge error
    /// estimates plus `slack`; returns the first offending merged index.
    pub fn check_interlacing(&self, slack: f64) -> Result<(), (usize, f64, f64)> {
        let edges = self.merged_edges();
        for i in 0..edges.len() - 1 {
            let (a, ea) = edges[i];
            let (b, eb) = edges[i + 1];
            if a > b + ea + eb + slack {
                return Err((i, a, b));
            }
        }
        Ok(())
    }
}

/// Spectral gap lengths `γ(n) = λₙ⁺ - λₙ⁻`. Differences that are negative
/// by less than the error estimate are clamped to zero (collapsed gap).
pub fn gaps(sr: &SpectrumResult) -> GapSequence {
    let mut gamma = Vec::with_capacity(sr.pairs.len());
    let mut err = Vec::with_capacity(sr.pairs.len());
    for ((lo, hi), (elo, ehi)) in sr.pairs.iter().zip(sr.err_pairs.iter()) {
        let e = elo + ehi;
        let g = hi - lo;
        gamma.push(if g < 0.0 && g > -e { 0.0 } else { g });
        err.push(e);
    }
    GapSequence::new(gamma, err)
}

fn eigen_counts(n_max: usize) -> (usize, usize) {
    let periodic = 2 * (n_max / 2) + 1;
    let antiperiodic = 2 * n_max.div_ceil(2);
    (periodic, antiperiodic)
}

fn eigen_prefix(
    q: &FourierPotential,
    sector: Sector,
    n_trunc: usize,
    count: usize,
) -> Result<Vec<f64>, GalerkinError> {
    let m = build_matrix(q, sector, n_trunc);
    debug_assert!(m.matrix.size() >= count, "truncation too small for requested edges");
    let mut ev = m.matrix.into_eigenvalues()?;
    ev.truncate(count);
    Ok(ev)
}

struct SectorRun {
    values: Vec<f64>,
    errors: Vec<f64>,
    n_used: usize,
}

fn converge_sector(
    q: &FourierPotential,
    sector: Sector,
    count: usize,
    n0: usize,
    tol: f64,
    n_cap: usize,
) -> Result<SectorRun, GalerkinError> {
    let mut n = n0;
    if n > n_cap {
        return Err(GalerkinError::TruncationCapExceeded { cap: n_cap });
    }
    let mut prev = eigen_prefix(q, sector, n, count)?;
    loop {
        let n_next = 2 * n;
        if n_next > n_cap {
            return Err(GalerkinError::TruncationCapExceeded { cap: n_cap });
        }
        let cur = eigen_prefix(q, sector, n_next, count)?;
        let errors: Vec<f64> = cur.iter().zip(prev.iter()).map(|(a, b)| (a - b).abs()).collect();
        let worst = errors.iter().cloned().fold(0.0f64, f64::max);
        if worst <= tol {
            return Ok(SectorRun { values: cur, errors, n_used: n_next });
        }
        prev = cur;
        n = n_next;
    }
}

fn assemble(
    periodic: &SectorRun,
    antiperiodic: &SectorRun,
    n_max: usize,
    interlace_slack: f64,
) -> Result<SpectrumResult, GalerkinError> {
    let mut pairs = Vec::with_capacity(n_max);
    let mut err_pairs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n % 2 == 1 {
            let m = n.div_ceil(2);
            pairs.push((antiperiodic.values[2 * m - 2], antiperiodic.values[2 * m - 1]));
            err_pairs.push((antiperiodic.errors[2 * m - 2], antiperiodic.errors[2 * m - 1]));
        } else {
            let m = n / 2;
            pairs.push((periodic.values[2 * m - 1], periodic.values[2 * m]));
            err_pairs.push((periodic.errors[2 * m - 1], periodic.errors[2 * m]));
        }
    }
    let result = SpectrumResult {
        lambda0: periodic.values[0],
        pairs,
        err_lambda0: periodic.errors[0],
        err_pairs,
        n_used_periodic: periodic.n_used,
        n_used_antiperiodic: antiperiodic.n_used,
    };
    if let Err((edge_index, upper, next_lower)) = result.check_interlacing(interlace_slack) {
        return Err(GalerkinError::Interlacing { edge_index, upper, next_lower });
    }
    Ok(result)
}

/// Band edges up to index `n_max` with adaptive truncation (doubling from
/// `N₀ = max(16, 4 n_max)` up to [`DEFAULT_N_CAP`]), converged per edge to
/// `tol`.
pub fn band_edges(
    q: &FourierPotential,
    n_max: usize,
    tol: f64,
) -> Result<SpectrumResult, GalerkinError> {
    band_edges_with_cap(q, n_max, tol, DEFAULT_N_CAP)
}

/// [`band_edges`] with an explicit truncation cap.
pub fn band_edges_with_cap(
    q: &FourierPotential,
    n_max: usize,
    tol: f64,
    n_cap: usize,
) -> Result<SpectrumResult, GalerkinError> {
    assert!(n_max >= 1, "n_max must be at least 1");
    assert!(tol > 0.0, "tolerance must be positive");
    let n0 = 16.max(4 * n_max);
    let (count_p, count_a) = eigen_counts(n_max);
    let periodic = converge_sector(q, Sector::Periodic, count_p, n0, tol, n_cap)?;
    let antiperiodic = converge_sector(q, Sector::Antiperiodic, count_a, n0, tol, n_cap)?;
    assemble(&periodic, &antiperiodic, n_max, tol)
}

/// Band edges at one fixed truncation half-size `n_trunc`; the error
/// estimate is the movement from the `n_trunc/2` solve.
pub fn band_edges_at(
    q: &FourierPotential,
    n_max: usize,
    n_trunc: usize,
) -> Result<SpectrumResult, GalerkinError> {
    assert!(n_max >= 1);
    let (count_p, count_a) = eigen_counts(n_max);
    let n_half = (n_trunc / 2).max(n_max);
    let run = |sector: Sector, count: usize| -> Result<SectorRun, GalerkinError> {
        let prev = eigen_prefix(q, sector, n_half, count)?;
        let cur = eigen_prefix(q, sector, n_trunc, count)?;
        let errors = cur.iter().zip(prev.iter()).map(|(a, b)| (a - b).abs()).collect();
        Ok(SectorRun { values: cur, errors, n_used: n_trunc })
    };
    let periodic = run(Sector::Periodic, count_p)?;
    let antiperiodic = run(Sector::Antiperiodic, count_a)?;
    // Fixed-truncation runs have no convergence guarantee; interlacing is
    // checked against the observed movement only.
    assemble(&periodic, &antiperiodic, n_max, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{delta_comb, make_potential, mathieu, power_decay};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const TAU_SQ: f64 = (2.0 * PI) * (2.0 * PI);

    #[test]
    fn free_periodic_matrix_is_diagonal() {
        let q = make_potential(&[]).unwrap();
        let m = build_matrix(&q, Sector::Periodic, 1);
        assert_eq!(m.matrix().size(), 3);
        assert_eq!(m.matrix().get(0, 0).re, TAU_SQ);
        assert_eq!(m.matrix().get(1, 1).re, 0.0);
        assert_eq!(m.matrix().get(2, 2).re, TAU_SQ);
        assert_eq!(m.matrix().get(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(m.matrix().hermitian_defect(), 0.0);
    }

    #[test]
    fn free_antiperiodic_matrix_frequencies() {
        let q = make_potential(&[]).unwrap();
        let m = build_matrix(&q, Sector::Antiperiodic, 1);
        assert_eq!(m.matrix().size(), 2);
        assert!((m.matrix().get(0, 0).re - PI * PI).abs() < 1e-12);
        assert!((m.matrix().get(1, 1).re - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn mathieu_matrix_has_coupling_on_first_offdiagonal() {
        let m = build_matrix(&mathieu(0.05), Sector::Periodic, 1);
        for r in 0..2 {
            assert_eq!(m.matrix().get(r, r + 1), Complex64::new(0.05, 0.0));
        }
        assert_eq!(m.matrix().get(0, 2), Complex64::new(0.0, 0.0));
        assert_eq!(m.matrix().hermitian_defect(), 0.0);
    }

    #[test]
    fn free_spectrum_is_exact() {
        let q = make_potential(&[]).unwrap();
        let sr = band_edges(&q, 5, 1e-10).unwrap();
        assert!(sr.lambda0.abs() < 1e-10);
        for n in 1..=5usize {
            let expect = (n as f64 * PI).powi(2);
            let (lo, hi) = sr.pairs[n - 1];
            assert!((lo - expect).abs() / expect < 1e-12, "n={n} lo={lo}");
            assert!((hi - expect).abs() / expect < 1e-12, "n={n} hi={hi}");
        }
        let g = gaps(&sr);
        assert!(g.gammas().iter().all(|&x| x.abs() < 1e-9));
    }

    /// Second-order perturbation oracle for the ground state: for the
    /// potential 2c·cos(2πx) the shift is Σ_{k≠0} |q̂(k)|²/(0 - (2πk)²)
    /// = -c²/(2π²), with an O(c⁴) remainder.
    #[test]
    fn mathieu_ground_state_matches_perturbation_oracle() {
        let c = 0.05f64;
        let oracle = -c * c / (2.0 * PI * PI);
        let m = build_matrix(&mathieu(c), Sector::Periodic, 32);
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert!(
            (ev[0] - oracle).abs() < 1e-7,
            "ground state {} vs perturbation value {oracle}",
            ev[0]
        );
    }

    #[test]
    fn shift_invariance_at_matrix_level() {
        let base = mathieu(0.3);
        let shifted = make_potential(&[(0, Complex64::new(5.0, 0.0)), (1, Complex64::new(0.3, 0.0))]).unwrap();
        for sector in [Sector::Periodic, Sector::Antiperiodic] {
            let ev_base = hermitian_eigenvalues(&build_matrix(&base, sector, 12)).unwrap();
            let ev_shift = hermitian_eigenvalues(&build_matrix(&shifted, sector, 12)).unwrap();
            for (a, b) in ev_base.iter().zip(ev_shift.iter()) {
                assert!((a + 5.0 - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn translation_and_reflection_leave_eigenvalues_unchanged() {
        let q = power_decay(3.0, 42).unwrap();
        let translated = q.translated(0.37);
        let reflected = q.reflected();
        for sector in [Sector::Periodic, Sector::Antiperiodic] {
            let ev = hermitian_eigenvalues(&build_matrix(&q, sector, 16)).unwrap();
            let ev_t = hermitian_eigenvalues(&build_matrix(&translated, sector, 16)).unwrap();
            let ev_r = hermitian_eigenvalues(&build_matrix(&reflected, sector, 16)).unwrap();
            for ((a, b), c) in ev.iter().zip(ev_t.iter()).zip(ev_r.iter()) {
                assert!((a - b).abs() < 1e-9, "translation moved {a} to {b}");
                assert!((a - c).abs() < 1e-9, "reflection moved {a} to {c}");
            }
        }
    }

    #[test]
    fn gap_clamping_and_subtraction() {
        let sr = SpectrumResult {
            lambda0: 0.0,
            pairs: vec![(9.0, 9.5), (20.0, 20.0 - 1e-12)],
            err_lambda0: 0.0,
            err_pairs: vec![(0.0, 0.0), (1e-10, 1e-10)],
            n_used_periodic: 16,
            n_used_antiperiodic: 16,
        };
        let g = gaps(&sr);
        assert_eq!(g.gamma(1), 0.5);
        assert_eq!(g.gamma(2), 0.0, "tiny negative difference clamps to zero");
    }

    #[test]
    fn mathieu_first_gap_scale() {
        let sr = band_edges(&mathieu(0.05), 3, 1e-8).unwrap();
        let g = gaps(&sr);
        // first-order theory: γ₁ ≈ 2|q̂(1)| = 0.1
        assert!((g.gamma(1) - 0.1).abs() < 0.005, "γ₁ = {}", g.gamma(1));
        assert!(g.gamma(2) < 0.1 * g.gamma(1), "γ₂ = {}", g.gamma(2));
        assert!(g.gamma(3) < g.gamma(2), "γ₃ = {}", g.gamma(3));
    }

    #[test]
    fn truncation_cap_is_reported() {
        let comb = delta_comb(1.0);
        let err = band_edges_with_cap(&comb, 4, 1e-14, 64).unwrap_err();
        assert!(matches!(err, GalerkinError::TruncationCapExceeded { cap: 64 }));
    }

    #[test]
    fn fixed_truncation_run_reports_movement_as_error() {
        let sr = band_edges_at(&mathieu(0.05), 3, 64).unwrap();
        assert_eq!(sr.n_used_periodic, 64);
        assert!(sr.err_lambda0 < 1e-8, "mathieu converges fast: {}", sr.err_lambda0);
    }

    #[test]
    #[ignore = "timing probe for the N = 1024 acceptance runs"]
    fn timing_full_scale_solve() {
        let start = std::time::Instant::now();
        let sr = band_edges_at(&delta_comb(1.0), 8, 1024).unwrap();
        let elapsed = start.elapsed();
        let g = gaps(&sr);
        println!("N=1024 both sectors + halves: {elapsed:?}; gamma(8) = {}", g.gamma(8));
    }

    #[test]
    fn delta_comb_gaps_grow_toward_two() {
        // Coarse sanity check at moderate truncation; the acceptance suite
        // drives this to N = 1024 against the exact discriminant.
        let sr = band_edges_at(&delta_comb(1.0), 6, 256).unwrap();
        let g = gaps(&sr);
        for n in 1..=6 {
            assert!((g.gamma(n) - 2.0).abs() < 0.9, "γ({n}) = {}", g.gamma(n));
        }
        assert!(g.gamma(6) > g.gamma(1), "gaps should approach 2 from below");
    }
}
