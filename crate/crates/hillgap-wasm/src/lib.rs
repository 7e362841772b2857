//! Browser bindings: three interactive views over the core toolkit,
//! exchanged as JSON strings so the page stays a plain static file.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use hillgap::analysis::{self, decay_fit, regularity_estimate, FIT_WINDOW_START};
use hillgap::discriminant::{delta_comb_trace, monodromy_trace, scan_trace, TraceError};
use hillgap::galerkin::{band_edges_with_cap, gaps, SpectrumResult};
use hillgap::potential::{FourierPotential, TailClass};

const DEMO_SEED: u64 = 42;
const DEMO_RK_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct TraceView {
    lambda: Vec<f64>,
    delta: Vec<f64>,
    brackets: Vec<(f64, f64, i8)>,
}

#[derive(Serialize)]
struct EdgeRow {
    n: usize,
    lambda_minus: f64,
    lambda_plus: f64,
    gamma: f64,
    sector: String,
}

#[derive(Serialize)]
struct SpectrumView {
    lambda0: f64,
    rows: Vec<EdgeRow>,
    n_used_periodic: usize,
    n_used_antiperiodic: usize,
}

#[derive(Serialize)]
struct AsymptoticsRow {
    n: usize,
    gamma: f64,
    two_qhat: f64,
    remainder: f64,
}

#[derive(Serialize)]
struct AsymptoticsView {
    rows: Vec<AsymptoticsRow>,
    gamma_exponent: Option<f64>,
    critical_s: Option<f64>,
}

fn parse(desc: &str) -> Result<FourierPotential, String> {
    FourierPotential::from_descriptor(desc, DEMO_SEED).map_err(|e| e.to_string())
}

fn trace_view(desc: &str, lambda_lo: f64, lambda_hi: f64, samples: usize) -> Result<String, String> {
    let q = parse(desc)?;
    let samples = samples.clamp(16, 4096);
    let scan = match q.tail_class() {
        TailClass::Constant => {
            let alpha = q.coeff(0).re;
            scan_trace(&|l| Ok(delta_comb_trace(alpha, l)), lambda_lo, lambda_hi, samples)
        }
        TailClass::FinitelySupported => scan_trace(
            &|l: f64| monodromy_trace(&q, l, DEMO_RK_TOL),
            lambda_lo,
            lambda_hi,
            samples,
        ),
        TailClass::PowerDecay { .. } => {
            return Err("the discriminant view needs a finitely supported potential or the delta comb".into())
        }
    }
    .map_err(|e: TraceError| e.to_string())?;
    let view = TraceView {
        lambda: scan.lambda_grid,
        delta: scan.delta_values,
        brackets: scan
            .brackets
            .iter()
            .map(|b| {
                let sign = match b.target {
                    hillgap::discriminant::EdgeTarget::Plus2 => 1i8,
                    hillgap::discriminant::EdgeTarget::Minus2 => -1i8,
                };
                (b.lo, b.hi, sign)
            })
            .collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

fn spectrum_view(desc: &str, n_max: usize) -> Result<String, String> {
    let q = parse(desc)?;
    let n_max = n_max.clamp(1, 24);
    let sr = band_edges_with_cap(&q, n_max, 1e-7, 1024).map_err(|e| e.to_string())?;
    let g = gaps(&sr);
    let rows = (1..=n_max)
        .map(|n| EdgeRow {
            n,
            lambda_minus: sr.pairs[n - 1].0,
            lambda_plus: sr.pairs[n - 1].1,
            gamma: g.gamma(n),
            sector: SpectrumResult::sector_of(n).to_string(),
        })
        .collect();
    let view = SpectrumView {
        lambda0: sr.lambda0,
        rows,
        n_used_periodic: sr.n_used_periodic,
        n_used_antiperiodic: sr.n_used_antiperiodic,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

fn asymptotics_view(desc: &str, n_max: usize) -> Result<String, String> {
    let q = parse(desc)?;
    let n_max = n_max.clamp(9, 64);
    let sr = band_edges_with_cap(&q, n_max, 1e-7, 1024).map_err(|e| e.to_string())?;
    let g = gaps(&sr);
    let r = analysis::remainder(&q, &g);
    let rows = (1..=n_max)
        .map(|n| AsymptoticsRow {
            n,
            gamma: g.gamma(n),
            two_qhat: 2.0 * q.coeff(n as i64).norm(),
            remainder: r[n - 1],
        })
        .collect();
    let n_lo = FIT_WINDOW_START.min((g.len() / 2).max(1));
    let gamma_exponent = decay_fit(g.gammas(), n_lo, g.len(), g.max_err()).ok().map(|(p, _)| p);
    let critical_s = regularity_estimate(&g).ok();
    let view = AsymptoticsView { rows, gamma_exponent, critical_s };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Samples the Floquet discriminant over a λ-window.
#[wasm_bindgen]
pub fn discriminant_trace(desc: &str, lambda_lo: f64, lambda_hi: f64, samples: usize) -> Result<String, JsError> {
    trace_view(desc, lambda_lo, lambda_hi, samples).map_err(|e| JsError::new(&e))
}

/// Band edges and gap lengths up to index `n_max`.
#[wasm_bindgen]
pub fn band_gaps(desc: &str, n_max: usize) -> Result<String, JsError> {
    spectrum_view(desc, n_max).map_err(|e| JsError::new(&e))
}

/// Gap lengths against `2|q̂(n)|` with the fitted decay exponent and the
/// estimated critical Sobolev index.
#[wasm_bindgen]
pub fn gap_asymptotics(desc: &str, n_max: usize) -> Result<String, JsError> {
    asymptotics_view(desc, n_max).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_view_produces_grid_and_brackets() {
        let json = trace_view("delta-comb:1", -5.0, 120.0, 512).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["lambda"].as_array().unwrap().len(), 512);
        assert!(!v["brackets"].as_array().unwrap().is_empty());
        assert!(trace_view("power-decay:3", -5.0, 50.0, 64).is_err());
    }

    #[test]
    fn spectrum_view_matches_free_operator() {
        let json = spectrum_view("zero", 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        let l1 = rows[0]["lambda_minus"].as_f64().unwrap();
        assert!((l1 - std::f64::consts::PI.powi(2)).abs() < 1e-8);
    }

    #[test]
    fn asymptotics_view_reports_exponent() {
        let json = asymptotics_view("power-decay:3:42", 24).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let p = v["gamma_exponent"].as_f64().unwrap();
        assert!((p - 3.0).abs() < 0.4, "fitted exponent {p}");
    }
}
