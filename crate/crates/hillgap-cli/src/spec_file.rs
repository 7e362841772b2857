//! Potential spec files: JSON with either a named generator or an
//! explicit coefficient list.
//!
//! ```json
//! { "generator": "mathieu", "params": [0.05] }
//! ```
//! ```json
//! { "coeffs": [ { "k": 0, "re": 1.0, "im": 0.0 },
//!               { "k": 2, "re": 0.5, "im": 0.5 } ] }
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use hillgap::potential::{make_potential, FourierPotential};

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    generator: Option<String>,
    #[serde(default)]
    params: Vec<f64>,
    coeffs: Option<Vec<CoeffRecord>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffRecord {
    k: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

pub fn load(path: &Path, default_seed: u64) -> Result<FourierPotential, CliError> {
    let text = fs::read_to_string(path)?;
    let spec: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    match (spec.generator, spec.coeffs) {
        (Some(name), None) => FourierPotential::from_generator(&name, &spec.params, default_seed)
            .map_err(|e| CliError::Config(e.to_string())),
        (None, Some(records)) => {
            let coeffs: Vec<(i64, Complex64)> = records
                .iter()
                .map(|r| (r.k, Complex64::new(r.re, r.im)))
                .collect();
            make_potential(&coeffs).map_err(|e| CliError::Config(e.to_string()))
        }
        _ => Err(CliError::Config(
            "spec file must contain exactly one of \"generator\" or \"coeffs\"".into(),
        )),
    }
}
