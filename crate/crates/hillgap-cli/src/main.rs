//! Command-line front end: parse a potential/weight description, run the
//! solvers and analytics, emit CSV or JSON reports with full provenance.
//!
//! Exit codes: 0 success, 2 configuration/parse error, 3 numerical
//! failure (interlacing violation, truncation cap, missed roots),
//! 4 I/O error.

mod report;
mod spec_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hillgap::analysis::{
    self, decay_fit, equivalence_check_with_gaps, regularity_estimate, smoothing_convergence,
    EquivalenceVerdict, FIT_WINDOW_START,
};
use hillgap::discriminant::{band_edges_from_comb, band_edges_from_monodromy};
use hillgap::galerkin::{band_edges_with_cap, gaps, SpectrumResult};
use hillgap::potential::{FourierPotential, TailClass};
use hillgap::weights::{check_i0, check_i_minus1, check_m0, check_m_minus1, ClassReport, Weight};

use report::{num, write_output, Format, Report};

#[derive(Parser)]
#[command(name = "hillgap", version, about = "Spectral gaps of 1-periodic Hill-Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band edges and spectral-gap lengths
    Gaps(GapsArgs),
    /// Remainder table gamma(n) - 2|q^(n)| with fitted decay exponents
    Asymptotics(AsymptoticsArgs),
    /// Regularity estimate and the norm-equivalence report
    Classify(ClassifyArgs),
    /// Galerkin edges against the Floquet-discriminant oracle
    OracleCompare(OracleCompareArgs),
    /// Weight-class membership predicates (I0, M0, I-1, M-1)
    WeightsCheck(WeightsCheckArgs),
    /// Gap convergence of truncated potentials (smooth-limit experiment)
    Smoothing(SmoothingArgs),
}

#[derive(Args)]
struct PotentialOpts {
    /// Inline generator: zero | mathieu:C | delta-comb:A | power-decay:P[:SEED]
    #[arg(long)]
    potential: Option<String>,
    /// JSON spec file ({"generator": ..., "params": [...]} or {"coeffs": [...]})
    #[arg(long, conflicts_with = "potential")]
    spec_file: Option<PathBuf>,
    /// Default seed for seeded generators
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct OutputOpts {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveOpts {
    /// Highest gap index to resolve
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Per-edge convergence tolerance of the Galerkin doubling
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Truncation cap for the Galerkin half-size
    #[arg(long, default_value_t = 4096)]
    n_cap: usize,
}

#[derive(Args)]
struct GapsArgs {
    #[command(flatten)]
    potential: PotentialOpts,
    #[command(flatten)]
    solve: SolveOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    potential: PotentialOpts,
    #[command(flatten)]
    solve: SolveOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    potential: PotentialOpts,
    #[command(flatten)]
    solve: SolveOpts,
    #[command(flatten)]
    output: OutputOpts,
    /// Weight descriptor: power:S | powerlog:S:R | inv-linear-log
    #[arg(long)]
    weight: String,
    /// Acceptance band constant C for the norm-ratio check
    #[arg(long, default_value_t = 10.0)]
    band_constant: f64,
}

#[derive(Args)]
struct OracleCompareArgs {
    #[command(flatten)]
    potential: PotentialOpts,
    #[command(flatten)]
    solve: SolveOpts,
    #[command(flatten)]
    output: OutputOpts,
    /// Local tolerance of the monodromy integration
    #[arg(long, default_value_t = 1e-10)]
    rk_tol: f64,
    /// Bisection width for the discriminant root search
    #[arg(long, default_value_t = 1e-9)]
    root_tol: f64,
}

#[derive(Args)]
struct WeightsCheckArgs {
    #[command(flatten)]
    output: OutputOpts,
    /// Weight descriptor: power:S | powerlog:S:R | inv-linear-log
    #[arg(long)]
    weight: String,
    /// Reference exponent s for the I-type checks (inferred from power
    /// and powerlog descriptors when omitted)
    #[arg(long)]
    s: Option<f64>,
    /// Margin for the I-1 case s in (-1, 0)
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Upper end of the sampled index range
    #[arg(long, default_value_t = 65536)]
    k_max: i64,
}

#[derive(Args)]
struct SmoothingArgs {
    #[command(flatten)]
    potential: PotentialOpts,
    #[command(flatten)]
    output: OutputOpts,
    /// Highest gap index to compare
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Target scale for the final sup-difference
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    /// Comma-separated increasing truncation radii, e.g. 8,16,32,64
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    k_list: Vec<usize>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<hillgap::galerkin::GalerkinError> for CliError {
    fn from(e: hillgap::galerkin::GalerkinError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<hillgap::discriminant::TraceError> for CliError {
    fn from(e: hillgap::discriminant::TraceError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<analysis::AnalysisError> for CliError {
    fn from(e: analysis::AnalysisError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gaps(args) => cmd_gaps(args),
        Command::Asymptotics(args) => cmd_asymptotics(args),
        Command::Classify(args) => cmd_classify(args),
        Command::OracleCompare(args) => cmd_oracle_compare(args),
        Command::WeightsCheck(args) => cmd_weights_check(args),
        Command::Smoothing(args) => cmd_smoothing(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hillgap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl PotentialOpts {
    fn resolve(&self) -> Result<(FourierPotential, String), CliError> {
        match (&self.potential, &self.spec_file) {
            (Some(desc), None) => {
                let q = FourierPotential::from_descriptor(desc, self.seed)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok((q, desc.clone()))
            }
            (None, Some(path)) => {
                let q = spec_file::load(path, self.seed)?;
                Ok((q, format!("spec-file:{}", path.display())))
            }
            _ => Err(CliError::Config(
                "exactly one of --potential or --spec-file is required".into(),
            )),
        }
    }
}

impl SolveOpts {
    fn validate(&self) -> Result<(), CliError> {
        if self.n_max == 0 || self.tol <= 0.0 || self.n_cap == 0 {
            return Err(CliError::Config("numeric options must be positive".into()));
        }
        if self.n_max > self.n_cap / 4 {
            return Err(CliError::Config(format!(
                "n_max = {} exceeds n_cap/4 = {}; the truncation heuristic needs headroom",
                self.n_max,
                self.n_cap / 4
            )));
        }
        Ok(())
    }
}

fn spectrum_rows(sr: &SpectrumResult) -> Vec<Vec<serde_json::Value>> {
    let g = gaps(sr);
    let mut rows = Vec::with_capacity(1 + sr.n_max());
    rows.push(vec![
        json!(0),
        num(sr.lambda0),
        num(sr.lambda0),
        num(0.0),
        num(sr.err_lambda0),
        json!("periodic"),
    ]);
    for n in 1..=sr.n_max() {
        let (lo, hi) = sr.pairs[n - 1];
        rows.push(vec![
            json!(n),
            num(lo),
            num(hi),
            num(g.gamma(n)),
            num(g.err(n)),
            json!(SpectrumResult::sector_of(n).to_string()),
        ]);
    }
    rows
}

fn cmd_gaps(args: GapsArgs) -> Result<(), CliError> {
    args.solve.validate()?;
    let (q, desc) = args.potential.resolve()?;
    let sr = band_edges_with_cap(&q, args.solve.n_max, args.solve.tol, args.solve.n_cap)?;
    let report = Report {
        command: "gaps",
        config: vec![
            ("potential", desc),
            ("n_max", args.solve.n_max.to_string()),
            ("tol", args.solve.tol.to_string()),
            ("n_cap", args.solve.n_cap.to_string()),
            ("seed", args.potential.seed.to_string()),
        ],
        columns: vec!["n", "lambda_minus", "lambda_plus", "gamma", "err_est", "sector"],
        rows: spectrum_rows(&sr),
        summary: vec![
            ("n_used_periodic", json!(sr.n_used_periodic)),
            ("n_used_antiperiodic", json!(sr.n_used_antiperiodic)),
        ],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<(), CliError> {
    args.solve.validate()?;
    let (q, desc) = args.potential.resolve()?;
    let sr = band_edges_with_cap(&q, args.solve.n_max, args.solve.tol, args.solve.n_cap)?;
    let g = gaps(&sr);
    let r = analysis::remainder(&q, &g);

    let mut rows = Vec::with_capacity(g.len());
    for n in 1..=g.len() {
        rows.push(vec![
            json!(n),
            num(g.gamma(n)),
            num(2.0 * q.coeff(n as i64).norm()),
            num(r[n - 1]),
        ]);
    }

    let n_lo = FIT_WINDOW_START.min((g.len() / 2).max(1));
    let floor = g.max_err();
    let fit_value = |data: &[f64]| match decay_fit(data, n_lo, g.len(), floor) {
        Ok((p, r2)) => json!({ "exponent": num(p), "r2": num(r2) }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let abs_remainder: Vec<f64> = r.iter().map(|x| x.abs()).collect();

    let report = Report {
        command: "asymptotics",
        config: vec![
            ("potential", desc),
            ("n_max", args.solve.n_max.to_string()),
            ("tol", args.solve.tol.to_string()),
            ("n_cap", args.solve.n_cap.to_string()),
            ("seed", args.potential.seed.to_string()),
        ],
        columns: vec!["n", "gamma", "two_qhat", "remainder"],
        rows,
        summary: vec![
            ("gamma_fit", fit_value(g.gammas())),
            ("remainder_fit", fit_value(&abs_remainder)),
        ],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    args.solve.validate()?;
    if args.band_constant <= 1.0 {
        return Err(CliError::Config("--band-constant must exceed 1".into()));
    }
    let (q, desc) = args.potential.resolve()?;
    let w = Weight::from_descriptor(&args.weight).map_err(|e| CliError::Config(e.to_string()))?;
    let sr = band_edges_with_cap(&q, args.solve.n_max, args.solve.tol, args.solve.n_cap)?;
    let g = gaps(&sr);

    let estimate = match regularity_estimate(&g) {
        Ok(s) => json!({ "critical_s": num(s) }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let eq = equivalence_check_with_gaps(&q, &g, &w, args.band_constant);

    let rows = eq
        .rows
        .iter()
        .map(|r| vec![json!(r.cutoff), num(r.norm_q), num(r.norm_gamma), num(r.ratio)])
        .collect();

    let report = Report {
        command: "classify",
        config: vec![
            ("potential", desc),
            ("weight", args.weight.clone()),
            ("n_max", args.solve.n_max.to_string()),
            ("tol", args.solve.tol.to_string()),
            ("n_cap", args.solve.n_cap.to_string()),
            ("seed", args.potential.seed.to_string()),
            ("band_constant", args.band_constant.to_string()),
        ],
        columns: vec!["cutoff", "norm_q", "norm_gamma", "ratio"],
        rows,
        summary: vec![
            ("regularity", estimate),
            (
                "equivalence_verdict",
                json!(match eq.verdict {
                    EquivalenceVerdict::Consistent => "consistent",
                    EquivalenceVerdict::Inconsistent => "inconsistent",
                }),
            ),
            ("ratio_min", num(eq.ratio_band.0)),
            ("ratio_max", num(eq.ratio_band.1)),
            ("both_divergent", json!(eq.both_divergent)),
        ],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}

fn cmd_oracle_compare(args: OracleCompareArgs) -> Result<(), CliError> {
    args.solve.validate()?;
    if args.rk_tol <= 0.0 || args.root_tol <= 0.0 {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    let (q, desc) = args.potential.resolve()?;
    let sr_g = band_edges_with_cap(&q, args.solve.n_max, args.solve.tol, args.solve.n_cap)?;
    let sr_t = match q.tail_class() {
        TailClass::FinitelySupported => {
            band_edges_from_monodromy(&q, args.solve.n_max, args.root_tol, args.rk_tol)?
        }
        TailClass::Constant => {
            let alpha = q.coeff(0).re;
            band_edges_from_comb(alpha, args.solve.n_max, args.root_tol)?
        }
        TailClass::PowerDecay { .. } => {
            return Err(CliError::Config(
                "the discriminant oracle needs a finitely supported potential or the delta comb"
                    .into(),
            ));
        }
    };

    let eg = sr_g.merged_edges();
    let et = sr_t.merged_edges();
    let labels = |i: usize| -> (usize, &'static str) {
        if i == 0 {
            (0, "lambda0")
        } else {
            ((i + 1) / 2, if i % 2 == 1 { "minus" } else { "plus" })
        }
    };
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    for (i, ((g, _), (t, _))) in eg.iter().zip(et.iter()).enumerate() {
        let dev = (g - t).abs();
        max_dev = max_dev.max(dev);
        let (n, edge) = labels(i);
        rows.push(vec![json!(n), json!(edge), num(*g), num(*t), num(dev)]);
    }

    let report = Report {
        command: "oracle-compare",
        config: vec![
            ("potential", desc),
            ("n_max", args.solve.n_max.to_string()),
            ("tol", args.solve.tol.to_string()),
            ("rk_tol", args.rk_tol.to_string()),
            ("root_tol", args.root_tol.to_string()),
            ("seed", args.potential.seed.to_string()),
        ],
        columns: vec!["n", "edge", "galerkin", "discriminant", "deviation"],
        rows,
        summary: vec![("max_deviation", num(max_dev))],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}

fn class_row(report: &ClassReport) -> Vec<serde_json::Value> {
    let (c1, c2) = report
        .bounds
        .map(|b| (num(b.lower_constant), num(b.upper_constant)))
        .unwrap_or((serde_json::Value::Null, serde_json::Value::Null));
    vec![
        json!(report.class.to_string()),
        json!(match report.verdict {
            hillgap::weights::Verdict::Consistent => "consistent",
            hillgap::weights::Verdict::Violated => "violated",
        }),
        json!(report.witness.as_ref().map(|w| format!("{w:?}")).unwrap_or_default()),
        c1,
        c2,
    ]
}

fn cmd_weights_check(args: WeightsCheckArgs) -> Result<(), CliError> {
    if args.k_max < 4 {
        return Err(CliError::Config("k_max must be at least 4".into()));
    }
    let w = Weight::from_descriptor(&args.weight).map_err(|e| CliError::Config(e.to_string()))?;
    let s = args.s.or_else(|| infer_s(&args.weight));
    let s = s.ok_or_else(|| {
        CliError::Config("cannot infer s from this weight; pass --s explicitly".into())
    })?;

    let mut rows = Vec::new();
    match check_i0(&w, s, args.k_max) {
        Ok(r) => rows.push(class_row(&r)),
        Err(e) => rows.push(vec![
            json!("I0"),
            json!("inapplicable"),
            json!(e.to_string()),
            serde_json::Value::Null,
            serde_json::Value::Null,
        ]),
    }
    rows.push(class_row(&check_m0(&w, args.k_max)));
    match check_i_minus1(&w, s, args.delta, args.k_max) {
        Ok(r) => rows.push(class_row(&r)),
        Err(e) => rows.push(vec![
            json!("I-1"),
            json!("inapplicable"),
            json!(e.to_string()),
            serde_json::Value::Null,
            serde_json::Value::Null,
        ]),
    }
    rows.push(class_row(&check_m_minus1(&w, args.k_max)));

    let report = Report {
        command: "weights-check",
        config: vec![
            ("weight", args.weight.clone()),
            ("s", s.to_string()),
            ("delta", args.delta.to_string()),
            ("k_max", args.k_max.to_string()),
        ],
        columns: vec!["class", "verdict", "witness", "c1", "c2"],
        rows,
        summary: vec![],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}

fn infer_s(weight_desc: &str) -> Option<f64> {
    let parts: Vec<&str> = weight_desc.split(':').collect();
    match parts.as_slice() {
        ["power", s] | ["powerlog", s, _] => s.parse().ok(),
        ["inv-linear-log"] => Some(-1.0),
        _ => None,
    }
}

fn cmd_smoothing(args: SmoothingArgs) -> Result<(), CliError> {
    if args.n_max == 0 || args.tol <= 0.0 {
        return Err(CliError::Config("numeric options must be positive".into()));
    }
    if args.k_list.is_empty() || args.k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("--k-list must be strictly increasing".into()));
    }
    let (q, desc) = args.potential.resolve()?;
    let table = smoothing_convergence(&q, &args.k_list, args.n_max, args.tol)?;
    let rows = table
        .rows
        .iter()
        .map(|r| vec![json!(r.k_cut), num(r.sup_diff)])
        .collect();
    let report = Report {
        command: "smoothing",
        config: vec![
            ("potential", desc),
            (
                "k_list",
                args.k_list.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("n_max", args.n_max.to_string()),
            ("tol", args.tol.to_string()),
            ("seed", args.potential.seed.to_string()),
        ],
        columns: vec!["k_cut", "sup_diff"],
        rows,
        summary: vec![("reference_err", num(table.reference_err))],
    };
    Ok(write_output(&args.output.out, &report.render(args.output.format))?)
}
