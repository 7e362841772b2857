//! Weight sequences and empirical membership checks for the classes
//! I₀, M₀, I₋₁ and M₋₁.
//!
//! The defining conditions are asymptotic, so no finite computation can
//! prove membership. Each predicate therefore reports *consistency on a
//! range* `[1, k_max]` and flags a violation only on concrete evidence: a
//! failed pointwise condition, or an extremal ratio that drifts
//! monotonically across trailing dyadic blocks (see [`DRIFT_BLOCKS`],
//! [`DRIFT_FACTOR`]). Every `Violated` verdict carries a reproducible
//! witness.

use std::fmt;
use std::sync::Arc;

/// Minimum number of trailing dyadic blocks a strictly monotone extremal
/// ratio must span before it counts as a vanishing/unbounded trend.
pub const DRIFT_BLOCKS: usize = 4;
/// Minimum total change factor across those blocks. Exact power weights
/// produce monotone but flattening ratios; the factor keeps them from
/// being misread as drift.
pub const DRIFT_FACTOR: f64 = 2.0;
/// Multiplicative slack absorbing floating-point noise in the pointwise
/// inequality checks (the paper-level conditions are exact).
pub const CHECK_TOL: f64 = 1e-12;

/// A positive even weight sequence `ω(k)`, evaluable at any index.
#[derive(Clone)]
pub struct Weight {
    descriptor: String,
    eval: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.descriptor)
    }
}

impl Weight {
    /// Wraps an arbitrary rule; it is evaluated at `|k|`, which makes the
    /// evenness invariant structural.
    pub fn custom(tag: &str, rule: impl Fn(i64) -> f64 + Send + Sync + 'static) -> Self {
        Weight { descriptor: tag.to_string(), eval: Arc::new(rule) }
    }

    pub fn eval(&self, k: i64) -> f64 {
        (self.eval)(k.abs())
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Parses the descriptor strings accepted on the command line:
    /// `power:S`, `powerlog:S:R`, `inv-linear-log`.
    pub fn from_descriptor(desc: &str) -> Result<Weight, WeightError> {
        let bad = || WeightError::BadDescriptor(desc.to_string());
        let parts: Vec<&str> = desc.split(':').collect();
        match parts.as_slice() {
            ["power", s] => Ok(power_weight(s.parse().map_err(|_| bad())?)),
            ["powerlog", s, r] => Ok(power_log_weight(
                s.parse().map_err(|_| bad())?,
                r.parse().map_err(|_| bad())?,
            )),
            ["inv-linear-log"] => Ok(inv_linear_log_weight()),
            _ => Err(bad()),
        }
    }
}

/// `ω(k) = (1+|k|)^s`, the Sobolev-scale weight.
pub fn power_weight(s: f64) -> Weight {
    Weight::custom(&format!("power:{s}"), move |k| ((1 + k) as f64).powf(s))
}

/// `ω(k) = (1+|k|)^s · ln(e+|k|)^r`.
pub fn power_log_weight(s: f64, r: f64) -> Weight {
    Weight::custom(&format!("powerlog:{s}:{r}"), move |k| {
        ((1 + k) as f64).powf(s) * (std::f64::consts::E + k as f64).ln().powf(r)
    })
}

/// `ω(k) = ln(e+|k|) / (1+|k|)`, the canonical M₋₁ example.
pub fn inv_linear_log_weight() -> Weight {
    Weight::custom("inv-linear-log", |k| (std::f64::consts::E + k as f64).ln() / (1 + k) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightError {
    /// `check_I0` is defined for s >= 0 only.
    NegativeExponent(f64),
    /// `check_I_minus1` is defined for s >= -1 only.
    ExponentBelowMinusOne(f64),
    /// Case (ii) of I₋₁ needs a positive margin δ.
    MissingDelta,
    BadDescriptor(String),
}

impl fmt::Display for WeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightError::NegativeExponent(s) => {
                write!(f, "s = {s} < 0: this regime belongs to the I-1 check")
            }
            WeightError::ExponentBelowMinusOne(s) => write!(f, "s = {s} < -1 is out of range"),
            WeightError::MissingDelta => write!(f, "delta > 0 required for s in (-1, 0)"),
            WeightError::BadDescriptor(s) => write!(f, "cannot parse weight descriptor {s:?}"),
        }
    }
}

impl std::error::Error for WeightError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightClass {
    I0,
    M0,
    IMinus1,
    MMinus1,
}

impl fmt::Display for WeightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightClass::I0 => "I0",
            WeightClass::M0 => "M0",
            WeightClass::IMinus1 => "I-1",
            WeightClass::MMinus1 => "M-1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Violated,
}

/// Concrete evidence behind a `Violated` verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `ω(k) = 0` (or non-finite) where positivity is required.
    DegenerateValue { k: i64 },
    /// Lower ratio `ω(k)/k^a` drifts to zero across trailing blocks.
    LowerRatioVanishes { from_k: i64 },
    /// Upper ratio `ω(k)/k^b` drifts to infinity across trailing blocks.
    UpperRatioUnbounded { from_k: i64 },
    /// Monotonicity failure `ω(k+1) < ω(k)`.
    NotMonotone { k: i64 },
    /// `ω(k_max) <= ω(1)`: no overall increase on the range.
    NoOverallIncrease,
    /// `ω(k+m) > ω(k) ω(m)` beyond tolerance.
    Submultiplicativity { k: i64, m: i64 },
    /// `log ω(k)/k` increased beyond tolerance.
    SubexponentialityRise { k: i64 },
    /// `log ω(k)/k` never decayed: final value is not below the initial.
    SubexponentialityNoDecay,
    /// Case (i) of I₋₁: `ω(k)` differs from `(1+|k|)^{-1}`.
    NotExactInverseLinear { k: i64 },
}

/// Empirical constants found for an I-type check: `C1 = min ω(k)/k^a`,
/// `C2 = max ω(k)/k^b` over the sampled range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub lower_constant: f64,
    pub upper_constant: f64,
}

/// Outcome of a class-membership check over `[1, k_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: WeightClass,
    pub verdict: Verdict,
    pub range: (i64, i64),
    pub witness: Option<Witness>,
    pub bounds: Option<RatioBounds>,
}

impl ClassReport {
    fn violated(class: WeightClass, k_max: i64, witness: Witness) -> Self {
        ClassReport { class, verdict: Verdict::Violated, range: (1, k_max), witness: Some(witness), bounds: None }
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on [{}, {}]: ", self.class, self.range.0, self.range.1)?;
        match self.verdict {
            Verdict::Consistent => write!(f, "consistent")?,
            Verdict::Violated => write!(f, "violated ({:?})", self.witness)?,
        }
        if let Some(b) = &self.bounds {
            write!(f, " [C1 = {:.6e}, C2 = {:.6e}]", b.lower_constant, b.upper_constant)?;
        }
        Ok(())
    }
}

/// Detects a strictly monotone drift across trailing dyadic blocks.
/// `values[j]` is the extremal ratio over block `[2^j, 2^{j+1})`.
/// Returns the first block index of the drifting suffix if the suffix has
/// at least [`DRIFT_BLOCKS`] blocks and total change >= [`DRIFT_FACTOR`].
fn trailing_drift(values: &[f64], increasing: bool) -> Option<usize> {
    if values.len() < DRIFT_BLOCKS {
        return None;
    }
    let mut start = values.len() - 1;
    while start > 0 {
        let step_ok = if increasing {
            values[start] > values[start - 1]
        } else {
            values[start] < values[start - 1]
        };
        if !step_ok {
            break;
        }
        start -= 1;
    }
    let len = values.len() - start;
    if len < DRIFT_BLOCKS {
        return None;
    }
    let total = if increasing {
        values[values.len() - 1] / values[start]
    } else {
        values[start] / values[values.len() - 1]
    };
    (total >= DRIFT_FACTOR).then_some(start)
}

/// Shared two-sided ratio scan: is `k^lower_exp ≪ ω(k) ≪ k^upper_exp`
/// consistent on `[1, k_max]`?
fn two_sided_ratio_check(
    class: WeightClass,
    w: &Weight,
    lower_exp: f64,
    upper_exp: f64,
    k_max: i64,
) -> ClassReport {
    let blocks = (64 - (k_max as u64).leading_zeros()) as usize; // floor(log2) + 1
    let mut lower_block_min = vec![f64::INFINITY; blocks];
    let mut upper_block_max = vec![0.0f64; blocks];
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;

    for k in 1..=k_max {
        let wk = w.eval(k);
        if wk == f64::INFINITY {
            // Overflow is already conclusive evidence of unboundedness.
            return ClassReport::violated(class, k_max, Witness::UpperRatioUnbounded { from_k: k });
        }
        if !(wk > 0.0) {
            return ClassReport::violated(class, k_max, Witness::DegenerateValue { k });
        }
        let kf = k as f64;
        let lo = wk / kf.powf(lower_exp);
        let hi = wk / kf.powf(upper_exp);
        if !lo.is_finite() || !hi.is_finite() {
            return ClassReport::violated(class, k_max, Witness::UpperRatioUnbounded { from_k: k });
        }
        c1 = c1.min(lo);
        c2 = c2.max(hi);
        let j = k.ilog2() as usize;
        lower_block_min[j] = lower_block_min[j].min(lo);
        upper_block_max[j] = upper_block_max[j].max(hi);
    }

    if let Some(j) = trailing_drift(&lower_block_min, false) {
        return ClassReport::violated(class, k_max, Witness::LowerRatioVanishes { from_k: 1 << j });
    }
    if let Some(j) = trailing_drift(&upper_block_max, true) {
        return ClassReport::violated(class, k_max, Witness::UpperRatioUnbounded { from_k: 1 << j });
    }

    ClassReport {
        class,
        verdict: Verdict::Consistent,
        range: (1, k_max),
        witness: None,
        bounds: Some(RatioBounds { lower_constant: c1, upper_constant: c2 }),
    }
}

/// Class I₀ check: `|k|^s ≪ ω(k) ≪ |k|^{1+s}` with `s >= 0`.
pub fn check_i0(w: &Weight, s: f64, k_max: i64) -> Result<ClassReport, WeightError> {
    if s < 0.0 {
        return Err(WeightError::NegativeExponent(s));
    }
    assert!(k_max >= 2, "k_max must be at least 2");
    Ok(two_sided_ratio_check(WeightClass::I0, w, s, 1.0 + s, k_max))
}

/// The deterministic pair grid used by the submultiplicativity check when
/// `k_max` is too large for the full set.
fn pair_grid(k_max: i64) -> Vec<(i64, i64)> {
    let mut pairs = Vec::new();
    if k_max <= 512 {
        for k in 1..=k_max {
            for m in k..=(k_max - k).min(k_max) {
                pairs.push((k, m));
            }
        }
        return pairs;
    }
    // ~10^5 pairs: a strided grid plus the adversarial families
    // (k, 1), (k, k) and (k, k_max - k).
    let stride = (k_max / 300).max(1);
    let axis: Vec<i64> = (1..=64).chain((64 + stride..=k_max).step_by(stride as usize)).collect();
    for &k in &axis {
        for &m in &axis {
            if m >= k && k + m <= k_max {
                pairs.push((k, m));
            }
        }
    }
    for k in 1..=k_max / 2 {
        if k % stride == 0 || k <= 64 {
            pairs.push((k, 1));
            pairs.push((k, k));
            pairs.push((k, k_max - k));
        }
    }
    pairs
}

fn m0_core(class: WeightClass, w: &Weight, k_max: i64) -> ClassReport {
    assert!(k_max >= 4, "k_max must be at least 4");

    // (i) monotone nondecreasing (within rounding slack), with overall
    // increase as the finite proxy for ω(k) -> ∞.
    let mut prev = w.eval(1);
    if !(prev >= 0.0) {
        return ClassReport::violated(class, k_max, Witness::DegenerateValue { k: 1 });
    }
    for k in 2..=k_max {
        let cur = w.eval(k);
        if cur < prev * (1.0 - CHECK_TOL) {
            return ClassReport::violated(class, k_max, Witness::NotMonotone { k });
        }
        prev = cur;
    }
    if !(w.eval(k_max) > w.eval(1) * (1.0 + CHECK_TOL)) {
        return ClassReport::violated(class, k_max, Witness::NoOverallIncrease);
    }

    // (ii) submultiplicativity on the sampled pairs.
    for (k, m) in pair_grid(k_max) {
        let lhs = w.eval(k + m);
        let rhs = w.eval(k) * w.eval(m);
        if lhs > rhs * (1.0 + CHECK_TOL) {
            return ClassReport::violated(class, k_max, Witness::Submultiplicativity { k, m });
        }
    }

    // (iii) subexponentiality: log ω(k)/k nonincreasing within tolerance
    // and strictly lower at the end of the range than at the start.
    let log_ratio = |k: i64| w.eval(k).ln() / k as f64;
    let first = log_ratio(1);
    let mut prev = first;
    for k in 2..=k_max {
        let cur = log_ratio(k);
        if cur > prev + CHECK_TOL {
            return ClassReport::violated(class, k_max, Witness::SubexponentialityRise { k });
        }
        prev = cur;
    }
    if !(prev < first) {
        return ClassReport::violated(class, k_max, Witness::SubexponentialityNoDecay);
    }

    ClassReport { class, verdict: Verdict::Consistent, range: (1, k_max), witness: None, bounds: None }
}

/// Class M₀ check: monotone increase, submultiplicativity,
/// subexponentiality on `[1, k_max]`.
pub fn check_m0(w: &Weight, k_max: i64) -> ClassReport {
    m0_core(WeightClass::M0, w, k_max)
}

/// Class I₋₁ check. Dispatch: `s = -1` is the exact `(1+|k|)^{-1}` case,
/// `s in (-1,0)` uses the upper exponent `1+2s-δ`, `s >= 0` coincides
/// with the I₀ check.
pub fn check_i_minus1(w: &Weight, s: f64, delta: f64, k_max: i64) -> Result<ClassReport, WeightError> {
    if s < -1.0 {
        return Err(WeightError::ExponentBelowMinusOne(s));
    }
    assert!(k_max >= 2, "k_max must be at least 2");
    if s == -1.0 {
        for k in 1..=k_max {
            let expect = 1.0 / (1.0 + k as f64);
            if (w.eval(k) - expect).abs() > CHECK_TOL * expect {
                return Ok(ClassReport::violated(
                    WeightClass::IMinus1,
                    k_max,
                    Witness::NotExactInverseLinear { k },
                ));
            }
        }
        return Ok(ClassReport {
            class: WeightClass::IMinus1,
            verdict: Verdict::Consistent,
            range: (1, k_max),
            witness: None,
            bounds: Some(RatioBounds { lower_constant: 1.0, upper_constant: 1.0 }),
        });
    }
    if s < 0.0 {
        if !(delta > 0.0) {
            return Err(WeightError::MissingDelta);
        }
        return Ok(two_sided_ratio_check(WeightClass::IMinus1, w, s, 1.0 + 2.0 * s - delta, k_max));
    }
    let mut report = two_sided_ratio_check(WeightClass::I0, w, s, 1.0 + s, k_max);
    report.class = WeightClass::IMinus1;
    Ok(report)
}

/// Class M₋₁ check: `ω` must factor as `ω*(k)/(1+|k|)` with `ω* ∈ M₀`;
/// the reported witnesses refer to the lifted weight `ω*`.
pub fn check_m_minus1(w: &Weight, k_max: i64) -> ClassReport {
    let lifted = {
        let w = w.clone();
        Weight::custom(&format!("(1+|k|)*({})", w.descriptor()), move |k| (1 + k) as f64 * w.eval(k))
    };
    m0_core(WeightClass::MMinus1, &lifted, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_weight_formula() {
        let w = power_weight(0.0);
        for k in [-5i64, 0, 3, 17] {
            assert_eq!(w.eval(k), 1.0);
        }
        assert_eq!(power_weight(1.0).eval(3), 4.0);
        assert!((power_weight(-1.0).eval(9) - 0.1).abs() < 1e-15);
        // evenness is structural
        assert_eq!(power_weight(2.5).eval(-7), power_weight(2.5).eval(7));
    }

    #[test]
    fn i0_power_weight_is_consistent_with_tight_bounds() {
        let report = check_i0(&power_weight(0.5), 0.5, 1 << 12).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent);
        let b = report.bounds.unwrap();
        // ratio (1+k)^0.5 / k^0.5 lies in [1, sqrt 2]
        assert!(b.lower_constant >= 1.0 && b.lower_constant <= 2.0f64.sqrt() + 1e-12);
        assert!(b.upper_constant <= 2.0f64.sqrt() + 1e-12);
    }

    #[test]
    fn i0_power_log_weight_consistent_to_2_pow_20() {
        let w = power_log_weight(0.5, 1.0);
        let report = check_i0(&w, 0.5, 1 << 20).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent, "{report}");
    }

    #[test]
    fn i0_exponential_weight_is_violated() {
        let w = Weight::custom("2^k", |k| 2.0f64.powi(k as i32));
        let report = check_i0(&w, 1.0, 1 << 10).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(matches!(report.witness, Some(Witness::UpperRatioUnbounded { .. })), "{report}");
    }

    #[test]
    fn i0_rejects_negative_s() {
        assert!(matches!(
            check_i0(&power_weight(-0.5), -0.5, 100),
            Err(WeightError::NegativeExponent(_))
        ));
    }

    #[test]
    fn m0_power_weight_consistent() {
        let report = check_m0(&power_weight(1.0), 1 << 12);
        assert_eq!(report.verdict, Verdict::Consistent, "{report}");
    }

    #[test]
    fn m0_exponential_fails_subexponentiality() {
        // Use a range small enough that e^k stays finite: the failure must
        // come from condition (iii), not from overflow.
        let w = Weight::custom("e^k", |k| (k as f64).exp());
        let report = check_m0(&w, 256);
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(
            matches!(
                report.witness,
                Some(Witness::SubexponentialityNoDecay) | Some(Witness::SubexponentialityRise { .. })
            ),
            "{report}"
        );
    }

    #[test]
    fn m0_log_weight_consistent_on_large_range() {
        let w = Weight::custom("log(e+k)", |k| (std::f64::consts::E + k as f64).ln());
        let report = check_m0(&w, 1 << 16);
        assert_eq!(report.verdict, Verdict::Consistent, "{report}");
    }

    /// Independent oracle for the sampled submultiplicativity check: the
    /// full pair set at a size where it is affordable.
    #[test]
    fn m0_sampling_agrees_with_exhaustive_pairs() {
        let w = Weight::custom("log(e+k)", |k| (std::f64::consts::E + k as f64).ln());
        for k in 1i64..=512 {
            for m in k..=(512 - k) {
                assert!(
                    w.eval(k + m) <= w.eval(k) * w.eval(m) * (1.0 + CHECK_TOL),
                    "submultiplicativity fails at ({k}, {m})"
                );
            }
        }
        assert_eq!(check_m0(&w, 512).verdict, Verdict::Consistent);
    }

    #[test]
    fn i_minus1_case_i_exact_inverse_linear() {
        let report = check_i_minus1(&power_weight(-1.0), -1.0, 0.0, 4096).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent, "{report}");
        // a slightly different weight is not case (i)
        let w = Weight::custom("off", |k| 1.0 / (1.1 + k as f64));
        let report = check_i_minus1(&w, -1.0, 0.0, 64).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(matches!(report.witness, Some(Witness::NotExactInverseLinear { .. })));
    }

    #[test]
    fn i_minus1_case_ii_negative_s() {
        let report = check_i_minus1(&power_weight(-0.5), -0.5, 0.1, 1 << 20).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent, "{report}");
        assert!(matches!(
            check_i_minus1(&power_weight(-0.5), -0.5, 0.0, 100),
            Err(WeightError::MissingDelta)
        ));
        assert!(matches!(
            check_i_minus1(&power_weight(-2.0), -2.0, 0.1, 100),
            Err(WeightError::ExponentBelowMinusOne(_))
        ));
    }

    #[test]
    fn i_minus1_case_iii_matches_i0_exactly() {
        for s in [0.0, 0.5, 2.0] {
            let w = power_weight(s);
            let a = check_i0(&w, s, 1 << 10).unwrap();
            let b = check_i_minus1(&w, s, 0.0, 1 << 10).unwrap();
            assert_eq!(a.verdict, b.verdict);
            assert_eq!(a.bounds, b.bounds);
            assert_eq!(b.class, WeightClass::IMinus1);
        }
    }

    #[test]
    fn m_minus1_examples() {
        assert_eq!(check_m_minus1(&inv_linear_log_weight(), 1 << 12).verdict, Verdict::Consistent);
        // ω = (1+k)^{-1}: lifted weight is constant 1, never increases.
        let report = check_m_minus1(&power_weight(-1.0), 64);
        assert_eq!(report.verdict, Verdict::Violated);
        assert_eq!(report.witness, Some(Witness::NoOverallIncrease));
        // ω = 1: lifted weight 1+k is monotone, submultiplicative, subexponential.
        assert_eq!(check_m_minus1(&power_weight(0.0), 1 << 12).verdict, Verdict::Consistent);
    }

    #[test]
    fn descriptor_parsing() {
        assert_eq!(Weight::from_descriptor("power:2").unwrap().eval(1), 4.0);
        let w = Weight::from_descriptor("powerlog:0.5:1").unwrap();
        assert!(w.eval(1) > 0.0);
        assert!(Weight::from_descriptor("inv-linear-log").is_ok());
        assert!(Weight::from_descriptor("power").is_err());
        assert!(Weight::from_descriptor("nope:1").is_err());
    }

    proptest! {
        #[test]
        fn power_weights_are_pointwise_ordered(s1 in -1.0f64..3.0, ds in 0.0f64..2.0, k in 1i64..10_000) {
            let w1 = power_weight(s1 + ds);
            let w2 = power_weight(s1);
            prop_assert!(w1.eval(k) >= w2.eval(k));
        }

        #[test]
        fn violated_reports_carry_witnesses(k_max in 8i64..256) {
            let w = Weight::custom("step-down", move |k| if k < 10 { 2.0 } else { 1.0 });
            let report = check_m0(&w, k_max);
            if report.verdict == Verdict::Violated {
                prop_assert!(report.witness.is_some());
            }
        }
    }
}
