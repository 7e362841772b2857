//! 1-periodic real-valued potentials given by their Fourier coefficients.
//!
//! A potential is a coefficient *oracle*: `coeff(k)` is defined for every
//! integer index, so distributional examples with infinite support (the
//! periodic Dirac comb, power-law tails) are first-class citizens. All
//! generators keep the Hermitian symmetry `q̂(-k) = conj(q̂(k))` exact at
//! the bit level, which is what downstream matrix assembly relies on.
//!
//! Coefficient evaluation is a pure function of the construction data, so
//! concurrent reads are safe; the only mutable state is a monotone
//! high-water mark recording the largest index a consumer has requested.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicI64, Ordering};

use crate::weights::Weight;

/// Declared decay behaviour of the coefficient tail.
#[derive(Debug, Clone, PartialEq)]
pub enum TailClass {
    /// Trigonometric polynomial: zero outside a finite index set.
    FinitelySupported,
    /// `|q̂(k)| = |k|^(-exponent)` up to phases.
    PowerDecay { exponent: f64 },
    /// All coefficients equal (periodic Dirac comb).
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialError {
    /// An index appeared twice in the input list.
    DuplicateIndex(i64),
    /// Both `k` and `-k` were supplied but the values are not conjugate.
    NonConjugatePair(i64),
    /// `q̂(0)` must be real for a real-valued potential.
    NonRealMean,
    /// Power-decay exponent outside the admissible range `p > -1/2`.
    InadmissibleExponent(f64),
    /// Malformed generator descriptor string.
    BadDescriptor(String),
}

impl fmt::Display for PotentialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialError::DuplicateIndex(k) => write!(f, "index {k} supplied more than once"),
            PotentialError::NonConjugatePair(k) => {
                write!(f, "coefficients at {k} and {} are not conjugate", -k)
            }
            PotentialError::NonRealMean => write!(f, "q̂(0) must be real"),
            PotentialError::InadmissibleExponent(p) => {
                write!(f, "power-decay exponent {p} is not > -1/2")
            }
            PotentialError::BadDescriptor(s) => write!(f, "cannot parse potential descriptor {s:?}"),
        }
    }
}

impl std::error::Error for PotentialError {}

#[derive(Debug, Clone)]
enum Kind {
    Finite(BTreeMap<i64, Complex64>),
    DeltaComb { alpha: f64 },
    PowerDecay { p: f64, seed: u64 },
    /// `q(x - a)`: coefficients modulated by `e^{i 2π k a}`.
    Translated { inner: Box<FourierPotential>, shift: f64 },
    /// `q(-x)`: coefficients reflected, `q̂(k) -> q̂(-k)`.
    Reflected { inner: Box<FourierPotential> },
    /// `c · q` with real `c`.
    Scaled { inner: Box<FourierPotential>, factor: f64 },
}

/// A 1-periodic real-valued potential as a Fourier-coefficient oracle.
#[derive(Debug)]
pub struct FourierPotential {
    kind: Kind,
    tail_class: TailClass,
    k_realized: AtomicI64,
}

impl Clone for FourierPotential {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            tail_class: self.tail_class.clone(),
            k_realized: AtomicI64::new(self.k_realized.load(Ordering::Relaxed)),
        }
    }
}

/// splitmix64 finalizer; the phase source for [`power_decay`]. Fixed here
/// so that generated potentials are bit-reproducible across platforms.
fn unit_hash(seed: u64, k: u64) -> f64 {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

impl FourierPotential {
    fn new(kind: Kind, tail_class: TailClass) -> Self {
        Self { kind, tail_class, k_realized: AtomicI64::new(0) }
    }

    /// The coefficient `q̂(k)`. Hermitian symmetry is exact: negative
    /// indices are always derived by conjugation from positive ones.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.k_realized.fetch_max(k.abs(), Ordering::Relaxed);
        if k < 0 {
            return self.coeff_nonneg(-k).conj();
        }
        self.coeff_nonneg(k)
    }

    fn coeff_nonneg(&self, k: i64) -> Complex64 {
        debug_assert!(k >= 0);
        match &self.kind {
            Kind::Finite(map) => map.get(&k).copied().unwrap_or(Complex64::new(0.0, 0.0)),
            Kind::DeltaComb { alpha } => Complex64::new(*alpha, 0.0),
            Kind::PowerDecay { p, seed } => {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let phi = std::f64::consts::TAU * unit_hash(*seed, k as u64);
                    let r = (k as f64).powf(-p);
                    Complex64::new(r * phi.cos(), r * phi.sin())
                }
            }
            Kind::Translated { inner, shift } => {
                let arg = std::f64::consts::TAU * (k as f64) * shift;
                inner.coeff(k) * Complex64::new(arg.cos(), arg.sin())
            }
            Kind::Reflected { inner } => inner.coeff(-k),
            Kind::Scaled { inner, factor } => inner.coeff(k) * *factor,
        }
    }

    pub fn tail_class(&self) -> &TailClass {
        &self.tail_class
    }

    /// Largest `|k|` requested from this oracle so far.
    pub fn k_realized(&self) -> i64 {
        self.k_realized.load(Ordering::Relaxed)
    }

    /// Smallest radius containing the support, when finite.
    pub fn support_radius(&self) -> Option<i64> {
        match &self.kind {
            Kind::Finite(map) => Some(
                map.iter()
                    .filter(|(_, v)| v.norm_sqr() != 0.0)
                    .map(|(k, _)| k.abs())
                    .max()
                    .unwrap_or(0),
            ),
            Kind::Translated { inner, .. } | Kind::Reflected { inner } | Kind::Scaled { inner, .. } => {
                inner.support_radius()
            }
            _ => None,
        }
    }

    /// Pointwise-evaluable view, available only for trigonometric
    /// polynomials (distributions have no pointwise values).
    pub fn as_trig_poly(&self) -> Option<TrigPoly> {
        let radius = self.support_radius()?;
        let constant = self.coeff(0).re;
        let harmonics = (1..=radius)
            .map(|k| {
                let c = self.coeff(k);
                Harmonic { angular: std::f64::consts::TAU * k as f64, two_re: 2.0 * c.re, two_im: 2.0 * c.im }
            })
            .collect();
        Some(TrigPoly { constant, harmonics })
    }

    /// `q(x - a)`; leaves the spectrum invariant.
    pub fn translated(&self, a: f64) -> FourierPotential {
        let tail = self.tail_class.clone();
        FourierPotential::new(Kind::Translated { inner: Box::new(self.clone()), shift: a }, tail)
    }

    /// `q(-x)`; leaves the spectrum invariant.
    pub fn reflected(&self) -> FourierPotential {
        let tail = self.tail_class.clone();
        FourierPotential::new(Kind::Reflected { inner: Box::new(self.clone()) }, tail)
    }

    /// `c · q` for real `c`.
    pub fn scaled(&self, c: f64) -> FourierPotential {
        let tail = self.tail_class.clone();
        FourierPotential::new(Kind::Scaled { inner: Box::new(self.clone()), factor: c }, tail)
    }

    /// Dispatches a named generator with numeric parameters; the shared
    /// backend of the descriptor mini-language and the spec-file format.
    pub fn from_generator(
        name: &str,
        params: &[f64],
        default_seed: u64,
    ) -> Result<FourierPotential, PotentialError> {
        let bad = || PotentialError::BadDescriptor(format!("{name}:{params:?}"));
        match (name, params) {
            ("zero", []) => make_potential(&[]),
            ("mathieu", [c]) => Ok(mathieu(*c)),
            ("delta-comb", [alpha]) => Ok(delta_comb(*alpha)),
            ("power-decay", [p]) => power_decay(*p, default_seed),
            ("power-decay", [p, seed]) if seed.fract() == 0.0 && *seed >= 0.0 => {
                power_decay(*p, *seed as u64)
            }
            _ => Err(bad()),
        }
    }

    /// Parses the generator mini-language used by the command line and the
    /// browser demo: `zero`, `mathieu:C`, `delta-comb:ALPHA`,
    /// `power-decay:P[:SEED]`.
    pub fn from_descriptor(desc: &str, default_seed: u64) -> Result<FourierPotential, PotentialError> {
        let bad = || PotentialError::BadDescriptor(desc.to_string());
        let mut parts = desc.split(':');
        let name = parts.next().ok_or_else(bad)?;
        let params = parts
            .map(|p| p.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<f64>, _>>()?;
        FourierPotential::from_generator(name, &params, default_seed).map_err(|_| bad())
    }
}

/// One cosine/sine pair of a real trigonometric polynomial.
#[derive(Debug, Clone)]
struct Harmonic {
    angular: f64,
    two_re: f64,
    two_im: f64,
}

/// Real-valued trigonometric polynomial `q(x)`, the pointwise view of a
/// finitely supported [`FourierPotential`].
#[derive(Debug, Clone)]
pub struct TrigPoly {
    constant: f64,
    harmonics: Vec<Harmonic>,
}

impl TrigPoly {
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.constant;
        for h in &self.harmonics {
            let (s, c) = (h.angular * x).sin_cos();
            v += h.two_re * c - h.two_im * s;
        }
        v
    }
}

/// Builds a potential from an explicit coefficient list. Missing negative
/// indices are filled by Hermitian reflection; everything else is zero.
pub fn make_potential(coeffs: &[(i64, Complex64)]) -> Result<FourierPotential, PotentialError> {
    let mut map: BTreeMap<i64, Complex64> = BTreeMap::new();
    for &(k, v) in coeffs {
        if map.contains_key(&k) {
            return Err(PotentialError::DuplicateIndex(k));
        }
        map.insert(k, v);
    }
    if let Some(v0) = map.get(&0) {
        if v0.im != 0.0 {
            return Err(PotentialError::NonRealMean);
        }
    }
    for (&k, &v) in map.iter() {
        if k <= 0 {
            continue;
        }
        if let Some(&other) = map.get(&-k) {
            if other != v.conj() {
                return Err(PotentialError::NonConjugatePair(k));
            }
        }
    }
    // Fill the missing mirror images so lookups never need a fallback.
    let mirrored: Vec<(i64, Complex64)> = map
        .iter()
        .filter(|(&k, _)| k != 0 && !map.contains_key(&-k))
        .map(|(&k, &v)| (-k, v.conj()))
        .collect();
    map.extend(mirrored);
    Ok(FourierPotential::new(Kind::Finite(map), TailClass::FinitelySupported))
}

/// `q(x) = 2 c cos(2π x)`, i.e. `q̂(±1) = c`.
pub fn mathieu(c: f64) -> FourierPotential {
    make_potential(&[(1, Complex64::new(c, 0.0))]).expect("single coefficient is always valid")
}

/// Periodic Dirac comb `α · Σ_j δ(x - j)`; every coefficient equals `α`.
pub fn delta_comb(alpha: f64) -> FourierPotential {
    FourierPotential::new(Kind::DeltaComb { alpha }, TailClass::Constant)
}

/// `|q̂(k)| = |k|^(-p)` with deterministic pseudo-random phases drawn from
/// `seed` (see [`unit_hash`]); `q̂(0) = 0`. Requires `p > -1/2` so the
/// potential stays in the admissible distribution class.
pub fn power_decay(p: f64, seed: u64) -> Result<FourierPotential, PotentialError> {
    if !(p > -0.5) {
        return Err(PotentialError::InadmissibleExponent(p));
    }
    Ok(FourierPotential::new(Kind::PowerDecay { p, seed }, TailClass::PowerDecay { exponent: p }))
}

/// Projection onto `|k| <= k_cut`: returns the trigonometric-polynomial
/// potential with the same leading coefficients.
pub fn truncate(q: &FourierPotential, k_cut: i64) -> FourierPotential {
    assert!(k_cut >= 0, "truncation radius must be nonnegative");
    let mut map = BTreeMap::new();
    for k in -k_cut..=k_cut {
        let v = q.coeff(k);
        if v.norm_sqr() != 0.0 {
            map.insert(k, v);
        }
    }
    FourierPotential::new(Kind::Finite(map), TailClass::FinitelySupported)
}

/// Partial Hörmander norm `sqrt( Σ_{|k|<=K} ω(k)² |q̂(k)|² )`.
pub fn hormander_norm_partial(q: &FourierPotential, w: &Weight, k_cut: i64) -> f64 {
    assert!(k_cut >= 0);
    let mut sum = q.coeff(0).norm_sqr() * w.eval(0).powi(2);
    for k in 1..=k_cut {
        let wk = w.eval(k).powi(2);
        sum += wk * (q.coeff(k).norm_sqr() + q.coeff(-k).norm_sqr());
    }
    sum.sqrt()
}
