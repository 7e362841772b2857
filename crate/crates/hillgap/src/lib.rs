//! Forward spectral toolkit for 1-periodic Hill–Schrödinger operators
//! `S(q) = -d²/dx² + q` with potentials given by Fourier coefficients,
//! including distributional ones (Dirac comb, rough power-law tails).
//!
//! The two solver routes are deliberately independent so they can audit
//! each other:
//!
//! - [`galerkin`]: truncated Fourier–Galerkin Hermitian eigenproblems in
//!   the periodic and antiperiodic sectors, which is the form-sum matrix
//!   and works for any admissible coefficient oracle;
//! - [`discriminant`]: the Floquet discriminant `Δ(λ)`, integrated for
//!   trigonometric polynomials and closed-form for the Kronig–Penney
//!   comb, with band edges located as roots of `Δ = ±2`.
//!
//! [`analysis`] turns gap sequences into the quantities the gap-length ⇔
//! regularity correspondence speaks about: weighted sequence norms,
//! decay exponents, remainder asymptotics and truncation-convergence
//! tables. [`weights`] provides the weight sequences and the empirical
//! class checks those statements are parameterized by.

pub mod analysis;
pub mod discriminant;
pub mod galerkin;
pub mod linalg;
pub mod ode;
pub mod potential;
pub mod weights;

pub use analysis::GapSequence;
pub use galerkin::{Sector, SpectrumResult};
pub use potential::FourierPotential;
pub use weights::Weight;
