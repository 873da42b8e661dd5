//! Numerical laboratory for two-photon bound states ("photonic molecules")
//! of Rydberg polaritons under off-resonant EIT.
//!
//! The crate is split along the physics:
//!
//! * [`params`]: physical inputs, derived scales, effective potential and
//!   the closed-form existence/counting/energy estimates.
//! * [`spectral`]: grid discretisation of the non-Hermitian relative-motion
//!   Hamiltonian, its complex spectrum and bound/continuum classification.
//! * [`analytic`]: the delta-pseudopotential closed form and everything
//!   derived from it (energies, decay, crossover time), plus [`cerf`].
//! * [`dynamics`]: direct time integration of the four-component pair
//!   wave function and of the scalar effective Schrödinger equation.
//! * [`greens`]: frequency-domain Green's functions, Nyström solution of the
//!   Lippmann-Schwinger equation and Fourier-Laplace synthesis.
//! * [`homodyne`]: phase analysis and bound/continuum separation.
//!
//! Unless stated otherwise the relative-motion code works in reduced units:
//! lengths in blockade radii `R_B`, energies in `2 Ω² / |Δ|` and times in the
//! inverse of that.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod cerf;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod homodyne;
pub mod io;
pub mod linalg;
pub mod params;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::{DerivedScales, MediumParams, ParamSpec, ReducedUnits};

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
