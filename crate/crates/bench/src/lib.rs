//! Shared fixtures for the benchmarks.

use polariton_core::params::derive_scales;
use polariton_core::{DerivedScales, MediumParams};

/// Reduced-mode medium at `g/Ω = 100`.
pub fn medium(xi: f64, delta_over_gamma: f64) -> DerivedScales {
    let p = MediumParams::from_reduced(xi, delta_over_gamma, 100.0, 1.0).expect("valid reduced parameters");
    derive_scales(&p).expect("valid medium")
}
