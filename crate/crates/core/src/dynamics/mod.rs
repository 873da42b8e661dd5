//! Time-domain propagation of the two-excitation wave function.
//!
//! * [`relative`]: four-component evolution in the relative coordinate at
//!   zero centre-of-mass momentum.
//! * [`pair2d`]: four-component evolution on the `(z₁, z₂)` plane through a
//!   vacuum/medium boundary.
//! * [`schrodinger`]: Crank-Nicolson integration of the scalar effective
//!   Schrödinger equation.
//! * [`bunching`]: the bunching classifier used on either frame.

pub mod bunching;
pub mod pair2d;
pub mod relative;
pub mod schrodinger;

use serde::Serialize;

use crate::C64;

pub use bunching::{bunching_metric, Bunching};
pub use pair2d::{evolve_pair_2d, Pair2dConfig, Pair2dResult};
pub use relative::{evolve_relative, molecule_preparation, InitialProfile, RelativeConfig, RelativeResult};
pub use schrodinger::{evolve_scalar, evolve_schrodinger, ScalarResult, ScalarSnapshot, SchrodingerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Frame {
    Lab2d,
    RelativeK0,
    Scalar,
}

/// Four-component pair amplitude `(EE, ES, SE, SS)`.
///
/// In one dimension each component has `axis.len()` entries; in two
/// dimensions it is a row-major `axis.len()²` array indexed `[i₁ n + i₂]`
/// with `z₁ = axis[i₁]`, `z₂ = axis[i₂]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairField {
    pub ee: Vec<C64>,
    pub es: Vec<C64>,
    pub se: Vec<C64>,
    pub ss: Vec<C64>,
    pub axis: Vec<f64>,
    pub time: f64,
    pub frame: Frame,
}

impl PairField {
    pub fn zeros(axis: Vec<f64>, frame: Frame) -> Self {
        let n = match frame {
            Frame::Lab2d => axis.len() * axis.len(),
            _ => axis.len(),
        };
        let zero = vec![C64::new(0.0, 0.0); n];
        PairField { ee: zero.clone(), es: zero.clone(), se: zero.clone(), ss: zero, axis, time: 0.0, frame }
    }

    pub fn components(&self) -> [&[C64]; 4] {
        [&self.ee, &self.es, &self.se, &self.ss]
    }

    /// Largest violation of exchange symmetry across all components.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.axis.len();
        let mut worst: f64 = 0.0;
        match self.frame {
            Frame::Lab2d => {
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (i * n + j, j * n + i);
                        worst = worst
                            .max((self.ee[a] - self.ee[b]).norm())
                            .max((self.ss[a] - self.ss[b]).norm())
                            .max((self.es[a] - self.se[b]).norm());
                    }
                }
            }
            _ => {
                for i in 0..n {
                    let j = mirror_index(n, i);
                    worst = worst.max((self.ee[i] - self.ee[j]).norm()).max((self.es[i] - self.se[j]).norm());
                }
            }
        }
        worst
    }
}

/// Index of `-r` on a periodic grid `r_i = (i - n/2) h` with `n` even.
pub(crate) fn mirror_index(n: usize, i: usize) -> usize {
    (n - i) % n
}

/// Time series of a complex observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Self {
        TimeSeries { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Local generator (reduced units) of the coupled `(EE, ES, SE, SS)` amplitudes
/// for atom-light couplings `g1` at the first and `g2` at the second position,
/// plus the interaction `v` acting on SS.
pub(crate) fn local_generator(s: &crate::DerivedScales, g1: f64, g2: f64, v: f64) -> crate::linalg::Mat4 {
    let p = &s.medium;
    let pre = -crate::I / (s.gamma_c * s.energy_unit());
    let h = |g: f64| [[g * g, g * p.omega], [g * p.omega, p.omega * p.omega]];
    let (h1, h2) = (h(g1), h(g2));
    let mut m = crate::linalg::zero4();
    for a1 in 0..2 {
        for a2 in 0..2 {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    let mut val = 0.0;
                    if a2 == b2 {
                        val += h1[a1][b1];
                    }
                    if a1 == b1 {
                        val += h2[a2][b2];
                    }
                    m[2 * a1 + a2][2 * b1 + b2] = pre * val;
                }
            }
        }
    }
    m[3][3] += v;
    m
}

/// Dark-state pair amplitudes `cos²θ (cos²θ, -cosθ sinθ, -cosθ sinθ, sin²θ)`,
/// i.e. the projection of a photon pair onto two dark polaritons.
pub(crate) fn dark_pair_weights(s: &crate::DerivedScales) -> [f64; 4] {
    let (c2, s2) = (s.cos2theta, s.sin2theta);
    let cs = (c2 * s2).sqrt();
    [c2 * c2, -c2 * cs, -c2 * cs, c2 * s2]
}
