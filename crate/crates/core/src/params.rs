//! Physical inputs, derived scales and the closed-form properties of the
//! effective two-polariton interaction.
//!
//! Rates are expressed in units of the intermediate-state decay `γ`
//! (physical-mode inputs may use any consistent unit system). The
//! relative-motion quantities are also available in reduced units: lengths
//! in `R_B`, energies in `2Ω²/|Δ|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quad::integrate;
use crate::{Error, Result, C64, I};

/// Half-width (in `R_B`) of the explicit quadrature window; beyond it the
/// van der Waals tail is integrated analytically.
pub const QUAD_CUTOFF: f64 = 20.0;
const QUAD_TOL: f64 = 1e-10;

/// Raw physical inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Collective probe coupling.
    pub g: f64,
    /// Control Rabi frequency.
    #[serde(rename = "Omega")]
    pub omega: f64,
    /// Decay rate of the intermediate state.
    pub gamma: f64,
    /// Single-photon detuning (signed). Two-photon detuning is zero.
    #[serde(rename = "Delta")]
    pub delta: f64,
    /// Vacuum speed of light.
    pub c: f64,
    /// van der Waals coefficient.
    #[serde(rename = "C6")]
    pub c6: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_p: Option<f64>,
    /// Probe beam waist.
    #[serde(default, rename = "w", skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
}

/// Parameter block as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ParamSpec {
    Physical(MediumParams),
    Reduced(ReducedSpec),
}

/// Reduced parameterisation: `γ = 1`, `c = 1`, `C6` back-solved from `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedSpec {
    pub xi: f64,
    #[serde(rename = "Delta_over_gamma")]
    pub delta_over_gamma: f64,
    #[serde(rename = "g_over_Omega")]
    pub g_over_omega: f64,
    /// Control Rabi frequency in units of `γ`; drops out of every reduced
    /// quantity. Defaults to 1.
    #[serde(default = "one", rename = "Omega_over_gamma")]
    pub omega_over_gamma: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamSpec {
    pub fn to_medium(&self) -> Result<MediumParams> {
        match *self {
            ParamSpec::Physical(p) => {
                p.validate()?;
                Ok(p)
            }
            ParamSpec::Reduced(r) => MediumParams::from_reduced(
                r.xi,
                r.delta_over_gamma,
                r.g_over_omega,
                r.omega_over_gamma,
            ),
        }
    }
}

impl MediumParams {
    /// Builds physical parameters from `(ξ, Δ/γ, g/Ω)` with `γ = c = 1`.
    pub fn from_reduced(xi: f64, delta_over_gamma: f64, g_over_omega: f64, omega: f64) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
        }
        if !(g_over_omega > 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidParameter("g/Omega and Omega must be positive".into()));
        }
        if delta_over_gamma == 0.0 || !delta_over_gamma.is_finite() {
            return Err(Error::InvalidParameter("Delta must be non-zero".into()));
        }
        let gamma = 1.0;
        let delta = delta_over_gamma * gamma;
        let g = g_over_omega * omega;
        let c = 1.0;
        let l_abs = delta.abs() * c / (g * g);
        let r_b = xi * l_abs;
        let c6 = r_b.powi(6) * 2.0 * omega * omega / delta.abs();
        let mut p = MediumParams { g, omega, gamma, delta, c, c6, lambda_p: None, waist: None };
        p.validate()?;
        // Nudge C6 by a few ulps so that ξ = R_B/L_abs reproduces the input bit for bit.
        for _ in 0..64 {
            let s = derive_scales(&p)?;
            if s.xi == xi {
                break;
            }
            let bits = p.c6.to_bits();
            p.c6 = f64::from_bits(if s.xi > xi { bits - 1 } else { bits + 1 });
        }
        Ok(p)
    }

    /// Checks the sign constraints; `Δ = 0` is rejected because every
    /// derived scale here is an off-resonant one.
    pub fn validate(&self) -> Result<()> {
        let positive = [("g", self.g), ("Omega", self.omega), ("gamma", self.gamma), ("c", self.c), ("C6", self.c6)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(Error::InvalidParameter("Delta must be non-zero for off-resonant driving".into()));
        }
        for (name, v) in [("lambda_p", self.lambda_p), ("w", self.waist)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Same medium with a different interaction coefficient.
    pub fn with_c6(mut self, c6: f64) -> Self {
        self.c6 = c6;
        self
    }
}

/// All derived quantities of a medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    /// Complex detuning `γ + iΔ`.
    #[serde(rename = "Gamma")]
    pub gamma_c: C64,
    /// Mixing angle, `tan θ = g/Ω`.
    pub theta: f64,
    pub cos2theta: f64,
    pub sin2theta: f64,
    pub v_g: f64,
    #[serde(rename = "L_abs")]
    pub l_abs: f64,
    #[serde(rename = "R_B")]
    pub r_b: f64,
    pub xi: f64,
    /// Complex effective mass of the relative motion.
    #[serde(rename = "m")]
    pub mass: C64,
    pub alpha: C64,
    #[serde(rename = "Omega_e")]
    pub omega_e: f64,
    #[serde(skip)]
    pub medium: MediumParams,
}

/// Reduced unit system of the relative-motion problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedUnits {
    pub time_unit: f64,
    pub length_unit: f64,
    pub energy_unit: f64,
}

/// Derives every scale of the medium.
pub fn derive_scales(p: &MediumParams) -> Result<DerivedScales> {
    p.validate()?;
    let gamma_c = C64::new(p.gamma, p.delta);
    let theta = (p.g / p.omega).atan();
    let omega_e2 = p.g * p.g + p.omega * p.omega;
    let cos2theta = p.omega * p.omega / omega_e2;
    let sin2theta = p.g * p.g / omega_e2;
    let v_g = p.c * cos2theta;
    let l_abs = p.delta.abs() * p.c / (p.g * p.g);
    let r_b = (p.delta.abs() * p.c6 / (2.0 * p.omega * p.omega)).powf(1.0 / 6.0);
    let mass = I * (p.g * p.g) / (4.0 * p.c * v_g * gamma_c);
    let alpha = C64::new(-p.delta, p.gamma) / (2.0 * p.omega * p.omega);
    Ok(DerivedScales {
        gamma_c,
        theta,
        cos2theta,
        sin2theta,
        v_g,
        l_abs,
        r_b,
        xi: r_b / l_abs,
        mass,
        alpha,
        omega_e: omega_e2.sqrt(),
        medium: *p,
    })
}

impl DerivedScales {
    pub fn units(&self) -> ReducedUnits {
        let energy_unit = 2.0 * self.medium.omega.powi(2) / self.medium.delta.abs();
        ReducedUnits { time_unit: 1.0 / energy_unit, length_unit: self.r_b, energy_unit }
    }

    pub fn energy_unit(&self) -> f64 {
        self.units().energy_unit
    }

    /// `γ/|Δ|`.
    pub fn loss_ratio(&self) -> f64 {
        self.medium.gamma / self.medium.delta.abs()
    }

    pub fn sign_delta(&self) -> f64 {
        self.medium.delta.signum()
    }

    pub fn sin4theta(&self) -> f64 {
        self.sin2theta * self.sin2theta
    }

    pub fn cos4theta(&self) -> f64 {
        self.cos2theta * self.cos2theta
    }

    /// Effective mass in reduced units (`m · E_u · R_B²`).
    pub fn reduced_mass(&self) -> C64 {
        self.mass * self.energy_unit() * self.r_b * self.r_b
    }

    /// `α · E_u = −sign(Δ) + iγ/|Δ|`.
    pub fn reduced_alpha(&self) -> C64 {
        self.alpha * self.energy_unit()
    }

    /// Speed of light in `R_B · E_u`.
    pub fn reduced_c(&self) -> f64 {
        self.medium.c / (self.r_b * self.energy_unit())
    }

    /// Closed-form alternative of the mass, `sign(Δ)/(4 v_g L_abs)·(1 + iγ/Δ)`.
    /// Agrees with [`DerivedScales::mass`] up to a factor `Δ²/(Δ² + γ²)`.
    pub fn mass_far_detuned(&self) -> C64 {
        let p = &self.medium;
        C64::new(1.0, p.gamma / p.delta) * (p.delta.signum() / (4.0 * self.v_g * self.l_abs))
    }

    /// Reduced van der Waals potential `(R_B/r)⁶` in units of `E_u`.
    pub fn reduced_bare(&self, x: f64) -> f64 {
        x.powi(-6)
    }

    /// Reduced effective potential `1/(x⁶ + αE_u)`, finite at the origin.
    pub fn reduced_w(&self, x: f64) -> C64 {
        let a = self.reduced_alpha();
        1.0 / (x.powi(6) + a)
    }
}

/// van der Waals potential `C6/r⁶`.
pub fn bare_potential(r: f64, p: &MediumParams) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Singular("bare potential at r = 0".into()));
    }
    Ok(p.c6 / r.powi(6))
}

/// Saturated potential `W = V/(1 + αV)`, with `W(0) = 1/α`.
pub fn effective_potential(r: f64, s: &DerivedScales) -> C64 {
    if r == 0.0 {
        return 1.0 / s.alpha;
    }
    // Written as C6 / (r⁶ + α C6) so that small r does not overflow.
    let c6 = s.medium.c6;
    c6 / (r.powi(6) + s.alpha * c6)
}

/// Single-photon susceptibility in presence of a Rydberg excitation at distance `r`.
pub fn susceptibility(r: f64, s: &DerivedScales) -> C64 {
    let p = &s.medium;
    -I * (p.g * p.g / (p.omega * p.omega)) * effective_potential(r, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonProperties {
    pub v_g: f64,
    pub bright_velocity: f64,
    pub bright_loss_rate: f64,
}

pub fn polariton_properties(p: &MediumParams) -> Result<PolaritonProperties> {
    let s = derive_scales(p)?;
    Ok(PolaritonProperties {
        v_g: s.v_g,
        bright_velocity: p.c * s.sin2theta,
        bright_loss_rate: p.gamma * s.omega_e.powi(2) / (p.delta * p.delta),
    })
}

/// `∫ f(x) dx` over the real line in reduced units, split as an explicit
/// window `|x| ≤ 20` plus an analytic tail supplied by the caller.
fn line_integral<F: Fn(f64) -> C64>(f: F, tail: C64) -> Result<C64> {
    // The integrands are even; the inner region carries all the structure.
    let inner = integrate(&f, 0.0, 3.0, QUAD_TOL, 1e-13)?;
    let outer = integrate(&f, 3.0, QUAD_CUTOFF, QUAD_TOL, 1e-13)?;
    Ok(2.0 * (inner + outer + tail))
}

/// `∫ W(x) dx` in reduced units (`R_B · E_u`).
pub fn integrated_potential(s: &DerivedScales) -> Result<C64> {
    let a = s.reduced_alpha();
    let x = QUAD_CUTOFF;
    // ∫_X^∞ x⁻⁶ (1 − a x⁻⁶ + a² x⁻¹²) dx
    let tail = 1.0 / (5.0 * x.powi(5)) - a / (11.0 * x.powi(11)) + a * a / (17.0 * x.powi(17));
    line_integral(|x| s.reduced_w(x), tail)
}

/// `∫ |W(x)| dx` in reduced units.
pub fn integrated_abs_potential(s: &DerivedScales) -> Result<f64> {
    let x = QUAD_CUTOFF;
    let tail = C64::new(1.0 / (5.0 * x.powi(5)), 0.0);
    line_integral(|x| C64::new(s.reduced_w(x).norm(), 0.0), tail).map(|z| z.re)
}

/// `∫ |x| |W(x)| dx` in reduced units.
pub fn first_moment_abs_potential(s: &DerivedScales) -> Result<f64> {
    let x = QUAD_CUTOFF;
    let tail = C64::new(1.0 / (4.0 * x.powi(4)), 0.0);
    line_integral(|x| C64::new(x * s.reduced_w(x).norm(), 0.0), tail).map(|z| z.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateCondition {
    /// `m ∫ W dr` (dimensionless).
    pub mass_times_integral: C64,
    /// The implemented predicate: `Re(m ∫ W) < 0`.
    pub satisfied: bool,
}

/// Sufficient condition for a bound state: `Re(m ∫ W dr) < 0`.
///
/// Only the real part is tested; for `Δ < 0` the product is negative with
/// a small imaginary part, for `Δ > 0` the value is reported as is.
pub fn bound_state_condition(s: &DerivedScales) -> Result<BoundStateCondition> {
    let product = s.reduced_mass() * integrated_potential(s)? * s.sin4theta();
    Ok(BoundStateCondition { mass_times_integral: product, satisfied: product.re < 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundStateCount {
    /// `floor(1 + 2|m| ∫ |r| |W| dr)`.
    pub n_bound_max: u64,
    /// `ξ ≤ sqrt(3√3/π)`.
    pub single_state: bool,
}

/// `sqrt(3√3/π) ≈ 1.2861`.
pub fn single_state_threshold() -> f64 {
    (3.0 * 3f64.sqrt() / PI).sqrt()
}

pub fn max_bound_states(s: &DerivedScales) -> Result<BoundStateCount> {
    let moment = first_moment_abs_potential(s)? * s.sin4theta();
    let n = (1.0 + 2.0 * s.reduced_mass().norm() * moment).floor();
    // Inclusive at the four-digit rounding 1.2861 of the threshold.
    let single_state = s.xi <= single_state_threshold().max(1.2861);
    Ok(BoundStateCount { n_bound_max: n as u64, single_state })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBound {
    /// `(|m|/2)(∫|W sin⁴θ| dr)²` in units of `E_u`.
    pub bound: f64,
    /// `(ξ²/2)(2π/3)²` in units of `E_u`.
    pub closed_form: f64,
}

/// Upper bound on `|E_n|` for the complex potential, plus the far-detuned
/// closed-form estimate.
pub fn energy_bound(s: &DerivedScales) -> Result<EnergyBound> {
    let integral = integrated_abs_potential(s)? * s.sin4theta();
    let bound = 0.5 * s.reduced_mass().norm() * integral * integral;
    let closed_form = 0.5 * s.xi * s.xi * (2.0 * PI / 3.0).powi(2);
    Ok(EnergyBound { bound, closed_form })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalityCheck {
    pub ratio: f64,
    pub valid_1d: bool,
}

/// Threshold applied to `ξ / sqrt(λ_p L_abs / (2π w²))`.
pub const VALID_1D_RATIO: f64 = 10.0;

pub fn dimensionality_check(s: &DerivedScales) -> Result<DimensionalityCheck> {
    let p = &s.medium;
    let lambda = p.lambda_p.ok_or_else(|| Error::Incomplete("lambda_p is required".into()))?;
    let w = p.waist.ok_or_else(|| Error::Incomplete("beam waist w is required".into()))?;
    let ratio = s.xi / (lambda * s.l_abs / (2.0 * PI * w * w)).sqrt();
    Ok(DimensionalityCheck { ratio, valid_1d: ratio >= VALID_1D_RATIO })
}
