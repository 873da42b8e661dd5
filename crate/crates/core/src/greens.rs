//! Frequency-domain treatment of the pair problem: free and full Green's
//! functions of the relative motion and Fourier-Laplace synthesis of the
//! photon-photon amplitude.
//!
//! [`free_green`], [`freq_quantities`] and [`effective_potential_freq`] take
//! physical units. Everything on a grid works in reduced units (lengths in
//! `R_B`, frequencies in `2Ω²/|Δ|`), where the scalar problem reads
//! `H = −∂²/(2m) + W(r) sin⁴θ` with the evolution `i∂ₜψ = Hψ`.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::InitialProfile;
use crate::spectral::Grid1D;
use crate::{DerivedScales, Error, MediumParams, Result, C64, I};

/// `κ = sqrt(2m e)` on the branch `Im κ > 0`.
pub fn kappa(mass: C64, energy: C64) -> Result<C64> {
    let k = (2.0 * mass * energy).sqrt();
    let k = if k.im < 0.0 { -k } else { k };
    if !(k.im > 0.0) {
        return Err(Error::OutOfRange(format!(
            "no decaying branch of sqrt(2m(ω − v_g K)) at 2m(ω − v_g K) = {}",
            2.0 * mass * energy
        )));
    }
    Ok(k)
}

/// Kernel of `(p²/2m − e)⁻¹` at separation `x`, given `κ` from [`kappa`].
#[inline]
fn green_kernel(x: f64, mass: C64, k: C64) -> C64 {
    I * mass / k * (I * k * x.abs()).exp()
}

/// Free Green's function `2m · (−exp(iκ|r − r'|)/(2iκ))`, `κ = sqrt(2m(ω − v_g K))`,
/// in physical units.
///
/// The factor `2m` makes this the exact kernel of `(p²/2m − ω + v_g K)⁻¹`.
pub fn free_green(r: f64, r_prime: f64, omega: C64, k: f64, s: &DerivedScales) -> Result<C64> {
    let kap = kappa(s.mass, omega - s.v_g * k)?;
    Ok(green_kernel(r - r_prime, s.mass, kap))
}

/// Frequency-dependent coefficient functions of the exact free propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqQuantities {
    pub alpha11: C64,
    pub alpha00: C64,
    pub gamma_factor: C64,
    pub m0: C64,
    #[serde(rename = "Lambda0")]
    pub lambda0: C64,
}

fn checked_inverse(denominator: C64, scale: f64, what: &str) -> Result<C64> {
    if denominator.norm() <= 1e-12 * scale {
        return Err(Error::Resonance(format!("{what} has a pole at this frequency")));
    }
    Ok(1.0 / denominator)
}

/// Evaluates `α₁₁`, `α₀₀`, `γ(ω)`, `m₀` and `Λ₀` at `(ω, K)` in physical units.
pub fn freq_quantities(omega: f64, k: f64, p: &MediumParams) -> Result<FreqQuantities> {
    p.validate()?;
    let gam = C64::new(p.gamma, p.delta);
    let (g2, o2, c) = (p.g * p.g, p.omega * p.omega, p.c);
    let ck = c * k;
    let scale = (g2 + o2) * gam.norm();

    let alpha11 = I * gam * checked_inverse((ck - omega) * I * gam - 2.0 * g2, scale, "alpha11")?;
    let slow = 2.0 * o2 - I * omega * gam;
    let fast = 2.0 * g2 - I * (omega - ck) * gam;
    let gamma_factor = slow * checked_inverse(fast, scale, "gamma(omega)")?;
    let alpha00 = I * gam * checked_inverse(slow, scale, "alpha00")?;
    let d = 2.0 * I * o2 + omega * gam;
    let m0 = o2 * g2 * (g2 + o2 + (0.5 * ck - omega) * I * gam)
        * checked_inverse(I * gam * d * d * c * c, scale * scale * c * c, "m0")?;
    let lambda0 = slow * (2.0 * g2 + 2.0 * o2 + I * ck * gam - 2.0 * I * omega * gam)
        * (2.0 * omega * g2 - (ck - omega) * slow)
        * checked_inverse(4.0 * g2 * o2 * fast, scale * g2 * o2, "Lambda0")?;
    Ok(FreqQuantities { alpha11, alpha00, gamma_factor, m0, lambda0 })
}

/// Dispersive potential `V/(1 + α₀₀(ω) V)` at distance `r` (physical units).
pub fn effective_potential_freq(r: f64, omega: f64, s: &DerivedScales) -> Result<C64> {
    let alpha00 = freq_quantities(omega, 0.0, &s.medium)?.alpha00;
    if r == 0.0 {
        return Ok(1.0 / alpha00);
    }
    let c6 = s.medium.c6;
    Ok(c6 / (r.powi(6) + alpha00 * c6))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NystromOptions {
    /// Centre-of-mass wavenumber in `1/R_B`.
    pub k: f64,
    pub interaction: bool,
    /// Grid points with `|W| < support_tolerance · max|W|` are dropped from
    /// the integral operator.
    pub support_tolerance: f64,
    /// Estimate the condition number of the reduced system (costs one inverse).
    pub check_condition: bool,
}

impl Default for NystromOptions {
    fn default() -> Self {
        NystromOptions { k: 0.0, interaction: true, support_tolerance: 1e-8, check_condition: true }
    }
}

/// Full Green's function sampled on a grid, row-major.
#[derive(Debug, Clone, Serialize)]
pub struct GreenMatrix {
    pub grid: Grid1D,
    pub omega: C64,
    pub values: Vec<C64>,
    pub condition: Option<f64>,
    pub residual: f64,
}

impl GreenMatrix {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.n_points + j]
    }

    /// Hilbert-Schmidt norm of the integral operator.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * self.grid.spacing
    }

    pub fn symmetry_error(&self) -> f64 {
        let n = self.grid.n_points;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (self.get(i, j), self.get(j, i));
                worst = worst.max((a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE));
            }
        }
        worst
    }
}

/// Reduced-unit discretisation shared by the Nyström solver and the synthesis.
struct Kernel {
    points: Vec<f64>,
    h: f64,
    mass: C64,
    /// Indices where the weighted potential is kept.
    support: Vec<usize>,
    /// `W(r_j) sin⁴θ h` on the support.
    weights: Vec<C64>,
}

impl Kernel {
    fn new(s: &DerivedScales, grid: &Grid1D, interaction: bool, tolerance: f64) -> Self {
        let points = grid.points();
        let h = grid.spacing;
        let factor = s.sin4theta();
        let w: Vec<C64> = points.iter().map(|&x| s.reduced_w(x) * factor).collect();
        let peak = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut support = Vec::new();
        let mut weights = Vec::new();
        if interaction {
            for (j, z) in w.iter().enumerate() {
                if z.norm() >= tolerance * peak {
                    support.push(j);
                    weights.push(z * h);
                }
            }
        }
        Kernel { points, h, mass: s.reduced_mass(), support, weights }
    }

    /// Green's function values `G₀(m h)` for `m = 0..n`.
    fn toeplitz(&self, k: C64) -> Vec<C64> {
        (0..self.points.len()).map(|m| green_kernel(m as f64 * self.h, self.mass, k)).collect()
    }

    /// `I + G₀_SS diag(w_S)`.
    fn system(&self, g0: &[C64]) -> Mat<C64> {
        let ns = self.support.len();
        Mat::from_fn(ns, ns, |a, b| {
            let d = self.support[a].abs_diff(self.support[b]);
            let v = g0[d] * self.weights[b];
            if a == b {
                v + 1.0
            } else {
                v
            }
        })
    }
}

fn one_norm(m: &Mat<C64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves `G = G₀ − sin⁴θ ∫ G₀ W G` on `grid` at the reduced frequency `omega`.
///
/// The integral operator is restricted to the support of `W`, so the dense
/// solve has the size of that support rather than of the grid.
pub fn solve_green_nystrom(s: &DerivedScales, grid: &Grid1D, omega: C64, opts: &NystromOptions) -> Result<GreenMatrix> {
    if grid.length() < 20.0 || grid.n_points < 512 {
        return Err(Error::Grid(format!(
            "Nyström grid must span 20 R_B with 512 points, got {} R_B and {} points",
            grid.length(),
            grid.n_points
        )));
    }
    let kernel = Kernel::new(s, grid, opts.interaction, opts.support_tolerance);
    let v_g = s.reduced_c() * s.cos2theta;
    let kap = kappa(kernel.mass, omega - v_g * opts.k)?;
    let g0 = kernel.toeplitz(kap);
    let n = grid.n_points;
    let mut values: Vec<C64> = (0..n * n).map(|ij| g0[(ij / n).abs_diff(ij % n)]).collect();
    let ns = kernel.support.len();
    if ns == 0 {
        return Ok(GreenMatrix { grid: *grid, omega, values, condition: None, residual: 0.0 });
    }
    let a = kernel.system(&g0);
    let lu = a.partial_piv_lu();
    let condition = if opts.check_condition {
        let cond = one_norm(&a) * one_norm(&lu.inverse());
        if !(cond <= 1e12) {
            return Err(Error::Resonance(format!("condition estimate {cond:.3e} at ω = {omega}")));
        }
        Some(cond)
    } else {
        None
    };
    // X = A⁻¹ G₀[S, :]
    let rhs = Mat::from_fn(ns, n, |a, j| g0[kernel.support[a].abs_diff(j)]);
    let x = lu.solve(&rhs);
    let residual = {
        let r = &a * &x - &rhs;
        r.norm_l2() / rhs.norm_l2()
    };
    if !(residual <= 1e-8) {
        return Err(Error::Resonance(format!("integral equation residual {residual:.3e} at ω = {omega}")));
    }
    // G = G₀ − G₀[:, S] diag(w) X
    values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (a, &j) in kernel.support.iter().enumerate() {
            let c = g0[i.abs_diff(j)] * kernel.weights[a];
            for (col, v) in row.iter_mut().enumerate() {
                *v -= c * x[(a, col)];
            }
        }
    });
    Ok(GreenMatrix { grid: *grid, omega, values, condition, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleScanPoint {
    pub omega: f64,
    pub norm: f64,
}

/// Hilbert-Schmidt norm of `G(ω)` restricted to the support of `W`.
///
/// Only the reduced system is solved, since `G[S, S] = A⁻¹ G₀[S, S]`. A
/// bound state overlaps the potential, so its pole shows up in this block.
pub fn support_norm(s: &DerivedScales, grid: &Grid1D, omega: C64, opts: &NystromOptions) -> Result<f64> {
    let kernel = Kernel::new(s, grid, opts.interaction, opts.support_tolerance);
    let v_g = s.reduced_c() * s.cos2theta;
    let kap = kappa(kernel.mass, omega - v_g * opts.k)?;
    let g0 = kernel.toeplitz(kap);
    let ns = kernel.support.len();
    if ns == 0 {
        return Err(Error::Grid("the potential has no support on this grid".into()));
    }
    let a = kernel.system(&g0);
    let rhs = Mat::from_fn(ns, ns, |a, b| g0[kernel.support[a].abs_diff(kernel.support[b])]);
    Ok(a.partial_piv_lu().solve(&rhs).norm_l2() * kernel.h)
}

/// [`support_norm`] on real reduced frequencies. Isolated maxima sit at the
/// real parts of the resonance poles of `G`.
pub fn pole_scan(s: &DerivedScales, grid: &Grid1D, omegas: &[f64], opts: &NystromOptions) -> Result<Vec<PoleScanPoint>> {
    omegas
        .par_iter()
        .map(|&w| Ok(PoleScanPoint { omega: w, norm: support_norm(s, grid, C64::new(w, 0.0), opts)? }))
        .collect()
}

/// Locates the maximum of [`support_norm`] in `[lo, hi]` by a coarse scan
/// followed by golden-section refinement.
pub fn locate_pole(s: &DerivedScales, grid: &Grid1D, lo: f64, hi: f64, opts: &NystromOptions) -> Result<f64> {
    let norm = |w: f64| support_norm(s, grid, C64::new(w, 0.0), opts);
    let samples = 32;
    let step = (hi - lo) / samples as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..=samples {
        let w = lo + i as f64 * step;
        let v = norm(w)?;
        if v > best.1 {
            best = (w, v);
        }
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (norm(c)?, norm(d)?);
    while b - a > 1e-5 * (hi - lo) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = norm(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = norm(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Frequency prefactor of the synthesis integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `cos⁴θ`, the low-frequency, slow-light value.
    Cos4Theta,
    /// `γ²(ω)`, the full coefficient of the propagator.
    GammaSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisOptions {
    /// Half width of the frequency window in `2Ω²/|Δ|`; `Ω²/|Γ|` if unset.
    pub window: Option<f64>,
    /// Frequency spacing; `π/(8 t_max)` if unset.
    pub spacing: Option<f64>,
    /// Height of the integration line above the real axis; `1/t_max` if unset.
    pub shift: Option<f64>,
    pub interaction: bool,
    pub prefactor: Prefactor,
    pub support_tolerance: f64,
    /// Relative L2 change allowed when the spacing is halved.
    pub convergence_tolerance: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            window: None,
            spacing: None,
            shift: None,
            interaction: true,
            prefactor: Prefactor::Cos4Theta,
            support_tolerance: 1e-8,
            convergence_tolerance: 0.01,
        }
    }
}

/// Synthesised photon-pair amplitude in units of `cos⁴θ`.
#[derive(Debug, Clone, Serialize)]
pub struct Synthesis {
    pub axis: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[k][i] = EE(r_i, t_k)/cos⁴θ`.
    pub values: Vec<Vec<C64>>,
    pub window: f64,
    pub spacing: f64,
    pub shift: f64,
    pub frequencies: usize,
    /// Relative L2 change against the half-resolution quadrature.
    pub convergence: f64,
}

/// Fourier-Laplace synthesis of `EE(r, t)` from the full Green's function.
///
/// The frequency integral runs along `Im ω = shift`, above every singularity
/// of `G`, so that the branch point of the free continuum at `ω = 0` is not
/// sampled. The slowly decaying tail `f(r)/(0 − ω)` is subtracted and
/// added back in closed form.
pub fn synthesize_ee(
    s: &DerivedScales,
    profile: InitialProfile,
    times: &[f64],
    grid: &Grid1D,
    opts: &SynthesisOptions,
) -> Result<Synthesis> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("synthesis times must be positive".into()));
    }
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let window = opts.window.unwrap_or(s.medium.delta.abs() / (2.0 * s.gamma_c.norm()));
    let spacing = opts.spacing.unwrap_or(PI / (8.0 * t_max));
    let shift = opts.shift.unwrap_or(1.0 / t_max);
    if !(window > 0.0) || !(spacing > 0.0) || !(shift > 0.0) {
        return Err(Error::InvalidParameter("window, spacing and shift must be positive".into()));
    }
    let kernel = Kernel::new(s, grid, opts.interaction, opts.support_tolerance);
    let n = kernel.points.len();
    let f_inf = profile.asymptote();
    let f: Vec<f64> = kernel.points.iter().map(|&x| profile.amplitude(x)).collect();
    let delta_f: Vec<(usize, f64)> =
        f.iter().enumerate().map(|(j, &v)| (j, v - f_inf)).filter(|(_, v)| v.abs() > 1e-16).collect();
    // The reference pole sits at the free threshold, below the contour; it
    // removes the free part of a flat profile exactly.
    let e_ref = C64::new(0.0, 0.0);
    let prefactor = |z: C64| -> Result<C64> {
        match opts.prefactor {
            Prefactor::Cos4Theta => Ok(C64::new(1.0, 0.0)),
            Prefactor::GammaSquared => {
                // γ(ω) at complex ω in physical units, normalised to cos²θ.
                let p = &s.medium;
                let w = z * s.energy_unit();
                let g = (2.0 * p.omega * p.omega - I * w * s.gamma_c) / (2.0 * p.g * p.g - I * w * s.gamma_c);
                Ok(g * g / s.cos4theta())
            }
        }
    };
    let p0 = prefactor(C64::new(0.0, 0.0))?;

    // Remainder `pref(z) u(z) − p0 f/(E_ref − z)` at one frequency.
    let remainder = |z: C64| -> Result<Vec<C64>> {
        let kap = kappa(kernel.mass, z)?;
        let g0 = kernel.toeplitz(kap);
        let mut u: Vec<C64> = vec![-f_inf / z; n];
        for &(j, v) in &delta_f {
            let c = v * kernel.h;
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += g0[i.abs_diff(j)] * c;
            }
        }
        if !kernel.support.is_empty() {
            let a = kernel.system(&g0);
            let rhs = Mat::from_fn(kernel.support.len(), 1, |a, _| u[kernel.support[a]]);
            let x = a.partial_piv_lu().solve(&rhs);
            let res = (&a * &x - &rhs).norm_l2() / rhs.norm_l2().max(f64::MIN_POSITIVE);
            if !(res <= 1e-8) {
                return Err(Error::Resonance(format!("integral equation residual {res:.3e} at ω = {z}")));
            }
            let cs: Vec<(usize, C64)> =
                kernel.support.iter().enumerate().map(|(a, &j)| (j, kernel.weights[a] * x[(a, 0)])).collect();
            for (i, ui) in u.iter_mut().enumerate() {
                for &(j, c) in &cs {
                    *ui -= g0[i.abs_diff(j)] * c;
                }
            }
        }
        let pz = prefactor(z)?;
        let r = p0 / (e_ref - z);
        Ok(u.iter().zip(&f).map(|(ui, &fi)| pz * ui - r * fi).collect())
    };

    // Half-spacing nodes; even indices form the coarse rule.
    let half = 0.5 * spacing;
    let steps = (2.0 * window / half).ceil() as usize;
    let du = 2.0 * window / steps as f64;
    let nodes: Vec<f64> = (0..=steps).map(|k| -window + k as f64 * du).collect();
    let samples: Vec<Vec<C64>> =
        nodes.par_iter().map(|&u| remainder(C64::new(u, shift))).collect::<Result<Vec<_>>>()?;

    let sum = |stride: usize, t: f64| -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let last = (steps / stride) * stride;
        for k in (0..=last).step_by(stride) {
            let weight = if k == 0 || k == last { 0.5 } else { 1.0 } * du * stride as f64;
            let phase = (-I * C64::new(nodes[k], shift) * t).exp() * weight / (2.0 * PI * I);
            for (a, v) in acc.iter_mut().zip(&samples[k]) {
                *a += phase * v;
            }
        }
        let back = p0 * (-I * e_ref * t).exp();
        for (a, &fi) in acc.iter_mut().zip(&f) {
            *a += back * fi;
        }
        acc
    };

    let mut values = Vec::with_capacity(times.len());
    let (mut num, mut den) = (0.0, 0.0);
    for &t in times {
        let fine = sum(1, t);
        let coarse = sum(2, t);
        num += fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        den += fine.iter().map(|a| a.norm_sqr()).sum::<f64>();
        values.push(fine);
    }
    let convergence = (num / den.max(f64::MIN_POSITIVE)).sqrt();
    if !(convergence <= opts.convergence_tolerance) {
        return Err(Error::Quadrature(format!(
            "halving the frequency spacing changes the amplitude by {convergence:.3e}"
        )));
    }
    Ok(Synthesis {
        axis: kernel.points,
        times: times.to_vec(),
        values,
        window,
        spacing: du,
        shift,
        frequencies: nodes.len(),
        convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_scales, effective_potential};
    use crate::quad::integrate;
    use crate::spectral::Boundary;

    fn scales(xi: f64, delta: f64) -> DerivedScales {
        derive_scales(&MediumParams::from_reduced(xi, delta, 100.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn cusp_value_and_decay() {
        let s = scales(0.2, -12.0);
        let w = C64::new(0.3, 0.0);
        let kap = kappa(s.mass, w).unwrap();
        let g = free_green(1.0, 1.0, w, 0.0, &s).unwrap();
        assert!((g - 2.0 * s.mass * (-1.0 / (2.0 * I * kap))).norm() < 1e-14 * g.norm());
        let far = free_green(0.0, 5.0 * s.r_b, w, 0.0, &s).unwrap();
        assert!(far.norm() < g.norm());
    }

    #[test]
    fn momentum_space_oracle() {
        // (p²/2m − e)⁻¹ = 2m/(p² − κ²). Subtract 2m/(p² + 1), whose transform is
        // m e^{−|x|}, and integrate the O(p⁻⁴) remainder numerically.
        let s = scales(0.2, -12.0);
        let m = s.reduced_mass();
        let e = C64::new(-10.0, 0.0);
        let kap = kappa(m, e).unwrap();
        let k2 = kap * kap;
        for x in [0.0, 0.7, 3.0] {
            let rem = |p: f64| 2.0 * m * (k2 + 1.0) / ((p * p - k2) * (p * p + 1.0)) * (p * x).cos();
            let cut = 2e3;
            let mut acc = C64::new(0.0, 0.0);
            let panels = 4000;
            for i in 0..panels {
                let (a, b) = (cut * i as f64 / panels as f64, cut * (i + 1) as f64 / panels as f64);
                acc += integrate(rem, a, b, 1e-16, 1e-13).unwrap();
            }
            let numeric = acc / PI + m * (-x.abs()).exp();
            let exact = green_kernel(x, m, kap);
            assert!((numeric - exact).norm() < 1e-8 * exact.norm(), "{x}: {numeric} {exact}");
        }
    }

    #[test]
    fn frequency_quantities_at_zero() {
        let s = scales(0.2, -12.0);
        let q = freq_quantities(0.0, 0.0, &s.medium).unwrap();
        assert!((q.m0 - s.mass).norm() < 1e-12 * s.mass.norm());
        assert!(q.lambda0.norm() < 1e-12);
        assert!((q.alpha00 - s.alpha).norm() < 1e-12 * s.alpha.norm());
        let ratio = (q.gamma_factor * q.gamma_factor / s.cos4theta()).re;
        let go = s.medium.g / s.medium.omega;
        assert!((ratio - (1.0 + go.powi(-2)).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dispersive_potential() {
        let s = scales(0.2, -12.0);
        for r in [0.0, 0.5 * s.r_b, 2.0 * s.r_b] {
            let a = effective_potential_freq(r, 0.0, &s).unwrap();
            let b = effective_potential(r, &s);
            assert!((a - b).norm() < 1e-14 * b.norm());
        }
        let band = s.medium.omega.powi(2) / s.gamma_c.norm();
        for k in 0..=20 {
            let r = s.r_b * (0.5 + 4.5 * k as f64 / 20.0);
            let w0 = effective_potential(r, &s);
            for w in [-0.1 * band, 0.1 * band] {
                let w1 = effective_potential_freq(r, w, &s).unwrap();
                assert!((w1 - w0).norm() <= 0.05 * w0.norm(), "{r} {w}");
            }
        }
    }

    #[test]
    fn nystrom_without_interaction_is_free() {
        let s = scales(0.2, -12.0);
        let grid = Grid1D::new(40.0, 512, Boundary::Dirichlet).unwrap();
        let opts = NystromOptions { interaction: false, ..Default::default() };
        let g = solve_green_nystrom(&s, &grid, C64::new(0.05, 0.0), &opts).unwrap();
        let kap = kappa(s.reduced_mass(), C64::new(0.05, 0.0)).unwrap();
        let x = grid.points();
        assert_eq!(g.get(3, 300), green_kernel(x[3] - x[300], s.reduced_mass(), kap));
    }

    #[test]
    fn nystrom_is_symmetric_and_rejects_small_grids() {
        let s = scales(0.2, -12.0);
        let grid = Grid1D::new(40.0, 512, Boundary::Dirichlet).unwrap();
        let g = solve_green_nystrom(&s, &grid, C64::new(0.02, 0.0), &NystromOptions::default()).unwrap();
        assert!(g.symmetry_error() < 1e-10, "{}", g.symmetry_error());
        assert!(g.residual < 1e-8);
        let small = Grid1D::new(10.0, 512, Boundary::Dirichlet).unwrap();
        assert!(matches!(
            solve_green_nystrom(&s, &small, C64::new(0.02, 0.0), &NystromOptions::default()),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn free_flat_state_is_stationary() {
        let s = scales(0.2, -12.0);
        let grid = Grid1D::new(40.0, 256, Boundary::Dirichlet).unwrap();
        let opts = SynthesisOptions { interaction: false, ..Default::default() };
        let out = synthesize_ee(&s, InitialProfile::Flat, &[5.0, 20.0], &grid, &opts).unwrap();
        for v in &out.values {
            for z in v {
                assert!((z - 1.0).norm() < 1e-3, "{z}");
            }
        }
    }
}
