//! Two photons entering a semi-infinite medium, on the `(z₁, z₂)` plane.
//!
//! Strang splitting: exact advection in Fourier space (EE along both axes,
//! ES along `z₁`, SE along `z₂`) around an exact local 4×4 exponential of
//! the atom-light coupling plus the interaction on SS. The coupling rises
//! smoothly (tanh) at the medium entrance; a step would leave a kink in the
//! photon envelope whose spectral ringing pollutes the whole plane.

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{local_generator, Frame, PairField};
use crate::linalg::{apply4, expm4, Mat4};
use crate::spectral::fft_wavenumbers;
use crate::{DerivedScales, Error, Result, C64, I};

/// Geometry and integration settings; lengths are in units of `L_abs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pair2dConfig {
    pub length: f64,
    pub n_points: usize,
    /// Start of the medium; `z` below it is vacuum.
    pub boundary: f64,
    /// Width `w` of the entrance ramp `g(z) = g (1 + tanh((z − boundary)/w))/2`.
    pub ramp_width: f64,
    /// Gaussian amplitude width `σ` of each incoming photon.
    pub pulse_width: f64,
    pub pulse_center: f64,
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub interaction: bool,
    /// With `false` the coupling vanishes everywhere (pure vacuum).
    pub medium: bool,
    /// Edge intensity `|EE|²`, relative to the peak, above which the run is
    /// declared truncated.
    pub edge_tolerance: f64,
}

impl Default for Pair2dConfig {
    fn default() -> Self {
        Pair2dConfig {
            length: 60.0,
            n_points: 512,
            boundary: 6.0,
            ramp_width: 1.0,
            pulse_width: 3.0,
            pulse_center: -12.0,
            dt: 0.05,
            t_max: 80.0,
            snapshot_times: vec![80.0],
            interaction: true,
            medium: true,
            edge_tolerance: 1e-6,
        }
    }
}

impl Pair2dConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 64 || !self.n_points.is_power_of_two() {
            return Err(Error::Grid(format!("2-D grid needs a power of two ≥ 64 points, got {}", self.n_points)));
        }
        if !(self.length > 0.0) || !(self.pulse_width > 0.0) || !(self.ramp_width > 0.0) {
            return Err(Error::InvalidParameter("length, pulse width and ramp width must be positive".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Unstable(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| !(0.0..=self.t_max + 1e-12).contains(&t)) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, t_max]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Pair2dResult {
    /// Snapshots with `axis` in units of R_B.
    pub snapshots: Vec<PairField>,
    /// Axis in units of `L_abs`.
    pub axis_l_abs: Vec<f64>,
    pub dt: f64,
}

struct Fft2 {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Fft2 {
    fn rows(&self, data: &mut [C64], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        data.par_chunks_mut(self.n).for_each(|row| plan.process(row));
    }

    fn transpose(&self, data: &mut [C64], buf: &mut [C64]) {
        let n = self.n;
        buf.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, z) in row.iter_mut().enumerate() {
                *z = data[i * n + j];
            }
        });
        data.copy_from_slice(buf);
    }

    /// Multiplies by `phase[k₁]` along rows-index and/or `phase[k₂]` along the contiguous index.
    fn advect(&self, data: &mut [C64], buf: &mut [C64], phase: &[C64], along1: bool, along2: bool) {
        let n = self.n;
        let scale = 1.0 / n as f64;
        if along2 {
            self.rows(data, true);
            data.par_chunks_mut(n).for_each(|row| row.iter_mut().zip(phase).for_each(|(z, p)| *z *= p * scale));
            self.rows(data, false);
        }
        if along1 {
            self.transpose(data, buf);
            self.rows(data, true);
            data.par_chunks_mut(n).for_each(|row| row.iter_mut().zip(phase).for_each(|(z, p)| *z *= p * scale));
            self.rows(data, false);
            self.transpose(data, buf);
        }
    }
}

fn edge_ratio(field: &[C64], n: usize) -> f64 {
    let max = field.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for k in 0..n {
        for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
            edge = edge.max(field[idx].norm_sqr());
        }
    }
    edge / max
}

/// Evolves a pair of Gaussian photons entering the medium at `cfg.boundary`.
pub fn evolve_pair_2d(s: &DerivedScales, cfg: &Pair2dConfig) -> Result<Pair2dResult> {
    cfg.validate()?;
    let n = cfg.n_points;
    let h_abs = cfg.length / n as f64;
    let axis_l_abs: Vec<f64> = (0..n).map(|i| -0.5 * cfg.length + i as f64 * h_abs).collect();
    // Reduced units: lengths in R_B, time in 1/E_u.
    let to_rb = s.l_abs / s.r_b;
    let h = h_abs * to_rb;
    let axis: Vec<f64> = axis_l_abs.iter().map(|z| z * to_rb).collect();

    let steps = if cfg.t_max > 0.0 { (cfg.t_max / cfg.dt).ceil() as usize } else { 0 };
    let dt = if steps > 0 { cfg.t_max / steps as f64 } else { cfg.dt };

    let g = if cfg.medium { s.medium.g } else { 0.0 };
    let coupling: Vec<f64> =
        axis_l_abs.iter().map(|&z| 0.5 * g * (1.0 + ((z - cfg.boundary) / cfg.ramp_width).tanh())).collect();
    let cache: Vec<Mat4> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let sep = (i as f64 - j as f64).abs() * h;
            let v = if cfg.interaction { s.reduced_bare(sep.max(0.5 * h)).min(1e8) } else { 0.0 };
            let mut a = local_generator(s, coupling[i], coupling[j], v);
            a.iter_mut().flatten().for_each(|z| *z *= -I * (0.5 * dt));
            expm4(&a)
        })
        .collect();

    let c = s.reduced_c();
    let phase: Vec<C64> = fft_wavenumbers(n, h)
        .into_iter()
        .enumerate()
        .map(|(j, k)| if j == n / 2 { C64::new(1.0, 0.0) } else { (-I * c * k * dt).exp() })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = Fft2 { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), n };

    let sigma = cfg.pulse_width * to_rb;
    let z0 = cfg.pulse_center * to_rb;
    let pulse: Vec<f64> = axis.iter().map(|&z| (-0.5 * ((z - z0) / sigma).powi(2)).exp()).collect();
    let mut field = PairField::zeros(axis.clone(), Frame::Lab2d);
    for i in 0..n {
        for j in 0..n {
            field.ee[i * n + j] = C64::new(pulse[i] * pulse[j], 0.0);
        }
    }
    if edge_ratio(&field.ee, n) > cfg.edge_tolerance {
        return Err(Error::Truncation { time: 0.0 });
    }

    let local_half = |f: &mut PairField| {
        let PairField { ee, es, se, ss, .. } = f;
        ee.par_chunks_mut(n)
            .zip(es.par_chunks_mut(n))
            .zip(se.par_chunks_mut(n))
            .zip(ss.par_chunks_mut(n))
            .enumerate()
            .for_each(|(i, (((ee, es), se), ss))| {
                for j in 0..n {
                    let y = apply4(&cache[i * n + j], [ee[j], es[j], se[j], ss[j]]);
                    ee[j] = y[0];
                    es[j] = y[1];
                    se[j] = y[2];
                    ss[j] = y[3];
                }
            });
    };

    let mut snap: Vec<(usize, usize)> =
        cfg.snapshot_times.iter().enumerate().map(|(k, &t)| (((t / dt).round() as usize).min(steps), k)).collect();
    snap.sort();
    let mut snapshots: Vec<Option<PairField>> = vec![None; snap.len()];
    let mut buf = vec![C64::new(0.0, 0.0); n * n];
    let mut next = 0;
    for step in 0..=steps {
        if step > 0 {
            local_half(&mut field);
            fft.advect(&mut field.ee, &mut buf, &phase, true, true);
            fft.advect(&mut field.es, &mut buf, &phase, true, false);
            fft.advect(&mut field.se, &mut buf, &phase, false, true);
            local_half(&mut field);
            field.time = step as f64 * dt;
            if step % 20 == 0 || step == steps {
                let ratio = edge_ratio(&field.ee, n);
                if !ratio.is_finite() {
                    return Err(Error::Unstable(format!("non-finite amplitude at t = {}", field.time)));
                }
                if ratio > cfg.edge_tolerance {
                    return Err(Error::Truncation { time: field.time });
                }
            }
        }
        while next < snap.len() && snap[next].0 == step {
            snapshots[snap[next].1] = Some(field.clone());
            next += 1;
        }
    }
    Ok(Pair2dResult {
        snapshots: snapshots.into_iter().map(|f| f.expect("every snapshot step is visited")).collect(),
        axis_l_abs,
        dt,
    })
}
