//! Relative-coordinate evolution at zero centre-of-mass momentum.
//!
//! With `K = 0` the EE amplitude is not advected and ES/SE move with `±c`
//! along `r = z₁ − z₂`. Advection and atom-light coupling are translation
//! invariant, so their joint propagator is an exact 4×4 exponential per
//! Fourier mode. The van der Waals shift on SS is applied in position
//! space in a symmetric split step.

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{dark_pair_weights, local_generator, Frame, PairField, TimeSeries};
use crate::linalg::{apply4, expm4, Mat4};
use crate::spectral::{Boundary, Grid1D};
use crate::{DerivedScales, Error, Result, C64, I};

/// Spatial profile `f(r)` of the initial pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Flat,
    Gaussian { width: f64, center: f64 },
    /// Flat dark-polariton pair with SS removed inside the blockade,
    /// `SS → SS (1 − exp(−r⁶))`.
    DspPairMasked,
}

impl InitialProfile {
    pub fn amplitude(&self, r: f64) -> f64 {
        match *self {
            InitialProfile::Flat | InitialProfile::DspPairMasked => 1.0,
            InitialProfile::Gaussian { width, center } => (-0.5 * ((r - center) / width).powi(2)).exp(),
        }
    }

    /// Value of `f` at `|r| → ∞`.
    pub fn asymptote(&self) -> f64 {
        match self {
            InitialProfile::Flat | InitialProfile::DspPairMasked => 1.0,
            InitialProfile::Gaussian { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelativeConfig {
    /// Box length in units of R_B.
    pub length: f64,
    pub n_points: usize,
    /// Time step in reduced units.
    pub dt: f64,
    pub t_max: f64,
    /// Times at which full snapshots are stored.
    pub snapshot_times: Vec<f64>,
    pub initial: InitialProfile,
    /// Project the initial photon pair onto the dark polariton pair.
    pub dark_projection: bool,
    pub interaction: bool,
    /// The interaction is capped at `v_cap_factor / dt`.
    pub v_cap_factor: f64,
    /// Record `EE(0, t)` every this many steps.
    pub series_stride: usize,
}

impl Default for RelativeConfig {
    fn default() -> Self {
        RelativeConfig {
            length: 400.0,
            n_points: 4096,
            dt: 1e-3,
            t_max: 20.0,
            snapshot_times: vec![20.0],
            initial: InitialProfile::Flat,
            dark_projection: true,
            interaction: true,
            v_cap_factor: 0.5,
            series_stride: 10,
        }
    }
}

impl RelativeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Unstable(format!("time step must be positive, got {}", self.dt)));
        }
        if self.dt > 0.05 {
            return Err(Error::Unstable(format!(
                "time step {} too coarse to resolve the interaction (cap {:.1} E_u)",
                self.dt,
                self.v_cap_factor / self.dt
            )));
        }
        if !(self.t_max >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        if !(self.v_cap_factor > 0.0 && self.v_cap_factor <= 1.5) {
            return Err(Error::Unstable(format!("v_cap_factor must lie in (0, 1.5], got {}", self.v_cap_factor)));
        }
        if self.series_stride == 0 {
            return Err(Error::InvalidParameter("series_stride must be at least 1".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| !(0.0..=self.t_max + 1e-12).contains(&t)) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, t_max]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelativeResult {
    pub snapshots: Vec<PairField>,
    /// `EE(r = 0, t)`, not normalised.
    pub origin: TimeSeries,
    pub dt: f64,
    pub v_cap: f64,
    pub cos4theta: f64,
}

impl RelativeResult {
    /// `EE(0, t)/cos⁴θ`.
    pub fn normalized_origin(&self) -> TimeSeries {
        let values = self.origin.values.iter().map(|z| z / self.cos4theta).collect();
        TimeSeries::new(self.origin.times.clone(), values)
    }
}

/// Initial four-component field on `grid`.
pub fn initial_field(s: &DerivedScales, grid: &Grid1D, profile: InitialProfile, dark: bool) -> PairField {
    let axis = grid.points();
    let mut field = PairField::zeros(axis.clone(), Frame::RelativeK0);
    let weights = if dark || profile == InitialProfile::DspPairMasked {
        dark_pair_weights(s)
    } else {
        [1.0, 0.0, 0.0, 0.0]
    };
    for (i, &r) in axis.iter().enumerate() {
        let f = profile.amplitude(r);
        field.ee[i] = C64::new(weights[0] * f, 0.0);
        field.es[i] = C64::new(weights[1] * f, 0.0);
        field.se[i] = C64::new(weights[2] * f, 0.0);
        let mask = if profile == InitialProfile::DspPairMasked { 1.0 - (-r.powi(6)).exp() } else { 1.0 };
        field.ss[i] = C64::new(weights[3] * f * mask, 0.0);
    }
    field
}

struct Propagator {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    modes: Vec<Mat4>,
    half_kick: Option<Vec<C64>>,
    scratch: Vec<C64>,
}

impl Propagator {
    fn new(s: &DerivedScales, grid: &Grid1D, dt: f64, v_cap: Option<f64>) -> Self {
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let c = s.reduced_c();
        let local = local_generator(s, s.medium.g, s.medium.g, 0.0);
        let modes = grid
            .wavenumbers()
            .into_iter()
            .enumerate()
            .map(|(j, k)| {
                // The Nyquist mode has no mirror partner; advecting it would break exchange symmetry.
                let k = if j == n / 2 { 0.0 } else { k };
                let mut a = local;
                a[1][1] += c * k;
                a[2][2] -= c * k;
                a.iter_mut().flatten().for_each(|z| *z *= -I * dt);
                expm4(&a)
            })
            .collect();
        let half_kick = v_cap.map(|cap| {
            let h = grid.spacing;
            grid.points()
                .into_iter()
                .map(|r| {
                    let x = if r == 0.0 { 0.5 * h } else { r.abs() };
                    let v = s.reduced_bare(x).min(cap);
                    (-I * v * (0.5 * dt)).exp()
                })
                .collect()
        });
        let scratch = vec![C64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        Propagator { fwd, inv, modes, half_kick, scratch }
    }

    fn kick(&self, ss: &mut [C64]) {
        if let Some(k) = &self.half_kick {
            ss.iter_mut().zip(k).for_each(|(z, w)| *z *= w);
        }
    }

    fn step(&mut self, f: &mut PairField) {
        self.kick(&mut f.ss);
        let n = f.ee.len();
        for comp in [&mut f.ee, &mut f.es, &mut f.se, &mut f.ss] {
            self.fwd.process_with_scratch(comp, &mut self.scratch);
        }
        for j in 0..n {
            let y = apply4(&self.modes[j], [f.ee[j], f.es[j], f.se[j], f.ss[j]]);
            f.ee[j] = y[0];
            f.es[j] = y[1];
            f.se[j] = y[2];
            f.ss[j] = y[3];
        }
        let norm = 1.0 / n as f64;
        for comp in [&mut f.ee, &mut f.es, &mut f.se, &mut f.ss] {
            self.inv.process_with_scratch(comp, &mut self.scratch);
            comp.iter_mut().for_each(|z| *z *= norm);
        }
        self.kick(&mut f.ss);
    }
}

/// Propagates `field` (which must live on `grid`) from its current time to
/// `field.time + t_span`, storing snapshots and the origin series.
fn run(s: &DerivedScales, grid: &Grid1D, cfg: &RelativeConfig, mut field: PairField) -> Result<RelativeResult> {
    cfg.validate()?;
    let n_steps = (cfg.t_max / cfg.dt).ceil().max(1.0) as usize;
    let dt = if cfg.t_max > 0.0 { cfg.t_max / n_steps as f64 } else { cfg.dt };
    let v_cap = cfg.v_cap_factor / dt;
    let mut prop = Propagator::new(s, grid, dt, cfg.interaction.then_some(v_cap));
    let origin = grid.origin();
    let mut snap_steps: Vec<(usize, usize)> = cfg
        .snapshot_times
        .iter()
        .enumerate()
        .map(|(k, &t)| (((t / dt).round() as usize).min(n_steps), k))
        .collect();
    snap_steps.sort();
    let mut snapshots: Vec<Option<PairField>> = vec![None; cfg.snapshot_times.len()];
    let (mut times, mut values) = (vec![field.time], vec![field.ee[origin]]);
    let t0 = field.time;
    let steps = if cfg.t_max > 0.0 { n_steps } else { 0 };
    let mut next = 0;
    for step in 0..=steps {
        if step > 0 {
            prop.step(&mut field);
            field.time = t0 + step as f64 * dt;
            if step % cfg.series_stride == 0 || step == steps {
                times.push(field.time);
                values.push(field.ee[origin]);
            }
            if !field.ee[origin].is_finite() {
                return Err(Error::Unstable(format!("non-finite amplitude at t = {}", field.time)));
            }
        }
        while next < snap_steps.len() && snap_steps[next].0 == step {
            snapshots[snap_steps[next].1] = Some(field.clone());
            next += 1;
        }
    }
    Ok(RelativeResult {
        snapshots: snapshots.into_iter().map(|f| f.expect("every snapshot step is visited")).collect(),
        origin: TimeSeries::new(times, values),
        dt,
        v_cap,
        cos4theta: s.cos4theta(),
    })
}

/// Evolves a pair in the relative coordinate at `K = 0` on a periodic box.
pub fn evolve_relative(s: &DerivedScales, cfg: &RelativeConfig) -> Result<RelativeResult> {
    cfg.validate()?;
    let grid = Grid1D::new(cfg.length, cfg.n_points, Boundary::Periodic)?;
    let field = initial_field(s, &grid, cfg.initial, cfg.dark_projection);
    run(s, &grid, cfg, field)
}

/// Continues the evolution of an existing relative-frame field.
pub fn continue_relative(s: &DerivedScales, cfg: &RelativeConfig, field: PairField) -> Result<RelativeResult> {
    if field.frame != Frame::RelativeK0 {
        return Err(Error::InvalidParameter("field is not in the relative frame".into()));
    }
    let n = field.axis.len();
    let length = field.axis[1] - field.axis[0];
    let grid = Grid1D::new(length * n as f64, n, Boundary::Periodic)?;
    run(s, &grid, cfg, field)
}

/// Prepares a bound pair by evolving a masked dark-polariton pair for `t_prep`.
pub fn molecule_preparation(s: &DerivedScales, cfg: &RelativeConfig, t_prep: f64) -> Result<PairField> {
    let cfg = RelativeConfig {
        t_max: t_prep,
        snapshot_times: vec![t_prep],
        initial: InitialProfile::DspPairMasked,
        dark_projection: true,
        ..cfg.clone()
    };
    let mut res = evolve_relative(s, &cfg)?;
    Ok(res.snapshots.pop().expect("one snapshot requested"))
}
