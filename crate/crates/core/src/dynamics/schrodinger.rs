//! Crank-Nicolson integration of `i∂ₜψ = [−∂²/(2m) + W sin⁴θ] ψ` in reduced units.

use serde::{Deserialize, Serialize};

use super::relative::InitialProfile;
use super::TimeSeries;
use crate::linalg::Tridiagonal;
use crate::spectral::{cell_potential, Boundary, Grid1D};
use crate::{DerivedScales, Error, Result, C64, I};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchrodingerConfig {
    pub length: f64,
    pub n_points: usize,
    pub boundary: Boundary,
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
    pub initial: InitialProfile,
    pub interaction: bool,
    pub series_stride: usize,
}

impl Default for SchrodingerConfig {
    fn default() -> Self {
        SchrodingerConfig {
            length: 400.0,
            n_points: 4096,
            boundary: Boundary::Periodic,
            dt: 0.05,
            t_max: 20.0,
            snapshot_times: vec![20.0],
            initial: InitialProfile::Flat,
            interaction: true,
            series_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarSnapshot {
    pub time: f64,
    pub psi: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarResult {
    pub axis: Vec<f64>,
    pub snapshots: Vec<ScalarSnapshot>,
    /// `ψ(r = 0, t)`.
    pub origin: TimeSeries,
    pub dt: f64,
}

/// Evolves the effective scalar equation for the medium `s`.
pub fn evolve_schrodinger(s: &DerivedScales, cfg: &SchrodingerConfig) -> Result<ScalarResult> {
    let grid = Grid1D::new(cfg.length, cfg.n_points, cfg.boundary)?;
    let potential = if cfg.interaction { cell_potential(s, &grid) } else { vec![C64::new(0.0, 0.0); grid.n_points] };
    let psi0 = grid.points().into_iter().map(|r| C64::new(cfg.initial.amplitude(r), 0.0)).collect();
    evolve_scalar(&grid, s.reduced_mass(), &potential, psi0, cfg)
}

/// Crank-Nicolson propagation of `psi0` for an arbitrary mass and potential.
pub fn evolve_scalar(
    grid: &Grid1D,
    mass: C64,
    potential: &[C64],
    psi0: Vec<C64>,
    cfg: &SchrodingerConfig,
) -> Result<ScalarResult> {
    let n = grid.n_points;
    if potential.len() != n || psi0.len() != n {
        return Err(Error::Grid("potential and initial state must match the grid".into()));
    }
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::Unstable(format!("time step must be positive, got {}", cfg.dt)));
    }
    if cfg.series_stride == 0 {
        return Err(Error::InvalidParameter("series_stride must be at least 1".into()));
    }
    if let Some(t) = cfg.snapshot_times.iter().find(|&&t| !(0.0..=cfg.t_max + 1e-12).contains(&t)) {
        return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, t_max]")));
    }
    let steps = if cfg.t_max > 0.0 { (cfg.t_max / cfg.dt).ceil() as usize } else { 0 };
    let dt = if steps > 0 { cfg.t_max / steps as f64 } else { cfg.dt };
    let kin = -1.0 / (2.0 * mass * grid.spacing * grid.spacing);
    let half = 0.5 * I * dt;
    // (1 + i dt H/2) ψⁿ⁺¹ = (1 − i dt H/2) ψⁿ
    let off = half * kin;
    let lower = vec![off; n];
    let upper = vec![off; n];
    let diag: Vec<C64> = potential.iter().map(|&v| 1.0 + half * (v - 2.0 * kin)).collect();
    let periodic = grid.boundary == Boundary::Periodic;
    let system = Tridiagonal::new(&lower, &diag, &upper, periodic);

    let origin = grid.origin();
    let mut psi = psi0;
    let mut snap: Vec<(usize, usize)> =
        cfg.snapshot_times.iter().enumerate().map(|(k, &t)| (((t / dt).round() as usize).min(steps), k)).collect();
    snap.sort();
    let mut snapshots: Vec<Option<ScalarSnapshot>> = vec![None; snap.len()];
    let (mut times, mut values) = (vec![0.0], vec![psi[origin]]);
    let mut next = 0;
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for step in 0..=steps {
        if step > 0 {
            for i in 0..n {
                let left = if i > 0 { psi[i - 1] } else if periodic { psi[n - 1] } else { C64::new(0.0, 0.0) };
                let right = if i + 1 < n { psi[i + 1] } else if periodic { psi[0] } else { C64::new(0.0, 0.0) };
                rhs[i] = (2.0 - diag[i]) * psi[i] - off * (left + right);
            }
            system.solve(&mut rhs);
            std::mem::swap(&mut psi, &mut rhs);
            if !psi[origin].is_finite() {
                return Err(Error::Unstable(format!("non-finite amplitude after {step} steps")));
            }
            if step % cfg.series_stride == 0 || step == steps {
                times.push(step as f64 * dt);
                values.push(psi[origin]);
            }
        }
        while next < snap.len() && snap[next].0 == step {
            snapshots[snap[next].1] = Some(ScalarSnapshot { time: step as f64 * dt, psi: psi.clone() });
            next += 1;
        }
    }
    Ok(ScalarResult {
        axis: grid.points(),
        snapshots: snapshots.into_iter().map(|s| s.expect("every snapshot step is visited")).collect(),
        origin: TimeSeries::new(times, values),
        dt,
    })
}
