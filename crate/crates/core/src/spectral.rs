//! Complex spectrum of the relative-motion Hamiltonian
//! `H = -(1/2m) ∂² + W(r) sin⁴θ` on a finite grid (reduced units).
//!
//! Eigenvalues of `H` are reported as energies in units of `2Ω²/Δ`, i.e.
//! multiplied by `sign(Δ)`. With that convention the bound state for
//! `Δ < 0` sits at `Re E < 0`, matching the closed form `E0 = -βη²/2`.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ClosedFormTerms;
use crate::dynamics::{Frame, PairField};
use crate::params::{derive_scales, DerivedScales, MediumParams};
use crate::quad::fixed_rule;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Laplacian {
    /// Three-point central differences.
    Difference,
    /// Exact `-k²` on the periodic grid (dense circulant).
    Fourier,
}

/// Uniform grid `r_i = r_min + i h`, `i = 0..n`, with `r_min = -L/2`.
///
/// For Dirichlet boundaries the wave function vanishes at `r_min - h` and
/// `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub spacing: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(length: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if n_points < 64 || n_points % 2 == 1 {
            return Err(Error::Grid(format!("need an even number of at least 64 points, got {n_points}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Grid(format!("grid length must be positive, got {length}")));
        }
        Ok(Grid1D {
            r_min: -0.5 * length,
            r_max: 0.5 * length,
            n_points,
            spacing: length / n_points as f64,
            boundary,
        })
    }

    pub fn length(&self) -> f64 {
        self.r_max - self.r_min
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.r(i)).collect()
    }

    /// Index of `r = 0`.
    pub fn origin(&self) -> usize {
        self.n_points / 2
    }

    /// Grid wave numbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        fft_wavenumbers(self.n_points, self.spacing)
    }
}

pub(crate) fn fft_wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|j| if j <= n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
        .collect()
}

/// Cell average of `W(x) sin⁴θ` over `[r - h/2, r + h/2]`, so that the
/// discrete potential keeps `∫ W dr` on coarse grids.
pub fn cell_potential(s: &DerivedScales, grid: &Grid1D) -> Vec<C64> {
    let h = grid.spacing;
    let pieces = (h / 0.2).ceil().max(1.0) as usize;
    let sub = h / pieces as f64;
    let factor = s.sin4theta();
    grid.points()
        .into_iter()
        .map(|r| {
            let a = r - 0.5 * h;
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..pieces {
                let lo = a + k as f64 * sub;
                acc += fixed_rule(|x| s.reduced_w(x), lo, lo + sub);
            }
            acc * (factor / h)
        })
        .collect()
}

/// Size estimate `1/Re(βη)` used by the classifier and grid diagnostics.
pub fn size_estimate(s: &DerivedScales) -> f64 {
    match ClosedFormTerms::new(s.xi, s.loss_ratio()) {
        Ok(t) => t.r_b.unwrap_or(3.0 / (PI * s.xi * s.xi)),
        Err(_) => 3.0 / (PI * s.xi * s.xi),
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: Mat<C64>,
    /// Reduced mass used for the kinetic term.
    pub mass: C64,
    pub warnings: Vec<String>,
}

/// Dense matrix `-(1/2m) D2 + diag(potential)`.
pub fn assemble(grid: &Grid1D, mass: C64, potential: &[C64], laplacian: Laplacian) -> Result<Mat<C64>> {
    let n = grid.n_points;
    if potential.len() != n {
        return Err(Error::Grid(format!("potential has {} entries for {n} points", potential.len())));
    }
    let kinetic = -1.0 / (2.0 * mass);
    let h2 = grid.spacing * grid.spacing;
    let mut m = Mat::<C64>::zeros(n, n);
    match laplacian {
        Laplacian::Difference => {
            for i in 0..n {
                m[(i, i)] = kinetic * (-2.0 / h2) + potential[i];
                if i + 1 < n {
                    m[(i, i + 1)] = kinetic / h2;
                    m[(i + 1, i)] = kinetic / h2;
                }
            }
            if grid.boundary == Boundary::Periodic {
                m[(0, n - 1)] = kinetic / h2;
                m[(n - 1, 0)] = kinetic / h2;
            }
        }
        Laplacian::Fourier => {
            if grid.boundary != Boundary::Periodic {
                return Err(Error::Grid("the Fourier Laplacian needs a periodic grid".into()));
            }
            // Circulant row c_d = (1/n) Σ_k (-k²) cos(k d h); the Nyquist
            // mode contributes with its real cosine.
            let k = grid.wavenumbers();
            let row: Vec<f64> = (0..n)
                .map(|d| {
                    k.iter().map(|&kj| -kj * kj * (kj * d as f64 * grid.spacing).cos()).sum::<f64>() / n as f64
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    let d = i.abs_diff(j);
                    m[(i, j)] = kinetic * row[d];
                }
                m[(i, i)] += potential[i];
            }
        }
    }
    Ok(m)
}

/// Effective Hamiltonian of a medium on `grid`.
pub fn build_hamiltonian(grid: &Grid1D, s: &DerivedScales, laplacian: Laplacian) -> Result<Hamiltonian> {
    let potential = cell_potential(s, grid);
    let mass = s.reduced_mass();
    let matrix = assemble(grid, mass, &potential, laplacian)?;
    let mut warnings = Vec::new();
    let r_b = size_estimate(s);
    if grid.spacing > r_b / 10.0 {
        warnings.push(format!("grid spacing {:.3} exceeds a tenth of the bound-state size {:.3}", grid.spacing, r_b));
    }
    Ok(Hamiltonian { matrix, mass, warnings })
}

/// Eigenpair with the eigenvector normalised to unit L2 norm (`∫|ψ|² dr = 1`
/// on the grid) and `ψ` real positive at its largest-modulus point nearest
/// the origin.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
}

/// Relative residual threshold for accepted eigenpairs.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Full eigendecomposition with per-pair residual check.
pub fn eigen_spectrum(h: &Mat<C64>) -> Result<Vec<EigenPair>> {
    eigen_spectrum_scaled(h, 1.0, None)
}

fn eigen_spectrum_scaled(h: &Mat<C64>, dr: f64, origin: Option<usize>) -> Result<Vec<EigenPair>> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::Grid(format!("matrix is {}x{}", n, h.ncols())));
    }
    let evd = h.eigen().map_err(|e| Error::Eigen { index: 0, reason: format!("{e:?}") })?;
    let u = evd.U();
    let s = evd.S().column_vector();
    let norm_h = h.norm_l2().max(f64::MIN_POSITIVE);
    let hu = h * u;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let value = s[j];
        let mut vector: Vec<C64> = (0..n).map(|i| u[(i, j)]).collect();
        let mut residual = 0.0;
        let mut vnorm = 0.0;
        for i in 0..n {
            residual += (hu[(i, j)] - value * vector[i]).norm_sqr();
            vnorm += vector[i].norm_sqr();
        }
        if !value.re.is_finite() || !value.im.is_finite() || residual.sqrt() > RESIDUAL_TOL * norm_h * vnorm.sqrt() {
            return Err(Error::Eigen {
                index: j,
                reason: format!("residual {:.3e} above tolerance", residual.sqrt() / vnorm.sqrt()),
            });
        }
        normalise(&mut vector, dr, origin);
        out.push(EigenPair { value, vector });
    }
    Ok(out)
}

fn normalise(v: &mut [C64], dr: f64, origin: Option<usize>) {
    let norm = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dr).sqrt();
    let anchor = match origin {
        Some(o) if v[o].norm() > 1e-8 * v.iter().fold(0.0f64, |a, z| a.max(z.norm())) => v[o],
        _ => *v.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(&C64::new(1.0, 0.0)),
    };
    let phase = if anchor.norm() > 0.0 { anchor.conj() / anchor.norm() } else { C64::new(1.0, 0.0) };
    let scale = phase / norm;
    v.iter_mut().for_each(|z| *z *= scale);
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenState {
    /// Energy in units of `2Ω²/Δ` (eigenvalue times `sign Δ`).
    pub energy: C64,
    /// Raw eigenvalue of `H` in units of `2Ω²/|Δ|`.
    pub eigenvalue: C64,
    #[serde(skip)]
    pub profile: Vec<C64>,
    /// `∫ ψ² dr` (complex-symmetric pseudo-norm).
    pub pseudo_norm: C64,
    pub localization: f64,
    pub is_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub states: Vec<EigenState>,
    pub xi: f64,
    /// `Ω²/(2|Γ|)` in units of `2Ω²/|Δ|`.
    pub energy_window: f64,
    pub n_bound: usize,
    pub r_loc: f64,
    pub localization_threshold: f64,
    #[serde(skip)]
    pub grid: Grid1D,
}

impl SpectrumResult {
    /// Bound states ordered by increasing `|Re E|`... lowest first.
    pub fn bound_states(&self) -> Vec<&EigenState> {
        self.states.iter().filter(|s| s.is_bound).collect()
    }

    /// The most deeply bound state.
    pub fn ground(&self) -> Option<&EigenState> {
        self.bound_states().into_iter().next()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub localization_threshold: f64,
    /// Override of `r_loc`; by default `min(0.4 L, 10 r_b)`.
    pub r_loc: Option<f64>,
    /// Override of the energy window (units of `2Ω²/|Δ|`).
    pub energy_window: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { localization_threshold: 0.99, r_loc: None, energy_window: None }
    }
}

/// `Ω²/(2|Γ|)` in units of `2Ω²/|Δ|`, i.e. `|Δ|/(4|Γ|)`.
pub fn energy_window(s: &DerivedScales) -> f64 {
    s.medium.delta.abs() / (4.0 * s.gamma_c.norm())
}

pub fn classify_states(
    pairs: Vec<EigenPair>,
    grid: &Grid1D,
    s: &DerivedScales,
    options: &ClassifyOptions,
) -> SpectrumResult {
    let window = options.energy_window.unwrap_or_else(|| energy_window(s));
    let r_loc = options.r_loc.unwrap_or_else(|| (0.4 * grid.length()).min(10.0 * size_estimate(s)));
    let r = grid.points();
    let sign = s.sign_delta();
    let mut states: Vec<EigenState> = pairs
        .into_iter()
        .map(|p| {
            let total: f64 = p.vector.iter().map(|z| z.norm_sqr()).sum();
            let inside: f64 = p.vector.iter().zip(&r).filter(|(_, &x)| x.abs() <= r_loc).map(|(z, _)| z.norm_sqr()).sum();
            let localization = if total > 0.0 { inside / total } else { 0.0 };
            let pseudo_norm = p.vector.iter().map(|z| z * z).sum::<C64>() * grid.spacing;
            let energy = p.value * sign;
            EigenState {
                energy,
                eigenvalue: p.value,
                profile: p.vector,
                pseudo_norm,
                localization,
                is_bound: localization >= options.localization_threshold && energy.norm() < window,
            }
        })
        .collect();
    states.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re).then(a.energy.im.total_cmp(&b.energy.im)));
    let n_bound = states.iter().filter(|s| s.is_bound).count();
    SpectrumResult {
        states,
        xi: s.xi,
        energy_window: window,
        n_bound,
        r_loc,
        localization_threshold: options.localization_threshold,
        grid: *grid,
    }
}

/// Grid and discretisation choice for a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub length: Option<f64>,
    pub n_points: Option<usize>,
    pub boundary: Boundary,
    pub laplacian: Laplacian,
    pub classify: ClassifyOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            length: None,
            n_points: None,
            boundary: Boundary::Periodic,
            laplacian: Laplacian::Difference,
            classify: ClassifyOptions::default(),
        }
    }
}

/// Default point count of a spectrum grid.
pub const DEFAULT_POINTS: usize = 1024;

/// Default grid: `400 R_B` for `ξ ≤ 0.5` (stretched to 16 bound-state sizes
/// when that is larger) and `40 R_B` for larger `ξ`.
pub fn default_grid(s: &DerivedScales, options: &SpectrumOptions) -> Result<Grid1D> {
    let length = options.length.unwrap_or_else(|| {
        if s.xi <= 0.5 {
            400f64.max(16.0 * size_estimate(s))
        } else if s.xi < 1.0 {
            (400.0 - 360.0 * (s.xi - 0.5) / 0.5).max(16.0 * size_estimate(s))
        } else {
            40.0
        }
    });
    Grid1D::new(length, options.n_points.unwrap_or(DEFAULT_POINTS), options.boundary)
}

/// Builds, diagonalises and classifies the spectrum of one medium.
pub fn compute_spectrum(s: &DerivedScales, options: &SpectrumOptions) -> Result<SpectrumResult> {
    let grid = default_grid(s, options)?;
    let h = build_hamiltonian(&grid, s, options.laplacian)?;
    let pairs = eigen_spectrum_scaled(&h.matrix, grid.spacing, Some(grid.origin()))?;
    Ok(classify_states(pairs, &grid, s, &options.classify))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub xi: f64,
    pub n_bound: usize,
    pub bound_energies: Vec<C64>,
    pub localizations: Vec<f64>,
}

/// Bound-state energies over a list of `ξ` at fixed `Δ/γ` and `g/Ω`.
pub fn spectrum_vs_xi(
    xi_list: &[f64],
    delta_over_gamma: f64,
    g_over_omega: f64,
    options: &SpectrumOptions,
) -> Result<Vec<SpectrumRow>> {
    xi_list
        .par_iter()
        .map(|&xi| {
            let p = MediumParams::from_reduced(xi, delta_over_gamma, g_over_omega, 1.0)?;
            let s = derive_scales(&p)?;
            let spec = compute_spectrum(&s, options)?;
            let bound = spec.bound_states();
            Ok(SpectrumRow {
                xi,
                n_bound: spec.n_bound,
                bound_energies: bound.iter().map(|b| b.energy).collect(),
                localizations: bound.iter().map(|b| b.localization).collect(),
            })
        })
        .collect()
}

/// Four-component molecule profile built from a bound eigenstate:
/// `cos²θ (cos²θ, -cosθ, -cosθ, W/V) ψ₀`.
///
/// The spin-spin factor `1/(1 + αV)` is the saturated form of
/// `1/(1 - (Δ/2Ω²) V)`; the two agree for `γ ≪ |Δ|` and the former stays
/// finite at the Δ > 0 resonance.
pub fn molecule_profile(psi0: &EigenState, grid: &Grid1D, s: &DerivedScales) -> Result<PairField> {
    if !psi0.is_bound {
        return Err(Error::NoBoundState("molecule profile requested for an unbound state".into()));
    }
    let axis = grid.points();
    let c2 = s.cos2theta;
    let c = c2.sqrt();
    let alpha = s.reduced_alpha();
    let mut field = PairField::zeros(axis.clone(), Frame::RelativeK0);
    for (i, &r) in axis.iter().enumerate() {
        let psi = psi0.profile[i] * c2;
        let saturation = if r == 0.0 { C64::new(0.0, 0.0) } else { 1.0 / (1.0 + alpha * s.reduced_bare(r)) };
        field.ee[i] = psi * c2;
        field.es[i] = -psi * c;
        field.se[i] = -psi * c;
        field.ss[i] = psi * saturation;
    }
    Ok(field)
}
