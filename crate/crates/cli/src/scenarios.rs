//! One pipeline per scenario. Each writes its files through the [`Sink`]
//! and returns a scalar summary for the manifest.

use std::f64::consts::PI;

use polariton_core::analytic::{
    bound_energy_series, bound_size, crossover_time, ee_closed_form, ClosedFormTerms, EESplit,
};
use polariton_core::dynamics::{
    bunching_metric, evolve_pair_2d, evolve_relative, evolve_schrodinger, molecule_preparation, InitialProfile,
    Pair2dConfig, PairField, RelativeConfig, SchrodingerConfig, TimeSeries,
};
use polariton_core::greens::{freq_quantities, locate_pole, pole_scan, synthesize_ee, NystromOptions, SynthesisOptions};
use polariton_core::homodyne::{
    bound_phase, continuum_phase, quadrature_filter, separate_components, unwrapped_phase, FitOptions,
};
use polariton_core::io::{complex_headers, components_table, field2d_table, time_series_table, Table};
use polariton_core::params::{
    bound_state_condition, derive_scales, dimensionality_check, energy_bound, max_bound_states, polariton_properties,
    single_state_threshold,
};
use polariton_core::spectral::{compute_spectrum, spectrum_vs_xi, Boundary, Grid1D, SpectrumOptions};
use polariton_core::{DerivedScales, Error, MediumParams, ParamSpec, C64};
use serde_json::json;

use crate::config::{Figure, Numerics, Scenario, Solver};
use crate::report::{Failure, Sink, Summary};

pub struct Context {
    pub spec: ParamSpec,
    pub medium: MediumParams,
    pub scales: DerivedScales,
    pub numerics: Numerics,
}

impl Context {
    pub fn new(spec: ParamSpec, numerics: Numerics) -> Result<Self, Failure> {
        let medium = spec.to_medium().map_err(|e| Failure::config(e.to_string()))?;
        let scales = derive_scales(&medium).map_err(|e| Failure::config(e.to_string()))?;
        Ok(Context { spec, medium, scales, numerics })
    }

    /// Same medium at another detuning `Δ/γ`. In reduced mode `ξ` is kept.
    fn at_detuning(&self, delta_over_gamma: f64) -> Result<DerivedScales, Failure> {
        let medium = match self.spec {
            ParamSpec::Reduced(r) => {
                MediumParams::from_reduced(r.xi, delta_over_gamma, r.g_over_omega, r.omega_over_gamma)?
            }
            ParamSpec::Physical(p) => MediumParams { delta: delta_over_gamma * p.gamma, ..p },
        };
        Ok(derive_scales(&medium)?)
    }

    fn delta_over_gamma(&self) -> f64 {
        self.medium.delta / self.medium.gamma
    }
}

/// Record written to `derived_scales.json` for every scenario.
pub fn derived_record(ctx: &Context) -> serde_json::Value {
    let s = &ctx.scales;
    let mut v = serde_json::to_value(s).expect("scales serialise");
    let map = v.as_object_mut().expect("object");
    map.insert("params".into(), serde_json::to_value(ctx.spec).expect("params serialise"));
    map.insert("medium".into(), serde_json::to_value(ctx.medium).expect("medium serialises"));
    map.insert("units".into(), serde_json::to_value(s.units()).expect("units serialise"));
    map.insert(
        "reduced".into(),
        json!({
            "loss_ratio": s.loss_ratio(),
            "sign_Delta": s.sign_delta(),
            "m": s.reduced_mass(),
            "alpha": s.reduced_alpha(),
            "c": s.reduced_c(),
            "cos4theta": s.cos4theta(),
            "sin4theta": s.sin4theta(),
        }),
    );
    v
}

pub fn run(scenario: Scenario, ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    match scenario {
        Scenario::Derive => derive(ctx, sink),
        Scenario::Spectrum => spectrum(ctx, sink),
        Scenario::EvolveRel => evolve_rel(ctx, sink),
        Scenario::Evolve2d => evolve_2d(ctx, sink, Pair2dConfig::default()),
        Scenario::Analytic => analytic(ctx, sink),
        Scenario::Greens => greens(ctx, sink),
        Scenario::Homodyne => homodyne(ctx, sink),
        Scenario::Figure(f) => match f {
            Figure::F1c => evolve_2d(ctx, sink, weak_lab_geometry()),
            Figure::F1d => evolve_2d(ctx, sink, strong_lab_geometry()),
            Figure::F2 => figure_potential(ctx, sink),
            Figure::F4a => figure_spectrum(ctx, sink),
            Figure::F4b => figure_ground_state(ctx, sink),
            Figure::F5 => figure_compare(ctx, sink),
            Figure::F6 => figure_molecule(ctx, sink),
            Figure::F7 => figure_time_domain(ctx, sink, false),
            Figure::F8 => figure_time_domain(ctx, sink, true),
            Figure::F9 => figure_evolution_map(ctx, sink),
        },
    }
}

fn tag(t: f64) -> String {
    format!("{t}")
}

fn split_row(r: f64, e: &EESplit) -> Vec<f64> {
    let b = e.bound.unwrap_or_default();
    vec![r, e.total.re, e.total.im, b.re, b.im, e.continuum.re, e.continuum.im]
}

fn split_table(first: &str) -> Table {
    let mut h = vec![first.to_string()];
    for name in ["EE", "EE_bound", "EE_continuum"] {
        h.extend(complex_headers(name));
    }
    Table::new(h)
}

/// `n` points spread evenly over `(0, t_max]`.
fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

/// `n` points on `[-r_max, r_max]`.
fn symmetric_axis(r_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| -r_max + 2.0 * r_max * k as f64 / (n - 1) as f64).collect()
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn derive(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let s = &ctx.scales;
    let count = max_bound_states(s)?;
    let condition = bound_state_condition(s)?;
    let dimensionality = match dimensionality_check(s) {
        Ok(d) => Some(d),
        Err(Error::Incomplete(_)) => None,
        Err(e) => return Err(e.into()),
    };
    sink.json(
        "properties.json",
        &json!({
            "polariton": polariton_properties(&ctx.medium)?,
            "bound_state_condition": condition,
            "bound_state_count": count,
            "single_state_threshold": single_state_threshold(),
            "energy_bound": energy_bound(s)?,
            "dimensionality": dimensionality,
        }),
    )?;
    let n = ctx.numerics.r_points.unwrap_or(501);
    let r_max = ctx.numerics.r_max.unwrap_or(5.0);
    let mut t = Table::new(["r", "V", "Re_W", "Im_W"]);
    for k in 0..n {
        let r = r_max * k as f64 / (n - 1).max(1) as f64;
        let w = s.reduced_w(r);
        t.push(vec![r, if r > 0.0 { s.reduced_bare(r) } else { f64::INFINITY }, w.re, w.im]);
    }
    sink.csv("potential.csv", &t)?;
    Ok(Summary::from([
        ("xi".into(), s.xi),
        ("L_abs".into(), s.l_abs),
        ("R_B".into(), s.r_b),
        ("n_bound_max".into(), count.n_bound_max as f64),
        ("single_state".into(), if count.single_state { 1.0 } else { 0.0 }),
    ]))
}

fn spectrum_options(n: &Numerics) -> SpectrumOptions {
    SpectrumOptions {
        length: n.length,
        n_points: n.n_points,
        boundary: n.boundary.unwrap_or(Boundary::Periodic),
        ..SpectrumOptions::default()
    }
}

fn spectrum(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let res = compute_spectrum(&ctx.scales, &spectrum_options(&ctx.numerics))?;
    let mut t = Table::new(["index", "Re_E", "Im_E", "localization", "bound"]);
    for (k, st) in res.states.iter().enumerate() {
        t.push(vec![k as f64, st.energy.re, st.energy.im, st.localization, if st.is_bound { 1.0 } else { 0.0 }]);
    }
    sink.csv("spectrum.csv", &t)?;
    sink.json(
        "spectrum.json",
        &json!({
            "n_bound": res.n_bound,
            "energy_window": res.energy_window,
            "r_loc": res.r_loc,
            "localization_threshold": res.localization_threshold,
            "grid": res.grid,
            "bound_states": res.bound_states(),
        }),
    )?;
    let ground = res.ground();
    if let Some(g) = ground {
        sink.csv("ground_state.csv", &polariton_core::io::profile_table(&res.grid.points(), &g.profile, "psi"))?;
    }
    Ok(Summary::from([
        ("n_bound".into(), res.n_bound as f64),
        ("Re_E0".into(), opt(ground.map(|g| g.energy.re))),
        ("Im_E0".into(), opt(ground.map(|g| g.energy.im))),
    ]))
}

fn relative_config(n: &Numerics, base: RelativeConfig) -> RelativeConfig {
    let t_max = n.t_max.or_else(|| n.times.as_ref().and_then(|t| t.iter().cloned().reduce(f64::max))).unwrap_or(base.t_max);
    RelativeConfig {
        length: n.length.unwrap_or(base.length),
        n_points: n.n_points.unwrap_or(base.n_points),
        dt: n.dt.unwrap_or(base.dt),
        t_max,
        snapshot_times: n.times.clone().unwrap_or_else(|| if base.snapshot_times.is_empty() { vec![] } else { vec![t_max] }),
        initial: n.initial.unwrap_or(base.initial),
        series_stride: n.series_stride.unwrap_or(base.series_stride),
        ..base
    }
}

/// Rows of `table` whose first column satisfies `|r| ≤ r_max`, thinned by `stride`.
fn clip(table: Table, r_max: Option<f64>, stride: usize) -> Table {
    let mut out = Table::new(table.headers.clone());
    let keep = table.rows.into_iter().filter(|row| r_max.is_none_or(|m| row[0].abs() <= m));
    for row in keep.step_by(stride.max(1)) {
        out.push(row);
    }
    out
}

fn evolve_rel(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let cfg = relative_config(&ctx.numerics, RelativeConfig::default());
    let res = evolve_relative(&ctx.scales, &cfg)?;
    let origin = res.normalized_origin();
    sink.csv("ee_origin.csv", &time_series_table(&origin))?;
    let stride = ctx.numerics.output_stride.unwrap_or(1);
    for snap in &res.snapshots {
        let t = clip(components_table(snap)?, ctx.numerics.r_max, stride);
        sink.csv(&format!("components_t{}.csv", tag(snap.time)), &t)?;
    }
    let mut summary = Summary::new();
    summary.insert("abs_EE_origin_final".into(), opt(origin.values.last().map(|z| z.norm())));
    if let Some(last) = res.snapshots.last() {
        summary.insert("bunching_metric".into(), bunching_metric(last)?);
    }
    Ok(summary)
}

/// Lab-frame geometry of the weakly interacting panel (lengths in `L_abs`).
pub fn weak_lab_geometry() -> Pair2dConfig {
    Pair2dConfig {
        length: 60.0,
        n_points: 512,
        boundary: 6.0,
        pulse_width: 3.0,
        pulse_center: -12.0,
        dt: 0.05,
        t_max: 26.0,
        snapshot_times: vec![26.0],
        ..Pair2dConfig::default()
    }
}

/// Strongly interacting panel: a wider box so that 5-10 `R_B` is resolved.
pub fn strong_lab_geometry() -> Pair2dConfig {
    Pair2dConfig {
        length: 200.0,
        n_points: 512,
        boundary: 0.0,
        pulse_width: 8.0,
        pulse_center: -50.0,
        dt: 0.1,
        t_max: 150.0,
        snapshot_times: vec![150.0],
        ..Pair2dConfig::default()
    }
}

fn evolve_2d(ctx: &Context, sink: &mut Sink, base: Pair2dConfig) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let t_max = n.t_max.or_else(|| n.times.as_ref().and_then(|t| t.iter().cloned().reduce(f64::max))).unwrap_or(base.t_max);
    let cfg = Pair2dConfig {
        length: n.length.unwrap_or(base.length),
        n_points: n.n_points.unwrap_or(base.n_points),
        boundary: n.medium_start.unwrap_or(base.boundary),
        ramp_width: n.ramp_width.unwrap_or(base.ramp_width),
        pulse_width: n.pulse_width.unwrap_or(base.pulse_width),
        pulse_center: n.pulse_center.unwrap_or(base.pulse_center),
        dt: n.dt.unwrap_or(base.dt),
        t_max,
        snapshot_times: n.times.clone().unwrap_or_else(|| vec![t_max]),
        ..base
    };
    let res = evolve_pair_2d(&ctx.scales, &cfg)?;
    let stride = n.output_stride.unwrap_or(2);
    for snap in &res.snapshots {
        sink.csv(&format!("ee2d_t{}.csv", tag(snap.time)), &field2d_table(snap, stride)?)?;
    }
    let last = res.snapshots.last().ok_or_else(|| Failure::config("no snapshot times requested"))?;
    Ok(Summary::from([
        ("bunching_metric".into(), bunching_metric(last)?),
        ("L_abs_per_R_B".into(), 1.0 / ctx.scales.xi),
    ]))
}

fn closed_form_terms(s: &DerivedScales) -> Result<ClosedFormTerms, Failure> {
    Ok(ClosedFormTerms::from_scales(s)?)
}

fn analytic(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let terms = closed_form_terms(&ctx.scales)?;
    let t0 = crossover_time(&terms).ok();
    let n = &ctx.numerics;
    let t_max = n.t_max.unwrap_or_else(|| t0.map_or(200.0, |t| (4.0 * t).ceil()));
    let mut series = split_table("t");
    for t in time_grid(t_max, n.t_points.unwrap_or(400)) {
        series.push(split_row(t, &ee_closed_form(0.0, t, &terms)?));
    }
    sink.csv("closed_form_origin.csv", &series)?;
    let axis = symmetric_axis(n.r_max.unwrap_or(60.0), n.r_points.unwrap_or(601));
    for &t in n.times.as_deref().unwrap_or(&[20.0]) {
        let mut profile = split_table("r");
        for &r in &axis {
            profile.push(split_row(r, &ee_closed_form(r, t, &terms)?));
        }
        sink.csv(&format!("profile_t{}.csv", tag(t)), &profile)?;
    }
    let size = bound_size(&terms).ok();
    sink.json(
        "terms.json",
        &json!({
            "terms": terms,
            "bound_energy": bound_energy_series(&terms),
            "bound_size": size,
            "crossover_time": t0,
            "continuum_phase": continuum_phase(&terms),
        }),
    )?;
    Ok(Summary::from([
        ("Re_E0".into(), terms.e0.re),
        ("Im_E0".into(), terms.e0.im),
        ("t0".into(), opt(t0)),
        ("phi_c".into(), continuum_phase(&terms)),
    ]))
}

fn greens(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let s = &ctx.scales;
    let grid = Grid1D::new(n.length.unwrap_or(100.0), n.n_points.unwrap_or(1024), n.boundary.unwrap_or(Boundary::Dirichlet))?;
    let e0 = ClosedFormTerms::from_scales(s).ok().map(|t| t.e0);
    // Frequencies are conjugate to t under H, so the pole sits at E0 · sign Δ.
    let expected = e0.map(|e| e * s.sign_delta());
    let (lo, hi) = match (n.omega_min, n.omega_max, expected) {
        (Some(lo), Some(hi), _) => (lo, hi),
        (lo, hi, Some(p)) => {
            let (a, b) = (0.3 * p.re, 3.0 * p.re);
            (lo.unwrap_or(a.min(b)), hi.unwrap_or(a.max(b)))
        }
        _ => return Err(Failure::config("no closed-form pole for this medium; set numerics.omega_min and omega_max")),
    };
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Failure::config(format!("omega_min {lo} must lie below omega_max {hi}")));
    }
    let points = n.omega_points.unwrap_or(201).max(2);
    let omegas: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let nystrom = NystromOptions::default();
    let scan = pole_scan(s, &grid, &omegas, &nystrom)?;
    let mut t = Table::new(["omega", "norm"]);
    for p in &scan {
        t.push(vec![p.omega, p.norm]);
    }
    sink.csv("pole_scan.csv", &t)?;
    let pole = locate_pole(s, &grid, lo, hi, &nystrom)?;
    sink.json(
        "pole.json",
        &json!({
            "pole": pole,
            "closed_form_E0": e0,
            "closed_form_pole": expected,
            "grid": grid,
            "free_propagator_at_zero": freq_quantities(0.0, 0.0, &ctx.medium).ok(),
        }),
    )?;
    let times = n.times.clone().unwrap_or_else(|| vec![20.0]);
    let syn = synthesize_ee(s, n.initial.unwrap_or(InitialProfile::Flat), &times, &grid, &SynthesisOptions::default())?;
    for (k, &tk) in syn.times.iter().enumerate() {
        let table = polariton_core::io::profile_table(&syn.axis, &syn.values[k], "EE");
        sink.csv(&format!("synthesis_t{}.csv", tag(tk)), &clip(table, n.r_max, 1))?;
    }
    Ok(Summary::from([
        ("pole".into(), pole),
        ("closed_form_pole".into(), opt(expected.map(|e| e.re))),
        ("synthesis_convergence".into(), syn.convergence),
        ("frequencies".into(), syn.frequencies as f64),
    ]))
}

/// `EE(0, t)/cos⁴θ` from the requested integrator.
fn origin_series(n: &Numerics, s: &DerivedScales, terms: &ClosedFormTerms, t_max: f64) -> Result<TimeSeries, Failure> {
    match n.solver.unwrap_or(Solver::Scalar) {
        Solver::Analytic => {
            let times = time_grid(t_max, n.t_points.unwrap_or(2000));
            let values = times.iter().map(|&t| Ok(ee_closed_form(0.0, t, terms)?.total)).collect::<Result<_, Failure>>()?;
            Ok(TimeSeries::new(times, values))
        }
        Solver::Scalar => {
            let cfg = SchrodingerConfig {
                length: n.length.unwrap_or(1600.0),
                n_points: n.n_points.unwrap_or(8192),
                boundary: n.boundary.unwrap_or(Boundary::Periodic),
                dt: n.dt.unwrap_or(0.05),
                t_max,
                snapshot_times: vec![],
                initial: n.initial.unwrap_or(InitialProfile::Flat),
                series_stride: n.series_stride.unwrap_or(20),
                ..SchrodingerConfig::default()
            };
            Ok(evolve_schrodinger(s, &cfg)?.origin)
        }
        Solver::Relative => {
            let cfg = RelativeConfig {
                length: n.length.unwrap_or(1600.0),
                n_points: n.n_points.unwrap_or(8192),
                dt: n.dt.unwrap_or(1e-2),
                t_max,
                snapshot_times: vec![],
                initial: n.initial.unwrap_or(InitialProfile::Flat),
                series_stride: n.series_stride.unwrap_or(100),
                ..RelativeConfig::default()
            };
            Ok(evolve_relative(s, &cfg)?.normalized_origin())
        }
    }
}

fn default_t_max(n: &Numerics, terms: &ClosedFormTerms) -> f64 {
    n.t_max.unwrap_or_else(|| crossover_time(terms).map_or(200.0, |t| (4.0 * t).ceil()))
}

fn homodyne(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let terms = closed_form_terms(&ctx.scales)?;
    let series = origin_series(n, &ctx.scales, &terms, default_t_max(n, &terms))?;
    sink.csv("series.csv", &time_series_table(&series))?;
    let phi = continuum_phase(&terms);
    let q = quadrature_filter(&series, phi);
    let mut qt = Table::new(["t", "Q"]);
    for (t, v) in q.times.iter().zip(&q.values) {
        qt.push(vec![*t, *v]);
    }
    sink.csv("quadrature.csv", &qt)?;
    let opts = FitOptions {
        t_min: n.fit_t_min,
        max_residual: n.max_residual.unwrap_or(FitOptions::default().max_residual),
        ..FitOptions::default()
    };
    let fit = separate_components(&series, &terms, &opts)?;
    let mut h = vec!["t".to_string()];
    h.extend(complex_headers("bound_fit"));
    h.extend(complex_headers("continuum_fit"));
    let mut ct = Table::new(h);
    for &t in series.times.iter().filter(|&&t| t > 0.0) {
        let (b, c) = (fit.bound(t), fit.continuum(t));
        ct.push(vec![t, b.re, b.im, c.re, c.im]);
    }
    sink.csv("components.csv", &ct)?;
    let rate_error = (fit.gamma_b() - terms.gamma_b).abs() / terms.gamma_b.abs();
    sink.json(
        "fit.json",
        &json!({
            "fit": fit,
            "closed_form_E0": terms.e0,
            "continuum_phase": phi,
            "relative_rate_error": rate_error,
            "relative_energy_error": (fit.e0_fit.re - terms.e0.re).abs() / terms.e0.re.abs(),
        }),
    )?;
    Ok(Summary::from([
        ("Re_E0_fit".into(), fit.e0_fit.re),
        ("Im_E0_fit".into(), fit.e0_fit.im),
        ("residual".into(), fit.residual),
        ("phi_c_fit".into(), fit.phi_c),
        ("relative_rate_error".into(), rate_error),
    ]))
}

fn figure_potential(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let d = ctx.delta_over_gamma().abs();
    let (pos, neg) = (ctx.at_detuning(d)?, ctx.at_detuning(-d)?);
    let n = ctx.numerics.r_points.unwrap_or(301);
    let r_max = ctx.numerics.r_max.unwrap_or(3.0);
    let mut t = Table::new(["r", "Re_W_pos", "Im_W_pos", "Re_W_neg", "Im_W_neg"]);
    let mut minimum = (f64::INFINITY, 0.0);
    for k in 0..n {
        let r = r_max * k as f64 / (n - 1).max(1) as f64;
        let (wp, wn) = (pos.reduced_w(r), neg.reduced_w(r));
        if wp.re < minimum.0 {
            minimum = (wp.re, r);
        }
        t.push(vec![r, wp.re, wp.im, wn.re, wn.im]);
    }
    sink.csv("potential.csv", &t)?;
    Ok(Summary::from([("Re_W_pos_min".into(), minimum.0), ("r_of_Re_W_pos_min".into(), minimum.1)]))
}

fn figure_spectrum(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let xi_list = n.xi_list.clone().unwrap_or_else(|| (1..=20).map(|k| k as f64 / 10.0).collect());
    let g_over_omega = ctx.medium.g / ctx.medium.omega;
    let rows = spectrum_vs_xi(&xi_list, ctx.delta_over_gamma(), g_over_omega, &spectrum_options(n))?;
    let mut states = Table::new(["xi", "n", "Re_E", "Im_E", "localization"]);
    let mut law = Table::new(["xi", "n_bound", "Re_E0", "Im_E0", "Re_E0_law", "Re_E0_exact", "Im_E0_exact"]);
    let loss = ctx.scales.loss_ratio();
    for row in &rows {
        for (k, (e, l)) in row.bound_energies.iter().zip(&row.localizations).enumerate() {
            states.push(vec![row.xi, k as f64, e.re, e.im, *l]);
        }
        let exact = ClosedFormTerms::new(row.xi, loss)?.e0;
        let ground = row.bound_energies.first();
        law.push(vec![
            row.xi,
            row.n_bound as f64,
            opt(ground.map(|e| e.re)),
            opt(ground.map(|e| e.im)),
            -PI * PI * row.xi * row.xi / 9.0,
            exact.re,
            exact.im,
        ]);
    }
    sink.csv("bound_energies.csv", &states)?;
    sink.csv("ground_energy_law.csv", &law)?;
    Ok(Summary::from([
        ("points".into(), rows.len() as f64),
        ("max_n_bound".into(), rows.iter().map(|r| r.n_bound).max().unwrap_or(0) as f64),
    ]))
}

fn figure_ground_state(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let res = compute_spectrum(&ctx.scales, &spectrum_options(&ctx.numerics))?;
    let ground = res.ground().ok_or_else(|| Failure::numerical("no bound state in the spectrum"))?;
    let axis = res.grid.points();
    let origin = res.grid.origin();
    let scale = ground.profile[origin].norm();
    let size = (PI / 3.0) / (ctx.scales.xi * ctx.scales.xi);
    let mut t = Table::new(["r", "Re_psi", "Im_psi", "abs_psi_scaled", "exponential"]);
    for (r, z) in axis.iter().zip(&ground.profile) {
        t.push(vec![*r, z.re, z.im, z.norm() / scale, (-r.abs() / size).exp()]);
    }
    sink.csv("ground_state.csv", &clip(t, ctx.numerics.r_max, 1))?;
    Ok(Summary::from([
        ("Re_E0".into(), ground.energy.re),
        ("Im_E0".into(), ground.energy.im),
        ("size".into(), size),
        ("localization".into(), ground.localization),
    ]))
}

fn figure_compare(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let terms = closed_form_terms(&ctx.scales)?;
    let t = n.times.as_ref().and_then(|v| v.first().copied()).unwrap_or(20.0);
    let base = RelativeConfig { t_max: t, snapshot_times: vec![t], ..RelativeConfig::default() };
    let cfg = RelativeConfig { snapshot_times: vec![t], t_max: t, ..relative_config(n, base) };
    let res = evolve_relative(&ctx.scales, &cfg)?;
    let field = &res.snapshots[0];
    let r_max = n.r_max.unwrap_or(100.0);
    let header = |name: &str| {
        let [re, im] = complex_headers(name);
        Table::new(["r".to_string(), re, im, format!("abs2_{name}")])
    };
    let mut numeric = header("EE");
    let (mut bound, mut cont, mut sum) = (header("EE"), header("EE"), header("EE"));
    let (mut peak, mut worst) = (0.0f64, 0.0f64);
    for (&r, z) in field.axis.iter().zip(&field.ee) {
        if r.abs() > r_max {
            continue;
        }
        let z = z / res.cos4theta;
        let e = ee_closed_form(r, t, &terms)?;
        let b = e.bound.unwrap_or_default();
        numeric.push(vec![r, z.re, z.im, z.norm_sqr()]);
        bound.push(vec![r, b.re, b.im, b.norm_sqr()]);
        cont.push(vec![r, e.continuum.re, e.continuum.im, e.continuum.norm_sqr()]);
        sum.push(vec![r, e.total.re, e.total.im, e.total.norm_sqr()]);
        peak = peak.max(e.total.norm());
        worst = worst.max((z.norm() - e.total.norm()).abs());
    }
    sink.csv("ee_numeric.csv", &numeric)?;
    sink.csv("ee_analytic_bound.csv", &bound)?;
    sink.csv("ee_analytic_cont.csv", &cont)?;
    sink.csv("ee_analytic_sum.csv", &sum)?;
    Ok(Summary::from([("max_abs_deviation_over_peak".into(), worst / peak), ("t".into(), t)]))
}

fn molecule_table(field: &PairField, s: &DerivedScales, r_max: f64) -> Result<Table, Failure> {
    let full = components_table(field)?;
    let mut headers = full.headers.clone();
    headers.extend(complex_headers("WEE"));
    let mut t = Table::new(headers);
    for (row, z) in full.rows.into_iter().zip(&field.ee) {
        if row[0].abs() > r_max {
            continue;
        }
        let w = s.reduced_w(row[0]) * z;
        let mut row = row;
        row.extend([w.re, w.im]);
        t.push(row);
    }
    Ok(t)
}

fn figure_molecule(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let t_prep = n.times.as_ref().and_then(|v| v.first().copied()).unwrap_or(20.0);
    let cfg = RelativeConfig {
        length: n.length.unwrap_or(400.0),
        n_points: n.n_points.unwrap_or(2048),
        dt: n.dt.unwrap_or(5e-3),
        ..RelativeConfig::default()
    };
    let d = ctx.delta_over_gamma().abs();
    let r_max = n.r_max.unwrap_or(10.0);
    let mut summary = Summary::new();
    for (name, sign) in [("negative", -1.0), ("positive", 1.0)] {
        let s = ctx.at_detuning(sign * d)?;
        let field = molecule_preparation(&s, &cfg, t_prep)?;
        sink.csv(&format!("molecule_{name}.csv"), &molecule_table(&field, &s, r_max)?)?;
        let at = |r: f64| {
            let i = field.axis.iter().enumerate().min_by(|a, b| (a.1 - r).abs().total_cmp(&(b.1 - r).abs())).unwrap().0;
            field.ss[i].norm() / field.ee[i].norm()
        };
        summary.insert(format!("ss_blockade_suppression_{name}"), at(5.0) / at(0.0));
    }
    Ok(summary)
}

fn panel_tag(d: f64) -> String {
    format!("delta{d}")
}

/// Two detunings, each with closed-form amplitudes (or phases) of the bound
/// and continuum terms at `r = 0` plus a numerical series.
fn figure_time_domain(ctx: &Context, sink: &mut Sink, phases: bool) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let special = -1.0 / (3.0 * PI / 16.0).tan();
    let panels = n.detunings.clone().unwrap_or_else(|| if phases { vec![special, -12.0] } else { vec![-1.5, -12.0] });
    let mut summary = Summary::new();
    for d in panels {
        let s = ctx.at_detuning(d)?;
        let terms = closed_form_terms(&s)?;
        let t0 = crossover_time(&terms).ok();
        let t_max = default_t_max(n, &terms);
        let times = time_grid(t_max, n.t_points.unwrap_or(1000));
        let label = panel_tag(d);
        let table = if phases {
            let mut t = Table::new(["t", "phase_bound", "phase_continuum", "phase_total", "phase_difference"]);
            let totals: Vec<C64> = times.iter().map(|&t| Ok(ee_closed_form(0.0, t, &terms)?.total)).collect::<Result<_, Failure>>()?;
            let total_phase = unwrapped_phase(&TimeSeries::new(times.clone(), totals));
            let phi_c = continuum_phase(&terms);
            for (&t_k, &p) in times.iter().zip(&total_phase) {
                let b = bound_phase(t_k, &terms);
                t.push(vec![t_k, b, phi_c, p, b - phi_c]);
            }
            t
        } else {
            let mut t = Table::new(["t", "abs_bound", "abs_continuum", "abs_total"]);
            for &t_k in &times {
                let e = ee_closed_form(0.0, t_k, &terms)?;
                t.push(vec![t_k, e.bound.unwrap_or_default().norm(), e.continuum.norm(), e.total.norm()]);
            }
            t
        };
        let stem = if phases { "phases" } else { "amplitudes" };
        sink.csv(&format!("{stem}_{label}.csv"), &table)?;
        if n.solver != Some(Solver::Analytic) {
            let series = origin_series(n, &s, &terms, t_max)?;
            let mut t = Table::new(["t", "Re_EE", "Im_EE", "abs_EE", "phase_EE"]);
            for ((t_k, z), p) in series.times.iter().zip(&series.values).zip(unwrapped_phase(&series)) {
                t.push(vec![*t_k, z.re, z.im, z.norm(), p]);
            }
            sink.csv(&format!("numeric_{label}.csv"), &t)?;
        }
        summary.insert(format!("t0_{label}"), opt(t0));
        summary.insert(format!("gamma_b_{label}"), terms.gamma_b);
    }
    Ok(summary)
}

fn figure_evolution_map(ctx: &Context, sink: &mut Sink) -> Result<Summary, Failure> {
    let n = &ctx.numerics;
    let times = n.times.clone().unwrap_or_else(|| (0..=20).map(|k| 4.0 * k as f64).collect());
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let cfg = RelativeConfig {
        length: n.length.unwrap_or(800.0),
        n_points: n.n_points.unwrap_or(8192),
        dt: n.dt.unwrap_or(1e-2),
        t_max,
        snapshot_times: times,
        initial: n.initial.unwrap_or(InitialProfile::Flat),
        ..RelativeConfig::default()
    };
    let res = evolve_relative(&ctx.scales, &cfg)?;
    let r_max = n.r_max.unwrap_or(50.0);
    let stride = n.output_stride.unwrap_or(4).max(1);
    let mut t = Table::new(["t", "r", "abs_EE", "arg_EE"]);
    for snap in &res.snapshots {
        let rows = snap.axis.iter().zip(&snap.ee).filter(|(r, _)| r.abs() <= r_max).step_by(stride);
        for (&r, z) in rows {
            let z = z / res.cos4theta;
            t.push(vec![snap.time, r, z.norm(), z.arg()]);
        }
    }
    sink.csv("ee_rt.csv", &t)?;
    let last = res.snapshots.last().ok_or_else(|| Failure::config("no snapshot times requested"))?;
    Ok(Summary::from([("abs_EE_origin_final".into(), last.ee[last.axis.len() / 2].norm() / res.cos4theta)]))
}
