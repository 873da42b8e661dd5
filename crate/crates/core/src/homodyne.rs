//! Phases of the pair amplitude at zero separation and separation of its
//! bound and continuum parts.
//!
//! Detection is modelled as an ideal quadrature projection of the complex
//! amplitude onto a local-oscillator phase, without noise or mode mismatch.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic::ClosedFormTerms;
use crate::dynamics::TimeSeries;
use crate::{Error, Result, C64, I};

/// Large-time phase of the continuum term, `−3π/4 + (4/3) arctan(γ/|Δ|)`.
pub fn continuum_phase(terms: &ClosedFormTerms) -> f64 {
    -0.75 * PI + 4.0 / 3.0 * terms.loss_ratio.atan()
}

/// Unwrapped phase of the bound term `2 exp(−iβη²t/2)`, i.e. `−Re(βη²) t/2`.
pub fn bound_phase(t: f64, terms: &ClosedFormTerms) -> f64 {
    -0.5 * terms.beta_eta2().re * t
}

/// Removes `2π` jumps larger than `π` between consecutive samples.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let jump = p + offset - out[k - 1];
            if jump > PI {
                offset -= 2.0 * PI * ((jump + PI) / (2.0 * PI)).floor();
            } else if jump < -PI {
                offset += 2.0 * PI * ((-jump + PI) / (2.0 * PI)).floor();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Unwrapped `arg` of a complex series.
pub fn unwrapped_phase(series: &TimeSeries) -> Vec<f64> {
    unwrap(&series.values.iter().map(|z| z.arg()).collect::<Vec<_>>())
}

/// Real time series, e.g. a homodyne quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Quadrature `Q(t) = Im[z(t) exp(−iφ_LO)]`.
///
/// With `φ_LO` equal to the continuum phase the diffusive part drops out at
/// large times and `Q` follows the bound term.
pub fn quadrature_filter(series: &TimeSeries, phi_lo: f64) -> RealSeries {
    let lo = (-I * phi_lo).exp();
    RealSeries { times: series.times.clone(), values: series.values.iter().map(|z| (z * lo).im).collect() }
}

/// Model `A_b exp(−iλt) + A_c t^(−1/2) + A_c2 t^(−3/2)` fitted to a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentFit {
    #[serde(rename = "A_b")]
    pub a_b: C64,
    /// Fitted bound energy in the convention `E0 = −βη²/2`, i.e. `−λ`.
    #[serde(rename = "E0_fit")]
    pub e0_fit: C64,
    #[serde(rename = "A_c")]
    pub a_c: C64,
    /// Coefficient of the next-order `t^(−3/2)` continuum correction.
    #[serde(rename = "A_c2")]
    pub a_c2: C64,
    /// `arg A_c`.
    pub phi_c: f64,
    /// Relative L2 misfit.
    pub residual: f64,
    pub t_window: (f64, f64),
}

impl ComponentFit {
    /// Amplitude decay rate of the fitted bound term.
    pub fn gamma_b(&self) -> f64 {
        self.e0_fit.im
    }

    pub fn bound(&self, t: f64) -> C64 {
        self.a_b * (I * self.e0_fit * t).exp()
    }

    pub fn continuum(&self, t: f64) -> C64 {
        self.a_c / t.sqrt() + self.a_c2 / (t * t.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Samples before `t_min` are ignored. By default `max(2, 1/|E0|)`: the
    /// continuum only takes its asymptotic form once `|E0| t ≳ 1`.
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    /// Fits with a larger relative residual are rejected.
    pub max_residual: f64,
    /// Include the `t^(−3/2)` correction of the continuum. Without it the
    /// fitted continuum phase lags its asymptote by about 0.2 rad at `t ~ t₀`.
    pub correction: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { t_min: None, t_max: None, max_residual: 0.1, correction: true }
    }
}

/// Best complex amplitudes `(A_b, A_c, A_c2)` for a fixed `λ` and the
/// squared misfit. With `correction` false `A_c2` is pinned to zero.
fn project(t: &[f64], z: &[C64], lambda: C64, correction: bool) -> ([C64; 3], f64) {
    let m = if correction { 3 } else { 2 };
    let basis = |tk: f64| [(-I * lambda * tk).exp(), C64::new(tk.powf(-0.5), 0.0), C64::new(tk.powf(-1.5), 0.0)];
    let mut gram = [[C64::new(0.0, 0.0); 3]; 3];
    let mut rhs = [C64::new(0.0, 0.0); 3];
    for (&tk, &zk) in t.iter().zip(z) {
        let b = basis(tk);
        for i in 0..m {
            for j in 0..m {
                gram[i][j] += b[i].conj() * b[j];
            }
            rhs[i] += b[i].conj() * zk;
        }
    }
    // Gaussian elimination with partial pivoting on the m×m normal equations.
    for col in 0..m {
        let pivot = (col..m).max_by(|&a, &b| gram[a][col].norm().total_cmp(&gram[b][col].norm())).expect("non-empty");
        if !(gram[pivot][col].norm() > 1e-300) {
            return ([C64::new(0.0, 0.0); 3], f64::INFINITY);
        }
        gram.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..m {
            let f = gram[row][col] / gram[col][col];
            for k in col..m {
                let v = gram[col][k];
                gram[row][k] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut coef = [C64::new(0.0, 0.0); 3];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for k in row + 1..m {
            acc -= gram[row][k] * coef[k];
        }
        coef[row] = acc / gram[row][row];
    }
    let misfit = t
        .iter()
        .zip(z)
        .map(|(&tk, &zk)| {
            let b = basis(tk);
            (zk - (0..m).map(|i| coef[i] * b[i]).sum::<C64>()).norm_sqr()
        })
        .sum();
    (coef, misfit)
}

/// Nelder-Mead on the two real parameters of `λ`.
fn minimize(f: impl Fn(C64) -> f64, start: C64, step: f64) -> C64 {
    let mut simplex = [start, start + step, start + I * step];
    let mut values = simplex.map(&f);
    for _ in 0..2000 {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, mid, worst) = (order[0], order[1], order[2]);
        let size = (simplex[worst] - simplex[best]).norm().max((simplex[mid] - simplex[best]).norm());
        if size < 1e-12 * simplex[best].norm().max(1e-3) {
            break;
        }
        let centroid = 0.5 * (simplex[best] + simplex[mid]);
        let reflected = centroid + (centroid - simplex[worst]);
        let fr = f(reflected);
        if fr < values[best] {
            let expanded = centroid + 2.0 * (centroid - simplex[worst]);
            let fe = f(expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = centroid + 0.5 * (simplex[worst] - centroid);
            let fc = f(contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for k in [mid, worst] {
                    simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("three vertices");
    simplex[best]
}

/// Least-squares separation of a series at `r = 0` into a bound and a
/// diffusive continuum term (variable projection: the amplitudes are linear,
/// `λ` is found by a simplex search seeded with the closed-form energy).
pub fn separate_components(series: &TimeSeries, terms: &ClosedFormTerms, opts: &FitOptions) -> Result<ComponentFit> {
    let t_lo = opts.t_min.unwrap_or_else(|| (1.0 / terms.e0.norm()).max(2.0));
    let t_hi = opts.t_max.unwrap_or(f64::INFINITY);
    let (t, z): (Vec<f64>, Vec<C64>) = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(&tk, _)| tk >= t_lo && tk <= t_hi && tk > 0.0)
        .map(|(&tk, &zk)| (tk, zk))
        .unzip();
    if t.len() < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 samples in [{t_lo}, {t_hi}], got {}", t.len())));
    }
    let norm: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("series vanishes identically".into()));
    }
    let start = 0.5 * terms.beta_eta2();
    let lambda = minimize(|l| project(&t, &z, l, opts.correction).1, start, 0.1 * start.norm().max(1e-6));
    let ([a_b, a_c, a_c2], misfit) = project(&t, &z, lambda, opts.correction);
    let residual = (misfit / norm).sqrt();
    if !(residual <= opts.max_residual) {
        return Err(Error::FitRejected { residual });
    }
    Ok(ComponentFit {
        a_b,
        e0_fit: -lambda,
        a_c,
        a_c2,
        phi_c: a_c.arg(),
        residual,
        t_window: (t[0], t[t.len() - 1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{continuum_asymptote, ee_closed_form, optimal_loss_ratio};
    use proptest::prelude::*;

    fn terms(x: f64) -> ClosedFormTerms {
        ClosedFormTerms::new(0.2, x).unwrap()
    }

    #[test]
    fn continuum_phase_limits() {
        assert!((continuum_phase(&terms(optimal_loss_ratio())) + 0.5 * PI).abs() < 1e-14);
        assert!((continuum_phase(&terms(0.0)) + 0.75 * PI).abs() < 1e-15);
        let t = terms(1.0 / 12.0);
        assert!((continuum_phase(&t) - (-2.2453)).abs() < 5e-5);
        // Phase of the asymptotic continuum amplitude itself.
        let asym = continuum_asymptote(1e6, &t).arg();
        assert!((asym - continuum_phase(&t)).abs() < 1e-10);
    }

    #[test]
    fn bound_phase_slope() {
        let special = terms(optimal_loss_ratio());
        assert!((bound_phase(100.0, &special) - bound_phase(0.0, &special)).abs() < 1e-12);
        let t = terms(0.0);
        assert!((bound_phase(1.0, &t) + 0.043865).abs() < 1e-6);
        let below = terms(0.9 * optimal_loss_ratio());
        let above = terms(1.1 * optimal_loss_ratio());
        assert!(bound_phase(1.0, &below) * bound_phase(1.0, &above) < 0.0);
        // Agrees with the unwrapped argument of the closed-form bound term.
        let t = terms(1.0 / 12.0);
        let times: Vec<f64> = (1..400).map(|k| k as f64 * 0.5).collect();
        let raw: Vec<f64> =
            times.iter().map(|&tk| ee_closed_form(0.0, tk, &t).unwrap().bound.unwrap().arg()).collect();
        for (tk, p) in times.iter().zip(unwrap(&raw)) {
            assert!((p - bound_phase(*tk, &t)).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_nulls_the_continuum() {
        let phi = -2.0;
        let times: Vec<f64> = (1..200).map(|k| k as f64).collect();
        let values = times.iter().map(|&t| 0.7 * (I * phi).exp() / t.sqrt()).collect();
        let q = quadrature_filter(&TimeSeries::new(times.clone(), values), phi);
        assert!(q.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn filtered_signal_tracks_the_bound_decay() {
        let t = terms(1.0 / 12.0);
        let t0 = crate::analytic::crossover_time(&t).unwrap();
        let phi = continuum_phase(&t);
        let times: Vec<f64> = (1..10000).map(|k| k as f64 * 0.25).collect();
        let values = times
            .iter()
            .map(|&tk| 2.0 * (-0.5 * I * t.beta_eta2() * tk).exp() + continuum_asymptote(tk, &t))
            .collect();
        let series = TimeSeries::new(times.clone(), values);
        // In-phase projection: the envelope of the continuum.
        let env = quadrature_filter(&series, phi - 0.5 * PI);
        let mut checked = 0;
        for (tk, v) in env.times.iter().zip(&env.values) {
            if *tk >= 5.0 * t0 {
                let cont = continuum_asymptote(*tk, &t).norm();
                assert!((v - cont).abs() <= 0.05 * cont);
                checked += 1;
            }
        }
        assert!(checked > 100);
        // Quadrature: only the bound part survives; fit its decay from the peaks.
        let q = quadrature_filter(&series, phi);
        let window: Vec<(f64, f64)> =
            q.times.iter().zip(&q.values).filter(|(tk, _)| **tk > 0.5 * t0 && **tk < 0.5 * t0 + 200.0).map(|(a, b)| (*a, *b)).collect();
        let fit = fit_envelope_rate(&window, -0.5 * t.beta_eta2().re);
        assert!((fit - t.gamma_b).abs() <= 0.1 * t.gamma_b, "{fit} {}", t.gamma_b);
    }

    /// Decay rate of `a e^{−γt} sin(ωt + φ)` with known `ω`, by linear least
    /// squares on `(sin ωt, cos ωt)` in sliding windows.
    fn fit_envelope_rate(data: &[(f64, f64)], omega: f64) -> f64 {
        let amp = |chunk: &[(f64, f64)]| {
            let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(t, y) in chunk {
                let (s, c) = (omega * t).sin_cos();
                ss += s * s;
                sc += s * c;
                cc += c * c;
                ys += y * s;
                yc += y * c;
            }
            let det = ss * cc - sc * sc;
            let a = (cc * ys - sc * yc) / det;
            let b = (ss * yc - sc * ys) / det;
            (a * a + b * b).sqrt()
        };
        let half = data.len() / 2;
        let span = 40;
        let (first, second) = (&data[..span], &data[half..half + span]);
        let dt = second[span / 2].0 - first[span / 2].0;
        (amp(first) / amp(second)).ln() / dt
    }

    #[test]
    fn fit_recovers_the_closed_form() {
        let t = ClosedFormTerms::new(0.2, 1.0 / 12.0).unwrap();
        let t0 = crate::analytic::crossover_time(&t).unwrap();
        let times: Vec<f64> = (0..2000).map(|k| 2.0 + k as f64 * 4.0 * t0 / 2000.0).collect();
        let values = times.iter().map(|&tk| ee_closed_form(0.0, tk, &t).unwrap().total).collect();
        let fit = separate_components(&TimeSeries::new(times, values), &t, &FitOptions::default()).unwrap();
        assert!((fit.e0_fit.re - t.e0.re).abs() <= 0.05 * t.e0.re.abs(), "{} {}", fit.e0_fit, t.e0);
        assert!((fit.phi_c - continuum_phase(&t)).abs() <= 0.05, "{}", fit.phi_c);
    }

    #[test]
    fn pure_bound_signal_has_no_continuum() {
        let t = terms(1.0 / 12.0);
        let times: Vec<f64> = (0..500).map(|k| 2.0 + k as f64 * 0.5).collect();
        let values = times.iter().map(|&tk| 2.0 * (-0.5 * I * t.beta_eta2() * tk).exp()).collect();
        let fit = separate_components(&TimeSeries::new(times, values), &t, &FitOptions::default()).unwrap();
        assert!(fit.a_c.norm() / fit.a_b.norm() < 1e-3);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn poor_fits_are_rejected() {
        let t = terms(1.0 / 12.0);
        let times: Vec<f64> = (0..200).map(|k| 2.0 + k as f64).collect();
        let values = times.iter().map(|&tk| C64::new((tk * 1.7).sin() * tk, (tk * 0.3).cos())).collect();
        assert!(matches!(
            separate_components(&TimeSeries::new(times, values), &t, &FitOptions::default()),
            Err(Error::FitRejected { .. })
        ));
    }

    #[test]
    fn beat_period_matches_the_oscillation_of_the_modulus() {
        let t = ClosedFormTerms::new(0.2, 1.0 / 12.0).unwrap();
        let times: Vec<f64> = (0..4000).map(|k| 2.0 + k as f64 * 0.25).collect();
        let values: Vec<C64> = times.iter().map(|&tk| ee_closed_form(0.0, tk, &t).unwrap().total).collect();
        let fit = separate_components(&TimeSeries::new(times.clone(), values.clone()), &t, &FitOptions::default()).unwrap();
        // The relative phase of the two fitted terms winds with |Re E0|.
        let beat = 2.0 * PI / fit.e0_fit.re.abs();
        // Period of |EE| from successive minima.
        let modulus: Vec<f64> = values.iter().map(|z| z.norm()).collect();
        let minima: Vec<f64> =
            (1..modulus.len() - 1).filter(|&k| modulus[k] < modulus[k - 1] && modulus[k] < modulus[k + 1]).map(|k| times[k]).collect();
        assert!(minima.len() >= 2, "{minima:?}");
        let period = minima[1] - minima[0];
        assert!((period - beat).abs() <= 0.1 * beat, "{period} {beat}");
    }

    proptest! {
        #[test]
        fn filter_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, phi in -4.0..4.0f64) {
            let times: Vec<f64> = (1..20).map(|k| k as f64).collect();
            let x: Vec<C64> = times.iter().map(|&t| C64::new(t.sin(), t.cos() * 0.5)).collect();
            let y: Vec<C64> = times.iter().map(|&t| C64::new(1.0 / t, -t)).collect();
            let sum: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let fx = quadrature_filter(&TimeSeries::new(times.clone(), x), phi);
            let fy = quadrature_filter(&TimeSeries::new(times.clone(), y), phi);
            let fs = quadrature_filter(&TimeSeries::new(times, sum), phi);
            for k in 0..fs.values.len() {
                prop_assert!((fs.values[k] - a * fx.values[k] - b * fy.values[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn continuum_phase_depends_only_on_the_loss_ratio(x in 0.0..2.0f64, xi1 in 0.05..1.0f64, xi2 in 0.05..1.0f64) {
            let a = ClosedFormTerms::new(xi1, x).unwrap();
            let b = ClosedFormTerms::new(xi2, x).unwrap();
            prop_assert_eq!(continuum_phase(&a), continuum_phase(&b));
        }

        #[test]
        fn unwrap_removes_jumps(steps in proptest::collection::vec(-3.0..3.0f64, 1..50)) {
            let mut phase = vec![0.0];
            for s in &steps {
                phase.push(phase.last().unwrap() + s);
            }
            let wrapped: Vec<f64> = phase.iter().map(|p| C64::new(0.0, *p).exp().arg()).collect();
            let un = unwrap(&wrapped);
            for (u, p) in un.iter().zip(&phase) {
                prop_assert!((u - p - (un[0] - phase[0])).abs() < 1e-9);
            }
        }
    }
}
