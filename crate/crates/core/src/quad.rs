//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.

use crate::{Error, Result, C64};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 60;

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (value, err)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` (or relative
/// tolerance `rel_tol` of the running total, whichever is looser).
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut stack = vec![(a, b, 0usize)];
    let mut total = C64::new(0.0, 0.0);
    let length = (b - a).abs();
    let mut evaluations = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi);
        evaluations += 15;
        // Local tolerance proportional to the interval share.
        let share = (hi - lo).abs() / length;
        let tol = (abs_tol * share).max(rel_tol * value.norm());
        if err <= tol || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && err > 1e3 * tol.max(f64::MIN_POSITIVE) {
                return Err(Error::Quadrature(format!(
                    "interval [{lo}, {hi}] unresolved (error {err:.2e})"
                )));
            }
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
        if evaluations > 20_000_000 {
            return Err(Error::Quadrature("evaluation budget exhausted".into()));
        }
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::Quadrature("non-finite integral".into()));
    }
    Ok(total)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol).map(|z| z.re)
}

/// Fixed 15-point Kronrod rule on `[a, b]`, for smooth integrands on short cells.
pub fn fixed_rule<F: Fn(f64) -> C64>(f: F, a: f64, b: f64) -> C64 {
    gk15(&f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_real(|x| 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn lorentzian_peak() {
        // ∫ dx / (x² + ε²) over R = π / ε
        let eps = 1e-3;
        let v = integrate_real(|x| 1.0 / (x * x + eps * eps), -50.0, 50.0, 1e-10, 1e-12).unwrap();
        let exact = 2.0 * (50.0 / eps).atan() / eps;
        assert!((v - exact).abs() / exact < 1e-10, "{v} vs {exact}");
        assert!((exact - PI / eps).abs() / exact < 1e-4);
    }

    #[test]
    fn complex_oscillatory() {
        // ∫_0^π e^{ix} dx = 2i
        let v = integrate(|x| C64::new(0.0, x).exp(), 0.0, PI, 1e-13, 0.0).unwrap();
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
