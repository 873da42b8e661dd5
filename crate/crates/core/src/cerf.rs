//! Complex error function family.
//!
//! The Faddeeva function `w(z) = exp(-z²) erfc(-iz)` is evaluated in the
//! upper half plane from the trapezoidal discretisation of
//! `w(z) = (i/π) ∫ exp(-t²)/(z - t) dt` plus the exact residue correction of
//! the pole at `t = z`. Everything else follows from reflection identities.
//! Small arguments of `erf` use the Maclaurin series directly.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

const STEP: f64 = 0.5;
const NODES: i32 = 14;
const SERIES_RADIUS: f64 = 1.5;
const MAX_ARG: f64 = 1e6;
// exp(709.78) is the largest finite double.
const MAX_EXPONENT: f64 = 709.0;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn check(z: C64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= MAX_ARG {
        return Err(Error::OutOfRange(format!("argument {z} outside |z| < 1e6")));
    }
    Ok(())
}

fn finite(v: C64, what: &str, z: C64) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::OutOfRange(format!("{what}({z}) overflows")))
    }
}

/// `-z²` with the real part formed as `(y - x)(y + x)`.
fn neg_square(z: C64) -> C64 {
    C64::new((z.im - z.re) * (z.im + z.re), -2.0 * z.re * z.im)
}

/// Faddeeva function for `Im z ≥ 0`.
fn faddeeva_upper(z: C64) -> C64 {
    let x = z.re;
    let y = z.im;
    // Shift the nodes by half a step when z sits close to one of them.
    let phase = (x / STEP).rem_euclid(1.0);
    let offset = if (0.25..=0.75).contains(&phase) { 0.0 } else { 0.5 };
    let mut sum = C64::new(0.0, 0.0);
    for n in -NODES..NODES {
        let t = (n as f64 + offset) * STEP;
        sum += (-t * t).exp() / (z - t);
    }
    let mut w = C64::new(0.0, STEP / PI) * sum;
    // Above y = π/h the residue term is below the discretisation error.
    if y < PI / STEP {
        let q = (C64::new(0.0, 2.0 * PI / STEP) * (z - offset * STEP)).exp();
        w -= 2.0 * neg_square(z).exp() * q / (1.0 - q);
    }
    w
}

/// Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
pub fn faddeeva(z: C64) -> Result<C64> {
    check(z)?;
    if z.im >= 0.0 {
        return Ok(faddeeva_upper(z));
    }
    // w(z) = 2 exp(-z²) - w(-z)
    let e = neg_square(z);
    if e.re > MAX_EXPONENT {
        return Err(Error::OutOfRange(format!("faddeeva({z}) overflows")));
    }
    finite(2.0 * e.exp() - faddeeva_upper(-z), "faddeeva", z)
}

fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..60 {
        term *= -z2 / n as f64;
        let contribution = term / (2 * n + 1) as f64;
        sum += contribution;
        if contribution.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

/// `erf` in the closed first quadrant.
fn erf_first_quadrant(z: C64) -> Result<C64> {
    if z.norm() <= SERIES_RADIUS {
        return Ok(erf_series(z));
    }
    let e = neg_square(z);
    if e.re > MAX_EXPONENT {
        return Err(Error::OutOfRange(format!("erf({z}) overflows")));
    }
    let w = faddeeva_upper(C64::new(-z.im, z.re));
    finite(1.0 - e.exp() * w, "erf", z)
}

/// Complex error function.
pub fn erf(z: C64) -> Result<C64> {
    check(z)?;
    let flip_re = z.re < 0.0;
    let flip_im = z.im < 0.0;
    let q = C64::new(z.re.abs(), z.im.abs());
    let mut v = erf_first_quadrant(q)?;
    if flip_re != flip_im {
        // erf(-conj q) = -conj erf(q), erf(conj q) = conj erf(q)
        v = v.conj();
    }
    if flip_re {
        v = -v;
    }
    Ok(v)
}

/// Alias of [`erf`] under the name used across the crate.
pub fn cerf(z: C64) -> Result<C64> {
    erf(z)
}

/// Scaled complementary error function `exp(z²) erfc(z) = w(iz)`.
pub fn erfcx(z: C64) -> Result<C64> {
    faddeeva(C64::new(-z.im, z.re))
}

/// Complementary error function.
pub fn erfc(z: C64) -> Result<C64> {
    check(z)?;
    if z.norm() <= SERIES_RADIUS {
        return Ok(1.0 - erf_series(z));
    }
    exp_erfc(C64::new(0.0, 0.0), z)
}

/// `exp(a) · erfc(z)` without forming either factor separately, so that
/// large exponents cancel before exponentiation.
pub fn exp_erfc(a: C64, z: C64) -> Result<C64> {
    check(z)?;
    let scaled = |arg: C64| -> Result<C64> {
        // exp(a) erfc(arg) = exp(a - arg²) w(i arg), Re arg ≥ 0
        let e = a + neg_square(arg);
        if e.re > MAX_EXPONENT {
            return Err(Error::OutOfRange(format!("exp_erfc({a}, {z}) overflows")));
        }
        Ok(e.exp() * faddeeva_upper(C64::new(-arg.im, arg.re)))
    };
    let v = if z.re >= 0.0 {
        scaled(z)?
    } else {
        if a.re > MAX_EXPONENT {
            return Err(Error::OutOfRange(format!("exp_erfc({a}, {z}) overflows")));
        }
        2.0 * a.exp() - scaled(-z)?
    };
    finite(v, "exp_erfc", z)
}
