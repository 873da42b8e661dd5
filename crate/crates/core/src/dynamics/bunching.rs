//! Bunching classifier `B = g²(0) / median g²(r)` over `5 R_B ≤ |r| ≤ 10 R_B`.

use serde::Serialize;

use super::{Frame, PairField};
use crate::{Error, Result};

pub const BAND_MIN: f64 = 5.0;
pub const BAND_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bunching {
    Bunched,
    Antibunched,
    Neither,
}

impl Bunching {
    pub fn classify(b: f64) -> Self {
        if b > 1.0 {
            Bunching::Bunched
        } else if b < 0.1 {
            Bunching::Antibunched
        } else {
            Bunching::Neither
        }
    }
}

fn median(mut v: Vec<f64>) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Grid("the reference band 5-10 R_B contains no grid points".into()));
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Ok(if v.len().is_multiple_of(2) { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}

/// Bunching metric of a snapshot whose axis is in units of R_B.
///
/// In the relative frame `g²(r) = |EE(r)|²`. On the lab plane `g²` is
/// normalised by the single-photon marginals, `|EE(z₁,z₂)|² N / (n(z₁) n(z₂))`,
/// and sampled along `z₁ − z₂` through the pair centroid, so that an
/// uncorrelated pair gives `B = 1` whatever its envelope.
pub fn bunching_metric(field: &PairField) -> Result<f64> {
    let n = field.axis.len();
    let h = field.axis[1] - field.axis[0];
    let mut band = Vec::new();
    let at_zero;
    match field.frame {
        Frame::RelativeK0 | Frame::Scalar => {
            let origin = n / 2;
            at_zero = field.ee[origin].norm_sqr();
            for (i, &r) in field.axis.iter().enumerate() {
                if (BAND_MIN..=BAND_MAX).contains(&r.abs()) {
                    band.push(field.ee[i].norm_sqr());
                }
            }
        }
        Frame::Lab2d => {
            let dens: Vec<f64> = field.ee.iter().map(|z| z.norm_sqr()).collect();
            let marginal: Vec<f64> = (0..n).map(|i| dens[i * n..(i + 1) * n].iter().sum()).collect();
            let total: f64 = marginal.iter().sum();
            if total == 0.0 {
                return Err(Error::Grid("empty two-photon field".into()));
            }
            let centroid = marginal.iter().enumerate().map(|(i, m)| i as f64 * m).sum::<f64>() / total;
            let c = centroid.round() as usize;
            let g2 = |i: usize, j: usize| {
                let denom = marginal[i] * marginal[j];
                if denom > 0.0 {
                    dens[i * n + j] * total / denom
                } else {
                    0.0
                }
            };
            at_zero = g2(c, c);
            for d in 1..n {
                let r = d as f64 * h;
                if r > BAND_MAX {
                    break;
                }
                // Points with z₁ − z₂ = ±d h closest to the centroid.
                let lo = d / 2;
                let hi = d - lo;
                if c < hi || c + hi >= n {
                    break;
                }
                if r >= BAND_MIN {
                    band.push(g2(c + hi, c - lo));
                    band.push(g2(c - lo, c + hi));
                }
            }
        }
    }
    let reference = median(band)?;
    if reference == 0.0 {
        return Err(Error::Grid("vanishing reference density in the 5-10 R_B band".into()));
    }
    Ok(at_zero / reference)
}
