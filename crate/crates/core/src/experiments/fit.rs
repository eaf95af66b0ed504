//! Least-squares fit of `y(theta) = B + A sin^2((theta - phi) / 2)`.
//!
//! The model is linear in `{1, cos theta, sin theta}`:
//! `B + A/2 - (A/2) (cos theta cos phi + sin theta sin phi)`, so the fit is a
//! three-parameter linear solve followed by a change of variables.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative cutoff on the singular values of the design matrix.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    pub amplitude: f64,
    pub offset: f64,
    /// In `(-pi, pi]`.
    pub phase: f64,
    pub rms_residual: f64,
}

impl FringeFit {
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.offset + self.amplitude * ((theta - self.phase) / 2.0).sin().powi(2)
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Fits the fringe model to `(theta, y)` samples.
///
/// Needs at least four samples with three distinct angles spanning more
/// than pi.
pub fn fit_fringe(samples: &[(f64, f64)]) -> Result<FringeFit> {
    if samples.len() < 4 {
        return Err(Error::Degenerate(format!("{} samples, need at least 4", samples.len())));
    }
    let mut thetas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let span = thetas[thetas.len() - 1] - thetas[0];
    if thetas.len() < 3 || !(span > PI) {
        return Err(Error::Degenerate(format!(
            "{} distinct angles spanning {span:.3} rad",
            thetas.len()
        )));
    }

    let n = samples.len();
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => samples[i].0.cos(),
        _ => samples[i].0.sin(),
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::Degenerate("design matrix is rank deficient".into()));
    }
    let coef = svd.solve(&y, 0.0).map_err(|e| Error::Degenerate(e.to_string()))?;
    let (c0, c1, c2) = (coef[0], coef[1], coef[2]);

    let amplitude = 2.0 * c1.hypot(c2);
    let phase = if amplitude > 0.0 {
        wrap_phase((-c2).atan2(-c1))
    } else {
        0.0
    };
    let offset = c0 - amplitude / 2.0;
    let resid = &design * &coef - &y;
    let rms_residual = (resid.norm_squared() / n as f64).sqrt();
    Ok(FringeFit {
        amplitude,
        offset,
        phase,
        rms_residual,
    })
}

/// Fringe contrast `(max - min) / (max + min) = A / (A + 2B)`.
pub fn visibility(fit: &FringeFit) -> Result<f64> {
    let denom = fit.amplitude + 2.0 * fit.offset;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("A + 2B = {denom} is not positive")));
    }
    Ok(fit.amplitude / denom)
}

/// Depth of a dip relative to its baseline, `(max - min) / max`.
///
/// This is the usual two-photon interference visibility: for a coincidence
/// probability `c (1 - eta^2)` it returns the peak `eta^2`.
pub fn dip_visibility(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        return Err(Error::Domain("dip baseline is not positive".into()));
    }
    Ok((max - min) / max)
}

/// Phase of `shifted` relative to `reference`, in `[0, 2 pi)`.
pub fn phase_shift(reference: &FringeFit, shifted: &FringeFit) -> f64 {
    (shifted.phase - reference.phase).rem_euclid(TAU)
}
