use serde::{Deserialize, Serialize};

use super::projector::gram_inverse_norm;
use crate::error::{Error, Result};
use crate::geometry::{fill_distance, generate_quasi_uniform, DomainRegion, PointSet, DEFAULT_PROBE_DENSITY};
use crate::kernels::PolynomialBasis;
use crate::stats::fit_line;
use nalgebra::DMatrix;

/// Gram data at one radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub radius: f64,
    pub points: usize,
    pub fill_distance: f64,
    pub gram: Vec<Vec<f64>>,
    pub inv_norm: f64,
}

/// A radius sweep of ‖G⁻¹‖ with the fitted exponent of log‖G⁻¹‖ against log(1/r).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSweep {
    pub reports: Vec<GramReport>,
    pub two_tau_hat: f64,
    pub r_squared: f64,
}

/// Gram matrix of Π on quasi-uniform points in B(x, r) whose fill distance is at
/// most h0·r, for each r in `radii` (decreasing).
pub fn gram_bound_sweep(
    basis: &PolynomialBasis,
    x: &[f64],
    radii: &[f64],
    h0: f64,
    seed: u64,
) -> Result<GramSweep> {
    if radii.len() < 3 {
        return Err(Error::InsufficientData("Gram sweep needs at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive and strictly decreasing".into()));
    }
    if !(h0 > 0.0 && h0 < 1.0) {
        return Err(Error::InvalidInput(format!("h0 must lie in (0, 1), got {h0}")));
    }
    if x.len() != basis.dim() {
        return Err(Error::InvalidInput("center dimension does not match the basis".into()));
    }
    let reports = radii
        .iter()
        .map(|&r| gram_at_radius(basis, x, r, h0, seed))
        .collect::<Result<Vec<_>>>()?;
    let log_inv_r: Vec<f64> = reports.iter().map(|g| (1.0 / g.radius).ln()).collect();
    let log_norm: Vec<f64> = reports.iter().map(|g| g.inv_norm.ln()).collect();
    let fit = fit_line(&log_inv_r, &log_norm, 3)?;
    Ok(GramSweep {
        reports,
        two_tau_hat: fit.slope,
        r_squared: fit.r_squared,
    })
}

/// Gram data for `count` quasi-uniform points in B(x, r).
pub fn gram_at_count(basis: &PolynomialBasis, x: &[f64], r: f64, count: usize, seed: u64) -> Result<GramReport> {
    let ball = DomainRegion::Ball {
        center: x.to_vec(),
        radius: r,
    };
    let points = generate_quasi_uniform(&ball, count, seed)?;
    let h = fill_distance(&points, &ball, DEFAULT_PROBE_DENSITY)?;
    Ok(report(basis, &points, r, h))
}

fn gram_at_radius(basis: &PolynomialBasis, x: &[f64], r: f64, h0: f64, seed: u64) -> Result<GramReport> {
    let d = basis.dim() as i32;
    // start near the density that gives fill ≈ h0·r, double until it does
    let mut count = ((1.0 / h0).powi(d).ceil() as usize).max(basis.len() + 1);
    for _ in 0..8 {
        let g = gram_at_count(basis, x, r, count, seed)?;
        if g.fill_distance <= h0 * r {
            return Ok(g);
        }
        count *= 2;
    }
    Err(Error::InvalidInput(format!(
        "could not reach fill distance {h0}·r in B(x, {r})"
    )))
}

fn report(basis: &PolynomialBasis, points: &PointSet, r: f64, h: f64) -> GramReport {
    let phi = DMatrix::from_fn(points.len(), basis.len(), |i, j| {
        basis.eval(j, points.point(i)).expect("index within basis")
    });
    let gram = phi.tr_mul(&phi);
    GramReport {
        radius: r,
        points: points.len(),
        fill_distance: h,
        gram: gram.row_iter().map(|row| row.iter().copied().collect()).collect(),
        inv_norm: gram_inverse_norm(&phi),
    }
}
