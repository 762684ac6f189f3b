use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, PointSet};
use crate::interpolation::saddle::kernel_matrix;
use crate::interpolation::{CoefficientMatrix, LagrangeFunction};
use crate::kernels::KernelSpec;
use crate::localization::GramProjector;
use crate::quadrature::QuadratureGrid;
use crate::stats::fit_line;

/// Magnitudes at or below this are never used in a log fit.
pub const FIT_FLOOR: f64 = 1e-13;

/// Minimum number of above-floor samples for a decay fit.
pub const MIN_DECAY_SAMPLES: usize = 10;

/// Multiple of ε·Σ|terms| treated as rounding noise in a point evaluation.
const ROUNDING_FACTOR: f64 = 64.0;

/// Multiple of the cardinality residual treated as solver noise.
const RESIDUAL_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayRegime {
    #[serde(rename = "pointwise")]
    Pointwise,
    #[serde(rename = "energy-annulus")]
    EnergyAnnulus,
    #[serde(rename = "coefficient")]
    Coefficient,
}

/// A fit of magnitude ≈ Ĉ·exp(−ν̂·t) with t a distance in units of h.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub nu_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub regime: DecayRegime,
    /// Raw samples above the floor.
    pub samples: usize,
    /// Pairs (t, magnitude) the line was fitted to.
    pub fitted: Vec<[f64; 2]>,
}

/// One raw sample for a decay fit: scaled distance, magnitude, noise floor.
#[derive(Clone, Copy, Debug)]
pub struct DecaySample {
    pub t: f64,
    pub magnitude: f64,
    pub floor: f64,
}

/// Fits the upper envelope of the samples: the largest magnitude in each
/// unit-width bin of t (from t = 1 on), using only samples above their floor.
pub fn fit_envelope(samples: &[DecaySample], regime: DecayRegime) -> Result<DecayFit> {
    let usable: Vec<&DecaySample> = samples
        .iter()
        .filter(|s| s.magnitude > s.floor.max(FIT_FLOOR) && s.t.is_finite())
        .collect();
    if usable.len() < MIN_DECAY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples above the noise floor, need {MIN_DECAY_SAMPLES}",
            usable.len()
        )));
    }
    let mut bins: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for s in &usable {
        if s.t < 1.0 {
            continue;
        }
        let entry = bins.entry(s.t.floor() as i64).or_insert((s.t, s.magnitude));
        if s.magnitude > entry.1 || (s.magnitude == entry.1 && s.t < entry.0) {
            *entry = (s.t, s.magnitude);
        }
    }
    let fitted: Vec<[f64; 2]> = bins.values().map(|&(t, v)| [t, v]).collect();
    finish(fitted, usable.len(), regime)
}

/// Fits every sample directly (no binning).
pub fn fit_samples(samples: &[DecaySample], regime: DecayRegime, min_samples: usize) -> Result<DecayFit> {
    let fitted: Vec<[f64; 2]> = samples
        .iter()
        .filter(|s| s.magnitude > s.floor.max(FIT_FLOOR) && s.t.is_finite())
        .map(|s| [s.t, s.magnitude])
        .collect();
    if fitted.len() < min_samples {
        return Err(Error::InsufficientData(format!(
            "{} samples above the noise floor, need {min_samples}",
            fitted.len()
        )));
    }
    let count = fitted.len();
    finish(fitted, count, regime)
}

fn finish(fitted: Vec<[f64; 2]>, samples: usize, regime: DecayRegime) -> Result<DecayFit> {
    let xs: Vec<f64> = fitted.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = fitted.iter().map(|p| p[1].ln()).collect();
    let line = fit_line(&xs, &ys, 3)?;
    Ok(DecayFit {
        nu_hat: -line.slope,
        c_hat: line.intercept.exp(),
        r_squared: line.r_squared,
        regime,
        samples,
        fitted,
    })
}

/// Decay of |χ_ξ(x)| in dist(x, ξ)/h over the quadrature nodes of `grid` that
/// lie within dist(ξ, ∂Ω) of ξ, so boundary layers do not enter the fit.
pub fn fit_pointwise_decay(
    spec: &KernelSpec,
    centers: &PointSet,
    chi: &LagrangeFunction,
    grid: &QuadratureGrid,
    h: f64,
) -> Result<DecayFit> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let residual = cardinality_residual(spec, centers, chi);
    let solver_floor = RESIDUAL_FACTOR * residual;
    let xi = centers.point(chi.center).to_vec();
    let window = grid.domain().boundary_distance(&xi);
    if !(window > 0.0) {
        return Err(Error::InvalidInput("the Lagrange center must lie inside the grid domain".into()));
    }
    let basis = spec.polynomial_basis();
    let inside: Vec<Vec<f64>> = grid
        .nodes()
        .iter()
        .map(|&flat| grid.lattice_point(flat))
        .filter(|x| distance(x, &xi) <= window)
        .collect();
    let samples: Vec<DecaySample> = inside
        .par_iter()
        .map(|x| {
            let x = x.as_slice();
            let (mut value, mut scale) = (0.0, 0.0);
            for (&s, &a) in chi.support.iter().zip(&chi.kernel_coeffs) {
                let term = a * spec.eval(x, centers.point(s));
                value += term;
                scale += term.abs();
            }
            for (p, c) in basis.values(x).iter().zip(&chi.poly_coeffs) {
                value += p * c;
                scale += (p * c).abs();
            }
            DecaySample {
                t: distance(x, &xi) / h,
                magnitude: value.abs(),
                floor: solver_floor.max(ROUNDING_FACTOR * f64::EPSILON * scale),
            }
        })
        .collect();
    fit_envelope(&samples, DecayRegime::Pointwise)
}

/// max_ζ |χ_ξ(ζ) − δ_ξζ| over the support of χ_ξ.
pub fn cardinality_residual(spec: &KernelSpec, centers: &PointSet, chi: &LagrangeFunction) -> f64 {
    let basis = spec.polynomial_basis();
    chi.support
        .par_iter()
        .map(|&z| {
            let v = crate::interpolation::evaluate_with_basis(spec, &basis, centers, chi, centers.point(z));
            (v - if z == chi.center { 1.0 } else { 0.0 }).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Tail energy of χ_ξ beyond each radius R (increasing): the native seminorm of
/// the coefficients at centers with dist(ζ, ξ) > R, projected back onto the side
/// conditions on those centers. Fitted against R/h.
pub fn fit_energy_decay(
    spec: &KernelSpec,
    centers: &PointSet,
    chi: &LagrangeFunction,
    radii: &[f64],
    h: f64,
) -> Result<DecayFit> {
    let tails = energy_tails(spec, centers, chi, radii)?;
    let samples: Vec<DecaySample> = tails
        .iter()
        .map(|t| DecaySample {
            t: t.radius / h,
            magnitude: t.energy,
            floor: t.noise,
        })
        .collect();
    fit_samples(&samples, DecayRegime::EnergyAnnulus, 3)
}

/// Tail energy at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTail {
    pub radius: f64,
    pub centers: usize,
    pub energy: f64,
    pub noise: f64,
}

pub fn energy_tails(
    spec: &KernelSpec,
    centers: &PointSet,
    chi: &LagrangeFunction,
    radii: &[f64],
) -> Result<Vec<EnergyTail>> {
    if radii.len() < 3 {
        return Err(Error::InsufficientData("energy decay needs at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be strictly increasing".into()));
    }
    let xi = centers.point(chi.center);
    let dist: Vec<f64> = chi.support.iter().map(|&s| distance(centers.point(s), xi)).collect();
    // kernel block on the largest tail set, reused for all radii
    let outer: Vec<usize> = (0..chi.support.len()).filter(|&i| dist[i] > radii[0]).collect();
    let outer_global: Vec<usize> = outer.iter().map(|&i| chi.support[i]).collect();
    let kernel = kernel_matrix(spec, centers, &outer_global);
    let basis = spec.polynomial_basis();
    let mut tails = Vec::new();
    for &r in radii {
        let local: Vec<usize> = (0..outer.len()).filter(|&j| dist[outer[j]] > r).collect();
        if local.len() <= basis.len() {
            break;
        }
        let global: Vec<usize> = local.iter().map(|&j| outer_global[j]).collect();
        let raw: Vec<f64> = local.iter().map(|&j| chi.kernel_coeffs[outer[j]]).collect();
        let a = if basis.is_empty() {
            raw
        } else {
            match GramProjector::new(&basis, centers, &global) {
                Ok(p) => p.complement(&raw),
                Err(Error::NotUnisolvent { .. }) => break,
                Err(e) => return Err(e),
            }
        };
        let sub = DMatrix::from_fn(local.len(), local.len(), |i, j| kernel[(local[i], local[j])]);
        let av = nalgebra::DVector::from_column_slice(&a);
        let quad = av.dot(&(&sub * &av));
        let abs_quad: f64 = {
            let abs = av.abs();
            abs.dot(&(sub.abs() * &abs))
        };
        tails.push(EnergyTail {
            radius: r,
            centers: local.len(),
            energy: quad.max(0.0).sqrt(),
            noise: (ROUNDING_FACTOR * f64::EPSILON * abs_quad).sqrt(),
        });
    }
    Ok(tails)
}

/// Decay of |A_ξζ|·q^{2m−d} in dist(ξ, ζ)/h pooled over off-diagonal pairs. The
/// noise floor is ten times the largest asymmetry |A_ξζ − A_ζξ|.
pub fn fit_coefficient_decay(
    coeffs: &CoefficientMatrix,
    points: &PointSet,
    h: f64,
    q: f64,
    m: u32,
) -> Result<DecayFit> {
    let n = coeffs.len();
    if n < 50 {
        return Err(Error::InsufficientData(format!("coefficient decay needs n ≥ 50, got {n}")));
    }
    let a = &coeffs.a;
    let noise = 10.0 * (a - a.transpose()).amax();
    let scale = q.powi(2 * m as i32 - points.dim() as i32);
    let samples: Vec<DecaySample> = (0..n)
        .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
        .map(|(i, j)| DecaySample {
            t: distance(points.point(coeffs.support[i]), points.point(coeffs.support[j])) / h,
            magnitude: a[(i, j)].abs() * scale,
            floor: noise * scale,
        })
        .collect();
    fit_envelope(&samples, DecayRegime::Coefficient)
}
