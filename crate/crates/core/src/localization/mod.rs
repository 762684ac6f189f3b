//! Truncated and local Lagrange functions on footprints Υ(ξ), and Gram-matrix
//! bounds for the polynomial correction.

mod gram;
mod projector;

pub use gram::{gram_at_count, gram_bound_sweep, GramReport, GramSweep};
pub use projector::GramProjector;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FootprintFailure, Result};
use crate::geometry::{footprint, Footprint, PointSet};
use crate::interpolation::{assemble_subset, BasisVariant, CoefficientMatrix, LagrangeFunction};
use crate::interpolation::saddle::kernel_matrix;
use crate::kernels::{KernelSpec, PolynomialBasis};

/// Coefficient truncation of a full Lagrange function to a footprint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationResult {
    /// A_{ζ,ξ} for ζ ∈ Υ, in footprint order.
    pub raw: Vec<f64>,
    /// P⊥ applied to `raw`.
    pub corrected: Vec<f64>,
    /// Σ_{ζ∉Υ} |A_{ζ,ξ}|.
    pub tail_l1: f64,
    /// ‖raw − corrected‖₂.
    pub correction_l2: f64,
    /// χ̃_ξ: `corrected` on Υ plus the original polynomial part.
    pub function: LagrangeFunction,
}

/// A local Lagrange function b_ξ together with its footprint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalLagrange {
    pub function: LagrangeFunction,
    pub footprint: Footprint,
}

fn footprint_hint(ups: &Footprint) -> String {
    format!(
        "footprint of center {} ({} points, radius {:.4e}, K = {}); try a larger K",
        ups.center_index,
        ups.len(),
        ups.radius,
        ups.k
    )
}

/// Restricts χ_ξ's kernel coefficients to Υ and removes their component in Π|_Υ.
pub fn truncate_lagrange(
    chi: &LagrangeFunction,
    points: &PointSet,
    ups: &Footprint,
    basis: &PolynomialBasis,
) -> Result<TruncationResult> {
    let mut dense = vec![0.0; points.len()];
    for (&s, &a) in chi.support.iter().zip(&chi.kernel_coeffs) {
        if s >= points.len() {
            return Err(Error::InvalidInput(format!("support index {s} out of range")));
        }
        dense[s] = a;
    }
    truncate_dense(&dense, chi.center, &chi.poly_coeffs, points, ups, basis)
}

/// Truncates column ξ of a full coefficient matrix defined on all of `points`.
pub fn truncate_column(
    coeffs: &CoefficientMatrix,
    local: usize,
    points: &PointSet,
    ups: &Footprint,
    basis: &PolynomialBasis,
) -> Result<TruncationResult> {
    if coeffs.len() != points.len() || coeffs.support.iter().enumerate().any(|(i, &s)| i != s) {
        return Err(Error::InvalidInput(
            "coefficient matrix must be defined on the whole point set".into(),
        ));
    }
    let column: Vec<f64> = coeffs.a.column(local).iter().copied().collect();
    let poly: Vec<f64> = coeffs.poly.column(local).iter().copied().collect();
    truncate_dense(&column, coeffs.support[local], &poly, points, ups, basis)
}

fn truncate_dense(
    dense: &[f64],
    center: usize,
    poly: &[f64],
    points: &PointSet,
    ups: &Footprint,
    basis: &PolynomialBasis,
) -> Result<TruncationResult> {
    if ups.center_index != center {
        return Err(Error::InvalidInput(format!(
            "footprint is centered at {} but the Lagrange function at {center}",
            ups.center_index
        )));
    }
    let raw: Vec<f64> = ups.member_indices.iter().map(|&z| dense[z]).collect();
    let total_l1: f64 = dense.iter().map(|a| a.abs()).sum();
    let kept_l1: f64 = raw.iter().map(|a| a.abs()).sum();
    let mut in_footprint = vec![false; dense.len()];
    for &z in &ups.member_indices {
        in_footprint[z] = true;
    }
    let tail_l1: f64 = dense
        .iter()
        .zip(&in_footprint)
        .filter(|(_, &inside)| !inside)
        .map(|(a, _)| a.abs())
        .sum();
    debug_assert!(tail_l1 <= total_l1 - kept_l1 + 1e-12 * total_l1.max(1.0));

    let corrected = if basis.is_empty() {
        raw.clone()
    } else {
        let projector = GramProjector::new(basis, points, &ups.member_indices)
            .map_err(|e| remediate(e, ups))?;
        projector.complement(&raw)
    };
    let correction_l2 = raw
        .iter()
        .zip(&corrected)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let function = LagrangeFunction {
        center,
        support: ups.member_indices.clone(),
        kernel_coeffs: corrected.clone(),
        poly_coeffs: poly.to_vec(),
        variant: BasisVariant::Truncated,
    };
    Ok(TruncationResult {
        raw,
        corrected,
        tail_l1,
        correction_l2,
        function,
    })
}

fn remediate(err: Error, ups: &Footprint) -> Error {
    match err {
        Error::NotUnisolvent { rank, required, .. } => Error::NotUnisolvent {
            rank,
            required,
            context: footprint_hint(ups),
        },
        Error::Singular(msg) => Error::Singular(format!("{msg} ({})", footprint_hint(ups))),
        other => other,
    }
}

/// b_ξ: the cardinal interpolant of δ_ξ on the footprint's centers alone.
pub fn solve_local_lagrange(spec: &KernelSpec, points: &PointSet, ups: &Footprint) -> Result<LocalLagrange> {
    let sys = assemble_subset(spec, points, &ups.member_indices).map_err(|e| remediate(e, ups))?;
    let local = ups.center_position();
    let mut data = vec![0.0; ups.len()];
    data[local] = 1.0;
    let (kernel_coeffs, poly_coeffs) = sys.solve_data(&data)?;
    Ok(LocalLagrange {
        function: LagrangeFunction {
            center: ups.center_index,
            support: ups.member_indices.clone(),
            kernel_coeffs,
            poly_coeffs,
            variant: BasisVariant::Local,
        },
        footprint: ups.clone(),
    })
}

/// Local Lagrange functions for every ξ in `centers`, with footprints using the
/// fill distance of `points` measured over its domain.
pub fn build_local_basis(
    spec: &KernelSpec,
    points: &PointSet,
    centers: &[usize],
    k: f64,
) -> Result<Vec<LocalLagrange>> {
    let domain = points.domain().ok_or_else(|| {
        Error::InvalidInput("point set has no domain; cannot measure its fill distance".into())
    })?;
    let h = crate::geometry::fill_distance_refined(points, domain)?;
    build_local_basis_with_h(spec, points, centers, k, h)
}

/// Like [`build_local_basis`] with a given fill distance. Footprints are solved in
/// parallel; results are returned in the order of `centers`, and all failures are
/// reported together.
pub fn build_local_basis_with_h(
    spec: &KernelSpec,
    points: &PointSet,
    centers: &[usize],
    k: f64,
    h: f64,
) -> Result<Vec<LocalLagrange>> {
    crate::geometry::footprint_radius(k, h)?;
    let results: Vec<Result<LocalLagrange>> = centers
        .par_iter()
        .map(|&xi| {
            let ups = footprint(points, xi, k, h)?;
            solve_local_lagrange(spec, points, &ups)
        })
        .collect();
    collect_footprint_results(centers, results)
}

/// Truncated Lagrange functions for every ξ in `centers` from a full coefficient
/// matrix on all of `points`.
pub fn build_truncated_basis(
    coeffs: &CoefficientMatrix,
    spec: &KernelSpec,
    points: &PointSet,
    centers: &[usize],
    k: f64,
    h: f64,
) -> Result<Vec<TruncationResult>> {
    crate::geometry::footprint_radius(k, h)?;
    let basis = spec.polynomial_basis();
    let results: Vec<Result<TruncationResult>> = centers
        .par_iter()
        .map(|&xi| {
            let ups = footprint(points, xi, k, h)?;
            truncate_column(coeffs, xi, points, &ups, &basis)
        })
        .collect();
    collect_footprint_results(centers, results)
}

fn collect_footprint_results<T>(centers: &[usize], results: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (&xi, r) in centers.iter().zip(results) {
        match r {
            Ok(v) => out.push(v),
            Err(e) => failures.push(FootprintFailure {
                center: xi,
                message: e.to_string(),
            }),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(Error::Footprints(failures))
    }
}

/// ϑ: the smallest eigenvalue of K_Υ restricted to range(P⊥), i.e. the lower
/// bound of the constrained quadratic form on the footprint.
pub fn theta_min(spec: &KernelSpec, points: &PointSet, ups: &Footprint) -> Result<f64> {
    let basis = spec.polynomial_basis();
    let kernel = kernel_matrix(spec, points, &ups.member_indices);
    let projector = GramProjector::new(&basis, points, &ups.member_indices).map_err(|e| remediate(e, ups))?;
    let z: DMatrix<f64> = projector.complement_basis();
    if z.ncols() == 0 {
        return Err(Error::InsufficientData(format!(
            "{} has no room beyond Π",
            footprint_hint(ups)
        )));
    }
    let reduced = z.transpose() * kernel * &z;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    Ok(reduced.symmetric_eigenvalues().min())
}

#[cfg(test)]
mod tests;
