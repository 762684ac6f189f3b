use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::interpolation::{evaluate_with_basis, native_inner, KernelExpansion};
use crate::kernels::KernelSpec;
use crate::quadrature::{QuadratureGrid, MAX_FD_ORDER};

/// Smoothness index of a Sobolev-type norm: a finite-difference order, or the
/// native energy seminorm standing in for order m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    Order(u32),
    Energy,
}

impl Smoothness {
    /// Nominal order: σ itself, or m for the energy norm.
    pub fn order(self, spec: &KernelSpec) -> f64 {
        match self {
            Smoothness::Order(s) => f64::from(s),
            Smoothness::Energy => f64::from(spec.order()),
        }
    }

    pub fn label(self) -> String {
        match self {
            Smoothness::Order(s) => s.to_string(),
            Smoothness::Energy => "m".to_string(),
        }
    }
}

impl std::fmt::Display for Smoothness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for Smoothness {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s == "m" || s == "energy" {
            return Ok(Smoothness::Energy);
        }
        let order: u32 = s
            .parse()
            .map_err(|_| format!("invalid smoothness `{s}` (expected 0, 1, 2 or m)"))?;
        if order > MAX_FD_ORDER {
            return Err(format!("smoothness {order} is above the supported maximum {MAX_FD_ORDER}"));
        }
        Ok(Smoothness::Order(order))
    }
}

/// Lattice values of an expansion on `grid`.
pub fn lattice_values<E: KernelExpansion + ?Sized>(
    spec: &KernelSpec,
    centers: &PointSet,
    f: &E,
    grid: &QuadratureGrid,
) -> Vec<f64> {
    let basis = spec.polynomial_basis();
    (0..grid.lattice_len())
        .into_par_iter()
        .map(|i| evaluate_with_basis(spec, &basis, centers, f, &grid.lattice_point(i)))
        .collect()
}

/// Midpoint-rule ‖f‖_{L₂(Ω)}.
pub fn l2_norm<E: KernelExpansion + ?Sized>(
    spec: &KernelSpec,
    centers: &PointSet,
    f: &E,
    grid: &QuadratureGrid,
) -> f64 {
    grid.l2_norm(&lattice_values(spec, centers, f, grid))
}

/// Discrete W₂^σ(Ω) norm with central differences, σ ≤ 2.
pub fn sobolev_norm_fd<E: KernelExpansion + ?Sized>(
    spec: &KernelSpec,
    centers: &PointSet,
    f: &E,
    sigma: u32,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if sigma > MAX_FD_ORDER {
        return Err(Error::Unsupported(format!("σ = {sigma} is not supported")));
    }
    grid.sobolev_norm(&lattice_values(spec, centers, f, grid), sigma, 2.0)
}

/// Native-space seminorm √(aᵀKa).
pub fn energy_norm<E: KernelExpansion + ?Sized>(spec: &KernelSpec, centers: &PointSet, f: &E) -> Result<f64> {
    Ok(native_inner(spec, centers, f, f)?.max(0.0).sqrt())
}

/// √(cᵀKc) for each column c of `coeffs`, given the kernel matrix K on the centers.
pub fn energy_norms_with_kernel(kernel: &DMatrix<f64>, coeffs: &DMatrix<f64>) -> Vec<f64> {
    let kc = kernel * coeffs;
    (0..coeffs.ncols())
        .map(|t| coeffs.column(t).dot(&kc.column(t)).max(0.0).sqrt())
        .collect()
}

/// max over adjacent lattice node pairs inside Ω of |f(x) − f(y)| / (|x − y|/q)^ε.
pub fn equicontinuity_constant(grid: &QuadratureGrid, values: &[f64], q: f64, eps: f64) -> f64 {
    let nodes = grid.nodes();
    let inside: std::collections::HashSet<usize> = nodes.iter().copied().collect();
    let mut worst: f64 = 0.0;
    for &flat in nodes {
        for (axis, &s) in grid.strides().iter().enumerate() {
            let other = flat + s;
            if !inside.contains(&other) {
                continue;
            }
            let scaled = (grid.spacing()[axis] / q).powf(eps);
            worst = worst.max((values[flat] - values[other]).abs() / scaled);
        }
    }
    worst
}
