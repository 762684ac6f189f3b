//! Saddle-point collocation systems, full Lagrange functions and native-space
//! inner products.

mod dump;
mod evaluate;
pub(crate) mod saddle;

pub use dump::{BasisDump, BasisVariant};
pub use evaluate::{evaluate_columns, evaluate_columns_on_lattice};
pub use saddle::{assemble, assemble_subset, SaddleSystem};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::kernels::{KernelSpec, PolynomialBasis};

/// Relative tolerance for Σ_ζ a_ζ φ_j(ζ) = 0, measured against Σ_ζ |a_ζ φ_j(ζ)|.
pub const SIDE_CONDITION_TOL: f64 = 1e-10;

/// Looser tolerance used when validating arguments of inner products.
pub const SIDE_CONDITION_ARG_TOL: f64 = 1e-8;

/// Σ_ζ a_ζ k(·, ζ) + Σ_j c_j φ_j with centers taken from a point set by index.
pub trait KernelExpansion: Sync {
    fn support(&self) -> &[usize];
    fn kernel_coeffs(&self) -> &[f64];
    fn poly_coeffs(&self) -> &[f64];
}

/// An owned kernel expansion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub support: Vec<usize>,
    pub kernel_coeffs: Vec<f64>,
    pub poly_coeffs: Vec<f64>,
}

impl KernelExpansion for Expansion {
    fn support(&self) -> &[usize] {
        &self.support
    }
    fn kernel_coeffs(&self) -> &[f64] {
        &self.kernel_coeffs
    }
    fn poly_coeffs(&self) -> &[f64] {
        &self.poly_coeffs
    }
}

/// A Lagrange function for center `center`: full (cardinal on all of X), truncated
/// (coefficients restricted to a footprint and re-projected), or local (cardinal on
/// a footprint only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangeFunction {
    #[serde(rename = "center_index")]
    pub center: usize,
    #[serde(rename = "support_indices")]
    pub support: Vec<usize>,
    pub kernel_coeffs: Vec<f64>,
    pub poly_coeffs: Vec<f64>,
    pub variant: BasisVariant,
}

impl KernelExpansion for LagrangeFunction {
    fn support(&self) -> &[usize] {
        &self.support
    }
    fn kernel_coeffs(&self) -> &[f64] {
        &self.kernel_coeffs
    }
    fn poly_coeffs(&self) -> &[f64] {
        &self.poly_coeffs
    }
}

impl LagrangeFunction {
    /// Kernel coefficient at global index `zeta` (zero off the support).
    pub fn coefficient_at(&self, zeta: usize) -> f64 {
        self.support
            .iter()
            .position(|&s| s == zeta)
            .map_or(0.0, |i| self.kernel_coeffs[i])
    }

    /// Kernel coefficients scattered into a dense vector of length `n`.
    pub fn dense_coeffs(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&s, &a) in self.support.iter().zip(&self.kernel_coeffs) {
            out[s] = a;
        }
        out
    }
}

/// A = top-left block of the inverse saddle matrix; A[(ζ, ξ)] is the kernel
/// coefficient of χ_ξ at ζ, and `poly` holds the polynomial coefficients (N × n).
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    pub a: DMatrix<f64>,
    pub poly: DMatrix<f64>,
    pub support: Vec<usize>,
}

impl CoefficientMatrix {
    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    /// χ_ξ for the ξ-th center of the system.
    pub fn lagrange(&self, local: usize) -> LagrangeFunction {
        LagrangeFunction {
            center: self.support[local],
            support: self.support.clone(),
            kernel_coeffs: self.a.column(local).iter().copied().collect(),
            poly_coeffs: self.poly.column(local).iter().copied().collect(),
            variant: BasisVariant::Full,
        }
    }
}

/// Solves the saddle system with right-hand side (e_ξ, 0); `xi` is a global index
/// that must belong to the system's support.
pub fn solve_full_lagrange(sys: &SaddleSystem, xi: usize) -> Result<LagrangeFunction> {
    let local = sys.local_index(xi).ok_or_else(|| {
        Error::InvalidInput(format!("center {xi} is not part of the system"))
    })?;
    let (kernel_coeffs, poly_coeffs) = sys.cardinal_solve(local);
    Ok(LagrangeFunction {
        center: xi,
        support: sys.support().to_vec(),
        kernel_coeffs,
        poly_coeffs,
        variant: BasisVariant::Full,
    })
}

/// All full Lagrange coefficients at once (one factorization, n solves).
pub fn full_coefficient_matrix(sys: &SaddleSystem) -> CoefficientMatrix {
    let columns: Vec<usize> = (0..sys.len()).collect();
    let (a, poly) = sys.cardinal_columns(&columns);
    CoefficientMatrix {
        a,
        poly,
        support: sys.support().to_vec(),
    }
}

/// f(x) = Σ a_ζ k(x, ζ) + Σ c_j φ_j(x).
pub fn evaluate_expansion<E: KernelExpansion + ?Sized>(
    spec: &KernelSpec,
    centers: &PointSet,
    f: &E,
    x: &[f64],
) -> f64 {
    let basis = spec.polynomial_basis();
    evaluate_with_basis(spec, &basis, centers, f, x)
}

pub(crate) fn evaluate_with_basis<E: KernelExpansion + ?Sized>(
    spec: &KernelSpec,
    basis: &PolynomialBasis,
    centers: &PointSet,
    f: &E,
    x: &[f64],
) -> f64 {
    let kernel_part: f64 = f
        .support()
        .iter()
        .zip(f.kernel_coeffs())
        .map(|(&s, &a)| a * spec.eval(x, centers.point(s)))
        .sum();
    let poly_part: f64 = basis
        .values(x)
        .iter()
        .zip(f.poly_coeffs())
        .map(|(p, c)| p * c)
        .sum();
    kernel_part + poly_part
}

/// Largest relative side-condition violation max_j |Σ a_ζ φ_j(ζ)| / Σ |a_ζ φ_j(ζ)|.
pub fn side_condition_violation<E: KernelExpansion + ?Sized>(
    basis: &PolynomialBasis,
    centers: &PointSet,
    f: &E,
) -> f64 {
    let n_poly = basis.len();
    let mut sums = vec![0.0; n_poly];
    let mut abs_sums = vec![0.0; n_poly];
    let mut values = vec![0.0; n_poly];
    for (&s, &a) in f.support().iter().zip(f.kernel_coeffs()) {
        basis.eval_all(centers.point(s), &mut values);
        for j in 0..n_poly {
            sums[j] += a * values[j];
            abs_sums[j] += (a * values[j]).abs();
        }
    }
    (0..n_poly)
        .map(|j| {
            if abs_sums[j] == 0.0 {
                0.0
            } else {
                sums[j].abs() / abs_sums[j]
            }
        })
        .fold(0.0, f64::max)
}

/// ⟨f, g⟩_{N(k)} = Σ_{ζ,η} a^f_ζ k(ζ, η) a^g_η. Polynomial parts lie in the
/// nullspace of the seminorm and do not contribute.
pub fn native_inner<F, G>(spec: &KernelSpec, centers: &PointSet, f: &F, g: &G) -> Result<f64>
where
    F: KernelExpansion + ?Sized,
    G: KernelExpansion + ?Sized,
{
    let basis = spec.polynomial_basis();
    for (name, violation) in [
        ("first", side_condition_violation(&basis, centers, f)),
        ("second", side_condition_violation(&basis, centers, g)),
    ] {
        if violation > SIDE_CONDITION_ARG_TOL {
            return Err(Error::InvalidInput(format!(
                "{name} argument violates the polynomial side conditions (relative {violation:e})"
            )));
        }
    }
    let mut total = 0.0;
    for (&s, &a) in f.support().iter().zip(f.kernel_coeffs()) {
        if a == 0.0 {
            continue;
        }
        let x = centers.point(s);
        let row: f64 = g
            .support()
            .iter()
            .zip(g.kernel_coeffs())
            .map(|(&t, &b)| b * spec.eval(x, centers.point(t)))
            .sum();
        total += a * row;
    }
    Ok(total)
}
