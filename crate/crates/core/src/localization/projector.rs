use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::geometry::PointSet;
use crate::interpolation::saddle::{check_unisolvent, numerical_rank};
use crate::kernels::PolynomialBasis;

/// Orthogonal projector onto Π restricted to a point subset, P = Φ(ΦᵀΦ)⁻¹Φᵀ,
/// applied through a thin QR factor of Φ.
#[derive(Clone, Debug)]
pub struct GramProjector {
    phi: DMatrix<f64>,
    q: DMatrix<f64>,
}

impl GramProjector {
    /// Projector for Π on `points[indices]`.
    pub fn new(basis: &PolynomialBasis, points: &PointSet, indices: &[usize]) -> Result<Self> {
        let phi = DMatrix::from_fn(indices.len(), basis.len(), |i, j| {
            basis.eval(j, points.point(indices[i])).expect("index within basis")
        });
        Self::from_vandermonde(phi, || format!("{} points", indices.len()))
    }

    pub(crate) fn from_vandermonde(phi: DMatrix<f64>, context: impl FnOnce() -> String) -> Result<Self> {
        check_unisolvent(&phi, phi.ncols(), context)?;
        let q = if phi.ncols() == 0 {
            DMatrix::zeros(phi.nrows(), 0)
        } else {
            phi.clone().qr().q()
        };
        Ok(GramProjector { phi, q })
    }

    pub fn len(&self) -> usize {
        self.phi.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.nrows() == 0
    }

    pub fn vandermonde(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Pv.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        if self.q.ncols() == 0 {
            return vec![0.0; v.len()];
        }
        let v = DVector::from_column_slice(v);
        let coeffs = self.q.tr_mul(&v);
        (&self.q * coeffs).iter().copied().collect()
    }

    /// P⊥v = v − Pv.
    pub fn complement(&self, v: &[f64]) -> Vec<f64> {
        let p = self.project(v);
        v.iter().zip(p).map(|(a, b)| a - b).collect()
    }

    /// Φᵀv.
    pub fn moments(&self, v: &[f64]) -> Vec<f64> {
        self.phi.tr_mul(&DVector::from_column_slice(v)).iter().copied().collect()
    }

    /// G = ΦᵀΦ.
    pub fn gram(&self) -> DMatrix<f64> {
        self.phi.tr_mul(&self.phi)
    }

    /// ‖G⁻¹‖₂ = 1/λ_min(G) (0 when Π is trivial).
    pub fn gram_inverse_norm(&self) -> f64 {
        gram_inverse_norm(&self.phi)
    }

    /// Orthonormal basis of range(P⊥) as columns.
    pub fn complement_basis(&self) -> DMatrix<f64> {
        let n = self.len();
        let p_perp = DMatrix::identity(n, n) - &self.q * self.q.transpose();
        let eig = p_perp.symmetric_eigen();
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        DMatrix::from_fn(n, keep.len(), |i, c| eig.eigenvectors[(i, keep[c])])
    }
}

pub(crate) fn gram_inverse_norm(phi: &DMatrix<f64>) -> f64 {
    if phi.ncols() == 0 {
        return 0.0;
    }
    debug_assert_eq!(numerical_rank(phi), phi.ncols());
    let lambda_min = phi.tr_mul(phi).symmetric_eigenvalues().min();
    1.0 / lambda_min
}
