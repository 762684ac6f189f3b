use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::kernels::{KernelSpec, PolynomialBasis};
use crate::linalg::SymmetricFactorization;

/// Condition estimates above this are logged.
pub const CONDITION_WARN: f64 = 1e12;
/// Condition estimates above this are an error.
pub const CONDITION_LIMIT: f64 = 1e15;

/// The block system [K Φ; Φᵀ 0] on a set of centers, factored once.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    spec: KernelSpec,
    basis: PolynomialBasis,
    support: Vec<usize>,
    kernel: DMatrix<f64>,
    phi: DMatrix<f64>,
    factor: SymmetricFactorization,
    condition: f64,
}

/// Assembles and factors the system on all of `points`.
pub fn assemble(spec: &KernelSpec, points: &PointSet) -> Result<SaddleSystem> {
    let all: Vec<usize> = (0..points.len()).collect();
    assemble_subset(spec, points, &all)
}

/// Assembles and factors the system on the centers `points[support[i]]`.
pub fn assemble_subset(spec: &KernelSpec, points: &PointSet, support: &[usize]) -> Result<SaddleSystem> {
    if points.dim() != spec.dim() {
        return Err(Error::InvalidInput(format!(
            "kernel dimension {} does not match point dimension {}",
            spec.dim(),
            points.dim()
        )));
    }
    if support.is_empty() {
        return Err(Error::InvalidInput("cannot assemble a system on no centers".into()));
    }
    if let Some(&bad) = support.iter().find(|&&s| s >= points.len()) {
        return Err(Error::InvalidInput(format!("center index {bad} out of range")));
    }
    let basis = spec.polynomial_basis();
    let n = support.len();
    let n_poly = basis.len();

    let phi = DMatrix::from_fn(n, n_poly, |i, j| {
        basis.eval(j, points.point(support[i])).expect("index within basis")
    });
    check_unisolvent(&phi, n_poly, || format!("{n} centers"))?;

    let kernel = kernel_matrix(spec, points, support);
    let size = n + n_poly;
    let mut block = DMatrix::zeros(size, size);
    block.view_mut((0, 0), (n, n)).copy_from(&kernel);
    block.view_mut((0, n), (n, n_poly)).copy_from(&phi);
    block.view_mut((n, 0), (n_poly, n)).copy_from(&phi.transpose());
    let factor = SymmetricFactorization::factor(&block)?;
    let condition = factor.condition_estimate();
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned(condition));
    }
    if condition > CONDITION_WARN {
        log::warn!("saddle system on {n} centers has condition estimate {condition:e}");
    }
    Ok(SaddleSystem {
        spec: spec.clone(),
        basis,
        support: support.to_vec(),
        kernel,
        phi,
        factor,
        condition,
    })
}

/// K_{ij} = k(x_{s_i}, x_{s_j}); columns filled in parallel.
pub(crate) fn kernel_matrix(spec: &KernelSpec, points: &PointSet, support: &[usize]) -> DMatrix<f64> {
    let n = support.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n.max(1)).enumerate().for_each(|(j, col)| {
        let y = points.point(support[j]);
        for (i, value) in col.iter_mut().enumerate() {
            *value = spec.eval(points.point(support[i]), y);
        }
    });
    DMatrix::from_vec(n, n, data)
}

/// Fails unless the n × N matrix Φ has full column rank.
pub(crate) fn check_unisolvent(
    phi: &DMatrix<f64>,
    required: usize,
    context: impl FnOnce() -> String,
) -> Result<()> {
    if required == 0 {
        return Ok(());
    }
    let rank = numerical_rank(phi);
    if rank < required {
        return Err(Error::NotUnisolvent {
            rank,
            required,
            context: context(),
        });
    }
    Ok(())
}

pub(crate) fn numerical_rank(phi: &DMatrix<f64>) -> usize {
    if phi.nrows() < phi.ncols() {
        // fewer points than monomials: rank of the square Gram of the rows
        let values = (phi * phi.transpose()).symmetric_eigenvalues();
        let max = values.amax();
        return values.iter().filter(|v| v.abs() > 1e-20 * max.max(1e-300)).count();
    }
    let values = phi.clone().svd(false, false).singular_values;
    let max = values.max();
    values.iter().filter(|&&s| s > 1e-10 * max).count()
}

impl SaddleSystem {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn basis(&self) -> &PolynomialBasis {
        &self.basis
    }

    /// Global indices of the centers, in system order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn kernel_matrix(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn vandermonde(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn factorization(&self) -> &SymmetricFactorization {
        &self.factor
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.support.iter().position(|&s| s == global)
    }

    /// Solves with data (y, 0): returns kernel and polynomial coefficients of the
    /// minimal-seminorm interpolant of `y`.
    pub fn solve_data(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if y.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} data values, got {}",
                self.len(),
                y.len()
            )));
        }
        let mut rhs = y.to_vec();
        rhs.resize(self.len() + self.basis.len(), 0.0);
        self.factor.solve_in_place(&mut rhs);
        let poly = rhs.split_off(self.len());
        Ok((rhs, poly))
    }

    /// Coefficients of the cardinal function for local center `local`.
    pub(crate) fn cardinal_solve(&self, local: usize) -> (Vec<f64>, Vec<f64>) {
        let mut data = vec![0.0; self.len()];
        data[local] = 1.0;
        self.solve_data(&data).expect("length matches")
    }

    /// Cardinal coefficients for several local centers: (n × k, N × k).
    pub fn cardinal_columns(&self, locals: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.len();
        let size = n + self.basis.len();
        let mut rhs = DMatrix::zeros(size, locals.len());
        for (c, &l) in locals.iter().enumerate() {
            rhs[(l, c)] = 1.0;
        }
        self.factor.solve_columns(&mut rhs);
        let a = rhs.rows(0, n).into_owned();
        let poly = rhs.rows(n, self.basis.len()).into_owned();
        (a, poly)
    }
}
