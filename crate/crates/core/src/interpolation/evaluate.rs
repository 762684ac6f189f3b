//! Batched evaluation of many expansions that share one center set.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::geometry::PointSet;
use crate::kernels::KernelSpec;
use crate::quadrature::QuadratureGrid;

/// Values at `targets` of the T expansions whose kernel coefficients are the
/// columns of `coeffs` (one row per center of `centers`) and polynomial
/// coefficients the columns of `poly`. Returns a `targets × T` matrix.
pub fn evaluate_columns(
    spec: &KernelSpec,
    centers: &PointSet,
    coeffs: &DMatrix<f64>,
    poly: &DMatrix<f64>,
    targets: &[Vec<f64>],
) -> DMatrix<f64> {
    evaluate_rows(spec, centers, coeffs, poly, targets.len(), |i| targets[i].clone())
}

/// Like [`evaluate_columns`] on every node of a quadrature lattice; each column of
/// the result is a lattice value vector.
pub fn evaluate_columns_on_lattice(
    spec: &KernelSpec,
    centers: &PointSet,
    coeffs: &DMatrix<f64>,
    poly: &DMatrix<f64>,
    grid: &QuadratureGrid,
) -> DMatrix<f64> {
    evaluate_rows(spec, centers, coeffs, poly, grid.lattice_len(), |i| grid.lattice_point(i))
}

fn evaluate_rows<P>(
    spec: &KernelSpec,
    centers: &PointSet,
    coeffs: &DMatrix<f64>,
    poly: &DMatrix<f64>,
    count: usize,
    point: P,
) -> DMatrix<f64>
where
    P: Fn(usize) -> Vec<f64> + Sync,
{
    assert_eq!(coeffs.nrows(), centers.len());
    assert_eq!(coeffs.ncols(), poly.ncols());
    let columns = coeffs.ncols();
    let basis = spec.polynomial_basis();
    assert_eq!(poly.nrows(), basis.len());
    // centers with an all-zero coefficient row contribute nothing
    let active: Vec<usize> = (0..centers.len())
        .filter(|&j| coeffs.row(j).iter().any(|&c| c != 0.0))
        .collect();
    let coeffs_t = coeffs.transpose(); // T × n, so each column t is contiguous per center
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = point(i);
            let kernel_row: Vec<f64> = active.iter().map(|&j| spec.eval(&x, centers.point(j))).collect();
            let poly_row = basis.values(&x);
            let mut out = vec![0.0; columns];
            for (&j, &kv) in active.iter().zip(&kernel_row) {
                let c = coeffs_t.column(j);
                for (o, &a) in out.iter_mut().zip(c.iter()) {
                    *o += a * kv;
                }
            }
            for (p, &pv) in poly_row.iter().enumerate() {
                for (t, o) in out.iter_mut().enumerate() {
                    *o += poly[(p, t)] * pv;
                }
            }
            out
        })
        .collect();
    DMatrix::from_fn(count, columns, |i, t| rows[i][t])
}
