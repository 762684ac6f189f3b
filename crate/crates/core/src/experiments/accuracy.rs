//! Cardinality, polynomial reproduction, and the block-inverse identity.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{kernel_label, seed_for, CriterionOutcome, SuiteConfig};
use crate::error::{Error, Result};
use crate::geometry::{fill_distance_refined, generate_quasi_uniform, DomainRegion, PointSet};
use crate::interpolation::{assemble, SaddleSystem, evaluate_columns, full_coefficient_matrix, solve_full_lagrange};
use crate::kernels::KernelSpec;
use crate::quadrature::QuadratureGrid;

const CARDINALITY_TOL: f64 = 1e-7;
const REPRODUCTION_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Serialize)]
struct CardinalityKernel {
    kernel: String,
    n: usize,
    h: f64,
    condition: f64,
    max_cardinality_error: f64,
    /// None when the kernel has no polynomial part to reproduce.
    max_reproduction_error: Option<f64>,
    reproduced: Vec<String>,
    pass: bool,
}

pub(super) fn cardinality(config: &SuiteConfig) -> Result<CriterionOutcome> {
    let omega = DomainRegion::unit_square();
    let mut kernels = Vec::new();
    for spec in &config.kernels {
        let points = generate_quasi_uniform(&omega, config.cardinality_n, seed_for(config, "cardinality"))?;
        let h = fill_distance_refined(&points, &omega)?;
        let sys = assemble(spec, &points)?;
        let coeffs = full_coefficient_matrix(&sys);
        let at_nodes: Vec<Vec<f64>> = points.iter().map(<[f64]>::to_vec).collect();
        let values = evaluate_columns(spec, &points, &coeffs.a, &coeffs.poly, &at_nodes);
        let max_cardinality_error = (0..values.nrows())
            .flat_map(|i| (0..values.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| (values[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);

        let (max_reproduction_error, reproduced) = reproduction(spec, &sys, &points, &omega, config.reproduction_grid)?;
        let pass = max_cardinality_error <= CARDINALITY_TOL
            && max_reproduction_error.is_none_or(|e| e <= REPRODUCTION_TOL);
        kernels.push(CardinalityKernel {
            kernel: kernel_label(spec),
            n: points.len(),
            h,
            condition: sys.condition_estimate(),
            max_cardinality_error,
            max_reproduction_error,
            reproduced,
            pass,
        });
    }
    let pass = !kernels.is_empty() && kernels.iter().all(|k| k.pass);
    let summary = kernels
        .iter()
        .map(|k| {
            format!(
                "{}: cardinality {:.2e}, reproduction {}",
                k.kernel,
                k.max_cardinality_error,
                k.max_reproduction_error.map_or("n/a".to_string(), |e| format!("{e:.2e}"))
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    CriterionOutcome::new(1, pass, summary, &kernels)
}

/// Interpolates each basis monomial and one mixed combination, then takes the
/// largest error over a probe grid on Ω.
fn reproduction(
    spec: &KernelSpec,
    sys: &SaddleSystem,
    centers: &PointSet,
    omega: &DomainRegion,
    grid_nodes: usize,
) -> Result<(Option<f64>, Vec<String>)> {
    let basis = spec.polynomial_basis();
    if basis.is_empty() {
        return Ok((None, Vec::new()));
    }
    let nb = basis.len();
    // column j < nb is the j-th monomial; the last column mixes them all
    let weights: Vec<f64> = (0..nb).map(|j| 0.7 - 1.3 * j as f64 / nb as f64 + 0.4 * (j % 2) as f64).collect();
    let targets = |x: &[f64]| -> Vec<f64> {
        let phi = basis.values(x);
        let mixed: f64 = phi.iter().zip(&weights).map(|(p, w)| p * w).sum();
        phi.into_iter().chain(std::iter::once(mixed)).collect()
    };
    let cols = nb + 1;
    let n = centers.len();
    let mut a = DMatrix::zeros(n, cols);
    let mut c = DMatrix::zeros(nb, cols);
    for t in 0..cols {
        let y: Vec<f64> = centers.iter().map(|x| targets(x)[t]).collect();
        let (at, ct) = sys.solve_data(&y)?;
        a.set_column(t, &nalgebra::DVector::from_vec(at));
        c.set_column(t, &nalgebra::DVector::from_vec(ct));
    }
    let probes = QuadratureGrid::new(omega, grid_nodes)?.node_points();
    let values = evaluate_columns(spec, centers, &a, &c, &probes);
    let mut worst: f64 = 0.0;
    for (i, x) in probes.iter().enumerate() {
        for (t, exact) in targets(x).into_iter().enumerate() {
            worst = worst.max((values[(i, t)] - exact).abs());
        }
    }
    let mut names: Vec<String> = basis
        .exponents()
        .iter()
        .map(|e| format!("x^{e:?}"))
        .collect();
    names.push("mixed".into());
    Ok((Some(worst), names))
}

#[derive(Serialize)]
struct IdentityKernel {
    kernel: String,
    n: usize,
    condition: f64,
    max_abs_a: f64,
    /// max |A_block − A_columns| / max |A|.
    max_relative_difference: f64,
    max_abs_difference: f64,
    /// max |A − Aᵀ| / max |A|.
    max_relative_asymmetry: f64,
    pass: bool,
}

pub(super) fn coefficient_identity(config: &SuiteConfig) -> Result<CriterionOutcome> {
    let omega = DomainRegion::unit_square();
    let mut kernels = Vec::new();
    for spec in &config.kernels {
        let points = generate_quasi_uniform(&omega, config.identity_n, seed_for(config, "identity"))?;
        let sys = assemble(spec, &points)?;
        let n = sys.len();
        let nb = sys.basis().len();
        let kernel = sys.kernel_matrix();
        let phi = sys.vandermonde();
        let mut block = DMatrix::zeros(n + nb, n + nb);
        block.view_mut((0, 0), (n, n)).copy_from(kernel);
        block.view_mut((0, n), (n, nb)).copy_from(phi);
        block.view_mut((n, 0), (nb, n)).copy_from(&phi.transpose());
        let inverse = block
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("the saddle matrix has no LU inverse".into()))?;
        let a_block = inverse.view((0, 0), (n, n)).into_owned();
        let mut a_cols = DMatrix::zeros(n, n);
        for xi in 0..n {
            let chi = solve_full_lagrange(&sys, xi)?;
            a_cols.set_column(xi, &nalgebra::DVector::from_vec(chi.kernel_coeffs));
        }
        let max_abs_a = a_cols.amax();
        let max_abs_difference = (&a_block - &a_cols).amax();
        let max_relative_difference = max_abs_difference / max_abs_a;
        let max_relative_asymmetry = (&a_cols - a_cols.transpose()).amax() / max_abs_a;
        kernels.push(IdentityKernel {
            kernel: kernel_label(spec),
            n,
            condition: sys.condition_estimate(),
            max_abs_a,
            max_relative_difference,
            max_abs_difference,
            max_relative_asymmetry,
            pass: max_abs_difference <= IDENTITY_TOL && max_relative_asymmetry <= SYMMETRY_TOL,
        });
    }
    let pass = !kernels.is_empty() && kernels.iter().all(|k| k.pass);
    let summary = kernels
        .iter()
        .map(|k| {
            format!(
                "{}: block vs columns {:.2e} (abs {:.2e}), asymmetry {:.2e}",
                k.kernel, k.max_relative_difference, k.max_abs_difference, k.max_relative_asymmetry
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    CriterionOutcome::new(2, pass, summary, &kernels)
}
