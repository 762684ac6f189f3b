//! Midpoint quadrature lattices with one ghost layer for central differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainRegion;

const GHOST: usize = 1;

/// A Sobolev order handled by finite differences (σ ≤ 2).
pub const MAX_FD_ORDER: u32 = 2;

/// Midpoint rule on the bounding box of a domain, restricted to nodes inside it.
///
/// The lattice carries one extra layer of nodes outside the box so that central
/// differences at every quadrature node use lattice values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    domain: DomainRegion,
    lower: Vec<f64>,
    counts: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    lattice_len: usize,
    nodes: Vec<usize>,
    weight: f64,
}

impl QuadratureGrid {
    /// `nodes_per_axis` midpoint nodes along every axis of the bounding box.
    pub fn new(domain: &DomainRegion, nodes_per_axis: usize) -> Result<Self> {
        domain.validate()?;
        let counts = vec![nodes_per_axis; domain.dim()];
        Self::with_counts(domain, counts)
    }

    /// Nodes spaced at most `spacing` apart along every axis.
    pub fn with_spacing(domain: &DomainRegion, spacing: f64) -> Result<Self> {
        domain.validate()?;
        if !(spacing > 0.0) {
            return Err(Error::InvalidInput("grid spacing must be positive".into()));
        }
        let (lower, upper) = domain.bounding_box();
        let counts = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| ((u - l) / spacing).ceil().max(1.0) as usize)
            .collect();
        Self::with_counts(domain, counts)
    }

    fn with_counts(domain: &DomainRegion, counts: Vec<usize>) -> Result<Self> {
        if counts.contains(&0) {
            return Err(Error::InvalidInput("grid needs at least one node per axis".into()));
        }
        let (lower, upper) = domain.bounding_box();
        let spacing: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .zip(&counts)
            .map(|((l, u), &c)| (u - l) / c as f64)
            .collect();
        let mut strides = Vec::with_capacity(counts.len());
        let mut stride = 1;
        for &c in &counts {
            strides.push(stride);
            stride *= c + 2 * GHOST;
        }
        let mut grid = QuadratureGrid {
            domain: domain.clone(),
            lower,
            counts,
            spacing,
            strides,
            lattice_len: stride,
            nodes: Vec::new(),
            weight: 0.0,
        };
        grid.weight = grid.spacing.iter().product();
        let mut point = vec![0.0; grid.dim()];
        grid.nodes = (0..grid.lattice_len)
            .filter(|&flat| {
                grid.is_interior(flat) && {
                    grid.lattice_point_into(flat, &mut point);
                    domain.contains(&point)
                }
            })
            .collect();
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn domain(&self) -> &DomainRegion {
        &self.domain
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Largest spacing δ over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Σ weights over the quadrature nodes (the box volume for boxes).
    pub fn total_weight(&self) -> f64 {
        self.weight * self.nodes.len() as f64
    }

    /// Flat-index step along each axis of the lattice.
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn lattice_len(&self) -> usize {
        self.lattice_len
    }

    /// Lattice indices of the quadrature nodes.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    fn is_interior(&self, flat: usize) -> bool {
        let mut rest = flat;
        for &c in &self.counts {
            let ext = c + 2 * GHOST;
            let i = rest % ext;
            rest /= ext;
            if i < GHOST || i >= c + GHOST {
                return false;
            }
        }
        true
    }

    fn lattice_point_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for k in 0..self.dim() {
            let ext = self.counts[k] + 2 * GHOST;
            let i = rest % ext;
            rest /= ext;
            out[k] = self.lower[k] + (i as f64 - GHOST as f64 + 0.5) * self.spacing[k];
        }
    }

    pub fn lattice_point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.lattice_point_into(flat, &mut out);
        out
    }

    /// Coordinates of the quadrature nodes, in node order.
    pub fn node_points(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().map(|&f| self.lattice_point(f)).collect()
    }

    /// Values of `f` at every lattice node (ghost layer included).
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.lattice_len)
            .into_par_iter()
            .map(|flat| f(&self.lattice_point(flat)))
            .collect()
    }

    /// D^α f at lattice node `flat` by second-order central differences, |α| ≤ 2.
    pub(crate) fn derivative(&self, values: &[f64], flat: usize, alpha: &[u32]) -> f64 {
        let axes: Vec<usize> = alpha
            .iter()
            .enumerate()
            .flat_map(|(k, &a)| std::iter::repeat_n(k, a as usize))
            .collect();
        match axes.as_slice() {
            [] => values[flat],
            [i] => {
                let s = self.strides[*i];
                (values[flat + s] - values[flat - s]) / (2.0 * self.spacing[*i])
            }
            [i, j] if i == j => {
                let s = self.strides[*i];
                (values[flat + s] - 2.0 * values[flat] + values[flat - s])
                    / (self.spacing[*i] * self.spacing[*i])
            }
            [i, j] => {
                let (si, sj) = (self.strides[*i], self.strides[*j]);
                (values[flat + si + sj] - values[flat + si - sj] - values[flat - si + sj]
                    + values[flat - si - sj])
                    / (4.0 * self.spacing[*i] * self.spacing[*j])
            }
            _ => unreachable!("derivative order above 2"),
        }
    }

    /// ‖f‖_{L_p} from lattice values; `p = ∞` gives the node maximum.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return self
                .nodes
                .iter()
                .map(|&f| values[f].abs())
                .fold(0.0, f64::max);
        }
        let sum: f64 = self.nodes.iter().map(|&f| self.weight * values[f].abs().powf(p)).sum();
        sum.powf(1.0 / p)
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        let sum: f64 = self.nodes.iter().map(|&f| self.weight * values[f] * values[f]).sum();
        sum.sqrt()
    }

    /// Discrete W_p^σ norm (Σ_{|α|≤σ} ‖D^α f‖_p^p)^{1/p} from lattice values.
    pub fn sobolev_norm(&self, values: &[f64], sigma: u32, p: f64) -> Result<f64> {
        if sigma > MAX_FD_ORDER {
            return Err(Error::Unsupported(format!(
                "finite-difference Sobolev norms support σ ≤ {MAX_FD_ORDER}, got {sigma}"
            )));
        }
        if values.len() != self.lattice_len {
            return Err(Error::InvalidInput("value count does not match the lattice".into()));
        }
        let alphas = multi_indices(self.dim(), sigma);
        if p == 2.0 {
            let sum: f64 = self
                .nodes
                .iter()
                .map(|&flat| {
                    let local: f64 = alphas
                        .iter()
                        .map(|a| {
                            let v = self.derivative(values, flat, a);
                            v * v
                        })
                        .sum();
                    self.weight * local
                })
                .sum();
            return Ok(sum.sqrt());
        }
        if p.is_infinite() {
            return Ok(self
                .nodes
                .iter()
                .flat_map(|&flat| alphas.iter().map(move |a| (flat, a)))
                .map(|(flat, a)| self.derivative(values, flat, a).abs())
                .fold(0.0, f64::max));
        }
        let sum: f64 = self
            .nodes
            .iter()
            .map(|&flat| {
                let local: f64 = alphas
                    .iter()
                    .map(|a| self.derivative(values, flat, a).abs().powf(p))
                    .sum();
                self.weight * local
            })
            .sum();
        Ok(sum.powf(1.0 / p))
    }
}

/// All multi-indices with |α| ≤ order.
pub(crate) fn multi_indices(dim: usize, order: u32) -> Vec<Vec<u32>> {
    (0..=order)
        .flat_map(|t| crate::kernels::PolynomialBasis::new(t, dim).exponents().to_vec())
        .filter(|a| a.iter().sum::<u32>() <= order)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_box_volume() {
        let region = DomainRegion::Box {
            lower: vec![0.0, -1.0],
            upper: vec![2.0, 0.5],
        };
        let grid = QuadratureGrid::new(&region, 37).unwrap();
        assert_relative_eq!(grid.total_weight(), 3.0, max_relative = 1e-14);
        assert_eq!(grid.nodes().len(), 37 * 37);
    }

    #[test]
    fn constants_and_linear_functions() {
        let grid = QuadratureGrid::new(&DomainRegion::unit_square(), 64).unwrap();
        let ones = grid.evaluate(|_| 1.0);
        assert_relative_eq!(grid.l2_norm(&ones), 1.0, max_relative = 1e-14);
        let x1 = grid.evaluate(|x| x[0]);
        let expected = (1.0f64 / 3.0).sqrt();
        assert!((grid.l2_norm(&x1) - expected).abs() < grid.max_spacing().powi(2));
        let h1 = grid.sobolev_norm(&x1, 1, 2.0).unwrap();
        assert!((h1 - (1.0f64 / 3.0 + 1.0).sqrt()).abs() < grid.max_spacing().powi(2));
    }

    #[test]
    fn second_derivatives_of_a_quadratic_are_exact() {
        let grid = QuadratureGrid::new(&DomainRegion::unit_square(), 10).unwrap();
        let values = grid.evaluate(|x| x[0] * x[1] + 3.0 * x[1] * x[1]);
        let flat = grid.nodes()[45];
        assert_relative_eq!(grid.derivative(&values, flat, &[1, 1]), 1.0, max_relative = 1e-9);
        assert_relative_eq!(grid.derivative(&values, flat, &[0, 2]), 6.0, max_relative = 1e-9);
        assert_relative_eq!(grid.derivative(&values, flat, &[2, 0]), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn order_zero_sobolev_is_l2_exactly() {
        let grid = QuadratureGrid::new(&DomainRegion::ball(vec![0.3, 0.1], 0.7), 33).unwrap();
        let values = grid.evaluate(|x| (3.0 * x[0]).sin() + x[1]);
        assert_eq!(grid.sobolev_norm(&values, 0, 2.0).unwrap(), grid.l2_norm(&values));
    }

    #[test]
    fn sigma_above_two_is_unsupported() {
        let grid = QuadratureGrid::new(&DomainRegion::unit_square(), 4).unwrap();
        let values = grid.evaluate(|_| 0.0);
        assert!(matches!(grid.sobolev_norm(&values, 3, 2.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 1).len(), 3);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }
}
