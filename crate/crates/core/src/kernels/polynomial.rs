use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monomial basis of the polynomials of total degree ≤ `degree` in `d` variables,
/// in graded-lexicographic order. An empty basis (no degree) stands for Π = {0}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialBasis {
    degree: Option<u32>,
    dim: usize,
    exponents: Vec<Vec<u32>>,
}

impl PolynomialBasis {
    pub fn new(degree: u32, dim: usize) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0; dim];
            push_graded(total, 0, &mut current, &mut exponents);
        }
        PolynomialBasis {
            degree: Some(degree),
            dim,
            exponents,
        }
    }

    /// The trivial space Π = {0}, used for positive definite kernels.
    pub fn empty(dim: usize) -> Self {
        PolynomialBasis {
            degree: None,
            dim,
            exponents: Vec::new(),
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis monomials, C(degree + d, d).
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// φ_j(x) = x^{α_j}.
    pub fn eval(&self, j: usize, x: &[f64]) -> Result<f64> {
        let alpha = self.exponents.get(j).ok_or_else(|| {
            Error::InvalidInput(format!(
                "monomial index {j} out of range for a basis of size {}",
                self.len()
            ))
        })?;
        Ok(monomial(alpha, x))
    }

    /// All basis values at `x`, written into `out` (length `len()`).
    pub fn eval_all(&self, x: &[f64], out: &mut [f64]) {
        for (o, alpha) in out.iter_mut().zip(&self.exponents) {
            *o = monomial(alpha, x);
        }
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_all(x, &mut out);
        out
    }
}

fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .fold(1.0, |acc, (&a, &xi)| acc * xi.powi(a as i32))
}

// Within one total degree, larger leading exponents come first.
fn push_graded(remaining: u32, axis: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let dim = current.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if axis == dim - 1 {
        current[axis] = remaining;
        out.push(current.clone());
        current[axis] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        current[axis] = a;
        push_graded(remaining - a, axis + 1, current, out);
    }
    current[axis] = 0;
}

#[cfg(test)]
fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_is_constant_one() {
        let basis = PolynomialBasis::new(0, 3);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis.eval(0, &[4.0, -2.0, 7.5]).unwrap(), 1.0);
    }

    #[test]
    fn linear_values_in_graded_lex_order() {
        let basis = PolynomialBasis::new(1, 2);
        assert_eq!(basis.values(&[2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn quadratic_values_in_graded_lex_order() {
        let basis = PolynomialBasis::new(2, 2);
        assert_eq!(
            basis.exponents(),
            &[
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(basis.values(&[1.0, -1.0]), vec![1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn sizes_match_binomial_formula() {
        for dim in 1..=4 {
            for degree in 0..=4u32 {
                let basis = PolynomialBasis::new(degree, dim);
                assert_eq!(
                    basis.len() as u64,
                    binomial(u64::from(degree) + dim as u64, dim as u64)
                );
                let mut seen = basis.exponents().to_vec();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), basis.len());
            }
        }
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let basis = PolynomialBasis::new(1, 2);
        assert!(basis.eval(3, &[0.0, 0.0]).is_err());
        assert!(PolynomialBasis::empty(2).eval(0, &[0.0, 0.0]).is_err());
    }
}
