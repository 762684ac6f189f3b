use super::KernelSpec;
use crate::error::{Error, Result};
use crate::geometry::DomainRegion;
use crate::quadrature::{QuadratureGrid, MAX_FD_ORDER};

/// Finite-difference estimate of ‖k(·, 0)‖_{W_p^σ(B(0, R))} on a midpoint lattice
/// with `grid` nodes per axis. Discretization error is O(1/grid).
pub fn kernel_sobolev_norm_estimate(
    spec: &KernelSpec,
    sigma: u32,
    p: f64,
    radius: f64,
    grid: usize,
) -> Result<f64> {
    if sigma > MAX_FD_ORDER {
        return Err(Error::Unsupported(format!("σ = {sigma} > {MAX_FD_ORDER}")));
    }
    if grid < 16 {
        return Err(Error::InvalidInput("grid must have at least 16 nodes per axis".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("p must be ≥ 1, got {p}")));
    }
    let ball = DomainRegion::ball(vec![0.0; spec.dim()], radius);
    let lattice = QuadratureGrid::new(&ball, grid)?;
    let origin = vec![0.0; spec.dim()];
    let values = lattice.evaluate(|x| spec.eval(x, &origin));
    lattice.sobolev_norm(&values, sigma, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matern_norm_is_stable_under_refinement() {
        let spec = KernelSpec::matern(2, 2).unwrap();
        let coarse = kernel_sobolev_norm_estimate(&spec, 0, 2.0, 30.0, 300).unwrap();
        let fine = kernel_sobolev_norm_estimate(&spec, 0, 2.0, 30.0, 600).unwrap();
        assert!(((fine - coarse) / fine).abs() < 0.02);
    }

    #[test]
    fn surface_spline_norm_grows_polynomially() {
        let spec = KernelSpec::thin_plate();
        let radii = [2.0, 4.0, 8.0, 16.0];
        let norms: Vec<f64> = radii
            .iter()
            .map(|&r| kernel_sobolev_norm_estimate(&spec, 0, 2.0, r, 128).unwrap())
            .collect();
        for w in radii.windows(2).zip(norms.windows(2)) {
            let exponent = (w.1[1] / w.1[0]).ln() / (w.0[1] / w.0[0]).ln();
            // r² log r over a disc of radius R: ‖·‖ ~ R³ log R
            assert!(exponent > 0.0 && exponent < 5.0, "exponent {exponent}");
        }
    }

    #[test]
    fn norm_is_homogeneous() {
        // The Matérn kernel for (m, d) = (2, 2) is r K_1(r); compare against a doubled copy.
        let spec = KernelSpec::matern(2, 2).unwrap();
        let ball = DomainRegion::ball(vec![0.0, 0.0], 3.0);
        let grid = QuadratureGrid::new(&ball, 64).unwrap();
        let single = grid.evaluate(|x| spec.eval(x, &[0.0, 0.0]));
        let doubled: Vec<f64> = single.iter().map(|v| 2.0 * v).collect();
        for sigma in 0..=2 {
            let a = grid.sobolev_norm(&single, sigma, 2.0).unwrap();
            let b = grid.sobolev_norm(&doubled, sigma, 2.0).unwrap();
            assert!((b - 2.0 * a).abs() <= 1e-12 * b);
        }
        assert_eq!(
            kernel_sobolev_norm_estimate(&spec, 0, 2.0, 3.0, 64).unwrap(),
            grid.l2_norm(&single)
        );
    }

    #[test]
    fn rejects_high_order() {
        let spec = KernelSpec::thin_plate();
        assert!(matches!(
            kernel_sobolev_norm_estimate(&spec, 3, 2.0, 1.0, 16),
            Err(Error::Unsupported(_))
        ));
    }
}
