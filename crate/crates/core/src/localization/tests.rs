use super::*;
use crate::geometry::{generate_quasi_uniform, geometry_stats, DomainRegion, DEFAULT_PROBE_DENSITY};
use crate::interpolation::{assemble, evaluate_expansion, full_coefficient_matrix, side_condition_violation};
use crate::rng;
use proptest::prelude::*;
use rand::Rng;

fn square(n: usize, seed: u64) -> PointSet {
    generate_quasi_uniform(&DomainRegion::unit_square(), n, seed).unwrap()
}

fn measured_h(points: &PointSet) -> f64 {
    geometry_stats(points, points.domain().unwrap(), DEFAULT_PROBE_DENSITY).unwrap().h
}

fn center_index(points: &PointSet) -> usize {
    points.closest_index(&[0.5, 0.5]).unwrap()
}

#[test]
fn constant_projector_is_the_mean() {
    let points = square(30, 1);
    let idx: Vec<usize> = (0..10).collect();
    let p = GramProjector::new(&PolynomialBasis::new(0, 2), &points, &idx).unwrap();
    let v: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
    let mean = v.iter().sum::<f64>() / 10.0;
    for x in p.project(&v) {
        assert!((x - mean).abs() < 1e-12);
    }
}

#[test]
fn projector_fixes_polynomial_data() {
    let points = square(40, 2);
    let idx: Vec<usize> = (5..25).collect();
    let p = GramProjector::new(&PolynomialBasis::new(1, 2), &points, &idx).unwrap();
    let v: Vec<f64> = idx.iter().map(|&i| 1.0 + 2.0 * points.point(i)[0] - points.point(i)[1]).collect();
    for (a, b) in p.project(&v).iter().zip(&v) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn projector_matches_pseudo_inverse() {
    let points = square(40, 3);
    let idx: Vec<usize> = (0..40).step_by(2).collect();
    let basis = PolynomialBasis::new(1, 2);
    let p = GramProjector::new(&basis, &points, &idx).unwrap();
    let phi = p.vandermonde().clone();
    let pinv = phi.clone().pseudo_inverse(1e-14).unwrap();
    let explicit = &phi * pinv;
    let mut r = rng::stream(3, "projector");
    let v: Vec<f64> = (0..idx.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    let oracle = &explicit * nalgebra::DVector::from_column_slice(&v);
    for (a, b) in p.project(&v).iter().zip(oracle.iter()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn collinear_subset_is_rejected() {
    let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64, 0.2 * i as f64]).collect();
    let points = PointSet::from_points(&pts, None).unwrap();
    let err = GramProjector::new(&PolynomialBasis::new(1, 2), &points, &[0, 1, 2, 3, 4]).unwrap_err();
    assert!(matches!(err, Error::NotUnisolvent { rank: 2, .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projector_is_idempotent_and_annihilates(seed in 0u64..500, degree in 0u32..3) {
        let points = square(60, seed);
        let idx: Vec<usize> = (0..30).collect();
        let p = GramProjector::new(&PolynomialBasis::new(degree, 2), &points, &idx).unwrap();
        let mut r = rng::stream(seed, "idempotent");
        let v: Vec<f64> = (0..30).map(|_| r.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let pv = p.project(&v);
        let ppv = p.project(&pv);
        let diff = pv.iter().zip(&ppv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-10 * norm);
        for m in p.moments(&p.complement(&v)) {
            prop_assert!(m.abs() <= 1e-10 * norm);
        }
    }
}

#[test]
fn truncation_to_everything_is_the_identity() {
    let points = square(60, 4);
    let spec = KernelSpec::thin_plate();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let h = measured_h(&points);
    let ups = footprint(&points, 7, 100.0, h).unwrap();
    assert_eq!(ups.len(), points.len());
    let t = truncate_lagrange(&coeffs.lagrange(7), &points, &ups, &spec.polynomial_basis()).unwrap();
    assert_eq!(t.tail_l1, 0.0);
    for (a, b) in t.raw.iter().zip(&t.corrected) {
        assert!((a - b).abs() <= 1e-9 * coeffs.a.amax());
    }
}

#[test]
fn matern_truncation_needs_no_correction() {
    let points = square(100, 5);
    let spec = KernelSpec::matern(2, 2).unwrap();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let h = measured_h(&points);
    let xi = center_index(&points);
    let ups = footprint(&points, xi, 1.0, h).unwrap();
    let t = truncate_column(&coeffs, xi, &points, &ups, &spec.polynomial_basis()).unwrap();
    assert_eq!(t.raw, t.corrected);
    assert_eq!(t.correction_l2, 0.0);
    assert!(t.tail_l1 > 0.0);
}

#[test]
fn thin_plate_truncation_restores_side_conditions() {
    let points = square(200, 6);
    let spec = KernelSpec::thin_plate();
    let basis = spec.polynomial_basis();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let h = measured_h(&points);
    let xi = center_index(&points);
    let ups = footprint(&points, xi, 3.0, h).unwrap();
    let t = truncate_column(&coeffs, xi, &points, &ups, &basis).unwrap();
    let projector = GramProjector::new(&basis, &points, &ups.member_indices).unwrap();
    let scale = t.raw.iter().map(|a| a.abs()).sum::<f64>();
    for m in projector.moments(&t.corrected) {
        assert!(m.abs() <= 1e-10 * scale, "moment {m}");
    }
    assert!(side_condition_violation(&basis, &points, &t.function) < 1e-10);
    // ‖P raw‖ ≤ ‖G⁻¹‖^{1/2} ‖Φᵀ raw‖
    let moments = projector.moments(&t.raw);
    let bound = projector.gram_inverse_norm().sqrt() * moments.iter().map(|m| m * m).sum::<f64>().sqrt();
    assert!(t.correction_l2 <= bound * (1.0 + 1e-10));
    // the correction is driven by the omitted mass
    let full_l1 = coeffs.a.column(xi).iter().map(|a| a.abs()).sum::<f64>();
    assert!((t.tail_l1 + scale - full_l1).abs() <= 1e-12 * full_l1);
}

#[test]
fn singleton_matern_footprint_is_the_scaled_kernel() {
    let points = square(50, 7);
    let spec = KernelSpec::matern(2, 2).unwrap();
    let ups = Footprint {
        center_index: 3,
        member_indices: vec![3],
        radius: 0.0,
        k: 1.0,
    };
    let b = solve_local_lagrange(&spec, &points, &ups).unwrap();
    assert_eq!(b.function.kernel_coeffs.len(), 1);
    assert!((b.function.kernel_coeffs[0] - 1.0).abs() < 1e-14);
}

#[test]
fn whole_set_footprint_reproduces_full_lagrange() {
    let points = square(80, 8);
    let spec = KernelSpec::thin_plate();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let h = measured_h(&points);
    let ups = footprint(&points, 11, 100.0, h).unwrap();
    let b = solve_local_lagrange(&spec, &points, &ups).unwrap();
    for (i, &a) in b.function.kernel_coeffs.iter().enumerate() {
        assert!((a - coeffs.a[(i, 11)]).abs() <= 1e-9 * coeffs.a.amax());
    }
}

#[test]
fn local_lagrange_is_cardinal_on_its_footprint() {
    let points = square(400, 9);
    let spec = KernelSpec::thin_plate();
    let h = measured_h(&points);
    let xi = center_index(&points);
    let ups = footprint(&points, xi, 4.0, h).unwrap();
    assert!(ups.len() < points.len());
    let b = solve_local_lagrange(&spec, &points, &ups).unwrap();
    for &z in &ups.member_indices {
        let v = evaluate_expansion(&spec, &points, &b.function, points.point(z));
        let expected = if z == xi { 1.0 } else { 0.0 };
        assert!((v - expected).abs() < 1e-8, "b({z}) = {v}");
    }
    assert!(side_condition_violation(&spec.polynomial_basis(), &points, &b.function) < 1e-10);
}

#[test]
fn parallel_basis_matches_individual_solves() {
    let points = square(150, 10);
    let spec = KernelSpec::thin_plate();
    let centers: Vec<usize> = (0..150).step_by(7).collect();
    let basis = build_local_basis(&spec, &points, &centers, 2.0).unwrap();
    let h = measured_h(&points);
    assert_eq!(basis.len(), centers.len());
    for (b, &xi) in basis.iter().zip(&centers) {
        let ups = footprint(&points, xi, 2.0, h).unwrap();
        let single = solve_local_lagrange(&spec, &points, &ups).unwrap();
        assert_eq!(b, &single);
    }
}

#[test]
fn tiny_footprints_fail_loudly_with_all_indices() {
    let points = square(100, 11);
    let spec = KernelSpec::thin_plate();
    let centers = [0, 5, 9];
    let err = build_local_basis_with_h(&spec, &points, &centers, 0.01, 0.1).unwrap_err();
    match err {
        Error::Footprints(failures) => {
            assert_eq!(failures.iter().map(|f| f.center).collect::<Vec<_>>(), centers);
            assert!(failures[0].message.contains("larger K"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn constant_gram_is_point_count() {
    let g = gram_at_count(&PolynomialBasis::new(0, 2), &[0.3, 0.4], 0.2, 37, 1).unwrap();
    assert!((g.inv_norm - 1.0 / 37.0).abs() < 1e-15);
}

#[test]
fn linear_gram_exponent_is_two() {
    let radii: Vec<f64> = (0..6).map(|i| 0.5 * 10f64.powf(-(i as f64) / 5.0)).collect();
    let sweep = gram_bound_sweep(&PolynomialBasis::new(1, 2), &[0.5, 0.5], &radii, 0.2, 4).unwrap();
    assert!((1.5..=2.5).contains(&sweep.two_tau_hat), "2τ̂ = {}", sweep.two_tau_hat);
    assert!(sweep.reports.iter().all(|g| g.fill_distance <= 0.2 * g.radius));
}

#[test]
fn doubling_density_roughly_halves_the_inverse_norm() {
    let basis = PolynomialBasis::new(1, 2);
    let coarse = gram_at_count(&basis, &[0.0, 0.0], 0.1, 100, 5).unwrap();
    let fine = gram_at_count(&basis, &[0.0, 0.0], 0.1, 200, 5).unwrap();
    let ratio = coarse.inv_norm / fine.inv_norm;
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn theta_is_positive() {
    let points = square(120, 12);
    let h = measured_h(&points);
    let xi = center_index(&points);
    for spec in [KernelSpec::thin_plate(), KernelSpec::matern(2, 2).unwrap()] {
        let ups = footprint(&points, xi, 2.0, h).unwrap();
        let theta = theta_min(&spec, &points, &ups).unwrap();
        assert!(theta > 0.0, "{spec:?}: {theta}");
    }
}
