use super::*;
use crate::geometry::{fill_distance_refined, generate_quasi_uniform, separation_radius, DomainRegion, PointSet};
use crate::interpolation::{assemble, full_coefficient_matrix, native_inner, solve_full_lagrange, BasisVariant, Expansion, LagrangeFunction};
use crate::kernels::KernelSpec;
use crate::quadrature::QuadratureGrid;
use nalgebra::DMatrix;

fn square(n: usize, seed: u64) -> PointSet {
    generate_quasi_uniform(&DomainRegion::unit_square(), n, seed).unwrap()
}

/// A pure polynomial expansion (no kernel terms) for norm checks.
fn polynomial(coeffs: Vec<f64>) -> (KernelSpec, PointSet, Expansion) {
    let spec = KernelSpec::thin_plate();
    let centers = PointSet::from_points(&[vec![0.5, 0.5]], None).unwrap();
    let f = Expansion {
        support: vec![0],
        kernel_coeffs: vec![0.0],
        poly_coeffs: coeffs,
    };
    (spec, centers, f)
}

#[test]
fn l2_norm_of_constant_and_linear_functions() {
    let grid = QuadratureGrid::new(&DomainRegion::unit_square(), 64).unwrap();
    let (spec, centers, one) = polynomial(vec![1.0, 0.0, 0.0]);
    assert!((l2_norm(&spec, &centers, &one, &grid) - 1.0).abs() < 1e-14);
    let (spec, centers, x1) = polynomial(vec![0.0, 1.0, 0.0]);
    let exact = (1.0f64 / 3.0).sqrt();
    let err = (l2_norm(&spec, &centers, &x1, &grid) - exact).abs();
    // midpoint rule: error δ²/24 in the squared norm
    assert!(err < 1e-4, "{err}");
}

#[test]
fn sobolev_norm_of_linear_function() {
    let grid = QuadratureGrid::new(&DomainRegion::unit_square(), 64).unwrap();
    let (spec, centers, x1) = polynomial(vec![0.0, 1.0, 0.0]);
    let s0 = sobolev_norm_fd(&spec, &centers, &x1, 0, &grid).unwrap();
    assert_eq!(s0, l2_norm(&spec, &centers, &x1, &grid));
    let s1 = sobolev_norm_fd(&spec, &centers, &x1, 1, &grid).unwrap();
    assert!((s1 - (4.0f64 / 3.0).sqrt()).abs() < 1e-4);
    assert!(sobolev_norm_fd(&spec, &centers, &x1, 3, &grid).is_err());
}

#[test]
fn fd_gradient_converges_at_second_order() {
    let spec = KernelSpec::matern(3, 2).unwrap();
    let centers = PointSet::from_points(&[vec![0.3, 0.6]], None).unwrap();
    let f = Expansion {
        support: vec![0],
        kernel_coeffs: vec![1.0],
        poly_coeffs: vec![],
    };
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = QuadratureGrid::new(&DomainRegion::unit_square(), n).unwrap();
            sobolev_norm_fd(&spec, &centers, &f, 1, &grid).unwrap()
        })
        .collect();
    // Richardson: successive differences shrink by about 4
    let ratio = (errs[0] - errs[1]).abs() / (errs[1] - errs[2]).abs();
    assert!((2.5..6.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn energy_norm_of_lagrange_function() {
    let points = square(60, 1);
    let spec = KernelSpec::thin_plate();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let chi = coeffs.lagrange(9);
    let e = energy_norm(&spec, &points, &chi).unwrap();
    assert!((e - coeffs.a[(9, 9)].sqrt()).abs() <= 1e-9 * e);
    let inner = native_inner(&spec, &points, &chi, &chi).unwrap();
    assert!((e * e - inner).abs() <= 1e-10 * inner);
    let zero = Expansion {
        support: vec![0, 1],
        kernel_coeffs: vec![0.0, 0.0],
        poly_coeffs: vec![1.0, 0.0, 0.0],
    };
    assert_eq!(energy_norm(&spec, &points, &zero).unwrap(), 0.0);
}

fn synthetic(nu: f64) -> Vec<DecaySample> {
    (0..400)
        .map(|i| {
            let t = 0.05 * i as f64;
            DecaySample {
                t,
                magnitude: 2.0 * (-nu * t).exp(),
                floor: 0.0,
            }
        })
        .collect()
}

#[test]
fn exact_exponential_is_recovered() {
    let fit = fit_envelope(&synthetic(3.0), DecayRegime::Pointwise).unwrap();
    assert!((fit.nu_hat - 3.0).abs() < 1e-6);
    assert!((fit.c_hat - 2.0).abs() < 1e-6);
    assert!(fit.r_squared > 1.0 - 1e-12);
    // everything below the floor is ignored
    assert!(fit.fitted.iter().all(|p| p[1] > FIT_FLOOR));
}

#[test]
fn too_few_samples_are_rejected() {
    let samples: Vec<DecaySample> = synthetic(3.0).into_iter().take(5).collect();
    assert!(matches!(
        fit_envelope(&samples, DecayRegime::Pointwise),
        Err(crate::Error::InsufficientData(_))
    ));
}

#[test]
fn thin_plate_pointwise_decay_is_stable_under_grid_refinement() {
    let omega = DomainRegion::unit_square();
    let points = square(400, 2);
    let spec = KernelSpec::thin_plate();
    let h = fill_distance_refined(&points, &omega).unwrap();
    let sys = assemble(&spec, &points).unwrap();
    let chi = solve_full_lagrange(&sys, points.closest_index(&[0.5, 0.5]).unwrap()).unwrap();
    let coarse = fit_pointwise_decay(&spec, &points, &chi, &QuadratureGrid::with_spacing(&omega, h / 3.0).unwrap(), h).unwrap();
    let fine = fit_pointwise_decay(&spec, &points, &chi, &QuadratureGrid::with_spacing(&omega, h / 6.0).unwrap(), h).unwrap();
    for fit in [&coarse, &fine] {
        assert!(fit.nu_hat > 0.0 && fit.r_squared >= 0.9, "{fit:?}");
    }
    assert!((coarse.nu_hat - fine.nu_hat).abs() <= 0.1 * fine.nu_hat);
}

#[test]
fn energy_tail_decays() {
    let omega = DomainRegion::unit_square();
    let points = square(400, 3);
    let spec = KernelSpec::thin_plate();
    let h = fill_distance_refined(&points, &omega).unwrap();
    let sys = assemble(&spec, &points).unwrap();
    let chi = solve_full_lagrange(&sys, points.closest_index(&[0.5, 0.5]).unwrap()).unwrap();
    let radii: Vec<f64> = (1..=10).map(|j| j as f64 * h).collect();
    let fit = fit_energy_decay(&spec, &points, &chi, &radii, h).unwrap();
    assert!(fit.nu_hat > 0.0 && fit.r_squared >= 0.85, "{fit:?}");
    assert!(fit_energy_decay(&spec, &points, &chi, &radii[..2], h).is_err());
}

#[test]
fn matern_coefficient_decay() {
    let omega = DomainRegion::unit_square();
    let points = square(400, 4);
    let spec = KernelSpec::matern(2, 2).unwrap();
    let h = fill_distance_refined(&points, &omega).unwrap();
    let q = separation_radius(&points).unwrap();
    let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
    let fit = fit_coefficient_decay(&coeffs, &points, h, q, spec.order()).unwrap();
    assert!(fit.nu_hat > 0.0 && fit.r_squared >= 0.85, "{fit:?}");
    assert!(fit.fitted.iter().all(|p| p[0] >= 1.0));
}

#[test]
#[ignore = "fails: for Matérn at h in 0.03..0.08 the decay rate scales with h, so the extrapolated constant halves per doubling of n (ratio 2.1)"]
fn matern_coefficient_decay_constant_is_stable_across_h() {
    let omega = DomainRegion::unit_square();
    let spec = KernelSpec::matern(2, 2).unwrap();
    let c: Vec<f64> = [200, 400]
        .iter()
        .map(|&n| {
            let points = square(n, 4);
            let h = fill_distance_refined(&points, &omega).unwrap();
            let q = separation_radius(&points).unwrap();
            let coeffs = full_coefficient_matrix(&assemble(&spec, &points).unwrap());
            fit_coefficient_decay(&coeffs, &points, h, q, spec.order()).unwrap().c_hat
        })
        .collect();
    let ratio = c[0] / c[1];
    assert!((0.5..=2.0).contains(&ratio), "{c:?}");
}

fn small_levels(variant: BasisVariant, k: Option<f64>) -> Vec<BasisLevel> {
    build_levels(
        &KernelSpec::thin_plate(),
        &DomainRegion::unit_square(),
        &[40, 80, 160],
        variant,
        k,
        11,
        &LevelOptions::default(),
    )
    .unwrap()
}

#[test]
fn synthesis_of_a_coordinate_vector_is_the_function_norm() {
    let levels = small_levels(BasisVariant::Full, None);
    let level = &levels[0];
    let mut a = DMatrix::zeros(level.xi_count, 1);
    a[(3, 0)] = 1.0;
    let measured = level.measure(&a, &[Measure::Lp(2.0)]).unwrap()[0][0];
    let chi = crate::interpolation::LagrangeFunction {
        center: 3,
        support: (0..level.centers.len()).collect(),
        kernel_coeffs: level.coeffs.column(3).iter().copied().collect(),
        poly_coeffs: level.poly.column(3).iter().copied().collect(),
        variant: BasisVariant::Full,
    };
    let direct = l2_norm(&level.spec, &level.centers, &chi, &level.grid);
    assert!((measured - direct).abs() <= 1e-10 * direct);
}

#[test]
fn bernstein_ratio_of_order_zero_is_one() {
    let levels = small_levels(BasisVariant::Full, None);
    let report = bernstein_check(&levels, Smoothness::Order(0), 20, 5).unwrap();
    assert!(report.sweep.iter().all(|s| s.y == 1.0));
    assert_eq!(report.slope, 0.0);
    assert!(report.pass);
}

#[test]
fn riesz_sup_norm_of_coordinate_functions() {
    let levels = small_levels(BasisVariant::Full, None);
    let level = &levels[1];
    let mut a = DMatrix::zeros(level.xi_count, 1);
    a[(7, 0)] = 1.0;
    let sup = level.measure(&a, &[Measure::Lp(f64::INFINITY)]).unwrap()[0][0];
    // the lattice need not hit ξ, but it comes close to the peak χ_ξ(ξ) = 1
    assert!(sup > 0.8, "{sup}");
}

#[test]
fn local_levels_satisfy_side_conditions() {
    let levels = small_levels(BasisVariant::Local, Some(2.0));
    let riesz = riesz_lower_check(&levels, 2.0, 20, 3).unwrap();
    assert!(riesz.sweep.iter().all(|s| s.y > 0.0));
    let energy = synthesis_sup(&levels[0], Smoothness::Energy, 20, 3).unwrap();
    assert!(energy > 0.0);
}

#[test]
fn sweep_reports_are_deterministic() {
    let a = synthesis_norm_check(&small_levels(BasisVariant::Full, None), Smoothness::Order(0), 20, 9).unwrap();
    let b = synthesis_norm_check(&small_levels(BasisVariant::Full, None), Smoothness::Order(0), 20, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let json: serde_json::Value = serde_json::to_value(&a).unwrap();
    for key in ["sweep", "slope", "target", "tolerance", "pass"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    let mut csv = Vec::new();
    a.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 4);
}

#[test]
fn trials_are_unit_vectors() {
    let t = trial_vectors(30, 20, 2.0, 1, "x");
    assert_eq!(t.ncols(), 20 + COORDINATE_TRIALS);
    for c in t.column_iter() {
        assert!((c.norm() - 1.0).abs() < 1e-14);
    }
    assert_eq!(t, trial_vectors(30, 20, 2.0, 1, "x"));
    assert_ne!(t, trial_vectors(30, 20, 2.0, 2, "x"));
    assert!(synthesis_sup(&small_levels(BasisVariant::Full, None)[0], Smoothness::Order(0), 5, 1).is_err());
}

#[test]
fn rate_reports_need_three_points() {
    let sweep = vec![SweepSample { x: 0.1, y: 1.0 }, SweepSample { x: 0.05, y: 2.0 }];
    assert!(RateReport::from_sweep("x", "h", sweep, -1.0, 0.3, PassRule::SlopeWithin).is_err());
}

#[test]
fn equicontinuity_constant_is_bounded_across_h() {
    let omega = DomainRegion::unit_square();
    let spec = KernelSpec::thin_plate();
    let eps = (f64::from(spec.order()) - 1.0 - 0.01).min(1.0);
    let constants: Vec<f64> = [100usize, 400]
        .iter()
        .map(|&n| {
            let points = square(n, 6);
            let h = fill_distance_refined(&points, &omega).unwrap();
            let q = separation_radius(&points).unwrap();
            let sys = assemble(&spec, &points).unwrap();
            let chi = solve_full_lagrange(&sys, points.closest_index(&[0.5, 0.5]).unwrap()).unwrap();
            let grid = QuadratureGrid::with_spacing(&omega, h / 4.0).unwrap();
            let values = lattice_values(&spec, &points, &chi, &grid);
            equicontinuity_constant(&grid, &values, q, eps)
        })
        .collect();
    let ratio = constants[0].max(constants[1]) / constants[0].min(constants[1]);
    assert!(ratio < 3.0, "{constants:?}");
}

#[test]
fn smoothness_parsing() {
    assert_eq!("m".parse::<Smoothness>().unwrap(), Smoothness::Energy);
    assert_eq!("1".parse::<Smoothness>().unwrap(), Smoothness::Order(1));
    assert!("3".parse::<Smoothness>().is_err());
    assert!("x".parse::<Smoothness>().is_err());
}

#[test]
fn level_from_stored_functions_matches_the_built_level() {
    let levels = small_levels(BasisVariant::Local, Some(2.0));
    let built = &levels[0];
    let functions: Vec<LagrangeFunction> = (0..built.xi_count)
        .map(|j| LagrangeFunction {
            center: j,
            support: (0..built.centers.len()).filter(|&i| built.coeffs[(i, j)] != 0.0).collect(),
            kernel_coeffs: (0..built.centers.len())
                .map(|i| built.coeffs[(i, j)])
                .filter(|&c| c != 0.0)
                .collect(),
            poly_coeffs: built.poly.column(j).iter().copied().collect(),
            variant: BasisVariant::Local,
        })
        .collect();
    let omega = DomainRegion::unit_square();
    let rebuilt = BasisLevel::from_functions(
        &built.spec,
        &omega,
        built.centers.clone(),
        built.xi_count,
        &functions,
        BasisVariant::Local,
        Some(2.0),
        &LevelOptions::default(),
    )
    .unwrap();
    assert_eq!(rebuilt.coeffs, built.coeffs);
    assert_eq!(rebuilt.h, built.h);
    assert_eq!(
        bernstein_ratio(&rebuilt, Smoothness::Order(1), 20, 1).unwrap(),
        bernstein_ratio(built, Smoothness::Order(1), 20, 1).unwrap()
    );
    assert!(BasisLevel::from_functions(
        &built.spec,
        &omega,
        built.centers.clone(),
        built.xi_count,
        &functions[1..],
        BasisVariant::Local,
        Some(2.0),
        &LevelOptions::default(),
    )
    .is_err());
}
