//! Stationarity of the fitted pointwise decay rate across fill distances.

use serde::Serialize;

use super::{generate_with_fill, kernel_label, seed_for, CriterionOutcome, SuiteConfig};
use crate::diagnostics::{fit_energy_decay, fit_pointwise_decay, DecayFit};
use crate::error::{Error, Result};
use crate::geometry::DomainRegion;
use crate::interpolation::{assemble, solve_full_lagrange};
use crate::quadrature::QuadratureGrid;

const MIN_R_SQUARED: f64 = 0.9;
const MAX_DRIFT: f64 = 0.25;

#[derive(Serialize)]
struct DecayLevel {
    target_h: f64,
    h: f64,
    n: usize,
    center: Vec<f64>,
    nu_hat: f64,
    r_squared: f64,
    samples: usize,
    /// Rate of the tail energy beyond radius R, in R/h; informational.
    energy_mu_hat: Option<f64>,
    energy_r_squared: Option<f64>,
}

#[derive(Serialize)]
struct DecayKernel {
    kernel: String,
    levels: Vec<DecayLevel>,
    /// max ν̂ / min ν̂ − 1.
    drift: f64,
    pass: bool,
}

pub(super) fn pointwise(config: &SuiteConfig) -> Result<CriterionOutcome> {
    if config.decay_h.len() < 2 {
        return Err(Error::InsufficientData("the decay study needs at least two fill distances".into()));
    }
    let omega = DomainRegion::unit_square();
    let middle = vec![0.5, 0.5];
    let mut kernels = Vec::new();
    for spec in &config.kernels {
        let mut levels = Vec::new();
        for &target in &config.decay_h {
            let (points, h) = generate_with_fill(&omega, target, seed_for(config, &format!("decay/{target}")))?;
            let xi = points
                .closest_index(&middle)
                .ok_or_else(|| Error::InvalidInput("empty point set".into()))?;
            let sys = assemble(spec, &points)?;
            let chi = solve_full_lagrange(&sys, xi)?;
            let grid = QuadratureGrid::with_spacing(&omega, h / config.decay_grid_per_h)?;
            let fit: DecayFit = fit_pointwise_decay(spec, &points, &chi, &grid, h)?;
            let radii: Vec<f64> = (1..).map(|j| j as f64 * h).take_while(|&r| r <= 0.5).collect();
            let energy = fit_energy_decay(spec, &points, &chi, &radii, h).ok();
            levels.push(DecayLevel {
                target_h: target,
                h,
                n: points.len(),
                center: points.point(xi).to_vec(),
                nu_hat: fit.nu_hat,
                r_squared: fit.r_squared,
                samples: fit.samples,
                energy_mu_hat: energy.as_ref().map(|e| e.nu_hat),
                energy_r_squared: energy.as_ref().map(|e| e.r_squared),
            });
        }
        let max = levels.iter().map(|l| l.nu_hat).fold(f64::NEG_INFINITY, f64::max);
        let min = levels.iter().map(|l| l.nu_hat).fold(f64::INFINITY, f64::min);
        let drift = max / min - 1.0;
        let pass = min > 0.0
            && levels.iter().all(|l| l.r_squared >= MIN_R_SQUARED)
            && drift <= MAX_DRIFT;
        kernels.push(DecayKernel {
            kernel: kernel_label(spec),
            levels,
            drift,
            pass,
        });
    }
    let pass = !kernels.is_empty() && kernels.iter().all(|k| k.pass);
    let summary = kernels
        .iter()
        .map(|k| {
            let nus: Vec<String> = k.levels.iter().map(|l| format!("{:.3}", l.nu_hat)).collect();
            let r2 = k.levels.iter().map(|l| l.r_squared).fold(1.0, f64::min);
            format!(
                "{}: nu_hat [{}], min R^2 {:.3}, drift {:.1}%",
                k.kernel,
                nus.join(", "),
                r2,
                100.0 * k.drift
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    CriterionOutcome::new(3, pass, summary, &kernels)
}
