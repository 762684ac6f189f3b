//! Synthesis, Riesz and Bernstein sweeps for the full and local bases.

use serde::Serialize;

use super::{kernel_label, seed_for, CriterionOutcome, SuiteConfig};
use crate::diagnostics::{
    bernstein_check, build_levels, riesz_lower_check, synthesis_norm_check, RateReport, Smoothness,
};
use crate::error::Result;
use crate::geometry::DomainRegion;
use crate::interpolation::BasisVariant;

#[derive(Serialize)]
struct StabilityDetails {
    kernel: String,
    n: Vec<usize>,
    local_k: f64,
    /// Reports that decide the criterion.
    gating: Vec<RateReport>,
    /// The same checks for the other basis, recorded only.
    informational: Vec<RateReport>,
}

fn line(r: &RateReport) -> String {
    match r.rule {
        crate::diagnostics::PassRule::SlopeWithin => format!(
            "{} slope {:.3} (target {} ± {})",
            r.name, r.slope, r.target, r.tolerance
        ),
        crate::diagnostics::PassRule::BoundedBelow { .. } => {
            let ys: Vec<String> = r.sweep.iter().map(|s| format!("{:.3}", s.y)).collect();
            format!("{} c_hat [{}], drift {:.2}", r.name, ys.join(", "), r.drift())
        }
    }
}

fn outcome(id: u32, spec_label: &str, config: &SuiteConfig, gating: Vec<RateReport>, informational: Vec<RateReport>) -> Result<CriterionOutcome> {
    let pass = !gating.is_empty() && gating.iter().all(|r| r.pass);
    let summary = gating.iter().map(line).collect::<Vec<_>>().join("; ");
    CriterionOutcome::new(
        id,
        pass,
        summary,
        &StabilityDetails {
            kernel: spec_label.to_string(),
            n: config.stability_n.clone(),
            local_k: config.stability_local_k,
            gating,
            informational,
        },
    )
}

/// Criteria 7, 8 and 9 on one pair of level sweeps.
pub(super) fn stability(config: &SuiteConfig) -> Result<Vec<CriterionOutcome>> {
    let spec = &config.stability_kernel;
    let omega = DomainRegion::unit_square();
    let seed = seed_for(config, "stability");
    let trials = config.trials;
    let full = build_levels(spec, &omega, &config.stability_n, BasisVariant::Full, None, seed, &config.level)?;
    let local = build_levels(
        spec,
        &omega,
        &config.stability_n,
        BasisVariant::Local,
        Some(config.stability_local_k),
        seed,
        &config.level,
    )?;
    let label = kernel_label(spec);

    let synthesis = |levels| -> Result<Vec<RateReport>> {
        [Smoothness::Order(0), Smoothness::Energy]
            .into_iter()
            .map(|sigma| synthesis_norm_check(levels, sigma, trials, seed))
            .collect()
    };
    let bernstein = |levels| -> Result<Vec<RateReport>> {
        [Smoothness::Order(1), Smoothness::Energy]
            .into_iter()
            .map(|sigma| bernstein_check(levels, sigma, trials, seed))
            .collect()
    };

    let c7 = outcome(7, &label, config, synthesis(&full)?, synthesis(&local)?)?;
    let riesz = vec![riesz_lower_check(&full, 2.0, trials, seed)?, riesz_lower_check(&local, 2.0, trials, seed)?];
    let c8 = outcome(8, &label, config, riesz, Vec::new())?;
    let c9 = outcome(9, &label, config, bernstein(&full)?, bernstein(&local)?)?;
    Ok(vec![c7, c8, c9])
}
