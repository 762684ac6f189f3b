//! Norm estimation, decay-rate fits and empirical stability / Bernstein checks.

mod decay;
mod norms;
mod report;
mod stability;

pub use decay::{
    cardinality_residual, energy_tails, fit_coefficient_decay, fit_energy_decay, fit_envelope, fit_pointwise_decay,
    fit_samples, DecayFit, DecayRegime, DecaySample, EnergyTail, FIT_FLOOR, MIN_DECAY_SAMPLES,
};
pub use norms::{
    energy_norm, energy_norms_with_kernel, equicontinuity_constant, l2_norm, lattice_values, sobolev_norm_fd,
    Smoothness,
};
pub use report::{PassRule, RateReport, SweepSample};
pub use stability::{
    bernstein_check, bernstein_ratio, bernstein_sweep, bernstein_tolerance, build_levels, level_seed, riesz_lower,
    riesz_lower_check, synthesis_norm_check, synthesis_sup, trial_vectors, BasisLevel, LevelOptions, Measure,
    COORDINATE_TRIALS, MIN_TRIALS,
};

#[cfg(test)]
mod tests;
