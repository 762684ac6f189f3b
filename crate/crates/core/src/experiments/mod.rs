//! The acceptance studies. Each criterion runs end to end from a seed and yields
//! a serializable [`CriterionOutcome`]; wall-clock times are kept apart in
//! [`SuiteTiming`] so the report itself is reproducible byte for byte.

mod accuracy;
mod decay;
mod locality;
mod stability;

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::LevelOptions;
use crate::error::{Error, Result};
use crate::geometry::{fill_distance_refined, generate_quasi_uniform, DomainRegion, PointSet};
use crate::kernels::KernelSpec;
use crate::rng;

pub use locality::{KErrors, LocalityLevel};

/// Number of criteria in the suite.
pub const CRITERIA: u32 = 10;

/// Relative tolerance when matching a requested fill distance.
const FILL_MATCH: f64 = 0.05;

/// Settings for every study of the suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Kernels for the cardinality, identity, decay and locality studies.
    pub kernels: Vec<KernelSpec>,
    pub cardinality_n: usize,
    /// Nodes per axis of the probe grid for polynomial reproduction.
    pub reproduction_grid: usize,
    pub identity_n: usize,
    pub decay_h: Vec<f64>,
    /// Quadrature nodes per fill distance for the pointwise decay fit.
    pub decay_grid_per_h: f64,
    pub truncation_h: f64,
    pub k_list: Vec<f64>,
    /// Fill distances of the fixed-K comparison of local and full functions.
    pub local_h: Vec<f64>,
    pub local_k: f64,
    /// Collar width in units of h|ln h| for the locality studies.
    pub collar_k: f64,
    /// Per-axis coordinates of the probe centers (their tensor product).
    pub probe_coords: Vec<f64>,
    /// Nodes per fill distance for the sup-norm of local-minus-full differences.
    pub locality_grid_per_h: f64,
    pub gram_degree: u32,
    pub gram_center: Vec<f64>,
    pub gram_radii: Vec<f64>,
    pub gram_h0: f64,
    pub stability_kernel: KernelSpec,
    pub stability_n: Vec<usize>,
    pub stability_local_k: f64,
    pub trials: usize,
    pub level: LevelOptions,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 20_240_611,
            kernels: vec![KernelSpec::thin_plate(), KernelSpec::matern(2, 2).expect("valid spec")],
            cardinality_n: 400,
            reproduction_grid: 101,
            identity_n: 200,
            decay_h: vec![0.08, 0.04, 0.02],
            decay_grid_per_h: 3.0,
            truncation_h: 0.04,
            k_list: vec![2.0, 3.0, 4.0, 5.0],
            local_h: vec![0.08, 0.04, 0.02],
            local_k: 3.0,
            collar_k: 2.0,
            probe_coords: vec![0.3, 0.5, 0.7],
            locality_grid_per_h: 3.0,
            gram_degree: 1,
            gram_center: vec![0.5, 0.5],
            gram_radii: (0..6).map(|i| 0.5 * 10f64.powf(-(i as f64) / 5.0)).collect(),
            gram_h0: 0.2,
            stability_kernel: KernelSpec::thin_plate(),
            stability_n: vec![100, 200, 400, 800],
            stability_local_k: 2.0,
            trials: 20,
            level: LevelOptions::default(),
        }
    }
}

/// Verdict and measurements for one criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    /// Set when the study could not be carried out.
    pub error: Option<String>,
    pub details: serde_json::Value,
}

impl CriterionOutcome {
    fn new<T: Serialize>(id: u32, pass: bool, summary: String, details: &T) -> Result<Self> {
        Ok(CriterionOutcome {
            id,
            name: criterion_name(id).to_string(),
            pass,
            summary,
            error: None,
            details: serde_json::to_value(details).map_err(|e| Error::Parse(e.to_string()))?,
        })
    }

    fn failed(id: u32, error: &Error) -> Self {
        CriterionOutcome {
            id,
            name: criterion_name(id).to_string(),
            pass: false,
            summary: format!("study failed: {error}"),
            error: Some(error.to_string()),
            details: serde_json::Value::Null,
        }
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "cardinality and reproduction",
        2 => "coefficient matrix identity",
        3 => "pointwise decay",
        4 => "tail and truncation",
        5 => "local versus full",
        6 => "gram bound",
        7 => "synthesis exponents",
        8 => "riesz lower stability",
        9 => "bernstein inequality",
        10 => "determinism",
        _ => "unknown",
    }
}

/// The deterministic part of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: SuiteConfig,
    pub outcomes: Vec<CriterionOutcome>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    pub fn outcome(&self, id: u32) -> Option<&CriterionOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Appends the determinism verdict comparing this report against `other`.
    pub fn add_determinism(&mut self, other: &SuiteReport, threads: [usize; 2]) -> Result<()> {
        let a = self.to_json()?;
        let b = other.to_json()?;
        let first_difference = a
            .lines()
            .zip(b.lines())
            .position(|(x, y)| x != y)
            .or_else(|| (a.lines().count() != b.lines().count()).then(|| a.lines().count().min(b.lines().count())));
        let identical = a == b;
        let summary = if identical {
            format!("reports identical ({} bytes) with {} and {} threads", a.len(), threads[0], threads[1])
        } else {
            format!(
                "reports differ with {} and {} threads, first at line {}",
                threads[0],
                threads[1],
                first_difference.map_or(0, |l| l + 1)
            )
        };
        let details = serde_json::json!({
            "threads": threads,
            "bytes": [a.len(), b.len()],
            "identical": identical,
        });
        self.outcomes.retain(|o| o.id != 10);
        self.outcomes.push(CriterionOutcome::new(10, identical, summary, &details)?);
        Ok(())
    }
}

/// Wall-clock seconds per study, outside the reproducible report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteTiming {
    pub threads: usize,
    pub criteria: Vec<CriterionTime>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionTime {
    pub ids: Vec<u32>,
    pub seconds: f64,
}

/// Runs criteria 1 to 9 (those listed in `only`, if given). Determinism needs two
/// runs; see [`SuiteReport::add_determinism`].
pub fn run_suite(config: &SuiteConfig, only: Option<&[u32]>) -> (SuiteReport, SuiteTiming) {
    let wanted = |id: u32| only.is_none_or(|ids| ids.contains(&id));
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let mut timing = SuiteTiming {
        threads: rayon::current_num_threads(),
        ..SuiteTiming::default()
    };
    let mut run = |ids: Vec<u32>, study: &dyn Fn() -> Result<Vec<CriterionOutcome>>| {
        if !ids.iter().any(|&id| wanted(id)) {
            return;
        }
        let t = Instant::now();
        match study() {
            Ok(list) => outcomes.extend(list.into_iter().filter(|o| wanted(o.id))),
            Err(e) => outcomes.extend(ids.iter().filter(|&&id| wanted(id)).map(|&id| CriterionOutcome::failed(id, &e))),
        }
        timing.criteria.push(CriterionTime {
            ids,
            seconds: t.elapsed().as_secs_f64(),
        });
    };
    run(vec![1], &|| Ok(vec![accuracy::cardinality(config)?]));
    run(vec![2], &|| Ok(vec![accuracy::coefficient_identity(config)?]));
    run(vec![3], &|| Ok(vec![decay::pointwise(config)?]));
    run(vec![4, 5], &|| locality::tail_and_local(config));
    run(vec![6], &|| Ok(vec![locality::gram(config)?]));
    run(vec![7, 8, 9], &|| stability::stability(config));
    timing.total_seconds = start.elapsed().as_secs_f64();
    let report = SuiteReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        outcomes,
    };
    (report, timing)
}

/// Runs the suite inside a dedicated pool of `threads` workers.
pub fn run_suite_with_threads(
    config: &SuiteConfig,
    only: Option<&[u32]>,
    threads: usize,
) -> Result<(SuiteReport, SuiteTiming)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build a pool of {threads} threads: {e}")))?;
    Ok(pool.install(|| run_suite(config, only)))
}

/// Quasi-uniform points in `region` whose fill distance is within 5% of
/// `target_h` if such a count is found in a few secant steps, otherwise the
/// closest one seen. Returns the points and their measured fill distance.
pub fn generate_with_fill(region: &DomainRegion, target_h: f64, seed: u64) -> Result<(PointSet, f64)> {
    region.validate()?;
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(Error::InvalidInput(format!("target fill distance must be positive, got {target_h}")));
    }
    let d = region.dim() as i32;
    let mut n = ((region.volume() / target_h.powi(d)).ceil() as usize).max(d as usize + 2);
    let mut tried = BTreeSet::new();
    let mut best: Option<(PointSet, f64)> = None;
    let miss = |h: f64| (h / target_h - 1.0).abs();
    for _ in 0..8 {
        if !tried.insert(n) {
            break;
        }
        let points = generate_quasi_uniform(region, n, rng::derive_seed(seed, &format!("fill/{n}")))?;
        let h = fill_distance_refined(&points, region)?;
        if best.as_ref().is_none_or(|(_, b)| miss(h) < miss(*b)) {
            best = Some((points, h));
        }
        if miss(h) <= FILL_MATCH {
            break;
        }
        n = ((n as f64 * (h / target_h).powi(d)).round() as usize).max(d as usize + 2);
    }
    Ok(best.expect("at least one attempt"))
}

fn seed_for(config: &SuiteConfig, label: &str) -> u64 {
    rng::derive_seed(config.seed, label)
}

fn kernel_label(spec: &KernelSpec) -> String {
    format!("{}(m={},d={})", spec.family().as_str(), spec.order(), spec.dim())
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests;
