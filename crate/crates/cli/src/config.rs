//! The run configuration: a JSON file whose missing fields take defaults, with
//! command-line flags applied on top.

use std::path::{Path, PathBuf};

use lagrangekit::diagnostics::{LevelOptions, Smoothness, MIN_TRIALS};
use lagrangekit::experiments::SuiteConfig;
use lagrangekit::{BasisVariant, DomainRegion, KernelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::AppError;

/// A diagnostic that `diagnose` can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Decay,
    Tail,
    Gram,
    Synthesis,
    Riesz,
    Bernstein,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Decay,
        Check::Tail,
        Check::Gram,
        Check::Synthesis,
        Check::Riesz,
        Check::Bernstein,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub domain: DomainRegion,
    pub n_list: Vec<usize>,
    #[serde(rename = "K")]
    pub k: f64,
    /// Smoothness indices: "0", "1", "2" or "m".
    pub sigma: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub variant: BasisVariant,
    pub level: LevelOptions,
    pub checks: Vec<Check>,
    /// Settings of the acceptance suite run by `sweep`; its seed is the run seed.
    pub suite: SuiteConfig,
    // Where and how fast to run; neither changes any result, so both are left
    // out of the recorded copy.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kernel: KernelSpec::thin_plate(),
            domain: DomainRegion::unit_square(),
            n_list: vec![100, 200, 400, 800],
            k: 4.0,
            sigma: vec!["1".into(), "m".into()],
            trials: 20,
            seed: 1,
            variant: BasisVariant::Full,
            level: LevelOptions::default(),
            checks: Check::ALL.to_vec(),
            suite: SuiteConfig::default(),
            out: PathBuf::from("out"),
            threads: None,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub variant: Option<BasisVariant>,
    pub k: Option<f64>,
    pub sigma: Option<Vec<String>>,
}

impl ExperimentConfig {
    /// Reads `path` (or starts from the defaults), applies `overrides`, and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, AppError> {
        let mut config: ExperimentConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| AppError::Config(format!("invalid config {}: {e}", p.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(out) = overrides.out {
            config.out = out;
        }
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(threads) = overrides.threads {
            config.threads = Some(threads);
        }
        if let Some(variant) = overrides.variant {
            config.variant = variant;
        }
        if let Some(k) = overrides.k {
            config.k = k;
        }
        if let Some(sigma) = overrides.sigma {
            config.sigma = sigma;
        }
        config.suite.seed = config.seed;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |msg: String| Err(AppError::Config(msg));
        self.domain.validate().map_err(|e| AppError::Config(e.to_string()))?;
        if self.kernel.dim() != self.domain.dim() {
            return bad(format!(
                "kernel dimension {} does not match domain dimension {}",
                self.kernel.dim(),
                self.domain.dim()
            ));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("n_list must be a non-empty list of positive counts".into());
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("K must be positive, got {}", self.k));
        }
        self.smoothness()?;
        if self.trials < MIN_TRIALS {
            return bad(format!("trials must be at least {MIN_TRIALS}, got {}", self.trials));
        }
        if !(self.level.collar_k > 0.0 && self.level.grid_per_h > 0.0) {
            return bad("level.collar_k and level.grid_per_h must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn smoothness(&self) -> Result<Vec<Smoothness>, AppError> {
        self.sigma
            .iter()
            .map(|s| s.parse().map_err(AppError::Config))
            .collect()
    }

    /// Collar width factor for extending Ξ: at least K for footprint bases.
    pub fn collar_factor(&self) -> f64 {
        match self.variant {
            BasisVariant::Full => self.level.collar_k,
            _ => self.level.collar_k.max(self.k),
        }
    }

    /// K as recorded with a basis, absent for the full basis.
    pub fn basis_k(&self) -> Option<f64> {
        (self.variant != BasisVariant::Full).then_some(self.k)
    }
}

/// What every output file records about the run that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// SHA-256 of the compact JSON form of `config`.
    pub config_hash: String,
    pub config: &'a ExperimentConfig,
}

impl<'a> Provenance<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Self {
        let json = serde_json::to_string(config).expect("config serializes");
        Provenance {
            tool: "lagrangekit",
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            config_hash: hex::encode(Sha256::digest(json.as_bytes())),
            config,
        }
    }
}
