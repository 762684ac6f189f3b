//! Output files. Everything deterministic embeds the run provenance; wall-clock
//! timings go to their own file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lagrangekit::geometry::{read_csv, write_csv_to};
use lagrangekit::PointSet;
use serde::{Deserialize, Serialize};

use crate::config::Provenance;
use crate::error::AppError;

pub fn ensure_dir(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    fs::write(path, bytes).map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Io(e.to_string()))?;
    text.push('\n');
    write(path, text.as_bytes())
}

/// A point CSV preceded by comment lines carrying the provenance.
pub fn write_points(path: &Path, points: &PointSet, provenance: &Provenance) -> Result<(), AppError> {
    let config = serde_json::to_string(provenance.config).map_err(|e| AppError::Io(e.to_string()))?;
    let mut bytes = format!(
        "# {} {} seed={} config_hash={}\n# config={config}\n",
        provenance.tool, provenance.version, provenance.seed, provenance.config_hash
    )
    .into_bytes();
    write_csv_to(points, &mut bytes)?;
    write(path, &bytes)
}

/// Reads an input produced by an earlier command; a missing file is a usage error.
pub fn read_points(path: &Path, producer: &str) -> Result<PointSet, AppError> {
    if !path.exists() {
        return Err(AppError::Config(format!(
            "missing input {}; run `lagrangekit {producer}` first",
            path.display()
        )));
    }
    Ok(read_csv(path)?)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, producer: &str) -> Result<T, AppError> {
    let text = fs::read_to_string(path).map_err(|e| {
        AppError::Config(format!(
            "missing input {} ({e}); run `lagrangekit {producer}` first",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| AppError::Config(format!("cannot parse {}: {e}", path.display())))
}

pub fn points_path(out: &Path, n: usize) -> PathBuf {
    out.join(format!("points_n{n}.csv"))
}

pub fn extended_path(out: &Path, n: usize) -> PathBuf {
    out.join(format!("extended_n{n}.csv"))
}

pub fn stats_path(out: &Path, n: usize) -> PathBuf {
    out.join(format!("stats_n{n}.json"))
}

pub fn basis_path(out: &Path, variant: &str, n: usize) -> PathBuf {
    out.join(format!("basis_{variant}_n{n}.json"))
}

/// Wall-clock record of one command.
#[derive(Debug, Serialize)]
pub struct Timing {
    pub command: String,
    pub threads: usize,
    pub steps: Vec<Step>,
    pub total_seconds: f64,
    #[serde(skip)]
    start: Option<Instant>,
}

#[derive(Debug, Serialize)]
pub struct Step {
    pub label: String,
    pub seconds: f64,
}

impl Timing {
    pub fn start(command: &str) -> Self {
        Timing {
            command: command.to_string(),
            threads: rayon::current_num_threads(),
            steps: Vec::new(),
            total_seconds: 0.0,
            start: Some(Instant::now()),
        }
    }

    pub fn step<T>(&mut self, label: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let value = f();
        self.steps.push(Step {
            label: label.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        value
    }

    pub fn finish(mut self, out: &Path) -> Result<(), AppError> {
        self.total_seconds = self.start.take().map_or(0.0, |s| s.elapsed().as_secs_f64());
        write_json(&out.join(format!("timing_{}.json", self.command)), &self)
    }
}
