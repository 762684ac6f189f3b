use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{fit_loglog, LineFit};

/// One (sweep value, measured value) pair of a rate study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub x: f64,
    pub y: f64,
}

/// How a report decides pass/fail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PassRule {
    /// |slope − target| ≤ tolerance.
    SlopeWithin,
    /// Every y is positive, max/min < `max_drift`, and every y ≥ `fraction`·y(first).
    BoundedBelow { fraction: f64, max_drift: f64 },
}

/// A fitted log-log rate over a sweep, with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub name: String,
    pub sweep_variable: String,
    pub sweep: Vec<SweepSample>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub target: f64,
    pub tolerance: f64,
    pub rule: PassRule,
    pub pass: bool,
}

impl RateReport {
    /// Fits log y against log x (at least 3 samples) and applies `rule`.
    pub fn from_sweep(
        name: impl Into<String>,
        sweep_variable: impl Into<String>,
        sweep: Vec<SweepSample>,
        target: f64,
        tolerance: f64,
        rule: PassRule,
    ) -> Result<Self> {
        if sweep.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "a rate report needs at least 3 sweep points, got {}",
                sweep.len()
            )));
        }
        let xs: Vec<f64> = sweep.iter().map(|s| s.x).collect();
        let ys: Vec<f64> = sweep.iter().map(|s| s.y).collect();
        let LineFit {
            slope,
            intercept,
            r_squared,
            ..
        } = fit_loglog(&xs, &ys, 3)?;
        let pass = match rule {
            PassRule::SlopeWithin => (slope - target).abs() <= tolerance,
            PassRule::BoundedBelow { fraction, max_drift } => {
                let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
                let max = ys.iter().copied().fold(0.0, f64::max);
                min > 0.0 && max / min < max_drift && ys.iter().all(|&y| y >= fraction * ys[0])
            }
        };
        Ok(RateReport {
            name: name.into(),
            sweep_variable: sweep_variable.into(),
            sweep,
            slope,
            intercept,
            r_squared,
            target,
            tolerance,
            rule,
            pass,
        })
    }

    /// max y / min y over the sweep.
    pub fn drift(&self) -> f64 {
        let min = self.sweep.iter().map(|s| s.y).fold(f64::INFINITY, f64::min);
        let max = self.sweep.iter().map(|s| s.y).fold(0.0, f64::max);
        max / min
    }

    /// Writes the sample table as CSV with a `x,y` header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},value", self.sweep_variable)?;
        for s in &self.sweep {
            writeln!(out, "{:.16e},{:.16e}", s.x, s.y)?;
        }
        Ok(())
    }
}
