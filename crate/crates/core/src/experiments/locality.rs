//! Tail, truncation and local-versus-full errors on footprints of growing K, and
//! the Gram-matrix bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{generate_with_fill, kernel_label, seed_for, strictly_decreasing, CriterionOutcome, SuiteConfig};
use crate::error::{Error, Result};
use crate::geometry::{extend_pointset, footprint, DomainRegion, PointSet};
use crate::interpolation::{assemble, evaluate_columns, BasisVariant, LagrangeFunction};
use crate::kernels::{KernelSpec, PolynomialBasis};
use crate::localization::{gram_bound_sweep, solve_local_lagrange, truncate_lagrange};
use crate::quadrature::QuadratureGrid;
use crate::stats::{fit_line, LineFit};

const MIN_R_SQUARED: f64 = 0.9;
const GRAM_TOLERANCE: f64 = 0.5;

/// Full Lagrange functions on an extended set X̃ ⊃ Ξ for a few interior probe
/// centers, with the Ω nodes on which differences are measured.
#[derive(Debug)]
pub struct LocalityLevel {
    pub spec: KernelSpec,
    /// Fill distance of Ξ in Ω.
    pub h: f64,
    pub xi_count: usize,
    pub centers: PointSet,
    /// Indices of the probe centers (in Ξ, hence in X̃).
    pub probes: Vec<usize>,
    a: DMatrix<f64>,
    poly: DMatrix<f64>,
    nodes: Vec<Vec<f64>>,
}

impl LocalityLevel {
    pub fn build(spec: &KernelSpec, config: &SuiteConfig, target_h: f64) -> Result<Self> {
        let omega = DomainRegion::unit_square();
        let (xi, h) = generate_with_fill(&omega, target_h, seed_for(config, &format!("locality/{target_h}")))?;
        if !(h < 1.0) {
            return Err(Error::InvalidInput(format!("fill distance {h} must be below 1")));
        }
        let centers = extend_pointset(&xi, &omega, config.collar_k * h * h.ln().abs())?;
        let mut probes = Vec::new();
        for p in probe_points(&config.probe_coords, xi.dim()) {
            let i = xi
                .closest_index(&p)
                .ok_or_else(|| Error::InvalidInput("empty point set".into()))?;
            if !probes.contains(&i) {
                probes.push(i);
            }
        }
        if probes.is_empty() {
            return Err(Error::InvalidInput("no probe centers configured".into()));
        }
        let sys = assemble(spec, &centers)?;
        let (a, poly) = sys.cardinal_columns(&probes);
        let grid = QuadratureGrid::with_spacing(&omega, h / config.locality_grid_per_h)?;
        Ok(LocalityLevel {
            spec: spec.clone(),
            h,
            xi_count: xi.len(),
            centers,
            probes,
            a,
            poly,
            nodes: grid.node_points(),
        })
    }

    fn chi(&self, j: usize) -> LagrangeFunction {
        LagrangeFunction {
            center: self.probes[j],
            support: (0..self.centers.len()).collect(),
            kernel_coeffs: self.a.column(j).iter().copied().collect(),
            poly_coeffs: self.poly.column(j).iter().copied().collect(),
            variant: BasisVariant::Full,
        }
    }

    /// Errors for each K, maximized over the probe centers. The truncation
    /// quantities are only computed when `truncation` is set.
    pub fn sweep(&self, ks: &[f64], truncation: bool) -> Result<Vec<KErrors>> {
        let basis = self.spec.polynomial_basis();
        let jobs: Vec<(usize, usize)> = (0..ks.len())
            .flat_map(|k| (0..self.probes.len()).map(move |j| (k, j)))
            .collect();
        let solved: Vec<ProbeResult> = jobs
            .par_iter()
            .map(|&(k, j)| self.probe(&basis, ks[k], j, truncation))
            .collect::<Result<Vec<_>>>()?;

        // one batched evaluation of every difference column
        let nx = self.centers.len();
        let per_job = if truncation { 2 } else { 1 };
        let mut diff = DMatrix::zeros(nx, jobs.len() * per_job);
        let mut diff_poly = DMatrix::zeros(basis.len(), jobs.len() * per_job);
        for (c, r) in solved.iter().enumerate() {
            let mut columns = vec![&r.local];
            if let Some(t) = &r.truncated {
                columns.push(t);
            }
            for (s, f) in columns.into_iter().enumerate() {
                let col = c * per_job + s;
                diff.set_column(col, &DVector::from_vec(f.dense_coeffs(nx)));
                diff_poly.set_column(col, &DVector::from_column_slice(&f.poly_coeffs));
            }
        }
        for c in 0..diff.ncols() {
            let j = jobs[c / per_job].1;
            let mut col = diff.column_mut(c);
            col -= self.a.column(j);
            let mut pcol = diff_poly.column_mut(c);
            pcol -= self.poly.column(j);
        }
        let values = evaluate_columns(&self.spec, &self.centers, &diff, &diff_poly, &self.nodes);
        let sup: Vec<f64> = (0..values.ncols()).map(|c| values.column(c).amax()).collect();

        Ok(ks
            .iter()
            .enumerate()
            .map(|(k, &kk)| {
                let rows: Vec<usize> = (0..jobs.len()).filter(|&c| jobs[c].0 == k).collect();
                let max_over = |f: &dyn Fn(usize) -> f64| rows.iter().map(|&c| f(c)).fold(0.0, f64::max);
                KErrors {
                    k: kk,
                    footprint_min: rows.iter().map(|&c| solved[c].footprint).min().unwrap_or(0),
                    footprint_max: rows.iter().map(|&c| solved[c].footprint).max().unwrap_or(0),
                    local_sup: max_over(&|c| sup[c * per_job]),
                    tail_l1: truncation.then(|| max_over(&|c| solved[c].tail_l1)),
                    truncation_sup: truncation.then(|| max_over(&|c| sup[c * per_job + 1])),
                }
            })
            .collect())
    }

    fn probe(&self, basis: &PolynomialBasis, k: f64, j: usize, truncation: bool) -> Result<ProbeResult> {
        let ups = footprint(&self.centers, self.probes[j], k, self.h)?;
        let local = solve_local_lagrange(&self.spec, &self.centers, &ups)?.function;
        let (truncated, tail_l1) = if truncation {
            let t = truncate_lagrange(&self.chi(j), &self.centers, &ups, basis)?;
            (Some(t.function), t.tail_l1)
        } else {
            (None, 0.0)
        };
        Ok(ProbeResult {
            footprint: ups.len(),
            local,
            truncated,
            tail_l1,
        })
    }
}

struct ProbeResult {
    footprint: usize,
    local: LagrangeFunction,
    truncated: Option<LagrangeFunction>,
    tail_l1: f64,
}

/// Errors at one K, maximized over the probe centers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KErrors {
    pub k: f64,
    pub footprint_min: usize,
    pub footprint_max: usize,
    /// max ‖b_ξ − χ_ξ‖ over the Ω nodes.
    pub local_sup: f64,
    /// max Σ_{ζ∉Υ} |A_ζξ|.
    pub tail_l1: Option<f64>,
    /// max ‖χ̃_ξ − χ_ξ‖ over the Ω nodes.
    pub truncation_sup: Option<f64>,
}

fn probe_points(coords: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                coords.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Serialize)]
struct LogLinear {
    slope: f64,
    r_squared: f64,
    decreasing: bool,
}

fn log_linear(ks: &[f64], ys: &[f64]) -> Result<LogLinear> {
    if let Some(bad) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::InsufficientData(format!("cannot fit the logarithm of {bad}")));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let LineFit { slope, r_squared, .. } = fit_line(ks, &logs, 3)?;
    Ok(LogLinear {
        slope,
        r_squared,
        decreasing: strictly_decreasing(ys),
    })
}

impl LogLinear {
    fn pass(&self, require_monotone: bool) -> bool {
        self.slope < 0.0 && self.r_squared >= MIN_R_SQUARED && (!require_monotone || self.decreasing)
    }
}

#[derive(Serialize)]
struct TruncationKernel {
    kernel: String,
    h: f64,
    n: usize,
    extended: usize,
    probes: usize,
    sweep: Vec<KErrors>,
    tail_fit: LogLinear,
    truncation_fit: LogLinear,
    pass: bool,
}

#[derive(Serialize)]
struct LocalAtH {
    target_h: f64,
    h: f64,
    extended: usize,
    local_sup: f64,
}

#[derive(Serialize)]
struct LocalKernel {
    kernel: String,
    h: f64,
    local_fit: LogLinear,
    k_sweep: Vec<f64>,
    fixed_k: f64,
    h_sweep: Vec<LocalAtH>,
    decreasing_in_h: bool,
    pass: bool,
}

/// Criteria 4 and 5, which share the K sweep at one fill distance.
pub(super) fn tail_and_local(config: &SuiteConfig) -> Result<Vec<CriterionOutcome>> {
    let mut truncation = Vec::new();
    let mut local = Vec::new();
    for spec in &config.kernels {
        let level = LocalityLevel::build(spec, config, config.truncation_h)?;
        let mut ks = config.k_list.clone();
        if !ks.contains(&config.local_k) {
            ks.push(config.local_k);
        }
        let errors = level.sweep(&ks, true)?;
        let swept: Vec<&KErrors> = errors.iter().filter(|e| config.k_list.contains(&e.k)).collect();
        let kv: Vec<f64> = swept.iter().map(|e| e.k).collect();
        let tails: Vec<f64> = swept.iter().map(|e| e.tail_l1.unwrap_or(f64::NAN)).collect();
        let truncs: Vec<f64> = swept.iter().map(|e| e.truncation_sup.unwrap_or(f64::NAN)).collect();
        let locals: Vec<f64> = swept.iter().map(|e| e.local_sup).collect();
        let tail_fit = log_linear(&kv, &tails)?;
        let truncation_fit = log_linear(&kv, &truncs)?;
        let local_fit = log_linear(&kv, &locals)?;
        truncation.push(TruncationKernel {
            kernel: kernel_label(spec),
            h: level.h,
            n: level.xi_count,
            extended: level.centers.len(),
            probes: level.probes.len(),
            pass: tail_fit.pass(true) && truncation_fit.pass(true),
            sweep: swept.iter().map(|e| (*e).clone()).collect(),
            tail_fit,
            truncation_fit,
        });

        let mut h_sweep = Vec::new();
        for &target in &config.local_h {
            let at = if target == config.truncation_h {
                LocalAtH {
                    target_h: target,
                    h: level.h,
                    extended: level.centers.len(),
                    local_sup: errors.iter().find(|e| e.k == config.local_k).expect("K swept").local_sup,
                }
            } else {
                let other = LocalityLevel::build(spec, config, target)?;
                let e = other.sweep(&[config.local_k], false)?;
                LocalAtH {
                    target_h: target,
                    h: other.h,
                    extended: other.centers.len(),
                    local_sup: e[0].local_sup,
                }
            };
            h_sweep.push(at);
        }
        h_sweep.sort_by(|a, b| b.h.total_cmp(&a.h));
        let decreasing_in_h = h_sweep.len() >= 2 && strictly_decreasing(&h_sweep.iter().map(|l| l.local_sup).collect::<Vec<_>>());
        local.push(LocalKernel {
            kernel: kernel_label(spec),
            h: level.h,
            pass: local_fit.pass(false) && decreasing_in_h,
            local_fit,
            k_sweep: locals,
            fixed_k: config.local_k,
            h_sweep,
            decreasing_in_h,
        });
    }

    let pass4 = !truncation.is_empty() && truncation.iter().all(|t| t.pass);
    let summary4 = truncation
        .iter()
        .map(|t| {
            format!(
                "{}: tail slope {:.2} (R^2 {:.3}, monotone {}), truncation slope {:.2} (R^2 {:.3}, monotone {})",
                t.kernel,
                t.tail_fit.slope,
                t.tail_fit.r_squared,
                t.tail_fit.decreasing,
                t.truncation_fit.slope,
                t.truncation_fit.r_squared,
                t.truncation_fit.decreasing
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let pass5 = !local.is_empty() && local.iter().all(|l| l.pass);
    let summary5 = local
        .iter()
        .map(|l| {
            let by_h: Vec<String> = l.h_sweep.iter().map(|s| format!("{:.1e}", s.local_sup)).collect();
            format!(
                "{}: slope in K {:.2} (R^2 {:.3}), K={} errors over decreasing h [{}]",
                l.kernel,
                l.local_fit.slope,
                l.local_fit.r_squared,
                l.fixed_k,
                by_h.join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(vec![
        CriterionOutcome::new(4, pass4, summary4, &truncation)?,
        CriterionOutcome::new(5, pass5, summary5, &local)?,
    ])
}

pub(super) fn gram(config: &SuiteConfig) -> Result<CriterionOutcome> {
    let basis = PolynomialBasis::new(config.gram_degree, config.gram_center.len());
    let sweep = gram_bound_sweep(
        &basis,
        &config.gram_center,
        &config.gram_radii,
        config.gram_h0,
        seed_for(config, "gram"),
    )?;
    let target = 2.0 * f64::from(config.gram_degree);
    let pass = (sweep.two_tau_hat - target).abs() <= GRAM_TOLERANCE;
    let summary = format!(
        "2tau_hat {:.3} (R^2 {:.4}) against {target} ± {GRAM_TOLERANCE}",
        sweep.two_tau_hat, sweep.r_squared
    );
    let details = serde_json::json!({
        "degree": config.gram_degree,
        "target": target,
        "tolerance": GRAM_TOLERANCE,
        "two_tau_hat": sweep.two_tau_hat,
        "r_squared": sweep.r_squared,
        "radii": sweep.reports.iter().map(|r| r.radius).collect::<Vec<_>>(),
        "points": sweep.reports.iter().map(|r| r.points).collect::<Vec<_>>(),
        "fill_distance": sweep.reports.iter().map(|r| r.fill_distance).collect::<Vec<_>>(),
        "inv_norm": sweep.reports.iter().map(|r| r.inv_norm).collect::<Vec<_>>(),
    });
    CriterionOutcome::new(6, pass, summary, &details)
}
