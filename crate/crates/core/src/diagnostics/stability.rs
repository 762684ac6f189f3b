//! Synthesis, Riesz lower-stability and Bernstein checks over h-sweeps of bases
//! built on extended point sets.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::norms::{energy_norms_with_kernel, Smoothness};
use super::report::{PassRule, RateReport, SweepSample};
use crate::error::{Error, Result};
use crate::geometry::{
    extend_pointset, fill_distance_refined, generate_quasi_uniform, separation_radius, DomainRegion, PointSet,
};
use crate::interpolation::saddle::kernel_matrix;
use crate::interpolation::{assemble, evaluate_columns_on_lattice, BasisVariant, LagrangeFunction};
use crate::kernels::KernelSpec;
use crate::localization::{build_local_basis_with_h, truncate_lagrange};
use crate::quadrature::QuadratureGrid;
use crate::rng;

/// Coordinate vectors e_ξ added to the random trials.
pub const COORDINATE_TRIALS: usize = 8;

/// Minimum number of random trial vectors.
pub const MIN_TRIALS: usize = 20;

/// How each sweep level is laid out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelOptions {
    /// Collar width around Ω in units of h|ln h| (at least K for footprint bases).
    pub collar_k: f64,
    /// Quadrature nodes per fill distance along each axis.
    pub grid_per_h: f64,
}

impl Default for LevelOptions {
    fn default() -> Self {
        LevelOptions {
            collar_k: 1.0,
            grid_per_h: 5.0,
        }
    }
}

/// A basis {v_ξ : ξ ∈ Ξ} stored as coefficient columns over the extended centers
/// X̃ (whose leading points are Ξ), with the quadrature grid on Ω.
#[derive(Debug)]
pub struct BasisLevel {
    pub spec: KernelSpec,
    pub centers: PointSet,
    pub xi_count: usize,
    pub coeffs: DMatrix<f64>,
    pub poly: DMatrix<f64>,
    pub variant: BasisVariant,
    pub k: Option<f64>,
    /// Fill distance of Ξ in Ω.
    pub h: f64,
    /// Separation radius of Ξ.
    pub q: f64,
    pub grid: QuadratureGrid,
    kernel: OnceLock<DMatrix<f64>>,
}

/// What to measure for each synthesized function s = Σ a_ξ v_ξ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    Lp(f64),
    Smooth(Smoothness),
}

impl BasisLevel {
    /// Builds the basis for Ξ ⊂ Ω: extends Ξ by a collar, then takes full,
    /// truncated or local Lagrange functions on X̃ for the centers in Ξ.
    pub fn build(
        spec: &KernelSpec,
        omega: &DomainRegion,
        xi: &PointSet,
        variant: BasisVariant,
        k: Option<f64>,
        options: &LevelOptions,
    ) -> Result<Self> {
        let h = fill_distance_refined(xi, omega)?;
        let q = separation_radius(xi)?;
        if !(h < 1.0) {
            return Err(Error::InvalidInput(format!("fill distance {h} must be below 1")));
        }
        let k_needed = match variant {
            BasisVariant::Full => None,
            _ => Some(k.ok_or_else(|| {
                Error::InvalidInput(format!("the {} basis needs K", variant.as_str()))
            })?),
        };
        let collar_k = k_needed.map_or(options.collar_k, |kk| kk.max(options.collar_k));
        let width = collar_k * h * h.ln().abs();
        let centers = extend_pointset(xi, omega, width)?;
        let n_xi = xi.len();
        let grid = QuadratureGrid::with_spacing(omega, h / options.grid_per_h)?;
        let n_poly = spec.polynomial_basis().len();
        let (coeffs, poly, kernel) = match variant {
            BasisVariant::Full => {
                let sys = assemble(spec, &centers)?;
                let cols: Vec<usize> = (0..n_xi).collect();
                let (a, p) = sys.cardinal_columns(&cols);
                (a, p, Some(sys.kernel_matrix().clone()))
            }
            BasisVariant::Local => {
                let xs: Vec<usize> = (0..n_xi).collect();
                let local = build_local_basis_with_h(spec, &centers, &xs, k_needed.unwrap(), h)?;
                let functions: Vec<LagrangeFunction> = local.into_iter().map(|b| b.function).collect();
                let (a, p) = scatter(&functions, centers.len(), n_poly);
                (a, p, None)
            }
            BasisVariant::Truncated => {
                let sys = assemble(spec, &centers)?;
                let cols: Vec<usize> = (0..n_xi).collect();
                let (a, p) = sys.cardinal_columns(&cols);
                let basis = spec.polynomial_basis();
                let kk = k_needed.unwrap();
                let support: Vec<usize> = (0..centers.len()).collect();
                let functions = (0..n_xi)
                    .map(|j| {
                        let chi = LagrangeFunction {
                            center: j,
                            support: support.clone(),
                            kernel_coeffs: a.column(j).iter().copied().collect(),
                            poly_coeffs: p.column(j).iter().copied().collect(),
                            variant: BasisVariant::Full,
                        };
                        let ups = crate::geometry::footprint(&centers, j, kk, h)?;
                        Ok(truncate_lagrange(&chi, &centers, &ups, &basis)?.function)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (a, p) = scatter(&functions, centers.len(), n_poly);
                (a, p, Some(sys.kernel_matrix().clone()))
            }
        };
        let level = BasisLevel {
            spec: spec.clone(),
            centers,
            xi_count: n_xi,
            coeffs,
            poly,
            variant,
            k: k_needed,
            h,
            q,
            grid,
            kernel: OnceLock::new(),
        };
        if let Some(kernel) = kernel {
            let _ = level.kernel.set(kernel);
        }
        Ok(level)
    }

    /// Rebuilds a level from stored functions over `centers`, whose first
    /// `xi_count` points are Ξ ⊂ Ω and whose i-th function belongs to the i-th
    /// point of Ξ.
    #[allow(clippy::too_many_arguments)]
    pub fn from_functions(
        spec: &KernelSpec,
        omega: &DomainRegion,
        centers: PointSet,
        xi_count: usize,
        functions: &[LagrangeFunction],
        variant: BasisVariant,
        k: Option<f64>,
        options: &LevelOptions,
    ) -> Result<Self> {
        if functions.len() != xi_count || xi_count == 0 || xi_count > centers.len() {
            return Err(Error::InvalidInput(format!(
                "{} functions for {xi_count} centers out of {}",
                functions.len(),
                centers.len()
            )));
        }
        let n_poly = spec.polynomial_basis().len();
        for (i, f) in functions.iter().enumerate() {
            if f.center != i {
                return Err(Error::InvalidInput(format!("function {i} is centered at {}", f.center)));
            }
            if f.support.iter().any(|&s| s >= centers.len()) || f.poly_coeffs.len() != n_poly {
                return Err(Error::InvalidInput(format!("function {i} does not fit the center set")));
            }
        }
        let all: Vec<usize> = (0..xi_count).collect();
        let xi = centers.subset(&all)?;
        let h = fill_distance_refined(&xi, omega)?;
        let q = separation_radius(&xi)?;
        let grid = QuadratureGrid::with_spacing(omega, h / options.grid_per_h)?;
        let (coeffs, poly) = scatter(functions, centers.len(), n_poly);
        Ok(BasisLevel {
            spec: spec.clone(),
            centers,
            xi_count,
            coeffs,
            poly,
            variant,
            k,
            h,
            q,
            grid,
            kernel: OnceLock::new(),
        })
    }

    fn kernel(&self) -> &DMatrix<f64> {
        self.kernel.get_or_init(|| {
            let all: Vec<usize> = (0..self.centers.len()).collect();
            kernel_matrix(&self.spec, &self.centers, &all)
        })
    }

    /// Kernel and polynomial coefficients of s_t = Σ_ξ a_{ξt} v_ξ for each column t.
    pub fn synthesize(&self, a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        (&self.coeffs * a, &self.poly * a)
    }

    /// Each requested measure for each trial column of `a`.
    pub fn measure(&self, a: &DMatrix<f64>, measures: &[Measure]) -> Result<Vec<Vec<f64>>> {
        let (c, p) = self.synthesize(a);
        let needs_lattice = measures
            .iter()
            .any(|m| !matches!(m, Measure::Smooth(Smoothness::Energy)));
        let lattice = needs_lattice.then(|| evaluate_columns_on_lattice(&self.spec, &self.centers, &c, &p, &self.grid));
        measures
            .iter()
            .map(|m| match m {
                Measure::Smooth(Smoothness::Energy) => Ok(energy_norms_with_kernel(self.kernel(), &c)),
                Measure::Lp(p) => {
                    let l = lattice.as_ref().expect("lattice evaluated");
                    Ok((0..a.ncols()).map(|t| self.grid.lp_norm(l.column(t).as_slice(), *p)).collect())
                }
                Measure::Smooth(Smoothness::Order(s)) => {
                    let l = lattice.as_ref().expect("lattice evaluated");
                    (0..a.ncols())
                        .map(|t| self.grid.sobolev_norm(l.column(t).as_slice(), *s, 2.0))
                        .collect()
                }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }
}

fn scatter(functions: &[LagrangeFunction], n: usize, n_poly: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::zeros(n, functions.len());
    let mut p = DMatrix::zeros(n_poly, functions.len());
    for (j, f) in functions.iter().enumerate() {
        for (&s, &c) in f.support.iter().zip(&f.kernel_coeffs) {
            a[(s, j)] = c;
        }
        for (i, &c) in f.poly_coeffs.iter().enumerate() {
            p[(i, j)] = c;
        }
    }
    (a, p)
}

/// `trials` Gaussian vectors plus up to [`COORDINATE_TRIALS`] coordinate vectors
/// (evenly spaced indices), each scaled to unit ℓ_p norm.
pub fn trial_vectors(n: usize, trials: usize, p: f64, seed: u64, label: &str) -> DMatrix<f64> {
    let coords = COORDINATE_TRIALS.min(n);
    let mut out = DMatrix::zeros(n, trials + coords);
    let mut r = rng::stream(seed, label);
    for t in 0..trials {
        for i in 0..n {
            out[(i, t)] = StandardNormal.sample(&mut r);
        }
    }
    for c in 0..coords {
        let idx = if coords == 1 { 0 } else { c * (n - 1) / (coords - 1) };
        out[(idx, trials + c)] = 1.0;
    }
    for mut col in out.column_iter_mut() {
        let norm = lp(col.as_slice(), p);
        col /= norm;
    }
    out
}

fn lp(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().map(|x| x.abs()).fold(0.0, f64::max)
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_TRIALS} random trials are required, got {trials}"
        )));
    }
    Ok(())
}

fn level_label(kind: &str, level: &BasisLevel) -> String {
    format!("{kind}/{}/{}", level.variant.as_str(), level.xi_count)
}

/// max over trials of ‖Σ a_ξ v_ξ‖_{W₂^σ} / ‖a‖₂ on one level.
pub fn synthesis_sup(level: &BasisLevel, sigma: Smoothness, trials: usize, seed: u64) -> Result<f64> {
    check_trials(trials)?;
    let a = trial_vectors(level.xi_count, trials, 2.0, seed, &level_label("synthesis", level));
    let norms = level.measure(&a, &[Measure::Smooth(sigma)])?;
    Ok(norms[0].iter().copied().fold(0.0, f64::max))
}

/// Synthesis sup across an h-sweep; the log-log slope should be d/2 − σ (±0.35).
pub fn synthesis_norm_check(
    levels: &[BasisLevel],
    sigma: Smoothness,
    trials: usize,
    seed: u64,
) -> Result<RateReport> {
    let first = levels
        .first()
        .ok_or_else(|| Error::InsufficientData("no sweep levels".into()))?;
    let sweep = levels
        .iter()
        .map(|l| Ok(SweepSample { x: l.h, y: synthesis_sup(l, sigma, trials, seed)? }))
        .collect::<Result<Vec<_>>>()?;
    let target = first.dim() as f64 / 2.0 - sigma.order(&first.spec);
    RateReport::from_sweep(
        format!("synthesis/{}/sigma={}", first.variant.as_str(), sigma),
        "h",
        sweep,
        target,
        0.35,
        PassRule::SlopeWithin,
    )
}

/// min over trials of q^{−d/p} ‖Σ a_ξ v_ξ‖_{L_p(Ω)} / ‖a‖_p on one level.
pub fn riesz_lower(level: &BasisLevel, p: f64, trials: usize, seed: u64) -> Result<f64> {
    check_trials(trials)?;
    let a = trial_vectors(level.xi_count, trials, p, seed, &level_label("riesz", level));
    let norms = level.measure(&a, &[Measure::Lp(p)])?;
    let scale = if p.is_infinite() { 1.0 } else { level.q.powf(-(level.dim() as f64) / p) };
    Ok(norms[0].iter().copied().fold(f64::INFINITY, f64::min) * scale)
}

/// Riesz lower constant across an h-sweep. Passes if it stays positive, drifts
/// by less than 4×, and never drops below a quarter of its coarsest value.
pub fn riesz_lower_check(levels: &[BasisLevel], p: f64, trials: usize, seed: u64) -> Result<RateReport> {
    let first = levels
        .first()
        .ok_or_else(|| Error::InsufficientData("no sweep levels".into()))?;
    let mut sweep = levels
        .iter()
        .map(|l| Ok(SweepSample { x: l.h, y: riesz_lower(l, p, trials, seed)? }))
        .collect::<Result<Vec<_>>>()?;
    // coarsest level first
    sweep.sort_by(|a, b| b.x.total_cmp(&a.x));
    RateReport::from_sweep(
        format!("riesz/{}/p={p}", first.variant.as_str()),
        "h",
        sweep,
        0.0,
        4.0,
        PassRule::BoundedBelow {
            fraction: 0.25,
            max_drift: 4.0,
        },
    )
}

/// max over trials of ‖s‖_{W₂^σ(Ω)} / ‖s‖_{L₂(Ω)} on one level.
pub fn bernstein_ratio(level: &BasisLevel, sigma: Smoothness, trials: usize, seed: u64) -> Result<f64> {
    check_trials(trials)?;
    let a = trial_vectors(level.xi_count, trials, 2.0, seed, &level_label("bernstein", level));
    let norms = level.measure(&a, &[Measure::Smooth(sigma), Measure::Lp(2.0)])?;
    Ok(norms[0]
        .iter()
        .zip(&norms[1])
        .map(|(s, l)| s / l)
        .fold(0.0, f64::max))
}

/// Tolerance on the Bernstein slope: 0.3 for finite differences, 0.4 for the
/// energy norm.
pub fn bernstein_tolerance(sigma: Smoothness) -> f64 {
    match sigma {
        Smoothness::Energy => 0.4,
        Smoothness::Order(_) => 0.3,
    }
}

/// Bernstein ratio across an h-sweep; the log-log slope should be −σ.
pub fn bernstein_check(levels: &[BasisLevel], sigma: Smoothness, trials: usize, seed: u64) -> Result<RateReport> {
    let first = levels
        .first()
        .ok_or_else(|| Error::InsufficientData("no sweep levels".into()))?;
    let sweep = levels
        .iter()
        .map(|l| Ok(SweepSample { x: l.h, y: bernstein_ratio(l, sigma, trials, seed)? }))
        .collect::<Result<Vec<_>>>()?;
    RateReport::from_sweep(
        format!("bernstein/{}/sigma={}", first.variant.as_str(), sigma),
        "h",
        sweep,
        -sigma.order(&first.spec),
        bernstein_tolerance(sigma),
        PassRule::SlopeWithin,
    )
}

/// Seed for the centers of sweep level `n`.
pub fn level_seed(seed: u64, n: usize) -> u64 {
    rng::derive_seed(seed, &format!("points/{n}"))
}

/// Generates Ξ ⊂ Ω for each n and builds one basis level per n.
pub fn build_levels(
    spec: &KernelSpec,
    omega: &DomainRegion,
    n_list: &[usize],
    variant: BasisVariant,
    k: Option<f64>,
    seed: u64,
    options: &LevelOptions,
) -> Result<Vec<BasisLevel>> {
    if n_list.len() < 3 {
        return Err(Error::InsufficientData("a sweep needs at least 3 point counts".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let xi = generate_quasi_uniform(omega, n, level_seed(seed, n))?;
            BasisLevel::build(spec, omega, &xi, variant, k, options)
        })
        .collect()
}

/// End-to-end Bernstein study: generate, extend, build, measure, fit.
#[allow(clippy::too_many_arguments)]
pub fn bernstein_sweep(
    spec: &KernelSpec,
    omega: &DomainRegion,
    n_list: &[usize],
    sigma: Smoothness,
    variant: BasisVariant,
    k: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<RateReport> {
    let levels = build_levels(spec, omega, n_list, variant, k, seed, &LevelOptions::default())?;
    bernstein_check(&levels, sigma, trials, seed)
}
