use std::path::Path;

use lagrangekit::diagnostics::{
    bernstein_check, fit_pointwise_decay, level_seed, riesz_lower_check, synthesis_norm_check, BasisLevel,
    DecayFit, PassRule, RateReport, SweepSample,
};
use lagrangekit::experiments::{run_suite_with_threads, SuiteReport, SuiteTiming};
use lagrangekit::geometry::{
    extend_pointset, fill_distance_refined, footprint, generate_quasi_uniform, separation_radius,
};
use lagrangekit::interpolation::{assemble, BasisDump};
use lagrangekit::localization::{build_local_basis_with_h, build_truncated_basis, gram_bound_sweep, truncate_lagrange};
use lagrangekit::{rng, BasisVariant, CoefficientMatrix, LagrangeFunction, PointSet, PolynomialBasis};
use serde::{Deserialize, Serialize};

use crate::config::{Check, ExperimentConfig, Provenance};
use crate::error::AppError;
use crate::output::{
    basis_path, ensure_dir, extended_path, points_path, read_json, read_points, stats_path, write_json, write_points,
    Timing,
};

/// Tolerance on fitted slopes of the tail and Gram reports.
const SLOPE_TOLERANCE: f64 = 0.5;

#[derive(Debug, Serialize)]
struct PointStats {
    n: usize,
    extended: usize,
    h: f64,
    q: f64,
    rho: f64,
    collar_width: f64,
}

#[derive(Serialize)]
struct StatsFile<'a> {
    provenance: Provenance<'a>,
    stats: PointStats,
}

pub fn gen_points(config: &ExperimentConfig) -> Result<(), AppError> {
    let out = &config.out;
    ensure_dir(out)?;
    let provenance = Provenance::new(config);
    let mut timing = Timing::start("gen-points");
    for &n in &config.n_list {
        let (xi, extended, stats) = timing.step(format!("n={n}"), || -> Result<_, AppError> {
            let xi = generate_quasi_uniform(&config.domain, n, level_seed(config.seed, n))?;
            let h = fill_distance_refined(&xi, &config.domain)?;
            let q = if n > 1 { separation_radius(&xi)? } else { f64::INFINITY };
            if !(h < 1.0) {
                return Err(AppError::Config(format!("n = {n} gives fill distance {h} ≥ 1; use more points")));
            }
            let collar_width = config.collar_factor() * h * h.ln().abs();
            let extended = extend_pointset(&xi, &config.domain, collar_width)?;
            let stats = PointStats {
                n,
                extended: extended.len(),
                h,
                q,
                rho: h / q,
                collar_width,
            };
            Ok((xi, extended, stats))
        })?;
        write_points(&points_path(out, n), &xi, &provenance)?;
        write_points(&extended_path(out, n), &extended, &provenance)?;
        write_json(
            &stats_path(out, n),
            &StatsFile {
                provenance: provenance.clone(),
                stats,
            },
        )?;
    }
    timing.finish(out)
}

#[derive(Serialize)]
struct BasisFile<'a> {
    provenance: Provenance<'a>,
    n: usize,
    extended: usize,
    h: f64,
    basis: BasisDump,
}

#[derive(Deserialize)]
struct StoredBasis {
    n: usize,
    h: f64,
    basis: BasisDump,
}

/// Ξ and X̃ for `n`, checking that X̃ starts with Ξ.
fn load_points(out: &Path, n: usize) -> Result<(PointSet, PointSet), AppError> {
    let xi = read_points(&points_path(out, n), "gen-points")?;
    let extended = read_points(&extended_path(out, n), "gen-points")?;
    let prefix_matches = extended.len() >= xi.len()
        && extended.dim() == xi.dim()
        && extended.coords()[..xi.coords().len()] == *xi.coords();
    if !prefix_matches {
        return Err(AppError::Config(format!(
            "{} does not extend {}",
            extended_path(out, n).display(),
            points_path(out, n).display()
        )));
    }
    Ok((xi, extended))
}

fn build_functions(
    config: &ExperimentConfig,
    extended: &PointSet,
    n: usize,
    h: f64,
) -> Result<Vec<LagrangeFunction>, AppError> {
    let spec = &config.kernel;
    let centers: Vec<usize> = (0..n).collect();
    let all: Vec<usize> = (0..extended.len()).collect();
    let functions = match config.variant {
        BasisVariant::Full => {
            let sys = assemble(spec, extended)?;
            let (a, poly) = sys.cardinal_columns(&centers);
            centers
                .iter()
                .map(|&j| LagrangeFunction {
                    center: j,
                    support: all.clone(),
                    kernel_coeffs: a.column(j).iter().copied().collect(),
                    poly_coeffs: poly.column(j).iter().copied().collect(),
                    variant: BasisVariant::Full,
                })
                .collect()
        }
        BasisVariant::Local => build_local_basis_with_h(spec, extended, &centers, config.k, h)?
            .into_iter()
            .map(|b| b.function)
            .collect(),
        BasisVariant::Truncated => {
            let sys = assemble(spec, extended)?;
            let (a, poly) = sys.cardinal_columns(&centers);
            // the columns are those of Ξ, which leads X̃
            let coeffs = CoefficientMatrix { a, poly, support: all };
            build_truncated_basis(&coeffs, spec, extended, &centers, config.k, h)?
                .into_iter()
                .map(|t| t.function)
                .collect()
        }
    };
    Ok(functions)
}

pub fn build_basis(config: &ExperimentConfig) -> Result<(), AppError> {
    let out = &config.out;
    ensure_dir(out)?;
    let provenance = Provenance::new(config);
    let mut timing = Timing::start("build-basis");
    for &n in &config.n_list {
        let (xi, extended) = load_points(out, n)?;
        let h = fill_distance_refined(&xi, &config.domain)?;
        let functions = timing.step(format!("n={n}"), || build_functions(config, &extended, xi.len(), h))?;
        let file = BasisFile {
            provenance: provenance.clone(),
            n: xi.len(),
            extended: extended.len(),
            h,
            basis: BasisDump::new(config.kernel.clone(), config.variant, config.basis_k(), functions),
        };
        write_json(&basis_path(out, config.variant.as_str(), n), &file)?;
    }
    timing.finish(out)
}

#[derive(Serialize)]
struct LevelSummary {
    n: usize,
    extended: usize,
    h: f64,
    q: f64,
}

#[derive(Serialize)]
struct DecayEntry {
    n: usize,
    h: f64,
    center: Vec<f64>,
    fit: DecayFit,
}

#[derive(Serialize)]
struct DecayStudy {
    levels: Vec<DecayEntry>,
    /// max ν̂ / min ν̂ − 1.
    drift: f64,
}

#[derive(Serialize)]
struct DiagnoseFile<'a> {
    provenance: Provenance<'a>,
    variant: BasisVariant,
    levels: Vec<LevelSummary>,
    reports: Vec<RateReport>,
    decay: Option<DecayStudy>,
    notes: Vec<String>,
}

fn decay_study(
    config: &ExperimentConfig,
    levels: &[BasisLevel],
    functions: &[Vec<LagrangeFunction>],
) -> Result<DecayStudy, AppError> {
    let (lower, upper) = config.domain.bounding_box();
    let middle: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let mut entries = Vec::new();
    for (level, fs) in levels.iter().zip(functions) {
        let xi = level.centers.subset(&(0..level.xi_count).collect::<Vec<_>>())?;
        let j = xi.closest_index(&middle).expect("non-empty");
        let fit = fit_pointwise_decay(&config.kernel, &level.centers, &fs[j], &level.grid, level.h)?;
        entries.push(DecayEntry {
            n: level.xi_count,
            h: level.h,
            center: xi.point(j).to_vec(),
            fit,
        });
    }
    let max = entries.iter().map(|e| e.fit.nu_hat).fold(f64::NEG_INFINITY, f64::max);
    let min = entries.iter().map(|e| e.fit.nu_hat).fold(f64::INFINITY, f64::min);
    Ok(DecayStudy {
        levels: entries,
        drift: max / min - 1.0,
    })
}

fn tail_report(
    config: &ExperimentConfig,
    levels: &[BasisLevel],
    functions: &[Vec<LagrangeFunction>],
    decay: &DecayStudy,
) -> Result<Option<RateReport>, AppError> {
    let basis = config.kernel.polynomial_basis();
    let mut sweep = Vec::new();
    for ((level, fs), entry) in levels.iter().zip(functions).zip(&decay.levels) {
        let xi = level.centers.subset(&(0..level.xi_count).collect::<Vec<_>>())?;
        let j = xi.closest_index(&entry.center).expect("non-empty");
        let ups = footprint(&level.centers, j, config.k, level.h)?;
        let t = truncate_lagrange(&fs[j], &level.centers, &ups, &basis)?;
        sweep.push(SweepSample { x: level.h, y: t.tail_l1 });
    }
    if sweep.iter().any(|s| !(s.y > 0.0)) {
        return Ok(None);
    }
    let nu = decay.levels.iter().map(|e| e.fit.nu_hat).sum::<f64>() / decay.levels.len() as f64;
    let d = config.kernel.dim() as f64;
    let m = f64::from(config.kernel.order());
    let target = config.k * nu / 2.0 + d - 2.0 * m;
    Ok(Some(RateReport::from_sweep(
        format!("tail/K={}", config.k),
        "h",
        sweep,
        target,
        SLOPE_TOLERANCE,
        PassRule::SlopeWithin,
    )?))
}

fn gram_report(config: &ExperimentConfig) -> Result<RateReport, AppError> {
    let degree = config.kernel.cpd_degree().unwrap_or(1).max(1);
    let basis = PolynomialBasis::new(degree, config.domain.dim());
    let (lower, upper) = config.domain.bounding_box();
    let middle: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let r0 = config.domain.inradius();
    let radii: Vec<f64> = (0..6).map(|i| r0 * 10f64.powf(-(i as f64) / 5.0)).collect();
    let sweep = gram_bound_sweep(&basis, &middle, &radii, 0.2, rng::derive_seed(config.seed, "gram"))?;
    let samples = sweep
        .reports
        .iter()
        .map(|r| SweepSample { x: r.radius, y: r.inv_norm })
        .collect();
    Ok(RateReport::from_sweep(
        format!("gram/L={degree}"),
        "radius",
        samples,
        -2.0 * f64::from(degree),
        SLOPE_TOLERANCE,
        PassRule::SlopeWithin,
    )?)
}

pub fn diagnose(config: &ExperimentConfig) -> Result<(), AppError> {
    let out = &config.out;
    ensure_dir(out)?;
    let checks = &config.checks;
    let sweeps = [Check::Synthesis, Check::Riesz, Check::Bernstein, Check::Tail];
    if checks.iter().any(|c| sweeps.contains(c)) && config.n_list.len() < 3 {
        return Err(AppError::Config("sweep checks need at least 3 entries in n_list".into()));
    }
    let provenance = Provenance::new(config);
    let mut timing = Timing::start("diagnose");
    let variant = config.variant;
    let mut levels = Vec::new();
    let mut functions = Vec::new();
    for &n in &config.n_list {
        let stored: StoredBasis = read_json(&basis_path(out, variant.as_str(), n), "build-basis")?;
        if stored.basis.kernel != config.kernel || stored.basis.variant != variant {
            return Err(AppError::Config(format!(
                "stored basis for n = {n} was built with a different kernel or variant"
            )));
        }
        let (_, extended) = load_points(out, n)?;
        let fs: Vec<LagrangeFunction> = stored.basis.lagrange_functions().cloned().collect();
        let level = BasisLevel::from_functions(
            &config.kernel,
            &config.domain,
            extended,
            stored.n,
            &fs,
            variant,
            stored.basis.k,
            &config.level,
        )?;
        if level.h != stored.h {
            return Err(AppError::Config(format!("points for n = {n} changed since the basis was built")));
        }
        levels.push(level);
        functions.push(fs);
    }
    levels.sort_by(|a, b| b.h.total_cmp(&a.h));

    let sigmas = config.smoothness()?;
    let (trials, seed) = (config.trials, config.seed);
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    let mut decay = None;
    if checks.contains(&Check::Decay) || checks.contains(&Check::Tail) {
        decay = Some(timing.step("decay", || decay_study(config, &levels, &functions))?);
    }
    if checks.contains(&Check::Tail) {
        if variant == BasisVariant::Full {
            let study = decay.as_ref().expect("decay computed");
            match timing.step("tail", || tail_report(config, &levels, &functions, study))? {
                Some(r) => reports.push(r),
                None => notes.push("tail: footprints cover every center, nothing to fit".into()),
            }
        } else {
            notes.push("tail: needs the full basis".into());
        }
    }
    if checks.contains(&Check::Gram) {
        reports.push(timing.step("gram", || gram_report(config))?);
    }
    if checks.contains(&Check::Synthesis) {
        for &sigma in &sigmas {
            reports.push(timing.step(format!("synthesis/{sigma}"), || synthesis_norm_check(&levels, sigma, trials, seed))?);
        }
    }
    if checks.contains(&Check::Riesz) {
        reports.push(timing.step("riesz", || riesz_lower_check(&levels, 2.0, trials, seed))?);
    }
    if checks.contains(&Check::Bernstein) {
        for &sigma in &sigmas {
            reports.push(timing.step(format!("bernstein/{sigma}"), || bernstein_check(&levels, sigma, trials, seed))?);
        }
    }

    for (i, r) in reports.iter().enumerate() {
        let name: String = r
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let path = out.join(format!("report_{variant}_{i:02}_{name}.csv", variant = variant.as_str()));
        let file = std::fs::File::create(&path)
            .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display())))?;
        r.write_csv(std::io::BufWriter::new(file))?;
        println!(
            "{} {}: slope {:.4} (target {}, tolerance {})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.slope,
            r.target,
            r.tolerance
        );
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    let summary = levels
        .iter()
        .map(|l| LevelSummary {
            n: l.xi_count,
            extended: l.centers.len(),
            h: l.h,
            q: l.q,
        })
        .collect();
    write_json(
        &out.join(format!("diagnose_{}.json", variant.as_str())),
        &DiagnoseFile {
            provenance,
            variant,
            levels: summary,
            reports,
            decay,
            notes,
        },
    )?;
    timing.finish(out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::Acceptance(format!("failed reports: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct SuiteFile<'a> {
    provenance: Provenance<'a>,
    report: &'a SuiteReport,
}

pub fn sweep(config: &ExperimentConfig, only: Option<&[u32]>, verify_threads: Option<usize>) -> Result<(), AppError> {
    let out = &config.out;
    ensure_dir(out)?;
    let threads = config.threads.unwrap_or_else(rayon::current_num_threads);
    let (mut report, timing) = run_suite_with_threads(&config.suite, only, threads)?;
    let mut timings: Vec<SuiteTiming> = vec![timing];
    if let Some(second) = verify_threads {
        let (other, t) = run_suite_with_threads(&config.suite, only, second)?;
        report.add_determinism(&other, [threads, second])?;
        timings.push(t);
    }
    for o in &report.outcomes {
        println!(
            "{} criterion {:>2} {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.summary
        );
    }
    let provenance = Provenance::new(config);
    write_json(&out.join("suite_report.json"), &SuiteFile { provenance, report: &report })?;
    write_json(&out.join("timing_sweep.json"), &timings)?;
    let failed: Vec<String> = report
        .outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| o.id.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::Acceptance(format!("failed criteria: {}", failed.join(", "))))
    }
}
