//! Pipeline orchestration: kernels → critical point → ansatz →
//! continuation → spectra → rescaled fits → report.

use crate::config::ExperimentConfig;
use crate::files;
use anyhow::{Context, Result};
use sinhlab::asymptotics::{
    build_report, far_field_check, fit_profile, AsymptoticReport, FarFieldFit, FarFieldRow,
    ProfileModel, Regime, RunArtifacts,
};
use sinhlab::hamiltonian::{find_critical_point, CriticalPointResult};
use sinhlab::pde::{assemble_laplacian, build_mesh, continuation_solve, GridField, SolverReport};
use sinhlab::spectrum::{
    admissible_radius, assemble_weight, eigenpairs_with_shift, morse_index_certified,
    rescale_eigenfunction, SpectrumResult,
};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Certification point for the Morse count: must sit in a spectral gap of
/// the linearization. For bubble spectra at desk-scale ρ the gap between
/// the μ→1 cluster and the radial modes brackets 1.1.
pub const MORSE_SLICE: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd)]
pub enum LogLevel {
    Quiet,
    Info,
    Debug,
}

#[derive(Clone, Copy)]
pub struct Logger {
    pub level: LogLevel,
}

impl Logger {
    pub fn info(&self, msg: impl AsRef<str>) {
        if self.level >= LogLevel::Info {
            eprintln!("[sinhlab] {}", msg.as_ref());
        }
    }
    pub fn debug(&self, msg: impl AsRef<str>) {
        if self.level >= LogLevel::Debug {
            eprintln!("[sinhlab:debug] {}", msg.as_ref());
        }
    }
}

pub struct PipelineOutput {
    pub critical_point: CriticalPointResult,
    pub taus: Vec<f64>,
    pub runs: Vec<(f64, GridField, SolverReport)>,
    pub spectra: Vec<SpectrumResult>,
    pub report: AsymptoticReport,
}

fn ensure_dir(out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    Ok(())
}

fn artifact(out: Option<&Path>, name: &str) -> Option<PathBuf> {
    out.map(|d| d.join(name))
}

/// Critical-point stage alone.
pub fn stage_critical_point(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    log: &Logger,
) -> Result<CriticalPointResult> {
    ensure_dir(out)?;
    let seed = cfg.seed_config()?;
    let crit = find_critical_point(&seed, cfg.tolerances.critical_point)
        .context("stage `crit`: critical-point search")?;
    log.info(format!(
        "crit: converged in {} iterations, |grad| = {:.2e}, {:?}, negatives {}",
        crit.iterations, crit.grad_norm, crit.classification, crit.negative_count
    ));
    if let Some(p) = artifact(out, "crit.json") {
        std::fs::write(p, files::to_fixed_json(&crit)? + "\n")?;
    }
    Ok(crit)
}

/// Continuation stage; emits solution fields when `out` is set.
pub fn stage_solve(
    cfg: &ExperimentConfig,
    crit: &CriticalPointResult,
    out: Option<&Path>,
    log: &Logger,
) -> Result<Vec<(f64, GridField, SolverReport)>> {
    ensure_dir(out)?;
    let mesh = Arc::new(
        build_mesh(&cfg.domain, cfg.mesh_h).context("stage `solve`: mesh construction")?,
    );
    log.info(format!(
        "mesh: {} nodes at h = {}, bandwidth {}",
        mesh.len(),
        cfg.mesh_h,
        mesh.bandwidth
    ));
    let runs = continuation_solve(
        &crit.config,
        &cfg.rho_schedule,
        &mesh,
        cfg.tolerances.newton,
    )
    .context("stage `solve`: continuation")?;
    for (i, (rho, u, rep)) in runs.iter().enumerate() {
        log.info(format!(
            "solve rho = {rho}: {} iterations, residual {:.2e}, correction {:.3e}",
            rep.iterations, rep.final_residual, rep.correction_h1
        ));
        if let Some(base) = artifact(out, &format!("solution_{i:02}")) {
            files::write_field(&base, u)?;
            files::write_field_csv(&base.with_extension("csv"), u)?;
            std::fs::write(
                out.unwrap().join(format!("solution_{i:02}_report.json")),
                files::to_fixed_json(rep)? + "\n",
            )?;
        }
    }
    Ok(runs)
}

/// Spectrum stage; one eigensolve per ρ, optionally across threads.
pub fn stage_spectra(
    cfg: &ExperimentConfig,
    runs: &[(f64, GridField, SolverReport)],
    out: Option<&Path>,
    threads: usize,
    log: &Logger,
) -> Result<Vec<SpectrumResult>> {
    ensure_dir(out)?;
    let mesh = runs
        .first()
        .map(|(_, u, _)| u.mesh().clone())
        .context("stage `spectrum`: no solves")?;
    let lap = assemble_laplacian(&mesh);
    // band factorizations dominate memory; cap concurrency on large meshes
    let cap = if mesh.len() > 120_000 { 2 } else { threads.max(1) };
    let jobs = threads.clamp(1, cap).min(runs.len().max(1));
    let results: Vec<Result<SpectrumResult>> = if jobs <= 1 {
        runs.iter()
            .map(|(rho, u, _)| one_spectrum(cfg, &lap, u, *rho))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let lap = &lap;
            let handles: Vec<_> = runs
                .iter()
                .map(|(rho, u, _)| scope.spawn(move || one_spectrum(cfg, lap, u, *rho)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };
    let mut spectra = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        let s = r.with_context(|| format!("stage `spectrum` at rho = {}", runs[i].0))?;
        log.info(format!(
            "spectrum rho = {}: mu = {:?}, morse {}, ambiguous {:?}",
            s.rho,
            &s.eigenvalues[..s.eigenvalues.len().min(5)],
            s.morse_index,
            s.ambiguous
        ));
        if let Some(dir) = out {
            std::fs::write(
                dir.join(format!("spectrum_{i:02}.json")),
                files::to_fixed_json(&s)? + "\n",
            )?;
            for (j, v) in s.eigenfields.iter().enumerate() {
                files::write_field(&dir.join(format!("eigenfield_{i:02}_{j:02}")), v)?;
            }
        }
        spectra.push(s);
    }
    Ok(spectra)
}

fn one_spectrum(
    cfg: &ExperimentConfig,
    lap: &sinhlab::pde::DiscreteLaplacian,
    u: &GridField,
    rho: f64,
) -> Result<SpectrumResult> {
    let w = assemble_weight(u, rho).map_err(|e| anyhow::anyhow!("{e}"))?;
    let spec = eigenpairs_with_shift(lap, &w, rho, cfg.eigenvalue_count, cfg.eigen_shift)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    // slice certification: the computed list is complete below the gap
    morse_index_certified(&spec, lap, &w, MORSE_SLICE)
        .map_err(|e| anyhow::anyhow!("morse certification: {e}"))?;
    Ok(spec)
}

/// Rescaled-profile fits and far-field comparisons for every (ρ, j).
pub fn stage_fits(
    cfg: &ExperimentConfig,
    crit: &CriticalPointResult,
    taus: &[f64],
    runs: &[(f64, GridField, SolverReport)],
    spectra: &[SpectrumResult],
    log: &Logger,
) -> Result<Vec<FarFieldRow>> {
    let m = crit.config.len();
    let mut rows = Vec::new();
    for ((rho, _, rep), spec) in runs.iter().zip(spectra) {
        for j in 1..=(4 * m).min(spec.eigenvalues.len()) {
            let v = &spec.eigenfields[j - 1];
            let mu = spec.eigenvalues[j - 1];
            let regime = if j <= m {
                Regime::First
            } else if j <= 3 * m {
                Regime::Second
            } else {
                Regime::Third
            };
            let mut fits = Vec::with_capacity(m);
            let mut ok = true;
            for k in 0..m {
                let center = rep.peak_locations[k];
                let adm = admissible_radius(&crit.config, taus, *rho, k, center);
                let mom_radius = adm.min(40.0);
                if mom_radius < cfg.fit_window {
                    ok = false;
                    break;
                }
                let prof_m = rescale_eigenfunction(v, &crit.config, taus, *rho, k, center, mom_radius)
                    .map_err(|e| anyhow::anyhow!("stage `fits`: {e}"))?;
                fits.push(FarFieldFit::from_profile(&prof_m, mu, *rho));
                // model-selection fits on the documented window
                if j == 1 || j == m + 1 || j == 3 * m + 1 {
                    let prof_f = rescale_eigenfunction(
                        v,
                        &crit.config,
                        taus,
                        *rho,
                        k,
                        center,
                        cfg.fit_window,
                    )
                    .map_err(|e| anyhow::anyhow!("stage `fits`: {e}"))?;
                    let best = [
                        ProfileModel::Constant,
                        ProfileModel::Dipole,
                        ProfileModel::Radial,
                    ]
                    .into_iter()
                    .map(|mdl| fit_profile(&prof_f, mdl).map(|f| (mdl, f.relative_residual)))
                    .collect::<sinhlab::Result<Vec<_>>>()
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                    log.debug(format!("fits rho={rho} j={j} k={k}: {best:?}"));
                }
            }
            if !ok {
                log.info(format!(
                    "fits: skipping rho = {rho}, j = {j} (rescaled window exceeds the domain)"
                ));
                continue;
            }
            let deviation = far_field_check(v, mu, *rho, &fits, &crit.config, taus, regime)
                .map_err(|e| anyhow::anyhow!("stage `fits`: far field: {e}"))?;
            rows.push(FarFieldRow {
                rho: *rho,
                j,
                regime,
                deviation,
            });
        }
    }
    Ok(rows)
}

/// The full pipeline. Deterministic for a fixed config; rerunning into the
/// same directory reproduces every artifact byte for byte.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    threads: usize,
    log: &Logger,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    ensure_dir(out)?;
    let crit = stage_critical_point(cfg, out, log)?;
    let taus = sinhlab::ansatz::tau_values(&crit.config)
        .map_err(|e| anyhow::anyhow!("stage `tau`: {e}"))?;
    log.info(format!("tau: {taus:?}"));
    let runs = stage_solve(cfg, &crit, out, log)?;
    let spectra = stage_spectra(cfg, &runs, out, threads, log)?;
    let far_field = stage_fits(cfg, &crit, &taus, &runs, &spectra, log)?;
    let artifacts = RunArtifacts {
        config: crit.config.clone(),
        taus: taus.clone(),
        critical_point: crit.clone(),
        spectra: spectra.clone(),
        far_field,
    };
    let report = build_report(&artifacts).map_err(|e| anyhow::anyhow!("stage `report`: {e}"))?;
    if let Some(dir) = out {
        files::write_report_json(&dir.join("report.json"), &report)?;
        files::write_report_csv(&dir.join("report.csv"), &report, &spectra)?;
    }
    Ok(PipelineOutput {
        critical_point: crit,
        taus,
        runs,
        spectra,
        report,
    })
}

/// The checks a finished run asserts; failures make the driver exit
/// nonzero.
pub fn report_failures(report: &AsymptoticReport) -> Vec<String> {
    let mut fails = Vec::new();
    for row in &report.regimes {
        if let Some(msg) = &row.mismatch {
            fails.push(format!("regime mismatch at j = {}: {msg}", row.j));
        } else if !row.resolved {
            fails.push(format!("regime rate at j = {} not resolved", row.j));
        }
    }
    if !report.corollary_bounds_hold {
        fails.push("Morse count violates m <= M <= 3m".into());
    }
    if report.morse_formula_holds == Some(false) {
        fails.push("Morse count disagrees with 3m - #neg(Hess F)".into());
    }
    fails
}
