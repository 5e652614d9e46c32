//! Batch experiment driver for the sinh-Poisson blow-up laboratory.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sinhlab_cli::config::ExperimentConfig;
use sinhlab_cli::pipeline::{self, LogLevel, Logger};
use sinhlab_cli::{files, verify};
use sinhlab::geom::{DomainSpec, Point2};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "sinhlab",
    about = "m-peak blow-up solutions of the sinh-Poisson equation and their linearized spectra"
)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for per-rho spectra.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// quiet | info | debug
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point evaluation of the Dirichlet kernels (debugging aid).
    Kernels {
        /// unit-disc | disc:R,CX,CY | rect:W,H
        #[arg(long, default_value = "unit-disc")]
        domain: String,
        /// Evaluation point "x,y".
        #[arg(long)]
        x: String,
        /// Source point "x,y"; omit for a Robin-function query at --x.
        #[arg(long)]
        y: Option<String>,
    },
    /// Critical-point search for the Kirchhoff-Routh Hamiltonian.
    Crit,
    /// Critical point + Newton continuation over the rho schedule.
    Solve,
    /// Continuation + linearized spectra per rho.
    Spectrum,
    /// Integral-identity checkers (ball identity, boundary integrals).
    Verify,
    /// Full pipeline: crit, solve, spectra, fits, report.
    Run,
    /// Full pipeline, emitting only the report files.
    Report,
}

fn parse_point(s: &str) -> Result<Point2> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("expected \"x,y\", got {s}");
    }
    Ok(Point2::new(
        parts[0].trim().parse()?,
        parts[1].trim().parse()?,
    ))
}

fn parse_domain(s: &str) -> Result<DomainSpec> {
    if s == "unit-disc" {
        return Ok(DomainSpec::UnitDisc);
    }
    if let Some(rest) = s.strip_prefix("disc:") {
        let p: Vec<&str> = rest.split(',').collect();
        if p.len() != 3 {
            bail!("disc:R,CX,CY");
        }
        return Ok(DomainSpec::Disc {
            radius: p[0].parse()?,
            center: Point2::new(p[1].parse()?, p[2].parse()?),
        });
    }
    if let Some(rest) = s.strip_prefix("rect:") {
        let p: Vec<&str> = rest.split(',').collect();
        if p.len() != 2 {
            bail!("rect:W,H");
        }
        return Ok(DomainSpec::Rectangle {
            width: p[0].parse()?,
            height: p[1].parse()?,
        });
    }
    bail!("unknown domain {s}");
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .context("this subcommand needs --config <path>")?;
    ExperimentConfig::load(path)
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.log_level.as_str() {
        "quiet" => LogLevel::Quiet,
        "debug" => LogLevel::Debug,
        _ => LogLevel::Info,
    };
    let log = Logger { level };
    match dispatch(&cli, &log) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cli: &Cli, log: &Logger) -> Result<i32> {
    match &cli.command {
        Command::Kernels { domain, x, y } => {
            let dom = parse_domain(domain)?;
            let xp = parse_point(x)?;
            match y {
                Some(ys) => {
                    let yp = parse_point(ys)?;
                    let k = sinhlab::greens::green_derivatives(&dom, xp, yp)
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    let h = sinhlab::greens::green_regular_part(&dom, xp, yp)
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    println!(
                        "{}",
                        files::to_fixed_json(&serde_json::json!({
                            "green": k.value,
                            "regular_part": h,
                            "grad_x": [k.grad_x.x, k.grad_x.y],
                            "grad_y": [k.grad_y.x, k.grad_y.y],
                            "hess_xx": k.hess_xx.m,
                            "hess_xy": k.hess_xy.m,
                        }))?
                    );
                }
                None => {
                    let r =
                        sinhlab::greens::robin_eval(&dom, xp).map_err(|e| anyhow::anyhow!("{e}"))?;
                    println!(
                        "{}",
                        files::to_fixed_json(&serde_json::json!({
                            "robin": r.value,
                            "grad": [r.grad.x, r.grad.y],
                            "hess": r.hess.m,
                        }))?
                    );
                }
            }
            Ok(0)
        }
        Command::Crit => {
            let cfg = load_config(cli)?;
            pipeline::stage_critical_point(&cfg, cli.out.as_deref(), log)?;
            Ok(0)
        }
        Command::Solve => {
            let cfg = load_config(cli)?;
            let crit = pipeline::stage_critical_point(&cfg, cli.out.as_deref(), log)?;
            pipeline::stage_solve(&cfg, &crit, cli.out.as_deref(), log)?;
            Ok(0)
        }
        Command::Spectrum => {
            let cfg = load_config(cli)?;
            let crit = pipeline::stage_critical_point(&cfg, cli.out.as_deref(), log)?;
            // reuse solution fields from a previous `solve` into the same
            // directory when they are all present
            let cached: Option<Vec<_>> = cli.out.as_deref().and_then(|dir| {
                cfg.rho_schedule
                    .iter()
                    .enumerate()
                    .map(|(i, &rho)| {
                        let base = dir.join(format!("solution_{i:02}"));
                        files::read_field(&base).ok().and_then(|u| {
                            (u.mesh().h == cfg.mesh_h && u.mesh().domain == cfg.domain)
                                .then(|| (rho, u))
                        })
                    })
                    .collect()
            });
            let runs = match cached {
                Some(fields) => {
                    log.info("spectrum: reusing solution fields from the output directory");
                    fields
                        .into_iter()
                        .map(|(rho, u)| {
                            let peaks = sinhlab::pde::measure_peaks(&u, &crit.config);
                            let rep = sinhlab::pde::SolverReport {
                                converged: true,
                                iterations: 0,
                                final_residual: sinhlab::pde::residual_norm(&u, rho),
                                correction_h1: 0.0,
                                peak_locations: peaks,
                            };
                            (rho, u, rep)
                        })
                        .collect()
                }
                None => pipeline::stage_solve(&cfg, &crit, cli.out.as_deref(), log)?,
            };
            pipeline::stage_spectra(&cfg, &runs, cli.out.as_deref(), cli.threads, log)?;
            Ok(0)
        }
        Command::Verify => {
            let cfg = cli
                .config
                .as_ref()
                .map(|p| ExperimentConfig::load(p))
                .transpose()?;
            let ok = verify::run_identity_checks(cfg.as_ref(), log)?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let out = pipeline::run_pipeline(&cfg, cli.out.as_deref(), cli.threads, log)?;
            let fails = pipeline::report_failures(&out.report);
            print_summary(&out);
            if fails.is_empty() {
                Ok(0)
            } else {
                for f in &fails {
                    eprintln!("check failed: {f}");
                }
                Ok(2)
            }
        }
        Command::Report => {
            let cfg = load_config(cli)?;
            // same pipeline, only the report artifacts are written
            let out = pipeline::run_pipeline(&cfg, None, cli.threads, log)?;
            if let Some(dir) = cli.out.as_deref() {
                std::fs::create_dir_all(dir)?;
                files::write_report_json(&dir.join("report.json"), &out.report)?;
                files::write_report_csv(&dir.join("report.csv"), &out.report, &out.spectra)?;
            } else {
                println!("{}", files::to_fixed_json(&out.report)?);
            }
            let fails = pipeline::report_failures(&out.report);
            Ok(if fails.is_empty() { 0 } else { 2 })
        }
    }
}

fn print_summary(out: &pipeline::PipelineOutput) {
    println!(
        "critical point: {:?} at {:?}, negatives {}",
        out.critical_point.classification,
        out.critical_point
            .config
            .points()
            .iter()
            .map(|p| (p.x, p.y))
            .collect::<Vec<_>>(),
        out.critical_point.negative_count,
    );
    for s in &out.spectra {
        println!(
            "rho = {:<8}: mu = {:?}  morse = {}",
            s.rho,
            &s.eigenvalues[..s.eigenvalues.len().min(6)],
            s.morse_index
        );
    }
    if let Some(p) = out.report.morse_predicted {
        println!(
            "morse prediction 3m - neg(Hess F) = {p}: {}",
            match out.report.morse_formula_holds {
                Some(true) => "holds",
                Some(false) => "VIOLATED",
                None => "not applicable",
            }
        );
    } else {
        println!("degenerate Hessian: Morse prediction skipped");
    }
}
