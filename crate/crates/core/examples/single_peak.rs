//! Solves the single-peak problem on the unit disc at one (rho, h) and
//! prints the low spectrum, timing the expensive stages.
//!
//! Usage: cargo run --release --example single_peak [rho] [1/h]

use sinhlab::geom::{DomainSpec, Point2};
use sinhlab::hamiltonian::SignedConfig;
use sinhlab::pde::{assemble_laplacian, build_mesh, continuation_solve};
use sinhlab::spectrum::{assemble_weight, eigenpairs_with_shift};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let rho: f64 = args.next().map_or(0.1, |s| s.parse().unwrap());
    let inv_h: f64 = args.next().map_or(128.0, |s| s.parse().unwrap());

    let t0 = Instant::now();
    let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / inv_h).unwrap());
    println!(
        "mesh: {} nodes, bandwidth {}  [{:.2?}]",
        mesh.len(),
        mesh.bandwidth,
        t0.elapsed()
    );
    let config = SignedConfig::single(DomainSpec::UnitDisc, Point2::ORIGIN, 1.0).unwrap();

    let t1 = Instant::now();
    let runs = continuation_solve(&config, &[rho], &mesh, 1e-9).unwrap();
    let (_, u, report) = &runs[0];
    println!(
        "newton: {} iterations, residual {:.2e}, peak {:?}  [{:.2?}]",
        report.iterations,
        report.final_residual,
        report.peak_locations[0],
        t1.elapsed()
    );

    let t2 = Instant::now();
    let lap = assemble_laplacian(&mesh);
    let w = assemble_weight(u, rho).unwrap();
    let sigma: f64 = std::env::args().nth(3).map_or(0.9, |s| s.parse().unwrap());
    let k: usize = std::env::args().nth(4).map_or(4, |s| s.parse().unwrap());
    let spec = eigenpairs_with_shift(&lap, &w, rho, k, sigma).unwrap();
    let below = sinhlab::spectrum::inertia_below(&lap, &w, 1.1).unwrap();
    println!("inertia below 1.1: {below}");
    println!(
        "eigenvalues: {:?}  residual {:.1e}  [{:.2?}]",
        spec.eigenvalues, spec.max_residual, t2.elapsed()
    );
    println!("morse index: {}, ambiguous: {:?}", spec.morse_index, spec.ambiguous);
}
