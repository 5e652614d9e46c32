//! The `verify` subcommand: integral-identity checkers with pass/fail
//! lines. Runs the ball identity on analytic pairs, the Green boundary
//! integrals against their 1/(2π) limit, and the second-derivative
//! boundary integral against its case table.

use crate::config::ExperimentConfig;
use crate::pipeline::Logger;
use anyhow::Result;
use sinhlab::asymptotics::{
    green_boundary_integral_check, hessian_boundary_integral_check, pohozaev_check, AnalyticField,
};
use sinhlab::geom::{DomainSpec, Point2};
use sinhlab::hamiltonian::SignedConfig;

struct Outcome {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: String, out: &mut Vec<Outcome>) {
    out.push(Outcome {
        name: name.into(),
        pass,
        detail,
    });
}

/// Runs every checker; prints one line per check. Returns overall pass.
pub fn run_identity_checks(cfg: Option<&ExperimentConfig>, log: &Logger) -> Result<bool> {
    let mut results = Vec::new();
    let signed = match cfg {
        Some(c) => c.seed_config()?,
        None => SignedConfig::single(DomainSpec::UnitDisc, Point2::ORIGIN, 1.0)
            .map_err(|e| anyhow::anyhow!("{e}"))?,
    };
    let domain = *signed.domain();

    // ball identity on analytic pairs
    let quad = AnalyticField {
        value: |p: Point2| p.norm_sq(),
        grad: |p: Point2| p * 2.0,
        laplacian: |_| 4.0,
    };
    let rad: f64 = 1.3;
    let r = pohozaev_check(&quad, &quad, Point2::ORIGIN, rad).map_err(|e| anyhow::anyhow!("{e}"))?;
    let closed = 8.0 * std::f64::consts::PI * rad.powi(4);
    check(
        "ball identity, f = g = |x|^2",
        r.gap <= 1e-6 && (r.lhs - closed).abs() <= 1e-6 * closed,
        format!("lhs {:.6e} rhs {:.6e} gap {:.1e}", r.lhs, r.rhs, r.gap),
        &mut results,
    );
    let fx = AnalyticField {
        value: |p: Point2| p.x,
        grad: |_| Point2::new(1.0, 0.0),
        laplacian: |_| 0.0,
    };
    let fy = AnalyticField {
        value: |p: Point2| p.y,
        grad: |_| Point2::new(0.0, 1.0),
        laplacian: |_| 0.0,
    };
    let r2 = pohozaev_check(&fx, &fy, Point2::ORIGIN, 0.8).map_err(|e| anyhow::anyhow!("{e}"))?;
    check(
        "ball identity, harmonic pair",
        r2.lhs.abs() <= 1e-10 && r2.rhs.abs() <= 1e-10,
        format!("lhs {:.1e} rhs {:.1e}", r2.lhs, r2.rhs),
        &mut results,
    );

    // Green boundary integral at the first peak
    let limit = 1.0 / (2.0 * std::f64::consts::PI);
    let mut radius = 0.05f64;
    let eps = signed.epsilon();
    if radius > eps {
        radius = 0.5 * eps;
    }
    match green_boundary_integral_check(&signed, 0, 0, 0, radius) {
        Ok(g) => check(
            "green boundary integral, k = i = j",
            (g.grad_variant - limit).abs() <= 0.1 * limit
                && (g.normal_variant - limit).abs() <= 0.1 * limit,
            format!(
                "R grad {:.6e}, R normal {:.6e}, limit {limit:.6e}",
                g.grad_variant, g.normal_variant
            ),
            &mut results,
        ),
        Err(e) => check(
            "green boundary integral, k = i = j",
            false,
            format!("{e}"),
            &mut results,
        ),
    }

    // Hessian boundary integral: coincident case against ½ Hess R
    let z1 = signed.points()[0];
    match hessian_boundary_integral_check(&domain, z1, z1, z1, radius, 0, 0) {
        Ok(h) => check(
            "hessian boundary integral, z1 = z2 = z3",
            (h.value - h.expected).abs() <= 0.02 * h.expected.abs().max(1e-6),
            format!("value {:.6e}, expected {:.6e}", h.value, h.expected),
            &mut results,
        ),
        Err(e) => check(
            "hessian boundary integral, z1 = z2 = z3",
            false,
            format!("{e}"),
            &mut results,
        ),
    }
    // distinct case vanishes
    let z2 = Point2::new(z1.x + 3.0 * radius, z1.y);
    let z3 = Point2::new(z1.x, z1.y + 4.0 * radius);
    if domain.is_strictly_interior(z2) && domain.is_strictly_interior(z3) {
        match hessian_boundary_integral_check(&domain, z1, z2, z3, radius, 0, 1) {
            Ok(h) => check(
                "hessian boundary integral, all distinct",
                h.value.abs() <= 1e-8,
                format!("value {:.2e}", h.value),
                &mut results,
            ),
            Err(e) => check(
                "hessian boundary integral, all distinct",
                false,
                format!("{e}"),
                &mut results,
            ),
        }
    }

    let mut all = true;
    for r in &results {
        println!(
            "[{}] {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.pass;
    }
    log.debug(format!("{} identity checks", results.len()));
    Ok(all)
}
