//! Liouville bubbles, projected bubbles and the m-peak approximate solution.
//!
//! The bubble profile
//!
//! ```text
//!   U_{τ,ξ}(x) = log( 8τ² / (τ²ρ² + |x-ξ|²)² )
//! ```
//!
//! solves -ΔU = ρ² e^U on the whole plane with mass ∫ ρ² e^U = 8π. Its
//! Dirichlet projection expands as `PU = U + 8πH(x, ξ) - log(8τ²) + O(ρ²)`;
//! the O(ρ²) defect is absorbed later by the Newton correction, so the
//! ansatz drops it. The concentration parameters are
//!
//! ```text
//!   τ_k = exp( 4π [ H(ξ_k, ξ_k) + Σ_{i≠k} α_k α_i G(ξ_k, ξ_i) ] ) / √8,
//! ```
//!
//! evaluated at the limit configuration points.

use crate::geom::{DomainSpec, Point2};
use crate::hamiltonian::SignedConfig;
use crate::pde::{GridField, Mesh};
use crate::{greens, Error, Result};
use std::sync::Arc;

/// Parameters of a single bubble.
#[derive(Debug, Clone, Copy)]
pub struct BubbleParams {
    pub tau: f64,
    pub center: Point2,
    pub rho: f64,
    pub sign: f64,
}

impl BubbleParams {
    pub fn new(tau: f64, center: Point2, rho: f64, sign: f64) -> Result<Self> {
        if !(tau > 0.0 && rho > 0.0) {
            return Err(Error::RhoTooLarge(tau * rho));
        }
        Ok(BubbleParams {
            tau,
            center,
            rho,
            sign,
        })
    }
}

/// τ_k for every peak of the configuration.
pub fn tau_values(config: &SignedConfig) -> Result<Vec<f64>> {
    let pts = config.points();
    let al = config.signs();
    let dom = config.domain();
    let mut taus = Vec::with_capacity(pts.len());
    for k in 0..pts.len() {
        let mut ex = greens::green_regular_part(dom, pts[k], pts[k])?;
        for i in 0..pts.len() {
            if i != k {
                ex += al[k] * al[i] * greens::green_value(dom, pts[k], pts[i])?;
            }
        }
        taus.push((4.0 * std::f64::consts::PI * ex).exp() / 8.0f64.sqrt());
    }
    Ok(taus)
}

/// U_{τ,ξ}(x).
pub fn bubble_value(p: &BubbleParams, x: Point2) -> f64 {
    let d2 = (x - p.center).norm_sq();
    let core = p.tau * p.tau * p.rho * p.rho + d2;
    (8.0 * p.tau * p.tau).ln() - 2.0 * core.ln()
}

/// PU_{τ,ξ}(x) = log(1/(τ²ρ² + |x-ξ|²)²) + 8π H(x, ξ).
pub fn projected_bubble_value(p: &BubbleParams, domain: &DomainSpec, x: Point2) -> Result<f64> {
    domain.require_interior(x)?;
    let d2 = (x - p.center).norm_sq();
    let core = p.tau * p.tau * p.rho * p.rho + d2;
    let h = greens::green_regular_part(domain, x, p.center)?;
    Ok(-2.0 * core.ln() + 8.0 * std::f64::consts::PI * h)
}

fn check_rho(config: &SignedConfig, taus: &[f64], rho: f64) -> Result<()> {
    let pts = config.points();
    for (k, &tau) in taus.iter().enumerate() {
        let mut sep = config.domain().boundary_distance(pts[k]);
        for (i, &q) in pts.iter().enumerate() {
            if i != k {
                sep = sep.min(pts[k].dist(q));
            }
        }
        if tau * rho >= sep / 10.0 {
            return Err(Error::RhoTooLarge(tau * rho));
        }
    }
    Ok(())
}

/// The m-peak approximate solution u₀ = Σ_k α_k PU_k sampled on the mesh.
pub fn approximate_solution(
    config: &SignedConfig,
    rho: f64,
    mesh: &Arc<Mesh>,
) -> Result<GridField> {
    approximate_solution_at(config, rho, mesh, config.points())
}

/// Same ansatz with the bubbles re-centered (τ stays pinned to the limit
/// configuration); used by the continuation driver to follow measured peaks.
pub fn approximate_solution_at(
    config: &SignedConfig,
    rho: f64,
    mesh: &Arc<Mesh>,
    centers: &[Point2],
) -> Result<GridField> {
    let taus = tau_values(config)?;
    check_rho(config, &taus, rho)?;
    let dom = config.domain();
    let al = config.signs();
    let mut values = vec![0.0; mesh.len()];
    for (k, (&tau, &c)) in taus.iter().zip(centers).enumerate() {
        let t2r2 = tau * tau * rho * rho;
        for (i, &p) in mesh.points().iter().enumerate() {
            let core = t2r2 + (p - c).norm_sq();
            let h = greens::green_regular_part(dom, p, c)?;
            values[i] += al[k] * (-2.0 * core.ln() + 8.0 * std::f64::consts::PI * h);
        }
    }
    GridField::new(mesh.clone(), values)
}

/// The far-field limit 8π Σ_k α_k G(x, ξ_k) of the m-peak solution.
pub fn far_field_limit(config: &SignedConfig, x: Point2) -> Result<f64> {
    if config.points().iter().any(|&xi| x.dist(xi) < 0.1) {
        return Err(Error::TooCloseToPeak);
    }
    let mut acc = 0.0;
    for (&xi, &a) in config.points().iter().zip(config.signs()) {
        acc += a * greens::green_value(config.domain(), x, xi)?;
    }
    Ok(8.0 * std::f64::consts::PI * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::build_mesh;
    use approx::assert_relative_eq;

    const UNIT: DomainSpec = DomainSpec::UnitDisc;
    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn tau_at_disc_center() {
        let c = SignedConfig::single(UNIT, Point2::ORIGIN, 1.0).unwrap();
        let taus = tau_values(&c).unwrap();
        assert_relative_eq!(taus[0], 1.0 / 8.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn tau_off_center_matches_closed_form() {
        // oracle: H(x,x) = log(1-|x|²)/2π on the unit disc
        let c = SignedConfig::single(UNIT, Point2::new(0.9, 0.0), 1.0).unwrap();
        let taus = tau_values(&c).unwrap();
        let h = 0.19f64.ln() / (2.0 * PI);
        assert_relative_eq!(taus[0], (4.0 * PI * h).exp() / 8.0f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn tau_list_permutes_with_config() {
        let a = Point2::new(0.3, 0.1);
        let b = Point2::new(-0.4, 0.2);
        let c1 = SignedConfig::new(UNIT, vec![a, b], vec![1.0, -1.0]).unwrap();
        let c2 = SignedConfig::new(UNIT, vec![b, a], vec![-1.0, 1.0]).unwrap();
        let t1 = tau_values(&c1).unwrap();
        let t2 = tau_values(&c2).unwrap();
        assert_relative_eq!(t1[0], t2[1], epsilon = 1e-14);
        assert_relative_eq!(t1[1], t2[0], epsilon = 1e-14);
    }

    #[test]
    fn bubble_center_value_and_pde_residual() {
        let p = BubbleParams::new(0.5, Point2::new(0.1, -0.2), 0.05, 1.0).unwrap();
        let expect = (8.0 / (p.tau * p.tau * p.rho.powi(4))).ln();
        assert_relative_eq!(bubble_value(&p, p.center), expect, epsilon = 1e-12);

        // -ΔU = ρ² e^U checked with a five-point stencil at |x-ξ| = 0.1
        let x = p.center + Point2::new(0.1, 0.0);
        let mut errs = Vec::new();
        for h in [2e-3, 1e-3] {
            let lap = (bubble_value(&p, x + Point2::new(h, 0.0))
                + bubble_value(&p, x - Point2::new(h, 0.0))
                + bubble_value(&p, x + Point2::new(0.0, h))
                + bubble_value(&p, x - Point2::new(0.0, h))
                - 4.0 * bubble_value(&p, x))
                / (h * h);
            let rhs = p.rho * p.rho * bubble_value(&p, x).exp();
            errs.push((-lap - rhs).abs());
        }
        // O(h²): halving h cuts the error by about 4
        assert!(errs[1] < errs[0] / 3.0, "errors {errs:?}");
        assert!(errs[1] < 1e-2 * (p.rho * p.rho * bubble_value(&p, x).exp()).abs());
    }

    #[test]
    fn bubble_mass_is_8pi() {
        // oracle: radial quadrature of 8τ²ρ² r/(τ²ρ²+r²)² via Simpson + tail
        let (tau, rho) = (0.35355339059327373, 0.1);
        let t2r2: f64 = tau * tau * rho * rho;
        let f = |r: f64| 8.0 * t2r2 * r / (t2r2 + r * r).powi(2);
        let rmax = 2000.0 * tau * rho;
        let n = 400_000;
        let h = rmax / n as f64;
        let mut s = f(0.0) + f(rmax);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let tail = 8.0 * t2r2 / 2.0 * (2.0 / (t2r2 + rmax * rmax)); // ∫_rmax^∞
        let mass = 2.0 * PI * (s * h / 3.0 + tail);
        assert_relative_eq!(mass, 8.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn projected_bubble_identity_and_boundary_smallness() {
        let tau = 1.0 / 8.0f64.sqrt();
        for rho in [0.1, 0.05] {
            let p = BubbleParams::new(tau, Point2::ORIGIN, rho, 1.0).unwrap();
            // defining identity
            let x = Point2::new(0.3, 0.2);
            let pu = projected_bubble_value(&p, &UNIT, x).unwrap();
            let u = bubble_value(&p, x);
            let h = greens::green_regular_part(&UNIT, x, p.center).unwrap();
            assert_relative_eq!(
                pu,
                u + 8.0 * PI * h - (8.0 * tau * tau).ln(),
                epsilon = 1e-12
            );
            // near-boundary probe: |PU| = O(ρ²) + margin
            let xb = Point2::new(1.0 - 1e-6, 0.0);
            let pub_ = projected_bubble_value(&p, &UNIT, xb).unwrap();
            assert!(
                pub_.abs() <= 10.0 * rho * rho * tau * tau + 1e-4,
                "PU on boundary probe = {pub_}"
            );
        }
        // center value: H(·,0) = 0 on the unit disc
        let p = BubbleParams::new(tau, Point2::ORIGIN, 0.1, 1.0).unwrap();
        let v = projected_bubble_value(&p, &UNIT, Point2::ORIGIN).unwrap();
        assert_relative_eq!(v, -2.0 * (tau * tau * 0.01).ln(), epsilon = 1e-12);
    }

    #[test]
    fn approximate_solution_peak_and_sign_flip() {
        let mesh = Arc::new(build_mesh(&UNIT, 1.0 / 32.0).unwrap());
        let plus = SignedConfig::single(UNIT, Point2::ORIGIN, 1.0).unwrap();
        let minus = SignedConfig::single(UNIT, Point2::ORIGIN, -1.0).unwrap();
        let rho = 0.1;
        let up = approximate_solution(&plus, rho, &mesh).unwrap();
        let um = approximate_solution(&minus, rho, &mesh).unwrap();
        let tau = 1.0 / 8.0f64.sqrt();
        let (imax, vmax) = up.argmax_abs();
        assert!(mesh.point(imax).norm() < 1e-12, "peak away from center");
        assert_relative_eq!(vmax, -4.0 * (tau * rho).ln(), epsilon = 1e-12);
        for (a, b) in up.values().iter().zip(um.values()) {
            assert_relative_eq!(*a, -b, epsilon = 1e-12);
        }
    }

    #[test]
    fn dipole_ansatz_is_odd_under_reflection() {
        let mesh = Arc::new(build_mesh(&UNIT, 1.0 / 32.0).unwrap());
        let d = 0.46875; // lattice-aligned at h = 1/32
        let cfg = SignedConfig::new(
            UNIT,
            vec![Point2::new(d, 0.0), Point2::new(-d, 0.0)],
            vec![1.0, -1.0],
        )
        .unwrap();
        let u = approximate_solution(&cfg, 0.1, &mesh).unwrap();
        for (i, &p) in mesh.points().iter().enumerate() {
            let q = Point2::new(-p.x, p.y);
            let j = mesh.nearest_node(q);
            if mesh.point(j).dist(q) < 1e-12 {
                assert_relative_eq!(u.values()[i], -u.values()[j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn boundary_smallness_improves_with_rho() {
        let mesh = Arc::new(build_mesh(&UNIT, 1.0 / 64.0).unwrap());
        let cfg = SignedConfig::single(UNIT, Point2::ORIGIN, 1.0).unwrap();
        let near_boundary: Vec<usize> = mesh.near_boundary_nodes().collect();
        let mut maxes = Vec::new();
        for rho in [0.2, 0.1, 0.05] {
            let u = approximate_solution(&cfg, rho, &mesh).unwrap();
            let m = near_boundary
                .iter()
                .map(|&i| u.values()[i].abs())
                .fold(0.0f64, f64::max);
            maxes.push(m);
        }
        assert!(
            maxes[1] < maxes[0] && maxes[2] < maxes[1],
            "boundary values not shrinking: {maxes:?}"
        );
    }

    #[test]
    fn rho_too_large_rejected() {
        let mesh = Arc::new(build_mesh(&UNIT, 1.0 / 32.0).unwrap());
        let cfg = SignedConfig::single(UNIT, Point2::ORIGIN, 1.0).unwrap();
        assert!(matches!(
            approximate_solution(&cfg, 2.0, &mesh),
            Err(Error::RhoTooLarge(_))
        ));
    }

    #[test]
    fn far_field_values() {
        let cfg = SignedConfig::single(UNIT, Point2::ORIGIN, 1.0).unwrap();
        let v = far_field_limit(&cfg, Point2::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(v, 4.0 * 2.0f64.ln(), epsilon = 1e-12);
        assert!(matches!(
            far_field_limit(&cfg, Point2::new(0.05, 0.0)),
            Err(Error::TooCloseToPeak)
        ));
        // dipole: odd across the perpendicular bisector
        let dip = SignedConfig::new(
            UNIT,
            vec![Point2::new(0.4, 0.0), Point2::new(-0.4, 0.0)],
            vec![1.0, -1.0],
        )
        .unwrap();
        let w = far_field_limit(&dip, Point2::new(0.0, 0.55)).unwrap();
        assert!(w.abs() < 1e-12);
        // additivity over peaks
        let single_p = SignedConfig::single(UNIT, Point2::new(0.4, 0.0), 1.0).unwrap();
        let single_m = SignedConfig::single(UNIT, Point2::new(-0.4, 0.0), -1.0).unwrap();
        let x = Point2::new(0.1, 0.6);
        assert_relative_eq!(
            far_field_limit(&dip, x).unwrap(),
            far_field_limit(&single_p, x).unwrap() + far_field_limit(&single_m, x).unwrap(),
            epsilon = 1e-12
        );
    }
}
