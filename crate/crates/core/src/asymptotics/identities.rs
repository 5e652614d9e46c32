//! Numerical checkers for the integral identities behind the eigenvalue
//! analysis: the ball Pohozaev identity, the Green boundary integrals with
//! their 1/(2π) limit, and the second-derivative boundary integral with
//! its Hessian case table.

use super::quad::{ball_integral, circle_integral};
use crate::geom::{DomainSpec, Point2};
use crate::hamiltonian::SignedConfig;
use crate::pde::GridField;
use crate::{greens, Error, Result};
use serde::Serialize;

/// A twice-differentiable field on a closed ball: analytic closures or a
/// grid field sampled with finite differences.
pub trait BallField {
    fn value(&self, p: Point2) -> f64;
    fn grad(&self, p: Point2) -> Point2;
    fn laplacian(&self, p: Point2) -> f64;
}

/// Field given by analytic closures.
pub struct AnalyticField<V, G, L>
where
    V: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
    L: Fn(Point2) -> f64,
{
    pub value: V,
    pub grad: G,
    pub laplacian: L,
}

impl<V, G, L> BallField for AnalyticField<V, G, L>
where
    V: Fn(Point2) -> f64,
    G: Fn(Point2) -> Point2,
    L: Fn(Point2) -> f64,
{
    fn value(&self, p: Point2) -> f64 {
        (self.value)(p)
    }
    fn grad(&self, p: Point2) -> Point2 {
        (self.grad)(p)
    }
    fn laplacian(&self, p: Point2) -> f64 {
        (self.laplacian)(p)
    }
}

/// Grid field adapter: bilinear values, central differences at the mesh
/// spacing for the derivatives (so identity gaps are O(h²)).
pub struct GridBallField<'a> {
    pub field: &'a GridField,
}

impl BallField for GridBallField<'_> {
    fn value(&self, p: Point2) -> f64 {
        self.field.interp(p)
    }
    fn grad(&self, p: Point2) -> Point2 {
        let h = self.field.mesh().h;
        Point2::new(
            (self.field.interp(p + Point2::new(h, 0.0))
                - self.field.interp(p - Point2::new(h, 0.0)))
                / (2.0 * h),
            (self.field.interp(p + Point2::new(0.0, h))
                - self.field.interp(p - Point2::new(0.0, h)))
                / (2.0 * h),
        )
    }
    fn laplacian(&self, p: Point2) -> f64 {
        let h = self.field.mesh().h;
        (self.field.interp(p + Point2::new(h, 0.0))
            + self.field.interp(p - Point2::new(h, 0.0))
            + self.field.interp(p + Point2::new(0.0, h))
            + self.field.interp(p - Point2::new(0.0, h))
            - 4.0 * self.field.interp(p))
            / (h * h)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PohozaevCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs - rhs| / max(1, |lhs|).
    pub gap: f64,
}

/// Evaluates both sides of the ball identity
///
/// ```text
///   ∫_{B_R(ξ)} [(x-ξ)·∇f] Δg + [(x-ξ)·∇g] Δf dx
///     = R ∮_{∂B_R(ξ)} ( 2 ∂f/∂ν ∂g/∂ν - ∇f·∇g ) dσ
/// ```
pub fn pohozaev_check(
    f: &dyn BallField,
    g: &dyn BallField,
    xi: Point2,
    radius: f64,
) -> Result<PohozaevCheck> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::QuadratureFailure("radius must be positive".into()));
    }
    let lhs = ball_integral(xi, radius, |p| {
        let d = p - xi;
        d.dot(f.grad(p)) * g.laplacian(p) + d.dot(g.grad(p)) * f.laplacian(p)
    });
    let rhs = radius
        * circle_integral(xi, radius, |p, nu| {
            let gf = f.grad(p);
            let gg = g.grad(p);
            2.0 * gf.dot(nu) * gg.dot(nu) - gf.dot(gg)
        });
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::QuadratureFailure("non-finite integral".into()));
    }
    let gap = (lhs - rhs).abs() / lhs.abs().max(1.0);
    Ok(PohozaevCheck { lhs, rhs, gap })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GreenBoundaryCheck {
    /// R-prefactored (or plain, when k matches neither index) integral of
    /// ∇G(x,ξ_i)·∇G(x,ξ_j) over ∂B_R(ξ_k).
    pub grad_variant: f64,
    /// Same with normal derivatives ∂νG ∂νG.
    pub normal_variant: f64,
    /// Whether the R prefactor applies (k equals i or j).
    pub prefactored: bool,
    /// The shared limit in the k = i = j case.
    pub limit: f64,
}

/// Boundary integrals of Green gradients around peak `k`:
/// converge to 0 when k matches neither source, o(1) when it matches one,
/// and 1/(2π) when k = i = j.
pub fn green_boundary_integral_check(
    config: &SignedConfig,
    k: usize,
    i: usize,
    j: usize,
    radius: f64,
) -> Result<GreenBoundaryCheck> {
    let pts = config.points();
    let m = pts.len();
    if k >= m || i >= m || j >= m {
        return Err(Error::BallNotAdmissible("peak index out of range".into()));
    }
    let xi_k = pts[k];
    let dom = config.domain();
    if dom.boundary_distance(xi_k) <= radius {
        return Err(Error::BallNotAdmissible(
            "ball reaches the domain boundary".into(),
        ));
    }
    for (l, &p) in pts.iter().enumerate() {
        if l != k && p.dist(xi_k) <= radius {
            return Err(Error::BallNotAdmissible(format!(
                "peak {l} inside the ball around peak {k}"
            )));
        }
    }
    let gi = |x: Point2| greens::green_derivatives(dom, x, pts[i]).map(|d| d.grad_x);
    let gj = |x: Point2| greens::green_derivatives(dom, x, pts[j]).map(|d| d.grad_x);
    let mut failed = false;
    let grad_int = circle_integral(xi_k, radius, |p, _| match (gi(p), gj(p)) {
        (Ok(a), Ok(b)) => a.dot(b),
        _ => {
            failed = true;
            0.0
        }
    });
    let normal_int = circle_integral(xi_k, radius, |p, nu| match (gi(p), gj(p)) {
        (Ok(a), Ok(b)) => a.dot(nu) * b.dot(nu),
        _ => {
            failed = true;
            0.0
        }
    });
    if failed {
        return Err(Error::QuadratureFailure(
            "kernel evaluation failed on the circle".into(),
        ));
    }
    let prefactored = k == i || k == j;
    let scale = if prefactored { radius } else { 1.0 };
    Ok(GreenBoundaryCheck {
        grad_variant: scale * grad_int,
        normal_variant: scale * normal_int,
        prefactored,
        limit: 1.0 / (2.0 * std::f64::consts::PI),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianCase {
    AllDistinct,
    AllEqual,
    SourceMatches,
    EvalMatches,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HessianBoundaryCheck {
    pub value: f64,
    /// Case-table prediction: 0, ½ ∂²R/∂x_i∂x_j, ∂²G/∂x_i∂y_j or
    /// ∂²G/∂x_i∂x_j.
    pub expected: f64,
    pub case: HessianCase,
}

/// Quadrature of
///
/// ```text
///   ∮_{∂B_R(z₁)} [ ∂²G/∂ν∂x_i(x,z₂) ∂G/∂y_j(x,z₃)
///                  - ∂G/∂x_i(x,z₂) ∂²G/∂ν∂y_j(x,z₃) ] dσ
/// ```
///
/// against the case table (∂/∂x first argument, ∂/∂y second argument).
pub fn hessian_boundary_integral_check(
    domain: &DomainSpec,
    z1: Point2,
    z2: Point2,
    z3: Point2,
    radius: f64,
    i: usize,
    j: usize,
) -> Result<HessianBoundaryCheck> {
    if i > 1 || j > 1 {
        return Err(Error::BallNotAdmissible("component index must be 0 or 1".into()));
    }
    if domain.boundary_distance(z1) <= radius {
        return Err(Error::BallNotAdmissible(
            "ball reaches the domain boundary".into(),
        ));
    }
    let same = |a: Point2, b: Point2| a.dist(b) < 1e-12;
    for z in [z2, z3] {
        if !same(z, z1) && z.dist(z1) <= radius {
            return Err(Error::BallNotAdmissible(
                "source strictly inside the ball".into(),
            ));
        }
    }
    let mut failed = false;
    let value = circle_integral(z1, radius, |p, nu| {
        let (k2, k3) = match (
            greens::green_derivatives(domain, p, z2),
            greens::green_derivatives(domain, p, z3),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                failed = true;
                return 0.0;
            }
        };
        // u(x) = ∂G/∂x_i(x, z2):   u_ν = (Hess_xx ν)_i
        let u = k2.grad_x;
        let un = k2.hess_xx.apply(nu);
        // w(x) = ∂G/∂y_j(x, z3):   w_ν = Σ_l ν_l ∂²G/∂x_l∂y_j
        let w = k3.grad_y;
        let wn = Point2::new(
            nu.x * k3.hess_xy.m[0][0] + nu.y * k3.hess_xy.m[1][0],
            nu.x * k3.hess_xy.m[0][1] + nu.y * k3.hess_xy.m[1][1],
        );
        let (ui, uni) = if i == 0 { (u.x, un.x) } else { (u.y, un.y) };
        let (wj, wnj) = if j == 0 { (w.x, wn.x) } else { (w.y, wn.y) };
        uni * wj - ui * wnj
    });
    if failed {
        return Err(Error::QuadratureFailure(
            "kernel evaluation failed on the circle".into(),
        ));
    }
    let (case, expected) = if same(z1, z2) && same(z1, z3) {
        let r = greens::robin_eval(domain, z1)?;
        (HessianCase::AllEqual, 0.5 * r.hess.m[i][j])
    } else if same(z1, z2) {
        let k = greens::green_derivatives(domain, z1, z3)?;
        (HessianCase::SourceMatches, k.hess_xy.m[i][j])
    } else if same(z1, z3) {
        let k = greens::green_derivatives(domain, z1, z2)?;
        (HessianCase::EvalMatches, k.hess_xx.m[i][j])
    } else {
        (HessianCase::AllDistinct, 0.0)
    };
    Ok(HessianBoundaryCheck {
        value,
        expected,
        case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    const PI: f64 = std::f64::consts::PI;

    fn analytic_r2() -> impl BallField {
        AnalyticField {
            value: |p: Point2| p.norm_sq(),
            grad: |p: Point2| p * 2.0,
            laplacian: |_| 4.0,
        }
    }

    #[test]
    fn pohozaev_constant_and_quadratic() {
        let c = AnalyticField {
            value: |_| 3.0,
            grad: |_| Point2::ORIGIN,
            laplacian: |_| 0.0,
        };
        let r = pohozaev_check(&c, &c, Point2::ORIGIN, 0.7).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        // f = g = |x|²: both sides equal 8πR⁴
        let q = analytic_r2();
        let rad: f64 = 1.3;
        let r = pohozaev_check(&q, &q, Point2::ORIGIN, rad).unwrap();
        assert_relative_eq!(r.lhs, 8.0 * PI * rad.powi(4), max_relative = 1e-9);
        assert!(r.gap <= 1e-6, "gap {}", r.gap);
    }

    #[test]
    fn pohozaev_harmonic_pair_vanishes() {
        let f = AnalyticField {
            value: |p: Point2| p.x,
            grad: |_| Point2::new(1.0, 0.0),
            laplacian: |_| 0.0,
        };
        let g = AnalyticField {
            value: |p: Point2| p.y,
            grad: |_| Point2::new(0.0, 1.0),
            laplacian: |_| 0.0,
        };
        let r = pohozaev_check(&f, &g, Point2::ORIGIN, 0.9).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
    }

    #[test]
    fn green_boundary_limit_at_single_peak() {
        // at the disc center the regular-part gradient vanishes and the
        // limit is exact for every R
        let center = SignedConfig::single(DomainSpec::UnitDisc, Point2::ORIGIN, 1.0).unwrap();
        let c = green_boundary_integral_check(&center, 0, 0, 0, 0.05).unwrap();
        assert_relative_eq!(c.grad_variant, 1.0 / (2.0 * PI), max_relative = 1e-10);

        // off center the approach to 1/(2π) is linear in R
        let cfg = SignedConfig::single(DomainSpec::UnitDisc, Point2::new(0.3, 0.1), 1.0).unwrap();
        let mut errs = Vec::new();
        for radius in [0.2, 0.1, 0.05] {
            let c = green_boundary_integral_check(&cfg, 0, 0, 0, radius).unwrap();
            errs.push((c.grad_variant - c.limit).abs());
            // both variants share the limit
            assert_relative_eq!(c.grad_variant, c.normal_variant, max_relative = 0.05);
        }
        // the O(R) term integrates to zero on the circle, so the approach
        // is at least quadratic
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "errors {errs:?}");
        assert!(errs[2] / errs[1] < 0.6, "no decay in R: {errs:?}");
        let c = green_boundary_integral_check(&cfg, 0, 0, 0, 0.05).unwrap();
        assert_relative_eq!(c.grad_variant, 1.0 / (2.0 * PI), max_relative = 0.1);
    }

    #[test]
    fn green_boundary_distinct_peaks_vanish() {
        let cfg = SignedConfig::new(
            DomainSpec::UnitDisc,
            vec![
                Point2::new(0.5, 0.0),
                Point2::new(-0.5, 0.0),
                Point2::new(0.0, 0.5),
            ],
            vec![1.0, -1.0, 1.0],
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for radius in [0.2, 0.1, 0.05] {
            let c = green_boundary_integral_check(&cfg, 0, 1, 2, radius).unwrap();
            assert!(!c.prefactored);
            assert!(c.grad_variant.abs() < prev);
            prev = c.grad_variant.abs();
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn hessian_boundary_case_table() {
        let dom = DomainSpec::UnitDisc;
        let z0 = Point2::ORIGIN;
        // all equal at the center: ½ ∂²R/∂x² = -1/(2π)
        let c = hessian_boundary_integral_check(&dom, z0, z0, z0, 0.05, 0, 0).unwrap();
        assert_eq!(c.case, HessianCase::AllEqual);
        assert_relative_eq!(c.expected, -1.0 / (2.0 * PI), epsilon = 1e-12);
        assert_relative_eq!(c.value, c.expected, max_relative = 0.02);
        // off-diagonal component vanishes at the center
        let c01 = hessian_boundary_integral_check(&dom, z0, z0, z0, 0.05, 0, 1).unwrap();
        assert!(c01.value.abs() < 1e-8);

        let za = Point2::new(0.4, 0.0);
        let zb = Point2::new(-0.3, 0.2);
        let all = hessian_boundary_integral_check(
            &dom,
            Point2::new(0.55, 0.1),
            za,
            zb,
            0.05,
            0,
            0,
        )
        .unwrap();
        assert_eq!(all.case, HessianCase::AllDistinct);
        assert!(all.value.abs() < 1e-10, "distinct case {}", all.value);

        let sm = hessian_boundary_integral_check(&dom, za, za, zb, 0.05, 0, 1).unwrap();
        assert_eq!(sm.case, HessianCase::SourceMatches);
        assert_relative_eq!(sm.value, sm.expected, max_relative = 0.01);

        let em = hessian_boundary_integral_check(&dom, za, zb, za, 0.05, 0, 1).unwrap();
        assert_eq!(em.case, HessianCase::EvalMatches);
        assert_relative_eq!(em.value, em.expected, max_relative = 0.01);
    }

    #[test]
    fn grid_supplied_fields_reach_second_order() {
        use crate::pde::{build_mesh, GridField};
        use std::sync::Arc;
        let mut gaps = Vec::new();
        for inv_h in [16.0, 32.0] {
            let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / inv_h).unwrap());
            let f = GridField::from_fn(mesh, |p| p.norm_sq()).unwrap();
            let gf = GridBallField { field: &f };
            let r = pohozaev_check(&gf, &gf, Point2::ORIGIN, 0.5).unwrap();
            gaps.push(r.gap);
        }
        assert!(gaps[1] < 0.02, "gap {} too large", gaps[1]);
        assert!(gaps[1] <= gaps[0], "no refinement gain: {gaps:?}");
    }

    #[test]
    fn inadmissible_balls_rejected() {
        let cfg = SignedConfig::new(
            DomainSpec::UnitDisc,
            vec![Point2::new(0.1, 0.0), Point2::new(-0.1, 0.0)],
            vec![1.0, -1.0],
        )
        .unwrap();
        assert!(matches!(
            green_boundary_integral_check(&cfg, 0, 0, 0, 0.3),
            Err(Error::BallNotAdmissible(_))
        ));
    }
}
