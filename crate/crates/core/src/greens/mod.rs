//! Dirichlet Green function, regular part and Robin function on the model
//! domains, with first and second derivatives.
//!
//! Sign convention, fixed once for the whole crate:
//!
//! ```text
//!   -Δ_x G(x, y) = δ_y,   G = 0 on ∂Ω,
//!   G(x, y) = -(1/2π) log|x - y| + H(x, y),
//!   R(x) = H(x, x).
//! ```
//!
//! The regular part enters with a **plus** sign, so on the unit disc
//! `H(x, y) = log(|x|²|y|² - 2x·y + 1)/4π` and the Robin function
//! `R(x) = log(1 - |x|²)/2π` is negative, maximal at the center. This is
//! the normalization under which the m-peak machinery is consistent: the
//! projected bubble expands as `PU = U + 8πH(·, ξ) - log(8τ²) + O(ρ²)`,
//! the concentration parameters are
//! `τ_k = exp(4π[H(ξ_k,ξ_k) + Σ_{i≠k} α_k α_i G(ξ_k,ξ_i)])/√8`, and
//! counter-rotating peak pairs admit interior critical points of the
//! Kirchhoff-Routh function.
//!
//! Discs use the method of images in closed form; rectangles use a strip
//! kernel with an adaptively truncated ladder of reflected images (see
//! [`rect`]). All evaluations reject points within `1e-9` of the boundary.

mod disc;
mod rect;

use crate::geom::{DomainSpec, Mat2, Point2};
use crate::{Error, Result};

/// Value and derivative stack of a two-point kernel (G or H).
///
/// `grad_x`/`hess_xx` differentiate the first argument, `grad_y` the
/// second, `hess_xy[i][j] = ∂²K/∂x_i∂y_j`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelEval {
    pub value: f64,
    pub grad_x: Point2,
    pub grad_y: Point2,
    pub hess_xx: Mat2,
    pub hess_xy: Mat2,
}

/// Robin function value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy)]
pub struct RobinEval {
    pub value: f64,
    pub grad: Point2,
    pub hess: Mat2,
}

fn check_pair(domain: &DomainSpec, x: Point2, y: Point2) -> Result<()> {
    domain.require_interior(x)?;
    domain.require_interior(y)?;
    Ok(())
}

fn check_distinct(domain: &DomainSpec, x: Point2, y: Point2) -> Result<()> {
    if x.dist(y) < 1e-12 * domain.diameter() {
        return Err(Error::Singularity);
    }
    Ok(())
}

/// G(x, y).
pub fn green_value(domain: &DomainSpec, x: Point2, y: Point2) -> Result<f64> {
    check_pair(domain, x, y)?;
    check_distinct(domain, x, y)?;
    match domain.disc_params() {
        Some((a, c)) => Ok(disc::g_unit((x - c) * (1.0 / a), (y - c) * (1.0 / a))),
        None => {
            let (w, h) = rect_dims(domain);
            Ok(rect::rect_kernel(w, h, x, y, true)?.value)
        }
    }
}

/// H(x, y); the diagonal x = y is allowed.
pub fn green_regular_part(domain: &DomainSpec, x: Point2, y: Point2) -> Result<f64> {
    check_pair(domain, x, y)?;
    match domain.disc_params() {
        Some((a, c)) => Ok(disc::h_unit((x - c) * (1.0 / a), (y - c) * (1.0 / a))
            + a.ln() / (2.0 * std::f64::consts::PI)),
        None => {
            let (w, h) = rect_dims(domain);
            Ok(rect::rect_kernel(w, h, x, y, false)?.value)
        }
    }
}

/// All first and second derivatives of G.
pub fn green_derivatives(domain: &DomainSpec, x: Point2, y: Point2) -> Result<KernelEval> {
    check_pair(domain, x, y)?;
    check_distinct(domain, x, y)?;
    match domain.disc_params() {
        Some((a, c)) => Ok(rescale_disc(
            disc::g_derivs_unit((x - c) * (1.0 / a), (y - c) * (1.0 / a)),
            a,
            0.0,
        )),
        None => {
            let (w, h) = rect_dims(domain);
            rect::rect_kernel(w, h, x, y, true)
        }
    }
}

/// All first and second derivatives of the regular part H.
pub fn regular_part_derivatives(domain: &DomainSpec, x: Point2, y: Point2) -> Result<KernelEval> {
    check_pair(domain, x, y)?;
    match domain.disc_params() {
        Some((a, c)) => Ok(rescale_disc(
            disc::h_derivs_unit((x - c) * (1.0 / a), (y - c) * (1.0 / a)),
            a,
            a.ln() / (2.0 * std::f64::consts::PI),
        )),
        None => {
            let (w, h) = rect_dims(domain);
            rect::rect_kernel(w, h, x, y, false)
        }
    }
}

/// Robin function R(x) = H(x, x) with gradient and Hessian.
///
/// The total derivatives follow from the symmetry of H:
/// `∇R = 2 ∇_x H(x,x)` and `Hess R = 2(Hess_xx + Hess_xy) H(x,x)`.
pub fn robin_eval(domain: &DomainSpec, x: Point2) -> Result<RobinEval> {
    domain.require_interior(x)?;
    match domain.disc_params() {
        Some((a, c)) => {
            let u = disc::robin_unit((x - c) * (1.0 / a));
            Ok(RobinEval {
                value: u.value + a.ln() / (2.0 * std::f64::consts::PI),
                grad: u.grad * (1.0 / a),
                hess: u.hess.scale(1.0 / (a * a)),
            })
        }
        None => {
            let (w, h) = rect_dims(domain);
            let k = rect::rect_kernel(w, h, x, x, false)?;
            let sym_xy = (k.hess_xy + k.hess_xy.transpose()).scale(0.5);
            Ok(RobinEval {
                value: k.value,
                grad: k.grad_x * 2.0,
                hess: (k.hess_xx + sym_xy).scale(2.0),
            })
        }
    }
}

/// Validation oracle: solves the discrete Dirichlet problem with a unit
/// source at the mesh node nearest `y` and reads the value at the node
/// nearest `x`. Converges to [`green_value`] at O(h²) away from the
/// diagonal.
pub fn discrete_green_crosscheck(
    domain: &DomainSpec,
    h: f64,
    x: Point2,
    y: Point2,
) -> Result<f64> {
    check_pair(domain, x, y)?;
    let mesh = crate::pde::build_mesh(domain, h)?;
    if x.dist(y) < 2.0 * h {
        return Err(Error::MeshTooCoarse(format!(
            "source and evaluation point closer than two cells ({} < {})",
            x.dist(y),
            2.0 * h
        )));
    }
    let lap = crate::pde::assemble_laplacian(&mesh);
    let ky = mesh.nearest_node(y);
    let kx = mesh.nearest_node(x);
    // weighted form: A u = s f with point density f = δ/s at the source node
    let mut rhs = vec![0.0; mesh.len()];
    rhs[ky] = 1.0;
    let f = lap
        .band(None)
        .into_cholesky()
        .map_err(|_| Error::MeshTooCoarse("Laplacian factorization failed".into()))?;
    f.solve_in_place(&mut rhs);
    Ok(rhs[kx])
}

fn rect_dims(domain: &DomainSpec) -> (f64, f64) {
    match *domain {
        DomainSpec::Rectangle { width, height } => (width, height),
        _ => unreachable!("rect_dims on a disc"),
    }
}

fn rescale_disc(e: KernelEval, a: f64, value_shift: f64) -> KernelEval {
    KernelEval {
        value: e.value + value_shift,
        grad_x: e.grad_x * (1.0 / a),
        grad_y: e.grad_y * (1.0 / a),
        hess_xx: e.hess_xx.scale(1.0 / (a * a)),
        hess_xy: e.hess_xy.scale(1.0 / (a * a)),
    }
}
