//! Closed-form Dirichlet kernels on discs via the method of images.
//!
//! On the unit disc the image combination collapses to
//! `Q(x, y) = |x|²|y|² - 2 x·y + 1`, which equals `(|y| |x - y*|)²` with
//! `y* = y/|y|²` and stays bounded away from zero for interior points. All
//! kernels below are expressed through `Q`; a disc of radius `a` centered at
//! `c` is mapped onto the unit disc, which shifts the regular part by
//! `log(a)/(2π)` and scales derivatives by powers of `1/a`.

use super::{KernelEval, RobinEval};
use crate::geom::{Mat2, Point2};

const INV_2PI: f64 = 1.0 / (2.0 * std::f64::consts::PI);
const INV_4PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

fn q(x: Point2, y: Point2) -> f64 {
    x.norm_sq() * y.norm_sq() - 2.0 * x.dot(y) + 1.0
}

/// Regular part on the unit disc: H(x, y) = log(Q)/4π.
pub fn h_unit(x: Point2, y: Point2) -> f64 {
    INV_4PI * q(x, y).ln()
}

/// Green function on the unit disc: G = -(1/2π) log|x-y| + H.
pub fn g_unit(x: Point2, y: Point2) -> f64 {
    let r2 = (x - y).norm_sq();
    -INV_4PI * r2.ln() + h_unit(x, y)
}

/// All first and second derivatives of G on the unit disc.
pub fn g_derivs_unit(x: Point2, y: Point2) -> KernelEval {
    let d = x - y;
    let r2 = d.norm_sq();
    let qq = q(x, y);
    let xx = x.norm_sq();
    let yy = y.norm_sq();
    // gradients of Q
    let qx = (x * yy - y) * 2.0;
    let qy = (y * xx - x) * 2.0;

    let value = -INV_4PI * r2.ln() + INV_4PI * qq.ln();
    let grad_x = d * (-INV_2PI / r2) + qx * (INV_4PI / qq);
    let grad_y = d * (INV_2PI / r2) + qy * (INV_4PI / qq);

    // -(1/2π) ∂²(log r)/∂x∂x = -(1/2π)(I/r² - 2 dd/r⁴)
    let log_xx = Mat2::outer_plus(-2.0 / (r2 * r2), d, 1.0 / r2);
    // (1/4π) ∂²(log Q)/∂x∂x = (1/4π)(2|y|² I/Q - qx qx/Q²)
    let h_xx = Mat2::outer(-1.0 / (qq * qq), qx, qx) + Mat2::identity().scale(2.0 * yy / qq);
    let hess_xx = log_xx.scale(-INV_2PI) + h_xx.scale(INV_4PI);

    // ∂²(log r²)/∂x∂y = 2(-I/r² + 2 dd/r⁴)
    let log_xy = Mat2::outer_plus(4.0 / (r2 * r2), d, -2.0 / r2);
    // ∂²Q/∂x_i∂y_j = 4 x_i y_j - 2 δ_ij
    let q_xy = Mat2::outer(4.0, x, y) + Mat2::identity().scale(-2.0);
    let h_xy = q_xy.scale(1.0 / qq) + Mat2::outer(-1.0 / (qq * qq), qx, qy);
    let hess_xy = log_xy.scale(-INV_4PI) + h_xy.scale(INV_4PI);

    KernelEval {
        value,
        grad_x,
        grad_y,
        hess_xx,
        hess_xy,
    }
}

/// Derivatives of the regular part H alone on the unit disc.
pub fn h_derivs_unit(x: Point2, y: Point2) -> KernelEval {
    let qq = q(x, y);
    let xx = x.norm_sq();
    let yy = y.norm_sq();
    let qx = (x * yy - y) * 2.0;
    let qy = (y * xx - x) * 2.0;
    let value = INV_4PI * qq.ln();
    let grad_x = qx * (INV_4PI / qq);
    let grad_y = qy * (INV_4PI / qq);
    let h_xx = Mat2::outer(-1.0 / (qq * qq), qx, qx) + Mat2::identity().scale(2.0 * yy / qq);
    let q_xy = Mat2::outer(4.0, x, y) + Mat2::identity().scale(-2.0);
    let h_xy = q_xy.scale(1.0 / qq) + Mat2::outer(-1.0 / (qq * qq), qx, qy);
    KernelEval {
        value,
        grad_x,
        grad_y,
        hess_xx: h_xx.scale(INV_4PI),
        hess_xy: h_xy.scale(INV_4PI),
    }
}

/// Robin function and derivatives on the unit disc:
/// R(x) = log(1 - |x|²)/2π.
pub fn robin_unit(x: Point2) -> RobinEval {
    let s = 1.0 - x.norm_sq();
    let value = INV_2PI * s.ln();
    let grad = x * (-2.0 * INV_2PI / s);
    let hess = Mat2::outer_plus(-4.0 * INV_2PI / (s * s), x, -2.0 * INV_2PI / s);
    RobinEval { value, grad, hess }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn center_values_are_exact() {
        // H(0, y) = 0 for any y, G(0, (0.5, 0)) = log 2 / 2π
        let y = Point2::new(0.5, 0.0);
        assert_relative_eq!(h_unit(Point2::ORIGIN, y), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            g_unit(Point2::ORIGIN, y),
            2.0f64.ln() / (2.0 * std::f64::consts::PI),
            epsilon = 1e-14
        );
    }

    #[test]
    fn robin_matches_h_diagonal() {
        let x = Point2::new(0.9, 0.0);
        assert_relative_eq!(robin_unit(x).value, h_unit(x, x), epsilon = 1e-14);
        // frozen closed form: log(1 - 0.81)/2π = -0.264313...
        assert_relative_eq!(robin_unit(x).value, -0.26431358071263455, epsilon = 1e-14);
    }

    #[test]
    fn robin_hessian_at_center() {
        let r = robin_unit(Point2::ORIGIN);
        let expect = -1.0 / std::f64::consts::PI;
        assert_relative_eq!(r.hess.m[0][0], expect, epsilon = 1e-14);
        assert_relative_eq!(r.hess.m[1][1], expect, epsilon = 1e-14);
        assert_relative_eq!(r.hess.m[0][1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(r.grad.norm(), 0.0, epsilon = 1e-14);
    }
}
