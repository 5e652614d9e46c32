//! Dirichlet kernels on axis-aligned rectangles `(0,a) × (0,b)`.
//!
//! The strip `0 < x₁ < a` has the exact Dirichlet kernel
//!
//! ```text
//!   S(x, w) = -(1/4π) [ log A₋ - log A₊ ],
//!   A∓ = sinh²(π(x₂-w₂)/2a) + sin²(π(x₁∓w₁)/2a),
//! ```
//!
//! which already sums the infinite ladder of x₁-reflections. The rectangle
//! kernel is the image series of strip kernels over reflections of the
//! source across `x₂ ∈ {0, b}`: sources at `w₂ = 2mb + y₂` (charge +) and
//! `w₂ = 2mb - y₂` (charge -). Strip-kernel tails decay like
//! `exp(-π|x₂-w₂|/a)`, so ring `m` contributes `O(exp(-2π m b / a))`: the
//! truncation radius is chosen adaptively against a geometric tail bound.
//! The strip is taken along the shorter side so the ratio is at most
//! `e^{-2π}` per ring.

use super::KernelEval;
use crate::geom::{Mat2, Point2};
use crate::{Error, Result};

const INV_4PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Ring cap for the adaptive image sum.
const MAX_RINGS: usize = 64;
const TAIL_TOL: f64 = 1e-13;

/// Derivatives of log A for one (image, branch) pair, in strip coordinates.
/// `e` = -1 for the singular branch (x₁ - w₁), +1 for the reflected branch
/// (x₁ + w₁); `sigma` = ±1 is the x₂-reflection parity of the image
/// (w₂ = shift + sigma·y₂).
#[derive(Debug, Clone, Copy, Default)]
struct LogA {
    val: f64,
    dx1: f64,
    dx2: f64,
    dy1: f64,
    dy2: f64,
    dx1x1: f64,
    dx1x2: f64,
    dx2x2: f64,
    dx1y1: f64,
    dx1y2: f64,
    dx2y1: f64,
    dx2y2: f64,
}

fn log_a(kappa: f64, x: Point2, y1: f64, w2: f64, e: f64, sigma: f64) -> LogA {
    let t1 = kappa * (x.x + e * y1);
    let t2 = kappa * (x.y - w2);
    let (val, l1, l2, l11, l22, l12);
    if (2.0 * t2).abs() < 350.0 {
        // A = sinh²t2 + sin²t1 keeps full relative precision near zero
        let (s1, c1) = t1.sin_cos();
        let sh = t2.sinh();
        let ch = t2.cosh();
        let a = sh * sh + s1 * s1;
        l1 = 2.0 * s1 * c1 / a;
        l2 = 2.0 * sh * ch / a;
        l11 = 2.0 * (c1 * c1 - s1 * s1) / a - l1 * l1;
        l22 = 2.0 * (ch * ch + sh * sh) / a - l2 * l2;
        l12 = -l1 * l2;
        val = a.ln();
    } else {
        // cosh-dominated regime: log A = 2|t2| - log 2 up to e^{-4|t2|}
        val = 2.0 * t2.abs() - std::f64::consts::LN_2;
        l1 = 0.0;
        l2 = 2.0 * t2.signum();
        l11 = 0.0;
        l22 = 0.0;
        l12 = 0.0;
    }
    // chain: t1 = kappa(x1 + e y1), t2 = kappa(x2 - w2), w2 = shift + sigma y2
    LogA {
        val,
        dx1: kappa * l1,
        dx2: kappa * l2,
        dy1: e * kappa * l1,
        dy2: -sigma * kappa * l2,
        dx1x1: kappa * kappa * l11,
        dx1x2: kappa * kappa * l12,
        dx2x2: kappa * kappa * l22,
        dx1y1: e * kappa * kappa * l11,
        dx1y2: -sigma * kappa * kappa * l12,
        dx2y1: e * kappa * kappa * l12,
        dx2y2: -sigma * kappa * kappa * l22,
    }
}

fn accumulate(acc: &mut KernelEval, term: &LogA, coeff: f64) {
    acc.value += coeff * term.val;
    acc.grad_x.x += coeff * term.dx1;
    acc.grad_x.y += coeff * term.dx2;
    acc.grad_y.x += coeff * term.dy1;
    acc.grad_y.y += coeff * term.dy2;
    acc.hess_xx.m[0][0] += coeff * term.dx1x1;
    acc.hess_xx.m[0][1] += coeff * term.dx1x2;
    acc.hess_xx.m[1][0] += coeff * term.dx1x2;
    acc.hess_xx.m[1][1] += coeff * term.dx2x2;
    acc.hess_xy.m[0][0] += coeff * term.dx1y1;
    acc.hess_xy.m[0][1] += coeff * term.dx1y2;
    acc.hess_xy.m[1][0] += coeff * term.dx2y1;
    acc.hess_xy.m[1][1] += coeff * term.dx2y2;
}

fn merge(acc: &mut KernelEval, ring: &KernelEval) -> f64 {
    acc.value += ring.value;
    acc.grad_x = acc.grad_x + ring.grad_x;
    acc.grad_y = acc.grad_y + ring.grad_y;
    acc.hess_xx = acc.hess_xx + ring.hess_xx;
    acc.hess_xy = acc.hess_xy + ring.hess_xy;
    ring.value
        .abs()
        .max(ring.grad_x.norm())
        .max(ring.grad_y.norm())
        .max(ring.hess_xx.max_abs())
        .max(ring.hess_xy.max_abs())
}

/// Swap of coordinate axes so the strip always runs along the shorter side.
fn to_strip(p: Point2, swapped: bool) -> Point2 {
    if swapped {
        Point2::new(p.y, p.x)
    } else {
        p
    }
}

fn eval_from_strip(e: KernelEval, swapped: bool) -> KernelEval {
    if !swapped {
        return e;
    }
    let sw = |p: Point2| Point2::new(p.y, p.x);
    let swm = |m: Mat2| Mat2::new(m.m[1][1], m.m[1][0], m.m[0][1], m.m[0][0]);
    KernelEval {
        value: e.value,
        grad_x: sw(e.grad_x),
        grad_y: sw(e.grad_y),
        hess_xx: swm(e.hess_xx),
        hess_xy: swm(e.hess_xy),
    }
}

/// Full derivative stack on the rectangle. `want_g` selects G itself;
/// otherwise the regular part H = G + (1/2π) log|x-y| is returned, which
/// stays finite on the diagonal x = y.
pub fn rect_kernel(
    width: f64,
    height: f64,
    x0: Point2,
    y0: Point2,
    want_g: bool,
) -> Result<KernelEval> {
    let swapped = width > height;
    let (a, b) = if swapped {
        (height, width)
    } else {
        (width, height)
    };
    let x = to_strip(x0, swapped);
    let y = to_strip(y0, swapped);
    let kappa = std::f64::consts::PI / (2.0 * a);

    let mut acc = KernelEval::default();
    let diagonal = (x0 - y0).norm_sq() == 0.0;

    // m = 0, unreflected singular branch. For H the combination
    // (1/4π)[log r² - log A₋] is smooth across the diagonal.
    if want_g || !diagonal {
        let t = log_a(kappa, x, y.x, y.y, -1.0, 1.0);
        accumulate(&mut acc, &t, -INV_4PI);
        if !want_g {
            let d = x - y;
            let r2 = d.norm_sq();
            acc.value += INV_4PI * r2.ln();
            let g = d * (2.0 * INV_4PI / r2);
            acc.grad_x = acc.grad_x + g;
            acc.grad_y = acc.grad_y - g;
            let hxx = Mat2::outer_plus(-4.0 / (r2 * r2), d, 2.0 / r2).scale(INV_4PI);
            acc.hess_xx = acc.hess_xx + hxx;
            acc.hess_xy = acc.hess_xy - hxx;
        }
    } else {
        // limit of (1/4π)[log r² - log A₋] as x -> y:
        // value -(1/2π) log κ, curvature ±(κ²/6π) on the strip axes.
        acc.value += -2.0 * INV_4PI * kappa.ln();
        let c = INV_4PI * kappa * kappa / 3.0;
        acc.hess_xx = acc.hess_xx + Mat2::new(2.0 * c, 0.0, 0.0, -2.0 * c);
        acc.hess_xy = acc.hess_xy + Mat2::new(-2.0 * c, 0.0, 0.0, 2.0 * c);
    }
    // m = 0: x₁-reflected branch of the source, then the x₂-reflected image
    let t = log_a(kappa, x, y.x, y.y, 1.0, 1.0);
    accumulate(&mut acc, &t, INV_4PI);
    for (e, s_e) in [(-1.0, 1.0), (1.0, -1.0)] {
        let t = log_a(kappa, x, y.x, -y.y, e, -1.0);
        accumulate(&mut acc, &t, INV_4PI * s_e);
    }

    // image rings m = ±1, ±2, ...; net ring contribution decays
    // geometrically with ratio exp(-2π b / a)
    let ratio = (-2.0 * std::f64::consts::PI * b / a).exp();
    let mut converged = false;
    for m in 1..=MAX_RINGS {
        let mut ring = KernelEval::default();
        for pm in [1.0f64, -1.0] {
            let shift = 2.0 * (m as f64) * b * pm;
            for (sigma, charge) in [(1.0, 1.0), (-1.0, -1.0)] {
                let w2 = shift + sigma * y.y;
                for (e, s_e) in [(-1.0, 1.0), (1.0, -1.0)] {
                    let t = log_a(kappa, x, y.x, w2, e, sigma);
                    accumulate(&mut ring, &t, -INV_4PI * charge * s_e);
                }
            }
        }
        let ring_size = merge(&mut acc, &ring);
        if ring_size * ratio / (1.0 - ratio) < TAIL_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SeriesNotConverged);
    }
    Ok(eval_from_strip(acc, swapped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vanishes_on_all_four_sides() {
        let y = Point2::new(0.3, 0.6);
        for p in [
            Point2::new(1e-12, 0.5),
            Point2::new(1.0 - 1e-12, 0.5),
            Point2::new(0.4, 1e-12),
            Point2::new(0.4, 1.0 - 1e-12),
        ] {
            let g = rect_kernel(1.0, 1.0, p, y, true).unwrap().value;
            assert!(g.abs() < 1e-10, "G({p:?}) = {g}");
        }
    }

    #[test]
    fn symmetric_in_arguments() {
        let x = Point2::new(0.21, 0.67);
        let y = Point2::new(0.55, 0.34);
        let a = rect_kernel(2.0, 1.0, x, y, true).unwrap().value;
        let b = rect_kernel(2.0, 1.0, y, x, true).unwrap().value;
        assert_relative_eq!(a, b, epsilon = 1e-13);
        let ha = rect_kernel(2.0, 1.0, x, y, false).unwrap().value;
        let hb = rect_kernel(2.0, 1.0, y, x, false).unwrap().value;
        assert_relative_eq!(ha, hb, epsilon = 1e-13);
    }

    #[test]
    fn h_is_smooth_complement() {
        let x = Point2::new(0.41, 0.52);
        let y = Point2::new(0.43, 0.50);
        let g = rect_kernel(1.0, 1.0, x, y, true).unwrap().value;
        let h = rect_kernel(1.0, 1.0, x, y, false).unwrap().value;
        let r = (x - y).norm();
        assert_relative_eq!(
            g,
            -r.ln() / (2.0 * std::f64::consts::PI) + h,
            epsilon = 1e-12
        );
    }

    #[test]
    fn diagonal_h_matches_near_diagonal_limit() {
        // symmetric pair (x+δ, x-δ) cancels the first-order drift of H
        let x = Point2::new(0.37, 0.62);
        let hd = rect_kernel(1.0, 1.0, x, x, false).unwrap().value;
        let d = Point2::new(1e-5, -1e-5);
        let hn = rect_kernel(1.0, 1.0, x + d, x - d, false).unwrap().value;
        assert_relative_eq!(hd, hn, epsilon = 1e-8);
    }

    #[test]
    fn swapped_orientation_agrees() {
        let x = Point2::new(1.2, 0.4);
        let y = Point2::new(0.7, 0.8);
        let g1 = rect_kernel(2.0, 1.0, x, y, true).unwrap();
        let g2 = rect_kernel(1.0, 2.0, Point2::new(x.y, x.x), Point2::new(y.y, y.x), true).unwrap();
        assert_relative_eq!(g1.value, g2.value, epsilon = 1e-13);
        assert_relative_eq!(g1.grad_x.x, g2.grad_x.y, epsilon = 1e-12);
        assert_relative_eq!(g1.grad_x.y, g2.grad_x.x, epsilon = 1e-12);
    }

    #[test]
    fn extreme_aspect_ratio_stays_finite() {
        let x = Point2::new(0.02, 4.0);
        let y = Point2::new(0.07, 7.5);
        let g = rect_kernel(0.1, 10.0, x, y, true).unwrap();
        assert!(g.value.is_finite() && g.grad_x.norm().is_finite());
    }
}
