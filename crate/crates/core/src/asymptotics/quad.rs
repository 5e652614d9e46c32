//! Quadrature on discs and circles: trapezoid rule in the angle
//! (spectrally accurate for smooth periodic integrands) and Gauss-Legendre
//! in the radius.

use crate::geom::Point2;

/// Number of angular points for boundary integrals.
pub const CIRCLE_POINTS: usize = 512;

/// ∮_{∂B_R(c)} f dσ by the trapezoid rule.
pub fn circle_integral(c: Point2, r: f64, mut f: impl FnMut(Point2, Point2) -> f64) -> f64 {
    let n = CIRCLE_POINTS;
    let mut acc = 0.0;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let nu = Point2::new(th.cos(), th.sin());
        acc += f(c + nu * r, nu);
    }
    acc * 2.0 * std::f64::consts::PI * r / n as f64
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let _ = dp;
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, 0.0f64);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
        }
        let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ∫_{B_R(c)} f dA with Gauss-Legendre (radial) × trapezoid (angular).
pub fn ball_integral(c: Point2, r: f64, mut f: impl FnMut(Point2) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(48);
    let n_th = 256;
    let mut acc = 0.0;
    for (xi, wi) in gx.iter().zip(&gw) {
        let rad = 0.5 * r * (xi + 1.0);
        let wr = 0.5 * r * wi * rad;
        let mut ring = 0.0;
        for k in 0..n_th {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n_th as f64;
            ring += f(c + Point2::new(th.cos(), th.sin()) * rad);
        }
        acc += wr * ring * 2.0 * std::f64::consts::PI / n_th as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree up to 15 exact
        let val: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert_relative_eq!(val, 2.0 / 15.0, epsilon = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn ball_integral_of_r_squared() {
        // ∫_{B_R} |x|² = π R⁴ / 2
        let r = 1.7;
        let v = ball_integral(Point2::new(0.3, -0.2), r, |p| {
            (p - Point2::new(0.3, -0.2)).norm_sq()
        });
        assert_relative_eq!(v, std::f64::consts::PI * r.powi(4) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn circle_integral_of_cos_squared() {
        // ∮ cos²θ dσ = π R
        let r = 0.4;
        let v = circle_integral(Point2::ORIGIN, r, |_, nu| nu.x * nu.x);
        assert_relative_eq!(v, std::f64::consts::PI * r, epsilon = 1e-12);
    }
}
