//! The limit eigenproblem of the rescaled linearization,
//!
//! ```text
//!   -Δ v = μ (1 + |x|²/8)^{-2} v   on R²,
//! ```
//!
//! discretized on a large Dirichlet-truncated disc B_R(0). The plane
//! problem has eigenvalue 0 (constants) and eigenvalue 1 with eigenspace
//! span{ x₁/(8+|x|²), x₂/(8+|x|²), (8-|x|²)/(8+|x|²) }. Under truncation
//! the two dipole modes converge to 1 polynomially in 1/R, while the
//! radial mode carries a slowly decaying 1/log R defect (its profile only
//! reaches the Dirichlet value logarithmically); the radial eigenvalue of
//! the truncated problem exceeds 1 by roughly 3/(4 log R).

use crate::geom::{DomainSpec, Point2};
use crate::pde::{assemble_laplacian, build_mesh, GridField};
use crate::spectrum::smallest_generalized;
use crate::{Error, Result};
use std::sync::Arc;

pub struct LimitSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenfields: Vec<GridField>,
}

/// Smallest `count` eigenvalues of the truncated limit problem on
/// B_{r_max}(0) at mesh spacing `resolution`.
pub fn limit_eigenproblem(r_max: f64, resolution: f64, count: usize) -> Result<LimitSpectrum> {
    if r_max < 50.0 {
        return Err(Error::ResolutionInvalid(
            "truncation radius must be at least 50".into(),
        ));
    }
    let domain = DomainSpec::Disc {
        radius: r_max,
        center: Point2::ORIGIN,
    };
    let mesh = Arc::new(build_mesh(&domain, resolution)?);
    let lap = assemble_laplacian(&mesh);
    let w: Vec<f64> = mesh
        .points()
        .iter()
        .zip(mesh.areas())
        .map(|(p, &s)| s / (1.0 + p.norm_sq() / 8.0).powi(2))
        .collect();
    let eig = smallest_generalized(lap.band(None), &w, count)?;
    let eigenfields = eig
        .vectors
        .into_iter()
        .map(|v| GridField::new(mesh.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitSpectrum {
        eigenvalues: eig.values,
        eigenfields,
    })
}

/// The three analytic eigenfunctions of the plane problem at μ = 1,
/// sampled on the mesh of `field`: (dipole-x, dipole-y, radial).
pub fn limit_basis(mesh: &Arc<crate::pde::Mesh>) -> [GridField; 3] {
    let b1 = GridField::from_fn(mesh.clone(), |p| p.x / (8.0 + p.norm_sq())).unwrap();
    let b2 = GridField::from_fn(mesh.clone(), |p| p.y / (8.0 + p.norm_sq())).unwrap();
    let b3 =
        GridField::from_fn(mesh.clone(), |p| (8.0 - p.norm_sq()) / (8.0 + p.norm_sq())).unwrap();
    [b1, b2, b3]
}

/// Principal-angle cosines between two spans in the weighted inner product
/// ⟨u, v⟩ = Σ_i w_i u_i v_i, smallest cosine last.
pub fn subspace_cosines(a: &[&GridField], b: &[&GridField], w: &[f64]) -> Vec<f64> {
    use nalgebra::DMatrix;
    let ip = |u: &GridField, v: &GridField| -> f64 {
        u.values()
            .iter()
            .zip(v.values())
            .zip(w)
            .map(|((x, y), wi)| x * y * wi)
            .sum()
    };
    let gram = |set: &[&GridField]| -> DMatrix<f64> {
        DMatrix::from_fn(set.len(), set.len(), |i, j| ip(set[i], set[j]))
    };
    let ga = gram(a);
    let gb = gram(b);
    let la = ga.cholesky().expect("independent basis a").l();
    let lb = gb.cholesky().expect("independent basis b").l();
    let cross = DMatrix::from_fn(a.len(), b.len(), |i, j| ip(a[i], b[j]));
    // cosines are singular values of La⁻¹ C Lb⁻ᵀ
    let la_inv = la
        .try_inverse()
        .expect("cholesky factor invertible");
    let lb_inv = lb.try_inverse().expect("cholesky factor invertible");
    let m = la_inv * cross * lb_inv.transpose();
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn analytic_modes_satisfy_the_limit_equation() {
        // -Δ[x₁/(8+r²)] = 64 x₁/(8+r²)³ = w · x₁/(8+r²) with w = 64/(8+r²)²
        let p = Point2::new(1.3, -0.7);
        let h = 1e-4;
        let f = |q: Point2| q.x / (8.0 + q.norm_sq());
        let lap = (f(p + Point2::new(h, 0.0))
            + f(p - Point2::new(h, 0.0))
            + f(p + Point2::new(0.0, h))
            + f(p - Point2::new(0.0, h))
            - 4.0 * f(p))
            / (h * h);
        let w = (1.0 + p.norm_sq() / 8.0).powi(-2);
        assert_relative_eq!(-lap, w * f(p), max_relative = 1e-5);
        let g = |q: Point2| (8.0 - q.norm_sq()) / (8.0 + q.norm_sq());
        let lap_g = (g(p + Point2::new(h, 0.0))
            + g(p - Point2::new(h, 0.0))
            + g(p + Point2::new(0.0, h))
            + g(p - Point2::new(0.0, h))
            - 4.0 * g(p))
            / (h * h);
        assert_relative_eq!(-lap_g, w * g(p), max_relative = 1e-5);
    }

    #[test]
    fn rejects_small_truncation_radius() {
        assert!(limit_eigenproblem(30.0, 0.75, 4).is_err());
    }
}
