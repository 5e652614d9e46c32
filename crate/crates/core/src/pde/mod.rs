//! Discretization of -Δ with Dirichlet conditions and the nonlinear solvers.
//!
//! The Shortley-Weller stencil is nonsymmetric at boundary-cut nodes. The
//! assembled operator is the cell-area weighted symmetrization
//!
//! ```text
//!   A = (S A_sw + (S A_sw)ᵀ) / 2,      S = diag(cell areas),
//! ```
//!
//! so the discrete equations read `A u = S f(u)` and `diag(S)` is the
//! discrete L² inner product. On rectangles (exact lattice fit) the
//! symmetrization is a no-op and A is the classical five-point operator
//! scaled by h².

mod field;
mod mesh;
mod newton;

pub use field::GridField;
pub use mesh::{build_mesh, Mesh};
pub use newton::{continuation_solve, measure_peaks, solve_sinh_poisson, SolverReport};

use crate::linalg::SymBand;

/// The assembled symmetric operator in sparse per-row form. Band matrices
/// are materialized on demand so only one factorization-sized buffer is
/// ever alive.
#[derive(Debug)]
pub struct DiscreteLaplacian {
    pub n: usize,
    pub bandwidth: usize,
    diag: Vec<f64>,
    /// Symmetrized off-diagonal entries, lower triangle: (i, j, coeff), j < i.
    edges: Vec<(u32, u32, f64)>,
}

impl DiscreteLaplacian {
    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        for (yi, &d) in y.iter_mut().zip(&self.diag) {
            *yi *= d;
        }
        for &(i, j, c) in &self.edges {
            y[i as usize] += c * x[j as usize];
            y[j as usize] += c * x[i as usize];
        }
    }

    /// xᵀ A x, the discrete Dirichlet energy (squared H¹₀ seminorm).
    pub fn energy(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Materializes A + diag(shift) in band storage.
    pub fn band(&self, shift: Option<&[f64]>) -> SymBand {
        let mut b = SymBand::zeros(self.n, self.bandwidth);
        for (i, &d) in self.diag.iter().enumerate() {
            let s = shift.map_or(0.0, |sh| sh[i]);
            b.set(i, i, d + s);
        }
        for &(i, j, c) in &self.edges {
            b.set(i as usize, j as usize, c);
        }
        b
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
}

/// Assembles the symmetrized Shortley-Weller operator.
pub fn assemble_laplacian(mesh: &Mesh) -> DiscreteLaplacian {
    let n = mesh.len();
    let mut diag = vec![0.0; n];
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        let a = mesh.arms(i);
        let s = mesh.area(i);
        diag[i] = s * (2.0 / (a[mesh::W] * a[mesh::E]) + 2.0 / (a[mesh::S] * a[mesh::N]));
        for dir in 0..4 {
            if let Some(j) = mesh.neighbor(i, dir) {
                if j < i {
                    // average of the two one-sided coefficients
                    let cij = sw_coeff(mesh, i, dir);
                    let cji = sw_coeff(mesh, j, opposite(dir));
                    edges.push((i as u32, j as u32, 0.5 * (cij + cji)));
                }
            }
        }
    }
    DiscreteLaplacian {
        n,
        bandwidth: mesh.bandwidth,
        diag,
        edges,
    }
}

/// One-sided Shortley-Weller coupling of node `i` toward direction `dir`,
/// scaled by the cell area of `i`.
fn sw_coeff(mesh: &Mesh, i: usize, dir: usize) -> f64 {
    let a = mesh.arms(i);
    let s = mesh.area(i);
    let (arm, pair) = match dir {
        mesh::W => (a[mesh::W], a[mesh::W] + a[mesh::E]),
        mesh::E => (a[mesh::E], a[mesh::W] + a[mesh::E]),
        mesh::S => (a[mesh::S], a[mesh::S] + a[mesh::N]),
        _ => (a[mesh::N], a[mesh::S] + a[mesh::N]),
    };
    -s * 2.0 / (arm * pair)
}

fn opposite(dir: usize) -> usize {
    match dir {
        mesh::W => mesh::E,
        mesh::E => mesh::W,
        mesh::S => mesh::N,
        _ => mesh::S,
    }
}

/// Nodal L∞ residual of the sinh-Poisson equation,
/// `max_i |(-Δ_h u - ρ²(e^u - e^{-u}))_i|`, recomputed from the mesh
/// geometry on the fly. This is an independent code path from the matrix
/// used inside the Newton solver.
pub fn residual_norm(u: &GridField, rho: f64) -> f64 {
    let mesh = u.mesh();
    let v = u.values();
    let mut worst = 0.0f64;
    for i in 0..mesh.len() {
        let a = mesh.arms(i);
        let s = mesh.area(i);
        let mut acc =
            v[i] * s * (2.0 / (a[mesh::W] * a[mesh::E]) + 2.0 / (a[mesh::S] * a[mesh::N]));
        for dir in 0..4 {
            if let Some(j) = mesh.neighbor(i, dir) {
                let c = 0.5 * (sw_coeff(mesh, i, dir) + sw_coeff(mesh, j, opposite(dir)));
                acc += c * v[j];
            }
        }
        let f = rho * rho * ((v[i]).exp() - (-v[i]).exp());
        worst = worst.max((acc / s - f).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{DomainSpec, Point2};
    use crate::linalg::SplitMix64;
    use std::sync::Arc;

    #[test]
    fn operator_is_exactly_symmetric() {
        let mesh = build_mesh(&DomainSpec::UnitDisc, 1.0 / 24.0).unwrap();
        let lap = assemble_laplacian(&mesh);
        let mut rng = SplitMix64::new(5);
        let u: Vec<f64> = (0..lap.n).map(|_| rng.next_symmetric()).collect();
        let w: Vec<f64> = (0..lap.n).map(|_| rng.next_symmetric()).collect();
        let mut au = vec![0.0; lap.n];
        let mut aw = vec![0.0; lap.n];
        lap.mul_vec(&u, &mut au);
        lap.mul_vec(&w, &mut aw);
        let lhs: f64 = au.iter().zip(&w).map(|(a, b)| a * b).sum();
        let rhs: f64 = aw.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!(
            (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
            "asymmetry {lhs} vs {rhs}"
        );
    }

    #[test]
    fn rectangle_reproduces_five_point_stencil() {
        let mesh = build_mesh(
            &DomainSpec::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            1.0 / 16.0,
        )
        .unwrap();
        let lap = assemble_laplacian(&mesh);
        let h2 = mesh.h * mesh.h;
        // interior row: diag 4, neighbors -1 after dividing by s = h²
        let k = mesh.node_at(8, 8).unwrap();
        assert!((lap.diag()[k] / h2 - 4.0 / h2).abs() < 1e-9);
        // second-order consistency on a quadratic: -Δ(x² + 2y²) = -6
        let u: Vec<f64> = mesh
            .points()
            .iter()
            .map(|p| p.x * p.x + 2.0 * p.y * p.y)
            .collect();
        let mut au = vec![0.0; lap.n];
        lap.mul_vec(&u, &mut au);
        // check away from the boundary (boundary rows feel the Dirichlet 0)
        let c = mesh.node_at(8, 8).unwrap();
        assert!((au[c] / mesh.area(c) - (-6.0)).abs() < 1e-8);
    }

    #[test]
    fn laplacian_consistent_on_disc_interior() {
        let mesh = build_mesh(&DomainSpec::UnitDisc, 1.0 / 48.0).unwrap();
        let lap = assemble_laplacian(&mesh);
        // u = sin(x) cosh(y) is harmonic: -Δu = 0
        let u: Vec<f64> = mesh
            .points()
            .iter()
            .map(|p| p.x.sin() * p.y.cosh())
            .collect();
        let mut au = vec![0.0; lap.n];
        lap.mul_vec(&u, &mut au);
        let k = mesh.nearest_node(Point2::new(0.21, -0.13));
        assert!(
            (au[k] / mesh.area(k)).abs() < 1e-3,
            "harmonic residual {}",
            au[k] / mesh.area(k)
        );
    }

    #[test]
    fn residual_norm_of_zero_field_is_zero() {
        let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / 16.0).unwrap());
        let u = GridField::zeros(mesh);
        assert_eq!(residual_norm(&u, 0.1), 0.0);
    }
}
