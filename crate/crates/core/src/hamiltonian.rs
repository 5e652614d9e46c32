//! The Kirchhoff-Routh Hamiltonian of a signed peak configuration,
//!
//! ```text
//!   F(ξ₁..ξ_m) = ½ Σ_k R(ξ_k) + ½ Σ_{k≠j} α_k α_j G(ξ_k, ξ_j),
//! ```
//!
//! its derivatives, damped-Newton critical-point search, and the spectrum
//! η of the scaled Hessian D (Hess F) D with D = diag(τ₁..τ_m, τ₁..τ_m).
//!
//! The diagonal k = j term of the double sum is excluded: G(ξ,ξ) is
//! infinite and each unordered pair is counted twice by the ½ prefactor,
//! so the interaction reduces to Σ_{k<j} α_k α_j G(ξ_k, ξ_j).
//!
//! Coordinate order for gradients, Hessians and D is
//! `(x₁, ..., x_m, y₁, ..., y_m)`: all x components first, then all y
//! components, matching the block layout of D.

use crate::geom::{DomainSpec, Point2};
use crate::linalg::dense::sym_eigen;
use crate::{greens, Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;

/// Rate constant of the second-regime eigenvalue law
/// `μ = 1 - 6π ρ² η (1 + o(1))` tying the linearized spectrum near 1 to
/// the scaled-Hessian eigenvalues η. The constant is pinned by the
/// regime-rate verification harness (see `asymptotics`), which measures it
/// on closed-form configurations.
pub const SCALED_HESSIAN_RATE: f64 = 6.0 * std::f64::consts::PI;

/// Default separation floor: configurations with peaks closer than this are
/// rejected.
pub const DEFAULT_SEPARATION_FLOOR: f64 = 0.01;

/// Peak locations ξ_k with signs α_k ∈ {-1, +1}.
#[derive(Debug, Clone, Serialize)]
pub struct SignedConfig {
    domain: DomainSpec,
    points: Vec<Point2>,
    signs: Vec<f64>,
    separation_floor: f64,
}

impl SignedConfig {
    pub fn new(domain: DomainSpec, points: Vec<Point2>, signs: Vec<f64>) -> Result<Self> {
        Self::with_separation_floor(domain, points, signs, DEFAULT_SEPARATION_FLOOR)
    }

    pub fn with_separation_floor(
        domain: DomainSpec,
        points: Vec<Point2>,
        signs: Vec<f64>,
        separation_floor: f64,
    ) -> Result<Self> {
        domain.validate()?;
        if points.is_empty() || points.len() != signs.len() {
            return Err(Error::PointsTooClose);
        }
        if !signs.iter().all(|&s| s == 1.0 || s == -1.0) {
            return Err(Error::ResolutionInvalid("signs must be +1 or -1".into()));
        }
        for p in &points {
            domain.require_interior(*p)?;
        }
        let cfg = SignedConfig {
            domain,
            points,
            signs,
            separation_floor,
        };
        if cfg.min_pairwise_distance() < separation_floor {
            return Err(Error::PointsTooClose);
        }
        Ok(cfg)
    }

    pub fn single(domain: DomainSpec, point: Point2, sign: f64) -> Result<Self> {
        Self::new(domain, vec![point], vec![sign])
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                d = d.min(self.points[i].dist(self.points[j]));
            }
        }
        d
    }

    /// Separation radius ε: balls B_2ε(ξ_k) stay inside Ω and disjoint.
    pub fn epsilon(&self) -> f64 {
        let bdist = self
            .points
            .iter()
            .map(|&p| self.domain.boundary_distance(p))
            .fold(f64::INFINITY, f64::min);
        (bdist / 2.0).min(self.min_pairwise_distance() / 4.0)
    }

    /// Radius used to associate solution features with the peak at `xi`.
    pub fn association_radius(&self, xi: Point2) -> f64 {
        (self.domain.boundary_distance(xi) / 2.0).min(self.min_pairwise_distance() / 2.0)
    }

    /// Same points in a new order/sign assignment.
    pub fn with_points(&self, points: Vec<Point2>) -> Result<Self> {
        Self::with_separation_floor(
            self.domain,
            points,
            self.signs.clone(),
            self.separation_floor,
        )
    }
}

/// F(ξ₁..ξ_m).
pub fn hamiltonian_value(config: &SignedConfig) -> Result<f64> {
    let mut f = 0.0;
    for &p in config.points() {
        f += 0.5 * greens::robin_eval(config.domain(), p)?.value;
    }
    let pts = config.points();
    let al = config.signs();
    for k in 0..pts.len() {
        for j in (k + 1)..pts.len() {
            f += al[k] * al[j] * greens::green_value(config.domain(), pts[k], pts[j])?;
        }
    }
    Ok(f)
}

/// Analytic gradient (length 2m) and Hessian (2m × 2m) of F in the
/// `(x.., y..)` coordinate order.
pub fn hamiltonian_derivatives(config: &SignedConfig) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = config.len();
    let pts = config.points();
    let al = config.signs();
    let dom = config.domain();
    let mut grad = vec![0.0; 2 * m];
    let mut hess = DMatrix::<f64>::zeros(2 * m, 2 * m);

    let put = |h: &mut DMatrix<f64>, k: usize, j: usize, b: crate::geom::Mat2| {
        h[(k, j)] += b.m[0][0];
        h[(k, j + m)] += b.m[0][1];
        h[(k + m, j)] += b.m[1][0];
        h[(k + m, j + m)] += b.m[1][1];
    };

    for k in 0..m {
        let r = greens::robin_eval(dom, pts[k])?;
        grad[k] += 0.5 * r.grad.x;
        grad[k + m] += 0.5 * r.grad.y;
        put(&mut hess, k, k, r.hess.scale(0.5));
        for j in 0..m {
            if j == k {
                continue;
            }
            let kk = greens::green_derivatives(dom, pts[k], pts[j])?;
            let w = al[k] * al[j];
            grad[k] += w * kk.grad_x.x;
            grad[k + m] += w * kk.grad_x.y;
            put(&mut hess, k, k, kk.hess_xx.scale(w));
            put(&mut hess, k, j, kk.hess_xy.scale(w));
        }
    }
    // enforce exact symmetry against roundoff in the kernel evaluations
    for a in 0..2 * m {
        for b in (a + 1)..2 * m {
            let v = 0.5 * (hess[(a, b)] + hess[(b, a)]);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    Ok((grad, hess))
}

/// Local shape of F at a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Min,
    Max,
    Saddle,
    Degenerate,
}

/// Converged critical-point search result.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointResult {
    pub config: SignedConfig,
    pub grad_norm: f64,
    /// Hessian rows in the `(x.., y..)` order.
    pub hess: Vec<Vec<f64>>,
    pub hess_eigenvalues: Vec<f64>,
    pub classification: Classification,
    /// Number of Hessian eigenvalues below the degeneracy band.
    pub negative_count: usize,
    pub iterations: usize,
}

impl CriticalPointResult {
    pub fn hess_matrix(&self) -> DMatrix<f64> {
        let n = self.hess.len();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j])
    }

    /// Nondegeneracy surrogate for stability of the critical point.
    pub fn is_nondegenerate(&self) -> bool {
        self.classification != Classification::Degenerate
    }
}

/// Relative degeneracy band on Hessian eigenvalues.
const DEGENERACY_BAND: f64 = 1e-8;

fn classify(eigs: &[f64]) -> (Classification, usize) {
    let scale = eigs.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let band = DEGENERACY_BAND * scale.max(f64::MIN_POSITIVE);
    let neg = eigs.iter().filter(|&&v| v < -band).count();
    let pos = eigs.iter().filter(|&&v| v > band).count();
    let class = if neg + pos < eigs.len() {
        Classification::Degenerate
    } else if neg == eigs.len() {
        Classification::Max
    } else if pos == eigs.len() {
        Classification::Min
    } else {
        Classification::Saddle
    };
    (class, neg)
}

const CRIT_ITERATION_CAP: usize = 200;

/// Damped Newton search for ∇F = 0 from the seed configuration.
///
/// The merit function is |∇F|² with Armijo backtracking (halving). Steps
/// that would leave the domain or violate the separation floor are damped
/// away; if no admissible step remains the search reports `LeftDomain`.
pub fn find_critical_point(seed: &SignedConfig, tol: f64) -> Result<CriticalPointResult> {
    let m = seed.len();
    let mut cfg = seed.clone();
    let mut iterations = 0;
    loop {
        let (grad, hess) = hamiltonian_derivatives(&cfg)?;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= tol {
            let (eigs, _) = sym_eigen(hess.clone());
            let (classification, negative_count) = classify(&eigs);
            return Ok(CriticalPointResult {
                config: cfg,
                grad_norm: gnorm,
                hess: (0..2 * m)
                    .map(|i| (0..2 * m).map(|j| hess[(i, j)]).collect())
                    .collect(),
                hess_eigenvalues: eigs,
                classification,
                negative_count,
                iterations,
            });
        }
        if iterations >= CRIT_ITERATION_CAP {
            return Err(Error::NoConvergence);
        }
        // Newton direction; fall back to steepest descent on singular Hessian
        let g = nalgebra::DVector::from_column_slice(&grad);
        let step = hess
            .clone()
            .lu()
            .solve(&g)
            .map(|d| -d)
            .unwrap_or_else(|| -g.clone() * (1.0 / (1.0 + gnorm)));
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-12 {
            let pts: Vec<Point2> = (0..m)
                .map(|k| {
                    cfg.points()[k] + Point2::new(t * step[k], t * step[k + m])
                })
                .collect();
            if let Ok(trial) = cfg.with_points(pts) {
                let (tg, _) = hamiltonian_derivatives(&trial)?;
                let tn = tg.iter().map(|g| g * g).sum::<f64>().sqrt();
                if tn < gnorm {
                    cfg = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // distinguish "walked into the wall" from plain stagnation
            let full: Vec<Point2> = (0..m)
                .map(|k| cfg.points()[k] + Point2::new(step[k], step[k + m]))
                .collect();
            return if cfg.with_points(full).is_err() {
                Err(Error::LeftDomain)
            } else {
                Err(Error::NoConvergence)
            };
        }
        iterations += 1;
    }
}

/// The scaled Hessian D (Hess F) D and its spectrum η, together with the
/// predicted second-regime eigenvalues 1 - 6π ρ² η_j.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledHessian {
    /// Diagonal of D: (τ₁..τ_m, τ₁..τ_m).
    pub d: Vec<f64>,
    /// Rows of D (Hess F) D.
    pub matrix: Vec<Vec<f64>>,
    /// Eigenvalues η sorted ascending.
    pub etas: Vec<f64>,
    /// Predicted eigenvalues of the linearization, ascending
    /// (descending η maps to ascending μ).
    pub mu_predicted: Vec<f64>,
    pub rho: f64,
}

/// Builds D from the concentration parameters τ_k and diagonalizes
/// D (Hess F) D. `rho` only enters the predicted μ list.
pub fn scaled_hessian_spectrum(config: &SignedConfig, rho: f64) -> Result<ScaledHessian> {
    let m = config.len();
    let taus = crate::ansatz::tau_values(config)?;
    let (_, hess) = hamiltonian_derivatives(config)?;
    let mut d = Vec::with_capacity(2 * m);
    d.extend_from_slice(&taus);
    d.extend_from_slice(&taus);
    let mut mat = hess;
    for i in 0..2 * m {
        for j in 0..2 * m {
            mat[(i, j)] *= d[i] * d[j];
        }
    }
    let (etas, _) = sym_eigen(mat.clone());
    let mut mu_predicted: Vec<f64> = etas
        .iter()
        .map(|&e| 1.0 - SCALED_HESSIAN_RATE * rho * rho * e)
        .collect();
    mu_predicted.sort_by(f64::total_cmp);
    Ok(ScaledHessian {
        d,
        matrix: (0..2 * m)
            .map(|i| (0..2 * m).map(|j| mat[(i, j)]).collect())
            .collect(),
        etas,
        mu_predicted,
        rho,
    })
}
