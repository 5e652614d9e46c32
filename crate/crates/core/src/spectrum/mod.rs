//! The eigenvalue problem of the linearized operator,
//!
//! ```text
//!   -Δ v = μ ρ² (e^u + e^{-u}) v  in Ω,    v = 0 on ∂Ω,
//! ```
//!
//! discretized as A v = μ W v with the symmetrized Laplacian A and the
//! positive diagonal W = diag(s_i ρ²(e^{u_i} + e^{-u_i})) (s = cell areas,
//! the discrete inner product). Eigenfields are sup-normalized with the
//! largest-magnitude node positive. The Morse index is the multiplicity
//! count of μ < 1.

mod lanczos;

pub use lanczos::{smallest_generalized, smallest_generalized_shifted, GeneralizedEig, EIG_FAIL, EIG_TOL};

use crate::geom::Point2;
use crate::hamiltonian::SignedConfig;
use crate::pde::{DiscreteLaplacian, GridField};
use crate::{Error, Result};
use serde::Serialize;

/// Guard band half-width around μ = 1: eigenvalues inside are flagged
/// ambiguous rather than silently counted. Tied to the eigensolver residual
/// tolerance; discretization honesty is covered separately by the
/// mesh-refinement stability checks.
pub fn ambiguity_band() -> f64 {
    (10.0 * EIG_FAIL).max(1e-7)
}

/// Spectrum of the linearization at one ρ.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub rho: f64,
    /// Ascending eigenvalues μ.
    pub eigenvalues: Vec<f64>,
    /// Sup-normalized eigenfields, one per eigenvalue.
    #[serde(skip)]
    pub eigenfields: Vec<GridField>,
    /// #{μ < 1}, counted with multiplicity.
    pub morse_index: usize,
    /// Indices with |μ - 1| inside the ambiguity band.
    pub ambiguous: Vec<usize>,
    /// Groups of near-equal eigenvalues (1e-6 relative).
    pub multiplicity_clusters: Vec<Vec<usize>>,
    /// Max relative eigenpair residual reported by the solver.
    pub max_residual: f64,
}

/// w(x) = ρ²(e^u + e^{-u}) per node; errors if |u| > 700 would overflow.
pub fn assemble_weight(u: &GridField, rho: f64) -> Result<GridField> {
    if u.values().iter().any(|&v| v.abs() > 700.0) {
        return Err(Error::ExponentOverflow);
    }
    let vals: Vec<f64> = u
        .values()
        .iter()
        .map(|&v| rho * rho * (v.exp() + (-v).exp()))
        .collect();
    GridField::new(u.mesh().clone(), vals)
}

/// Scales a field so its largest magnitude is one and positive there.
/// Ties resolve toward the lowest node index.
pub fn sup_normalize(v: &GridField) -> Result<GridField> {
    let (_, m) = v.argmax_abs();
    if m == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(v.scaled(1.0 / m))
}

fn cluster(values: &[f64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &mu) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (mu - values[g[0]]).abs() <= 1e-6 * mu.abs().max(1.0) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Solves for the `k` smallest eigenpairs of the linearization around `u`.
pub fn eigenpairs(
    lap: &DiscreteLaplacian,
    weight: &GridField,
    rho: f64,
    k: usize,
) -> Result<SpectrumResult> {
    eigenpairs_with_shift(lap, weight, rho, k, 0.0)
}

/// [`eigenpairs`] with a spectral-transform anchor; the pipelines anchor at
/// σ = 0.9 just below the μ = 1 cluster of the blow-up linearization.
pub fn eigenpairs_with_shift(
    lap: &DiscreteLaplacian,
    weight: &GridField,
    rho: f64,
    k: usize,
    sigma: f64,
) -> Result<SpectrumResult> {
    let mesh = weight.mesh();
    let w: Vec<f64> = weight
        .values()
        .iter()
        .zip(mesh.areas())
        .map(|(&wv, &s)| s * wv)
        .collect();
    let eig = smallest_generalized_shifted(lap.band(None), &w, k, sigma)?;
    // verify the returned pairs against the operator contract
    // ‖A v - μ W v‖ <= tol ‖W v‖ in the original coordinates
    for (mu, v) in eig.values.iter().zip(&eig.vectors) {
        let mut av = vec![0.0; v.len()];
        lap.mul_vec(v, &mut av);
        let mut r2 = 0.0;
        let mut wv2 = 0.0;
        for i in 0..v.len() {
            let wv = w[i] * v[i];
            let r = av[i] - mu * wv;
            r2 += r * r;
            wv2 += wv * wv;
        }
        if r2.sqrt() > EIG_FAIL * wv2.sqrt().max(1e-300) {
            return Err(Error::EigSolverFailure(format!(
                "pair residual {:.2e} above {EIG_FAIL:.0e} at mu = {mu}",
                r2.sqrt() / wv2.sqrt().max(1e-300)
            )));
        }
    }
    let mut eigenfields = Vec::with_capacity(k);
    for v in &eig.vectors {
        let f = GridField::new(mesh.clone(), v.clone())?;
        eigenfields.push(sup_normalize(&f)?);
    }
    let delta = ambiguity_band();
    let ambiguous: Vec<usize> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &mu)| (mu - 1.0).abs() < delta)
        .map(|(i, _)| i)
        .collect();
    let morse_index = eig.values.iter().filter(|&&mu| mu < 1.0).count();
    Ok(SpectrumResult {
        rho,
        multiplicity_clusters: cluster(&eig.values),
        morse_index,
        ambiguous,
        eigenvalues: eig.values,
        eigenfields,
        max_residual: eig.max_residual,
    })
}

/// Certified Morse count #{μ < 1}. Errors with `SpectrumTruncated` unless
/// the largest computed eigenvalue clears 1 by the ambiguity band.
pub fn morse_index(result: &SpectrumResult) -> Result<usize> {
    let delta = ambiguity_band();
    match result.eigenvalues.last() {
        Some(&last) if last >= 1.0 + delta => Ok(result.morse_index),
        Some(&last) => Err(Error::SpectrumTruncated(last)),
        None => Err(Error::SpectrumTruncated(f64::NAN)),
    }
}

/// Number of eigenvalues of A v = μ W v strictly below `c`, by Sylvester
/// inertia of A - c W (negative pivots of its LDLᵀ). One band
/// factorization, no eigenvectors. Errors if the factorization breaks
/// down, which signals an eigenvalue too close to `c`.
pub fn inertia_below(lap: &DiscreteLaplacian, weight: &GridField, c: f64) -> Result<usize> {
    let mesh = weight.mesh();
    let shift: Vec<f64> = weight
        .values()
        .iter()
        .zip(mesh.areas())
        .map(|(&wv, &s)| -c * s * wv)
        .collect();
    let f = lap
        .band(Some(&shift))
        .into_ldlt()
        .map_err(|_| Error::SpectrumTruncated(c))?;
    Ok(f.negative_pivots())
}

/// Morse count certified by spectrum slicing: the inertia count at `c`
/// must equal the number of computed eigenvalues below `c`, proving the
/// computed list is complete there. `c` should sit in a spectral gap;
/// for bubble linearizations 1.1 separates the μ→1 cluster from the
/// radial modes at desk-scale ρ.
pub fn morse_index_certified(
    result: &SpectrumResult,
    lap: &DiscreteLaplacian,
    weight: &GridField,
    c: f64,
) -> Result<usize> {
    if result
        .eigenvalues
        .iter()
        .any(|&mu| (mu - c).abs() < 0.02 * c)
    {
        return Err(Error::SpectrumTruncated(c));
    }
    let counted = result.eigenvalues.iter().filter(|&&mu| mu < c).count();
    let actual = inertia_below(lap, weight, c)?;
    if counted != actual {
        return Err(Error::SpectrumTruncated(c));
    }
    Ok(result.morse_index)
}

/// An eigenfunction resampled in bubble coordinates around one peak:
/// values of v((τ_k ρ/√8) x + ξ_k) on a lattice of rescaled points x.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledProfile {
    pub peak_index: usize,
    /// Rescaled sample coordinates (|x| <= radius).
    pub points: Vec<Point2>,
    pub values: Vec<f64>,
    pub radius: f64,
    /// Physical-to-rescaled factor τ_k ρ / √8.
    pub scale: f64,
}

/// Resamples `v` around peak `k` at rescaled radius `radius` (lattice step
/// `radius/40`, giving ~5000 samples). `center` is the measured peak
/// location ξ_{ρ,k}. Errors if the rescaled ball leaves the domain or
/// exceeds the separation radius.
pub fn rescale_eigenfunction(
    v: &GridField,
    config: &SignedConfig,
    taus: &[f64],
    rho: f64,
    k: usize,
    center: Point2,
    radius: f64,
) -> Result<RescaledProfile> {
    if k >= config.len() {
        return Err(Error::IncompleteRuns(format!("peak index {k} out of range")));
    }
    let scale = taus[k] * rho / 8.0f64.sqrt();
    let phys = radius * scale;
    let dom = config.domain();
    if dom.boundary_distance(center) <= phys {
        return Err(Error::OutOfDomain(center.x, center.y));
    }
    let max_radius = 8.0f64.sqrt() * config.epsilon() / (taus[k] * rho);
    if radius > max_radius * (1.0 + 1e-9) {
        return Err(Error::BallNotAdmissible(format!(
            "rescaled radius {radius} exceeds sqrt(8) eps/(tau rho) = {max_radius}"
        )));
    }
    let step = radius / 40.0;
    let mut points = Vec::new();
    let mut values = Vec::new();
    let n = 40i32;
    for j in -n..=n {
        for i in -n..=n {
            let x = Point2::new(i as f64 * step, j as f64 * step);
            if x.norm_sq() <= radius * radius {
                values.push(v.interp(center + x * scale));
                points.push(x);
            }
        }
    }
    Ok(RescaledProfile {
        peak_index: k,
        points,
        values,
        radius,
        scale,
    })
}

/// Largest admissible rescaled radius around peak `k` (boundary and
/// separation constrained), with a small safety margin.
pub fn admissible_radius(
    config: &SignedConfig,
    taus: &[f64],
    rho: f64,
    k: usize,
    center: Point2,
) -> f64 {
    let scale = taus[k] * rho / 8.0f64.sqrt();
    let bdist = config.domain().boundary_distance(center);
    let by_eps = 8.0f64.sqrt() * config.epsilon() / (taus[k] * rho);
    (0.95 * bdist / scale).min(by_eps)
}
