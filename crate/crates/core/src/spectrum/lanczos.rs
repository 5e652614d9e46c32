//! Block Krylov solver for the smallest eigenvalues of the generalized
//! problem A v = μ W v with banded SPD A and positive diagonal W.
//!
//! The problem is reduced to the standard symmetric band matrix
//! B = W^{-1/2} A W^{-1/2} (same bandwidth), factorized once; a block
//! iteration with full reorthogonalization builds an orthonormal Krylov
//! basis of B⁻¹ and Rayleigh-Ritz extracts the dominant eigenvalues of
//! B⁻¹, i.e. the smallest μ. Blocking (width 4) captures multiplicity-2
//! clusters produced by symmetric domains. Below 3000 unknowns a dense
//! solve is used instead.

use crate::linalg::dense::{sym_eigen, SplitMix64};
use crate::linalg::SymBand;
use crate::{Error, Result};
use nalgebra::DMatrix;

pub struct GeneralizedEig {
    /// Ascending eigenvalues μ.
    pub values: Vec<f64>,
    /// Eigenvectors of the original problem (columns), W-orthogonal.
    pub vectors: Vec<Vec<f64>>,
    /// Max relative residual ‖A v - μ W v‖ / (μ‖W v‖) over returned pairs.
    pub max_residual: f64,
}

/// Residual target for returned eigenpairs.
pub const EIG_TOL: f64 = 5e-9;
/// Hard acceptance bound; worse residuals are an error.
pub const EIG_FAIL: f64 = 1e-8;

const BLOCK: usize = 4;
/// Basis-size cap; bounds both work and the stored-basis memory.
const MAX_BASIS: usize = 400;
const DENSE_LIMIT: usize = 3000;
/// Extra converged pairs kept beyond the request, so edge clusters do not
/// stall the stopping test.
const PAD: usize = 4;

/// Smallest `k` eigenpairs of A v = μ W v. `a_band` is consumed.
pub fn smallest_generalized(a_band: SymBand, w: &[f64], k: usize) -> Result<GeneralizedEig> {
    smallest_generalized_shifted(a_band, w, k, 0.0)
}

/// Same with a spectral-transform shift: the Krylov iteration runs on
/// (B - σI)⁻¹, so eigenvalues near σ dominate. Choosing σ near a cluster
/// of interest (for the linearization, near 1) cuts the iteration count by
/// an order of magnitude. σ must not coincide with an eigenvalue.
pub fn smallest_generalized_shifted(
    a_band: SymBand,
    w: &[f64],
    k: usize,
    sigma: f64,
) -> Result<GeneralizedEig> {
    let n = a_band.n;
    if k == 0 || k > n {
        return Err(Error::EigSolverFailure(format!(
            "requested {k} eigenpairs from an {n}-dimensional problem"
        )));
    }
    if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::EigSolverFailure("weight must be positive".into()));
    }
    let wsqrt: Vec<f64> = w.iter().map(|&x| x.sqrt()).collect();
    let mut b = a_band;
    scale_band(&mut b, &wsqrt);
    if n <= DENSE_LIMIT {
        dense_path(&b, &wsqrt, k)
    } else {
        krylov_path(&b, &wsqrt, k, sigma)
    }
}

/// B = D⁻¹ A D⁻¹ with D = diag(wsqrt), in place.
fn scale_band(a: &mut SymBand, wsqrt: &[f64]) {
    let bw = a.bw;
    for i in 0..a.n {
        for j in i.saturating_sub(bw)..=i {
            let v = a.get(i, j);
            if v != 0.0 {
                a.set(i, j, v / (wsqrt[i] * wsqrt[j]));
            }
        }
    }
}

fn dense_path(b: &SymBand, wsqrt: &[f64], k: usize) -> Result<GeneralizedEig> {
    let n = b.n;
    let dense = DMatrix::from_fn(n, n, |i, j| b.get(i, j));
    let (vals, vecs) = sym_eigen(dense);
    let mut vectors = Vec::with_capacity(k);
    for col in 0..k {
        let v: Vec<f64> = (0..n).map(|i| vecs[(i, col)] / wsqrt[i]).collect();
        vectors.push(v);
    }
    Ok(GeneralizedEig {
        values: vals[..k].to_vec(),
        vectors,
        max_residual: 0.0,
    })
}

enum ShiftFactor {
    Ldlt(crate::linalg::SymBandFactor),
    Lu(crate::linalg::BandLu),
}

impl ShiftFactor {
    fn solve(&self, v: &mut [f64]) {
        match self {
            ShiftFactor::Ldlt(f) => f.solve_in_place(v),
            ShiftFactor::Lu(f) => f.solve_in_place(v),
        }
    }
}

fn krylov_path(b: &SymBand, wsqrt: &[f64], k: usize, sigma: f64) -> Result<GeneralizedEig> {
    let n = b.n;
    let mut shifted = b.clone();
    if sigma != 0.0 {
        for i in 0..n {
            let d = shifted.get(i, i);
            shifted.set(i, i, d - sigma);
        }
    }
    // the shifted matrix may be indefinite; LDLT usually survives, banded
    // LU with partial pivoting is the robust fallback
    let factor = match shifted.into_ldlt() {
        Ok(f) => {
            if sigma == 0.0 && !f.spd {
                return Err(Error::EigSolverFailure(
                    "operator is not positive definite".into(),
                ));
            }
            ShiftFactor::Ldlt(f)
        }
        Err(_) => {
            let mut sh = b.clone();
            if sigma != 0.0 {
                for i in 0..n {
                    let d = sh.get(i, i);
                    sh.set(i, i, d - sigma);
                }
            }
            ShiftFactor::Lu(crate::linalg::BandLu::factor_sym(&sh)?)
        }
    };

    let mut rng = SplitMix64::new(0x5EED_1AB5);
    let p = BLOCK.min(n);
    let maxdim = MAX_BASIS.min(n);
    let want = (k + PAD).min(n);
    // T = Qᵀ B⁻¹ Q over the orthonormal basis Q
    let mut t = DMatrix::<f64>::zeros(maxdim + p, maxdim + p);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.next_symmetric()).collect())
        .collect();
    ortho_block(&mut block, &basis);
    for v in block.drain(..) {
        basis.push(v);
    }

    let max_steps = maxdim / p + 2;
    let mut processed = 0usize;
    let mut theta_prev: Vec<f64> = Vec::new();
    let mut stable = 0usize;
    for step in 0..max_steps {
        // apply B⁻¹ to every not-yet-processed basis column
        let todo = processed..basis.len();
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(todo.len());
        for col in todo.clone() {
            let mut z = basis[col].clone();
            factor.solve(&mut z);
            for (j, u) in basis.iter().enumerate() {
                let c = dot(&z, u);
                t[(j, col)] = c;
                t[(col, j)] = c;
                axpy(&mut z, u, -c);
            }
            // second orthogonalization pass only when the first one was
            // not already clean
            let znorm = dot(&z, &z).sqrt();
            let mut dirty = false;
            for u in basis.iter() {
                let c = dot(&z, u);
                if c.abs() > 1e-13 * znorm.max(1e-300) {
                    dirty = true;
                    axpy(&mut z, u, -c);
                }
            }
            let _ = dirty;
            images.push(z);
        }
        processed = basis.len();

        let exhausted = images.iter().all(|z| dot(z, z).sqrt() < 1e-10);
        let last = basis.len() + p > maxdim || exhausted || step == max_steps - 1;
        // cheap convergence monitor: candidate μ from the Ritz values of T
        if processed >= want && (step % 2 == 1 || last) {
            let tt = t.view((0, 0), (processed, processed)).into_owned();
            let theta: Vec<f64> = crate::linalg::dense::sym_eigenvalues(tt);
            let mut mus: Vec<f64> = theta
                .iter()
                .filter(|&&th| th.abs() > 1e-300)
                .map(|&th| sigma + 1.0 / th)
                .filter(|&mu| mu > 0.0)
                .collect();
            mus.sort_by(f64::total_cmp);
            mus.truncate(want);
            let settled = theta_prev.len() == mus.len()
                && mus
                    .iter()
                    .zip(&theta_prev)
                    .take(k)
                    .all(|(a, b)| (a - b).abs() <= 1e-13 * a.abs().max(1e-300));
            stable = if settled { stable + 1 } else { 0 };
            theta_prev = mus;
            if stable >= 2 || last {
                stable = 0;
                let cand = extract(b, wsqrt, &t, &basis, k, want, sigma)?;
                if std::env::var("SINHLAB_EIG_TRACE").is_ok() {
                    eprintln!(
                        "eig trace: step {step} dim {} residual {:.2e}",
                        basis.len(),
                        cand.max_residual
                    );
                }
                if cand.max_residual <= EIG_TOL || last {
                    return finish(cand);
                }
            }
        } else if last {
            return finish(extract(b, wsqrt, &t, &basis, k, want.min(processed), sigma)?);
        }

        let mut next = images;
        ortho_block(&mut next, &basis);
        if next.is_empty() {
            return finish(extract(b, wsqrt, &t, &basis, k, want.min(processed), sigma)?);
        }
        for v in next.drain(..) {
            basis.push(v);
        }
    }
    Err(Error::EigSolverFailure("no Ritz extraction".into()))
}

/// Final acceptance gate on the extracted pairs.
fn finish(e: GeneralizedEig) -> Result<GeneralizedEig> {
    if e.max_residual > EIG_FAIL {
        return Err(Error::EigSolverFailure(format!(
            "residual {:.2e} above {EIG_FAIL:.0e}",
            e.max_residual
        )));
    }
    Ok(e)
}

/// Builds the Ritz pairs from the projected operator and verifies the
/// relative residual of the k returned pairs in the reduced coordinates.
fn extract(
    b: &SymBand,
    wsqrt: &[f64],
    t: &DMatrix<f64>,
    basis: &[Vec<f64>],
    k: usize,
    want: usize,
    sigma: f64,
) -> Result<GeneralizedEig> {
    let n = b.n;
    let dim = basis.len();
    if want == 0 || dim < k {
        return Err(Error::EigSolverFailure("Krylov space too small".into()));
    }
    let tt = t.view((0, 0), (dim, dim)).into_owned();
    let (theta, s) = sym_eigen(tt);
    // map Ritz values of (B - σ)⁻¹ to μ and keep the smallest positive ones
    let mut order: Vec<(usize, f64)> = theta
        .iter()
        .enumerate()
        .filter(|(_, &th)| th.abs() > 1e-300)
        .map(|(i, &th)| (i, sigma + 1.0 / th))
        .filter(|&(_, mu)| mu > 0.0)
        .collect();
    order.sort_by(|a2, b2| a2.1.total_cmp(&b2.1));
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    for &(col, mu) in order.iter().take(want) {
        let mut y = vec![0.0; n];
        for (j, u) in basis.iter().enumerate() {
            axpy(&mut y, u, s[(j, col)]);
        }
        pairs.push((mu, y));
    }
    if pairs.len() < k {
        return Err(Error::EigSolverFailure(
            "not enough positive Ritz values".into(),
        ));
    }
    pairs.sort_by(|a2, b2| a2.0.total_cmp(&b2.0));
    pairs.truncate(k);
    // contract metric in the original coordinates:
    // ‖A v - μ W v‖ / ‖W v‖ = ‖w^{1/2} (B y - μ y)‖ / ‖w^{1/2} y‖
    let mut worst = 0.0f64;
    for (mu, y) in &pairs {
        let mut by = vec![0.0; n];
        b.mul_vec(y, &mut by);
        let mut r2 = 0.0;
        let mut y2 = 0.0;
        for i in 0..n {
            let r = (by[i] - mu * y[i]) * wsqrt[i];
            r2 += r * r;
            let wy = y[i] * wsqrt[i];
            y2 += wy * wy;
        }
        worst = worst.max((r2 / y2.max(1e-300)).sqrt());
    }
    let vectors = pairs
        .iter()
        .map(|(_, y)| (0..n).map(|i| y[i] / wsqrt[i]).collect())
        .collect();
    let values = pairs.iter().map(|(mu, _)| *mu).collect();
    Ok(GeneralizedEig {
        values,
        vectors,
        max_residual: worst,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], x: &[f64], c: f64) {
    if c == 0.0 {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Orthonormalizes `block` against `prev` and internally (two passes of
/// modified Gram-Schmidt); drops numerically null vectors.
fn ortho_block(block: &mut Vec<Vec<f64>>, prev: &[Vec<f64>]) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for v in block.drain(..) {
        let mut v = v;
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for u in prev.iter().chain(out.iter()) {
                let c = dot(&v, u);
                axpy(&mut v, u, -c);
            }
        }
        let nrm = dot(&v, &v).sqrt();
        if nrm > 1e-10 * norm0.max(1e-300) && nrm > 1e-300 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            out.push(v);
        }
    }
    *block = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1-D Dirichlet Laplacian on the unit interval.
    fn laplace_1d(n: usize) -> SymBand {
        let h = 1.0 / (n + 1) as f64;
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0 / (h * h));
            if i > 0 {
                a.set(i, i - 1, -1.0 / (h * h));
            }
        }
        a
    }

    #[test]
    fn dense_path_matches_known_eigenvalues() {
        let n = 100;
        let h = 1.0 / (n + 1) as f64;
        let w = vec![1.0; n];
        let eig = smallest_generalized(laplace_1d(n), &w, 3).unwrap();
        for (k, mu) in eig.values.iter().enumerate() {
            let exact =
                4.0 / (h * h) * ((k + 1) as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2);
            assert!((mu - exact).abs() < 1e-8 * exact, "mu {mu} vs {exact}");
        }
    }

    #[test]
    fn krylov_path_satisfies_generalized_residuals() {
        let n = 3200;
        let w: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.01).sin())
            .collect();
        let eig = smallest_generalized(laplace_1d(n), &w, 5).unwrap();
        assert!(eig.max_residual <= EIG_FAIL);
        for pair in eig.values.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
        let a = laplace_1d(n);
        for (mu, v) in eig.values.iter().zip(&eig.vectors) {
            let mut av = vec![0.0; n];
            a.mul_vec(v, &mut av);
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                let r = av[j] - mu * w[j] * v[j];
                num += r * r;
                den += (w[j] * v[j]) * (w[j] * v[j]);
            }
            assert!(
                num.sqrt() <= 1e-7 * den.sqrt().max(1e-30),
                "pair residual too large"
            );
        }
    }

    #[test]
    fn krylov_resolves_exact_multiplicity() {
        // block diagonal with a double eigenvalue well below the rest
        let n = 3100;
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, if i < 2 { 1.0 } else { 10.0 + (i % 7) as f64 });
        }
        let w = vec![1.0; n];
        let eig = smallest_generalized(a, &w, 4).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-9);
        assert!((eig.values[1] - 1.0).abs() < 1e-9);
        assert!(eig.values[2] > 5.0);
    }
}
