//! Symmetric banded matrices with direct factorizations.
//!
//! The five-point meshes produced by [`crate::pde`] have rows ordered
//! lexicographically, so their operators are banded with half-bandwidth
//! equal to the widest mesh row. At desk scale a band factorization is the
//! sparse direct solver of choice: deterministic, in-place and cache
//! friendly.

use crate::{Error, Result};

/// Symmetric banded matrix. Only the lower band is stored, row major:
/// entry `(i, j)` with `i - bw <= j <= i` lives at `data[i*(bw+1) + j - i + bw]`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    /// Number of sub-diagonals.
    pub bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBand {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)`; either triangle may be addressed.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j > i { (j, i) } else { (i, j) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.idx(r, c)]
        }
    }

    /// Adds `v` to entry `(i, j)` (lower triangle address).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if j > i { (j, i) } else { (i, j) };
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if j > i { (j, i) } else { (i, j) };
        let k = self.idx(r, c);
        self.data[k] = v;
    }

    /// y = A x (symmetric multiply).
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        let bw = self.bw;
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let row = &self.data[i * (bw + 1) + (j0 + bw - i)..i * (bw + 1) + bw];
            let mut acc = self.data[i * (bw + 1) + bw] * x[i];
            for (off, &a) in row.iter().enumerate() {
                let j = j0 + off;
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
    }

    /// Quadratic form xᵀ A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// LDLᵀ factorization without pivoting, consuming the matrix so only one
    /// factorization-sized buffer is alive.
    ///
    /// Returns `JacobianSingular` when a pivot falls below `tiny` relative to
    /// the largest diagonal entry. For indefinite matrices this factorization
    /// is used opportunistically; callers needing guaranteed stability fall
    /// back to [`BandLu`].
    pub fn into_ldlt(self) -> Result<SymBandFactor> {
        let n = self.n;
        let bw = self.bw;
        let mut f = self.data;
        let scale = (0..n)
            .map(|i| f[i * (bw + 1) + bw].abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tiny = 1e-14 * scale;
        let w = bw + 1;
        let mut spd = true;
        let mut col = vec![0.0f64; bw];
        for j in 0..n {
            // d_j = a_jj with all prior rank-1 updates already applied
            let d = f[j * w + bw];
            if d.abs() < tiny {
                return Err(Error::JacobianSingular);
            }
            if d <= 0.0 {
                spd = false;
            }
            let iend = (j + bw).min(n - 1);
            // scale column j (l_ij = a_ij/d), keeping a contiguous copy
            for i in (j + 1)..=iend {
                let l = f[i * w + (j + bw - i)] / d;
                f[i * w + (j + bw - i)] = l;
                col[i - j - 1] = l;
            }
            // trailing update a_ik -= l_ij d l_kj; runs contiguously in k
            for i in (j + 1)..=iend {
                let s = col[i - j - 1] * d;
                if s == 0.0 {
                    continue;
                }
                let base = i * w + bw - i;
                let row = &mut f[base + j + 1..=base + i];
                for (k, rv) in row.iter_mut().enumerate() {
                    *rv -= s * col[k];
                }
            }
        }
        Ok(SymBandFactor {
            n,
            bw,
            data: f,
            spd,
        })
    }

    /// LDLᵀ of a clone; see [`SymBand::into_ldlt`].
    pub fn ldlt(&self) -> Result<SymBandFactor> {
        self.clone().into_ldlt()
    }

    /// Cholesky-style factorization requiring positive pivots, consuming the
    /// matrix.
    pub fn into_cholesky(self) -> Result<SymBandFactor> {
        let f = self.into_ldlt()?;
        if f.spd {
            Ok(f)
        } else {
            Err(Error::EigSolverFailure(
                "operator is not positive definite".into(),
            ))
        }
    }

    /// Cholesky of a clone.
    pub fn cholesky(&self) -> Result<SymBandFactor> {
        self.clone().into_cholesky()
    }

    /// Largest absolute eigenvalue estimate by a few power iterations
    /// (used only for diagnostics and degeneracy bands).
    pub fn norm_est(&self) -> f64 {
        let mut x: Vec<f64> = (0..self.n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut y = vec![0.0; self.n];
        let mut lam = 0.0;
        for _ in 0..12 {
            self.mul_vec(&x, &mut y);
            lam = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if lam == 0.0 {
                return 0.0;
            }
            for (xv, yv) in x.iter_mut().zip(&y) {
                *xv = yv / lam;
            }
        }
        lam
    }
}

/// Factor L D Lᵀ of a [`SymBand`]; unit lower band L and diagonal D share
/// the band layout (D on the main diagonal slots).
#[derive(Debug, Clone)]
pub struct SymBandFactor {
    n: usize,
    bw: usize,
    data: Vec<f64>,
    /// All pivots positive.
    pub spd: bool,
}

impl SymBandFactor {
    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        // forward: L y = b
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut acc = b[i];
            let base = i * w + bw - i;
            for j in j0..i {
                acc -= self.data[base + j] * b[j];
            }
            b[i] = acc;
        }
        // diagonal
        for i in 0..n {
            b[i] /= self.data[i * w + bw];
        }
        // backward: Lᵀ x = y
        for j in (0..n).rev() {
            let iend = (j + bw).min(n - 1);
            let mut acc = b[j];
            for i in (j + 1)..=iend {
                acc -= self.data[i * w + (j + bw - i)] * b[i];
            }
            b[j] = acc;
        }
    }

    /// Forward substitution only: solves L z = b (unit lower). Used by the
    /// eigen layer for the split operator L⁻¹ W L⁻ᵀ.
    pub fn forward(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut acc = b[i];
            let base = i * w + bw - i;
            for j in j0..i {
                acc -= self.data[base + j] * b[j];
            }
            b[i] = acc;
        }
    }

    /// Back substitution only: solves Lᵀ x = b.
    pub fn backward(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let _ = w;
        for j in (0..n).rev() {
            let iend = (j + bw).min(n - 1);
            let mut acc = b[j];
            for i in (j + 1)..=iend {
                acc -= self.data[i * (bw + 1) + (j + bw - i)] * b[i];
            }
            b[j] = acc;
        }
    }

    /// The pivots D.
    pub fn pivots(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.data[i * (self.bw + 1) + self.bw])
    }

    /// Number of negative pivots = number of eigenvalues below zero
    /// (Sylvester's law), valid when the factorization did not break down.
    pub fn negative_pivots(&self) -> usize {
        self.pivots().filter(|&d| d < 0.0).count()
    }
}

/// General banded LU with partial pivoting (LAPACK `dgbtrf` layout), the
/// robust fallback for indefinite Newton Jacobians.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column major: `ab[c * ldab + (kl + ku + i - c)]`, ldab = 2 kl + ku + 1.
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Factorizes the symmetric band matrix `a` (expanded to general band).
    pub fn factor_sym(a: &SymBand) -> Result<Self> {
        let n = a.n;
        let kl = a.bw;
        let ku = a.bw;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; n * ldab];
        for i in 0..n {
            let j0 = i.saturating_sub(a.bw);
            for j in j0..=i {
                let v = a.get(i, j);
                if v != 0.0 {
                    ab[j * ldab + (kl + ku + i - j)] = v;
                    if i != j {
                        ab[i * ldab + (kl + ku + j - i)] = v;
                    }
                }
            }
        }
        let mut ipiv = vec![0usize; n];
        let scale = (0..n)
            .map(|j| ab[j * ldab + kl + ku].abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            // pivot search in column j
            let mut p = j;
            let mut pv = ab[j * ldab + kl + ku].abs();
            for i in (j + 1)..=imax {
                let v = ab[j * ldab + (kl + ku + i - j)].abs();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv < 1e-300 * scale.max(1.0) {
                return Err(Error::JacobianSingular);
            }
            ipiv[j] = p;
            let cend = (j + kl + ku).min(n - 1);
            if p != j {
                for c in j..=cend {
                    let a1 = c * ldab + (kl + ku + j - c);
                    let a2 = c * ldab + (kl + ku + p - c);
                    ab.swap(a1, a2);
                }
            }
            let piv = ab[j * ldab + kl + ku];
            for i in (j + 1)..=imax {
                ab[j * ldab + (kl + ku + i - j)] /= piv;
            }
            for c in (j + 1)..=cend {
                let t = ab[c * ldab + (kl + ku + j - c)];
                if t != 0.0 {
                    let cb = c * ldab + kl + ku - c;
                    let jb = j * ldab + kl + ku - j;
                    for i in (j + 1)..=imax {
                        ab[cb + i] -= t * ab[jb + i];
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ab,
            ipiv,
        })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = 2 * kl + ku + 1;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let t = b[j];
            if t != 0.0 {
                let imax = (j + kl).min(n - 1);
                for i in (j + 1)..=imax {
                    b[i] -= self.ab[j * ldab + (kl + ku + i - j)] * t;
                }
            }
        }
        for j in (0..n).rev() {
            let jtop = j.saturating_sub(kl + ku);
            let x = b[j] / self.ab[j * ldab + kl + ku];
            b[j] = x;
            if x != 0.0 {
                for i in jtop..j {
                    b[i] -= self.ab[j * ldab + (kl + ku + i - j)] * x;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::SplitMix64;

    fn random_spd_band(n: usize, bw: usize, seed: u64) -> SymBand {
        let mut rng = SplitMix64::new(seed);
        let mut a = SymBand::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                a.set(i, j, rng.next_uniform() - 0.5);
            }
            // strong diagonal keeps it SPD
            a.set(i, i, bw as f64 + 1.0 + rng.next_uniform());
        }
        a
    }

    #[test]
    fn ldlt_solves_spd_system() {
        let a = random_spd_band(60, 4, 7);
        let x_true: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 60];
        a.mul_vec(&x_true, &mut b);
        let f = a.cholesky().unwrap();
        f.solve_in_place(&mut b);
        for (xa, xb) in b.iter().zip(&x_true) {
            assert!((xa - xb).abs() < 1e-11, "{xa} vs {xb}");
        }
    }

    #[test]
    fn band_lu_handles_indefinite_system() {
        let mut a = random_spd_band(40, 3, 11);
        // make it indefinite
        for i in 0..10 {
            let d = a.get(3 * i, 3 * i);
            a.set(3 * i, 3 * i, -d);
        }
        let x_true: Vec<f64> = (0..40).map(|i| (i as f64 * 0.23).cos()).collect();
        let mut b = vec![0.0; 40];
        a.mul_vec(&x_true, &mut b);
        let lu = BandLu::factor_sym(&a).unwrap();
        lu.solve_in_place(&mut b);
        for (xa, xb) in b.iter().zip(&x_true) {
            assert!((xa - xb).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_pivot_count_matches_inertia() {
        // diagonal matrix with known inertia
        let mut a = SymBand::zeros(10, 2);
        for i in 0..10 {
            a.set(i, i, if i < 3 { -2.0 } else { 1.5 });
        }
        let f = a.ldlt().unwrap();
        assert_eq!(f.negative_pivots(), 3);
        assert!(!f.spd);
    }

    #[test]
    fn forward_backward_composes_to_solve() {
        let a = random_spd_band(30, 5, 3);
        let f = a.cholesky().unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let mut x1 = b.clone();
        f.solve_in_place(&mut x1);
        let mut x2 = b;
        f.forward(&mut x2);
        let d: Vec<f64> = f.pivots().collect();
        for (v, dv) in x2.iter_mut().zip(&d) {
            *v /= dv;
        }
        f.backward(&mut x2);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
