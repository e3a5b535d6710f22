//! Smallest singular values of sparse, banded complex operators.
//!
//! An operator is assembled row by row, its Gram matrix `AᴴA` is stored as a
//! Hermitian band, and the lowest eigenpairs of the Gram matrix come from block
//! inverse subspace iteration on a banded Cholesky factor with Rayleigh–Ritz
//! extraction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Default)]
pub struct SparseRows {
    cols: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Appends a row; repeated columns are summed and exact zeros dropped.
    pub fn push(&mut self, mut entries: Vec<(usize, C64)>) {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, C64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            debug_assert!(c < self.cols);
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != ZERO);
        self.rows.push(merged);
    }

    /// Zeroes every entry in column `col`.
    pub fn clear_column(&mut self, col: usize) {
        for row in &mut self.rows {
            row.retain(|e| e.0 != col);
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().map(|&(c, v)| v * x[c]).sum()),
        )
    }

    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| r[r.len() - 1].0 - r[0].0)
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows.len(), self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(i, c)] += v;
            }
        }
        m
    }

    pub fn gram(&self) -> HermitianBand {
        let bw = self.bandwidth();
        let mut g = HermitianBand::zeros(self.cols, bw);
        let w = bw + 1;
        for row in &self.rows {
            for (a, &(ca, va)) in row.iter().enumerate() {
                for &(cb, vb) in &row[..=a] {
                    // ca >= cb: G[ca, cb] = Σ_r conj(A_{r,ca}) A_{r,cb}
                    g.band[ca * w + ca - cb] += va.conj() * vb;
                }
            }
        }
        g
    }
}

/// Hermitian matrix stored by its lower band: `band[i (bw + 1) + d] = G[i, i - d]`.
#[derive(Debug, Clone)]
pub struct HermitianBand {
    n: usize,
    bw: usize,
    band: Vec<C64>,
}

impl HermitianBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![ZERO; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn row(&self, i: usize) -> &[C64] {
        let w = self.bw + 1;
        &self.band[i * w..i * w + w.min(i + 1)]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i >= j {
            self.row(i).get(i - j).copied().unwrap_or(ZERO)
        } else {
            self.get(j, i).conj()
        }
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.row(i)[0].re).fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let x = x.as_slice();
        let mut y = vec![ZERO; self.n];
        for i in 0..self.n {
            let row = self.row(i);
            let xi = x[i];
            let mut acc = row[0] * xi;
            for (d, &v) in row.iter().enumerate().skip(1) {
                let j = i - d;
                acc += v * x[j];
                y[j] += v.conj() * xi;
            }
            y[i] += acc;
        }
        DVector::from_vec(y)
    }

    /// Factor of `G + shift I`.
    pub fn cholesky(&self, shift: f64) -> Result<BandCholesky> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.band.clone();
        for i in 0..n {
            l[i * w] += shift;
        }
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = l[j * w].re;
            for k in lo..j {
                d -= l[j * w + j - k].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Numerical(format!(
                    "Gram matrix not positive definite at pivot {j} (shift {shift:e})"
                )));
            }
            let d = d.sqrt();
            l[j * w] = C64::new(d, 0.0);
            for i in j + 1..(j + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut v = l[i * w + i - j];
                for k in lo_i..j {
                    v -= l[i * w + i - k] * l[j * w + j - k].conj();
                }
                l[i * w + i - j] = v / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<C64>,
}

impl BandCholesky {
    pub fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        let n = self.n;
        let w = self.bw + 1;
        let mut y = b.as_slice().to_vec();
        for i in 0..n {
            let row = &self.l[i * w..i * w + w.min(i + 1)];
            let mut v = y[i];
            for (d, &lv) in row.iter().enumerate().skip(1) {
                v -= lv * y[i - d];
            }
            y[i] = v / row[0].re;
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.l[i * w].re;
            y[i] = xi;
            let row = &self.l[i * w..i * w + w.min(i + 1)];
            for (d, &lv) in row.iter().enumerate().skip(1) {
                y[i - d] -= lv.conj() * xi;
            }
        }
        DVector::from_vec(y)
    }
}

/// Lowest singular values with right singular vectors, ascending.
#[derive(Debug, Clone)]
pub struct SingularTriplets {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SubspaceOptions {
    pub slack: usize,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            slack: 8,
            max_iterations: 400,
            rel_tol: 1e-13,
            seed: 0x5eed,
        }
    }
}

fn orthonormalize(cols: Vec<DVector<C64>>) -> Vec<DVector<C64>> {
    let n = cols.first().map_or(0, |c| c.len());
    let m = DMatrix::from_columns(&cols);
    let q = m.qr().q();
    (0..cols.len().min(n)).map(|j| q.column(j).into_owned()).collect()
}

/// The `count` smallest singular values of the operator whose Gram matrix is `gram`.
pub fn smallest_singular(gram: &HermitianBand, count: usize, opts: SubspaceOptions) -> Result<SingularTriplets> {
    let n = gram.dim();
    if count == 0 || n == 0 {
        return Ok(SingularTriplets {
            values: vec![],
            vectors: vec![],
            iterations: 0,
        });
    }
    let p = (count + opts.slack).min(n);
    let scale = gram.max_diag().max(f64::MIN_POSITIVE);
    let shift = 1e-12 * scale;
    let chol = gram.cholesky(shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<DVector<C64>> = (0..p)
        .map(|_| {
            DVector::from_fn(n, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
        })
        .collect();
    basis = orthonormalize(basis);
    let mut prev: Vec<f64> = vec![f64::INFINITY; count];
    let mut ritz_vectors = basis.clone();
    let mut ritz_values = vec![0.0; p];
    let mut iterations = 0;
    for it in 1..=opts.max_iterations {
        iterations = it;
        let solved: Vec<_> = basis.iter().map(|b| chol.solve(b)).collect();
        let q = orthonormalize(solved);
        let gq: Vec<_> = q.iter().map(|v| gram.apply(v)).collect();
        let k = q.len();
        let h = DMatrix::from_fn(k, k, |i, j| q[i].dotc(&gq[j]));
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        ritz_values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        ritz_vectors = order
            .iter()
            .map(|&c| {
                let mut v = DVector::zeros(n);
                for (j, qj) in q.iter().enumerate() {
                    v.axpy(eig.eigenvectors[(j, c)], qj, C64::new(1.0, 0.0));
                }
                v
            })
            .collect();
        basis = ritz_vectors.clone();
        let done = ritz_values
            .iter()
            .take(count)
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= opts.rel_tol * scale);
        prev = ritz_values.iter().take(count).copied().collect();
        if done && it > 2 {
            break;
        }
    }
    Ok(SingularTriplets {
        values: ritz_values.iter().take(count).map(|&v| v.max(0.0).sqrt()).collect(),
        vectors: ritz_vectors.into_iter().take(count).collect(),
        iterations,
    })
}
