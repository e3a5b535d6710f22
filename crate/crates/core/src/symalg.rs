//! Standard symplectic vector space `(R^{2l}, omega_0)` in an adapted basis.
//!
//! Indices are 1-based in formulas and docs, 0-based in code. The only
//! translation point is [`one_based`] / [`zero_based`]; everything else in the
//! crate works with 0-based indices. Basis vectors `0..l` span the Lagrangian
//! `L`, vectors `l..2l` span `L'`.
//!
//! The raised form `omega^{ij}` is obtained by solving
//! `sum_k omega_{ik} omega^{jk} = delta_{ij}`, i.e. `Omega * W^T = I`; it is not
//! hard-coded. In the standard basis the solution coincides with `omega_{ij}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Converts a 0-based index to the 1-based label used in documentation,
/// reports and serialized subset keys.
pub fn one_based(index: usize) -> usize {
    index + 1
}

/// Inverse of [`one_based`]; `None` for label 0.
pub fn zero_based(label: usize) -> Option<usize> {
    label.checked_sub(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    l: usize,
    omega_lower: DMatrix<f64>,
    omega_upper: DMatrix<f64>,
}

impl SymplecticSpace {
    /// The standard adapted space: `omega_{i,l+i} = 1`, `omega_{l+i,i} = -1`.
    pub fn standard(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::ZeroDimension(l));
        }
        let n = 2 * l;
        let mut omega_lower = DMatrix::zeros(n, n);
        for i in 0..l {
            omega_lower[(i, l + i)] = 1.0;
            omega_lower[(l + i, i)] = -1.0;
        }
        // Omega * W^T = I  =>  W^T = Omega^{-1}
        let w_t = omega_lower
            .clone()
            .lu()
            .solve(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::Numerical("symplectic form is singular".into()))?;
        let omega_upper = w_t.transpose();
        Ok(Self {
            l,
            omega_lower,
            omega_upper,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Real dimension `2l`.
    pub fn dim(&self) -> usize {
        2 * self.l
    }

    /// `omega_{ij}`.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        self.omega_lower[(i, j)]
    }

    /// `omega^{ij}`.
    pub fn omega_inv(&self, i: usize, j: usize) -> f64 {
        self.omega_upper[(i, j)]
    }

    pub fn omega_lower(&self) -> &DMatrix<f64> {
        &self.omega_lower
    }

    pub fn omega_upper(&self) -> &DMatrix<f64> {
        &self.omega_upper
    }

    /// `omega_0(v, w)` for coordinate vectors in the adapted basis.
    pub fn pairing(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += v[i] * self.omega_lower[(i, j)] * w[j];
            }
        }
        acc
    }

    /// Max-entry deviation of `g^T Omega g` from `Omega`.
    pub fn symplectic_defect(&self, g: &DMatrix<f64>) -> f64 {
        let d = g.transpose() * &self.omega_lower * g - &self.omega_lower;
        d.amax()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Lower,
    Upper,
}

/// Dense component array over `R^{2l}` with per-slot variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, variance: Vec<Variance>) -> Self {
        let len = dim.pow(variance.len() as u32);
        Self {
            dim,
            variance,
            data: vec![0.0; len],
        }
    }

    pub fn from_fn(dim: usize, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, variance);
        let mut idx = vec![0; t.rank()];
        for flat in 0..t.data.len() {
            t.unflatten(flat, &mut idx);
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flatten(idx);
        self.data[f] = v;
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for slot in (0..out.len()).rev() {
            out[slot] = flat % self.dim;
            flat /= self.dim;
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Contracts one slot with the matrix `m` as `out[..i..] = sum_c m(i, c) t[..c..]`.
    fn contract_slot(&self, slot: usize, m: impl Fn(usize, usize) -> f64, var: Variance) -> Self {
        let mut variance = self.variance.clone();
        variance[slot] = var;
        let mut out = Self::zeros(self.dim, variance);
        let mut idx = vec![0; self.rank()];
        for flat in 0..out.data.len() {
            out.unflatten(flat, &mut idx);
            let i = idx[slot];
            let mut acc = 0.0;
            for c in 0..self.dim {
                idx[slot] = c;
                acc += m(i, c) * self.data[self.flatten(&idx)];
            }
            out.data[flat] = acc;
        }
        out
    }
}

fn check_slot(space: &SymplecticSpace, tensor: &Tensor, slot: usize) -> Result<()> {
    if tensor.dim != space.dim() {
        return Err(Error::LengthMismatch {
            expected: space.dim(),
            got: tensor.dim,
        });
    }
    if slot >= tensor.rank() {
        return Err(Error::IndexOutOfRange {
            index: slot,
            limit: tensor.rank(),
        });
    }
    Ok(())
}

/// `K_{..c..}  ->  K_{..}^{i}_{..} = omega^{ic} K_{..c..}`, the new upper index
/// taking the place of the contracted lower one.
pub fn raise_index(space: &SymplecticSpace, tensor: &Tensor, slot: usize) -> Result<Tensor> {
    check_slot(space, tensor, slot)?;
    if tensor.variance[slot] != Variance::Lower {
        return Err(Error::WrongVariance { slot });
    }
    Ok(tensor.contract_slot(slot, |i, c| space.omega_inv(i, c), Variance::Upper))
}

/// `K^{..t..}  ->  K^{..}_{i}^{..} = K^{..t..} omega_{ti}`.
pub fn lower_index(space: &SymplecticSpace, tensor: &Tensor, slot: usize) -> Result<Tensor> {
    check_slot(space, tensor, slot)?;
    if tensor.variance[slot] != Variance::Upper {
        return Err(Error::WrongVariance { slot });
    }
    Ok(tensor.contract_slot(slot, |i, t| space.omega(t, i), Variance::Lower))
}

/// Raises both slots of a rank-2 lower tensor given as a matrix:
/// `S^{ij} = omega^{ia} omega^{jb} S_{ab}`.
pub fn raise_both(space: &SymplecticSpace, lower: &DMatrix<f64>) -> DMatrix<f64> {
    let w = space.omega_upper();
    w * lower * w.transpose()
}
