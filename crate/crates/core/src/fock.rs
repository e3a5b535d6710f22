//! Truncated Hermite model of the spinor module `S = L^2(R^l)`.
//!
//! Basis: orthonormal Hermite functions `h_n`, one factor per mode, levels
//! `0..N` (`N` = cutoff). Multi-indices are ordered lexicographically with
//! mode 0 most significant. Clifford multiplication acts as
//! `e_i = i * x^i` and `e_{l+i} = d/dx^i`, built from the two-band recurrences
//!
//! ```text
//! x   h_n = sqrt(n/2) h_{n-1} + sqrt((n+1)/2) h_{n+1}
//! d/dx h_n = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}
//! ```
//!
//! The truncated operators are not the true ones near the cutoff. Identities
//! are asserted on an [`EffectiveSubspace`]: multi-indices whose every entry is
//! at most `N - 1 - margin`. A chain of `k` Clifford steps applied to input
//! with margin `m_in` and compared on output margin `m_out` is exact if
//! `m_in + m_out >= k - 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Largest supported cutoff per number of modes.
pub fn max_cutoff(l: usize) -> Option<usize> {
    match l {
        1 => Some(32),
        2 => Some(16),
        3 => Some(8),
        _ => None,
    }
}

pub const MIN_CUTOFF: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockModel {
    l: usize,
    cutoff: usize,
}

impl FockModel {
    pub fn new(l: usize, cutoff: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::ZeroDimension(0));
        }
        let max = max_cutoff(l).ok_or_else(|| Error::UnsupportedModel(format!("l = {l} (supported: 1, 2, 3)")))?;
        if !(MIN_CUTOFF..=max).contains(&cutoff) {
            return Err(Error::UnsupportedModel(format!(
                "cutoff {cutoff} for l = {l} (allowed {MIN_CUTOFF}..={max})"
            )));
        }
        Ok(Self { l, cutoff })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `N^l`.
    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.l as u32)
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.l - 1 - mode) as u32)
    }

    pub fn level(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff
    }

    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.l).map(|m| self.level(index, m)).collect()
    }

    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.l {
            return Err(Error::LengthMismatch {
                expected: self.l,
                got: levels.len(),
            });
        }
        let mut idx = 0;
        for &n in levels {
            if n >= self.cutoff {
                return Err(Error::IndexOutOfRange {
                    index: n,
                    limit: self.cutoff,
                });
            }
            idx = idx * self.cutoff + n;
        }
        Ok(idx)
    }

    /// Total level `|n|`.
    pub fn total_level(&self, index: usize) -> usize {
        (0..self.l).map(|m| self.level(index, m)).sum()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.l {
            return Err(Error::IndexOutOfRange {
                index: mode,
                limit: self.l,
            });
        }
        Ok(())
    }

    /// `out += coeff * x^mode * input`.
    pub fn add_position(&self, mode: usize, coeff: C64, input: &[C64], out: &mut [C64]) {
        let stride = self.stride(mode);
        for (idx, &v) in input.iter().enumerate() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let n = self.level(idx, mode);
            if n > 0 {
                out[idx - stride] += coeff * v * (n as f64 / 2.0).sqrt();
            }
            if n + 1 < self.cutoff {
                out[idx + stride] += coeff * v * ((n + 1) as f64 / 2.0).sqrt();
            }
        }
    }

    /// `out += coeff * d/dx^mode input`.
    pub fn add_derivative(&self, mode: usize, coeff: C64, input: &[C64], out: &mut [C64]) {
        let stride = self.stride(mode);
        for (idx, &v) in input.iter().enumerate() {
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let n = self.level(idx, mode);
            if n > 0 {
                out[idx - stride] += coeff * v * (n as f64 / 2.0).sqrt();
            }
            if n + 1 < self.cutoff {
                out[idx + stride] -= coeff * v * ((n + 1) as f64 / 2.0).sqrt();
            }
        }
    }

    /// `out += coeff * e_k . input` for a basis vector `e_k`, `k < 2l`.
    pub fn add_clifford(&self, k: usize, coeff: C64, input: &[C64], out: &mut [C64]) {
        if k < self.l {
            self.add_position(k, coeff * I, input, out);
        } else {
            self.add_derivative(k - self.l, coeff, input, out);
        }
    }

    /// `e_k . v`.
    pub fn clifford_basis(&self, k: usize, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        self.add_clifford(k, C64::new(1.0, 0.0), v.as_slice(), out.as_mut_slice());
        out
    }

    /// Dense matrices of `x^mode` and `d/dx^mode` on the full tensor basis.
    pub fn hermite_matrices(&self, mode: usize) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        self.check_mode(mode)?;
        let n = self.dim();
        let mut x = DMatrix::zeros(n, n);
        let mut d = DMatrix::zeros(n, n);
        let one = C64::new(1.0, 0.0);
        let mut basis = vec![C64::new(0.0, 0.0); n];
        for col in 0..n {
            basis[col] = one;
            let mut cx = vec![C64::new(0.0, 0.0); n];
            let mut cd = vec![C64::new(0.0, 0.0); n];
            self.add_position(mode, one, &basis, &mut cx);
            self.add_derivative(mode, one, &basis, &mut cd);
            for row in 0..n {
                x[(row, col)] = cx[row];
                d[(row, col)] = cd[row];
            }
            basis[col] = C64::new(0.0, 0.0);
        }
        Ok((x, d))
    }

    /// Dense matrix of `e_k .`.
    pub fn clifford_matrix(&self, k: usize) -> Result<DMatrix<C64>> {
        if k >= 2 * self.l {
            return Err(Error::IndexOutOfRange {
                index: k,
                limit: 2 * self.l,
            });
        }
        let (x, d) = self.hermite_matrices(k % self.l)?;
        Ok(if k < self.l { x * I } else { d })
    }

    /// `D^2 - X^2` for one mode: diagonal `-(2n+1)` on levels `n <= N-2`.
    pub fn oscillator(&self, mode: usize) -> Result<DMatrix<C64>> {
        let (x, d) = self.hermite_matrices(mode)?;
        Ok(&d * &d - &x * &x)
    }

    pub fn basis(&self, levels: &[usize]) -> Result<Spinor> {
        let idx = self.index_of(levels)?;
        let mut s = Spinor::zero(*self);
        s.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spinor {
    pub model: FockModel,
    pub coeffs: DVector<C64>,
}

impl Spinor {
    pub fn zero(model: FockModel) -> Self {
        Self {
            model,
            coeffs: DVector::zeros(model.dim()),
        }
    }

    pub fn from_coeffs(model: FockModel, coeffs: DVector<C64>) -> Result<Self> {
        if coeffs.len() != model.dim() {
            return Err(Error::LengthMismatch {
                expected: model.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Self { model, coeffs })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// Parity of the support; `None` for the zero spinor or mixed support.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen = None;
        for (idx, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let p = if self.model.total_level(idx).is_multiple_of(2) {
                Parity::Even
            } else {
                Parity::Odd
            };
            match seen {
                None => seen = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        seen
    }

    pub fn to_json(&self) -> SpinorJson {
        SpinorJson {
            l: self.model.l(),
            cutoff: self.model.cutoff(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_json(json: &SpinorJson) -> Result<Self> {
        let model = FockModel::new(json.l, json.cutoff)?;
        let coeffs = DVector::from_iterator(json.coeffs.len(), json.coeffs.iter().map(|c| C64::new(c[0], c[1])));
        Self::from_coeffs(model, coeffs)
    }
}

/// Wire format shared with the CLI: `{l, cutoff, coeffs: [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorJson {
    pub l: usize,
    pub cutoff: usize,
    pub coeffs: Vec<[f64; 2]>,
}

/// `sum_k v^k e_k . s` for a real vector `v` of length `2l`.
pub fn clifford_apply(s: &Spinor, vector: &[f64]) -> Result<Spinor> {
    let model = s.model;
    if vector.len() != 2 * model.l() {
        return Err(Error::LengthMismatch {
            expected: 2 * model.l(),
            got: vector.len(),
        });
    }
    let mut out = Spinor::zero(model);
    for (k, &vk) in vector.iter().enumerate() {
        if vk != 0.0 {
            model.add_clifford(k, C64::new(vk, 0.0), s.coeffs.as_slice(), out.coeffs.as_mut_slice());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectiveSubspace {
    pub model: FockModel,
    pub margin: usize,
}

impl EffectiveSubspace {
    pub const DEFAULT_MARGIN: usize = 2;

    pub fn new(model: FockModel, margin: usize) -> Self {
        Self { model, margin }
    }

    /// Highest level kept per mode; `None` when the subspace is empty.
    pub fn top_level(&self) -> Option<usize> {
        (self.model.cutoff() - 1).checked_sub(self.margin)
    }

    pub fn contains_index(&self, index: usize) -> bool {
        match self.top_level() {
            None => false,
            Some(top) => (0..self.model.l()).all(|m| self.model.level(index, m) <= top),
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.model.dim()).filter(|&i| self.contains_index(i)).collect()
    }

    pub fn dim(&self) -> usize {
        self.top_level()
            .map(|t| (t + 1).pow(self.model.l() as u32))
            .unwrap_or(0)
    }

    pub fn contains(&self, s: &Spinor) -> bool {
        s.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| c.norm() == 0.0 || self.contains_index(i))
    }

    /// Zeroes every coefficient outside the subspace.
    pub fn restrict(&self, v: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            v.len(),
            v.iter()
                .enumerate()
                .map(|(i, &c)| if self.contains_index(i) { c } else { C64::new(0.0, 0.0) }),
        )
    }

    /// Norm of `v` restricted to the subspace.
    pub fn norm_on(&self, v: &DVector<C64>) -> f64 {
        v.iter()
            .enumerate()
            .filter(|(i, _)| self.contains_index(*i))
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Random spinor supported in the subspace, entries uniform in the unit square.
    pub fn random<R: Rng>(&self, rng: &mut R) -> Spinor {
        let mut s = Spinor::zero(self.model);
        for i in self.indices() {
            s.coeffs[i] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        s
    }
}
