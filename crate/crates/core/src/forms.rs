//! Spinor-valued exterior forms `Λ^r V* ⊗ S` and the operators
//! `F+`, `F-`, `H = {F+, F-}` with the projections `p10`, `p20`.
//!
//! A form of degree `r` stores one spinor per strictly increasing index subset
//! `I ⊆ {0..2l}`, `|I| = r`, in lexicographic order. Components follow the
//! determinant convention: `(ε^{i1} ∧ … ∧ ε^{ir})(e_{i1}, …, e_{ir}) = 1`, so the
//! component on `I` is the value of the form on the ordered basis vectors of `I`.
//!
//! ```text
//! F+(α ⊗ s) =  Σ_i ε^i ∧ α ⊗ e_i.s
//! F-(α ⊗ s) = -Σ_ij ω^{ij} ι_{e_i} α ⊗ e_j.s
//! H         = F+F- + F-F+ = i(r - l) on degree r
//! p10       = (i/l) F+F-         (degree 1)
//! p20       = (1/l) F+F+F-F-     (degree 2)
//! ```
//!
//! Every Clifford step lowers the effective-subspace margin by one; see
//! [`crate::fock`].

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{EffectiveSubspace, FockModel, Spinor, SpinorJson, C64, I};
use crate::symalg::SymplecticSpace;

const ONE: C64 = C64::new(1.0, 0.0);

/// Strictly increasing subsets of `{0..n}` with `r` elements, lexicographic.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1, |acc, k| acc * (n - k) / (k + 1))
}

fn mask_of(set: &[usize]) -> usize {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

/// Subset tables for a fixed `2l`.
#[derive(Debug, Clone)]
struct Layout {
    by_degree: Vec<Vec<Vec<usize>>>,
    position: Vec<usize>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let by_degree: Vec<_> = (0..=n).map(|r| subsets(n, r)).collect();
        let mut position = vec![0; 1 << n];
        for sets in &by_degree {
            for (p, s) in sets.iter().enumerate() {
                position[mask_of(s)] = p;
            }
        }
        Self { by_degree, position }
    }

    fn pos(&self, mask: usize) -> usize {
        self.position[mask]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorForm {
    pub degree: usize,
    pub model: FockModel,
    pub components: Vec<DVector<C64>>,
}

impl SpinorForm {
    pub fn zero(model: FockModel, degree: usize) -> Result<Self> {
        let n = 2 * model.l();
        if degree > n {
            return Err(Error::Degree {
                degree,
                reason: "exceeds 2l",
            });
        }
        let count = binomial(n, degree);
        Ok(Self {
            degree,
            model,
            components: vec![DVector::zeros(model.dim()); count],
        })
    }

    pub fn from_spinor(s: &Spinor) -> Self {
        Self {
            degree: 0,
            model: s.model,
            components: vec![s.coeffs.clone()],
        }
    }

    /// The single component of a 0-form or a top form.
    pub fn scalar_part(&self) -> &DVector<C64> {
        &self.components[0]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn norm_on(&self, eff: &EffectiveSubspace) -> f64 {
        self.components
            .iter()
            .map(|c| eff.norm_on(c).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient modulus inside `eff`.
    pub fn max_abs_on(&self, eff: &EffectiveSubspace) -> f64 {
        let idx = eff.indices();
        self.components
            .iter()
            .flat_map(|c| idx.iter().map(move |&i| c[i].norm()))
            .fold(0.0, f64::max)
    }

    pub fn restrict(&self, eff: &EffectiveSubspace) -> Self {
        Self {
            degree: self.degree,
            model: self.model,
            components: self.components.iter().map(|c| eff.restrict(c)).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            degree: self.degree,
            model: self.model,
            components: self.components.iter().map(|c| c * a).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.model != other.model || self.degree != other.degree {
            return Err(Error::ModelMismatch(format!(
                "degree {} / {:?} vs degree {} / {:?}",
                self.degree, self.model, other.degree, other.model
            )));
        }
        Ok(())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            degree: self.degree,
            model: self.model,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(x, y)| x + y * a)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-ONE, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(ONE, other)
    }

    /// Random form with every component supported in `eff`.
    pub fn random<R: Rng>(eff: &EffectiveSubspace, degree: usize, rng: &mut R) -> Result<Self> {
        let mut f = Self::zero(eff.model, degree)?;
        for c in f.components.iter_mut() {
            *c = eff.random(rng).coeffs;
        }
        Ok(f)
    }

    pub fn to_json(&self) -> SpinorFormJson {
        let l = self.model.l();
        let sets = subsets(2 * l, self.degree);
        let components = sets
            .iter()
            .zip(&self.components)
            .map(|(set, c)| {
                let key = set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
                let s = Spinor {
                    model: self.model,
                    coeffs: c.clone(),
                };
                (key, s.to_json())
            })
            .collect();
        SpinorFormJson {
            degree: self.degree,
            components,
        }
    }

    pub fn from_json(json: &SpinorFormJson) -> Result<Self> {
        let first = json
            .components
            .values()
            .next()
            .ok_or_else(|| Error::Config("form has no components".into()))?;
        let model = FockModel::new(first.l, first.cutoff)?;
        let mut form = Self::zero(model, json.degree)?;
        let sets = subsets(2 * model.l(), json.degree);
        if json.components.len() != sets.len() {
            return Err(Error::LengthMismatch {
                expected: sets.len(),
                got: json.components.len(),
            });
        }
        for (p, set) in sets.iter().enumerate() {
            let key = set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            let sj = json
                .components
                .get(&key)
                .ok_or_else(|| Error::Config(format!("missing component \"{key}\"")))?;
            let s = Spinor::from_json(sj)?;
            if s.model != model {
                return Err(Error::ModelMismatch(format!("component \"{key}\"")));
            }
            form.components[p] = s.coeffs;
        }
        Ok(form)
    }
}

/// `{degree, components: {"1,2": spinor, ...}}` with 1-based keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorFormJson {
    pub degree: usize,
    pub components: BTreeMap<String, SpinorJson>,
}

/// Operator algebra on forms over a fixed space and Fock model.
///
/// `with_frame` swaps the adapted basis for `e'_k = Σ_m g_{mk} e_m`; `g` must be
/// symplectic so that `ω_{ij}` keeps its standard form in the new basis.
#[derive(Debug, Clone)]
pub struct FormAlgebra {
    space: SymplecticSpace,
    model: FockModel,
    layout: Layout,
    frame: Option<DMatrix<f64>>,
}

impl FormAlgebra {
    pub fn new(space: SymplecticSpace, model: FockModel) -> Result<Self> {
        if space.l() != model.l() {
            return Err(Error::ModelMismatch(format!(
                "space l = {} vs model l = {}",
                space.l(),
                model.l()
            )));
        }
        Ok(Self {
            layout: Layout::new(space.dim()),
            space,
            model,
            frame: None,
        })
    }

    pub fn standard(model: FockModel) -> Result<Self> {
        Self::new(SymplecticSpace::standard(model.l())?, model)
    }

    pub fn with_frame(&self, g: DMatrix<f64>) -> Result<Self> {
        let n = self.space.dim();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: g.nrows(),
            });
        }
        let defect = self.space.symplectic_defect(&g);
        if defect > 1e-10 {
            return Err(Error::NotSymplectic(defect));
        }
        Ok(Self {
            frame: Some(g),
            ..self.clone()
        })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn model(&self) -> FockModel {
        self.model
    }

    pub fn subsets(&self, degree: usize) -> &[Vec<usize>] {
        &self.layout.by_degree[degree]
    }

    /// Position of a sorted subset among the components of its degree.
    pub fn position(&self, set: &[usize]) -> usize {
        self.layout.pos(mask_of(set))
    }

    fn check(&self, form: &SpinorForm) -> Result<()> {
        if form.model != self.model {
            return Err(Error::ModelMismatch(format!(
                "form over {:?}, algebra over {:?}",
                form.model, self.model
            )));
        }
        Ok(())
    }

    /// `out += coeff * e_k . input` in the algebra's frame.
    pub fn add_clifford(&self, k: usize, coeff: C64, input: &[C64], out: &mut [C64]) {
        match &self.frame {
            None => self.model.add_clifford(k, coeff, input, out),
            Some(g) => {
                for m in 0..self.space.dim() {
                    let gm = g[(m, k)];
                    if gm != 0.0 {
                        self.model.add_clifford(m, coeff * gm, input, out);
                    }
                }
            }
        }
    }

    pub fn clifford(&self, k: usize, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        self.add_clifford(k, ONE, v.as_slice(), out.as_mut_slice());
        out
    }

    pub fn zero(&self, degree: usize) -> Result<SpinorForm> {
        SpinorForm::zero(self.model, degree)
    }

    pub fn f_plus(&self, form: &SpinorForm) -> Result<SpinorForm> {
        self.check(form)?;
        let n = self.space.dim();
        if form.degree >= n {
            return Err(Error::Degree {
                degree: form.degree,
                reason: "F+ is undefined on top-degree forms",
            });
        }
        let mut out = self.zero(form.degree + 1)?;
        for (p, set) in self.subsets(form.degree + 1).iter().enumerate() {
            let mask = mask_of(set);
            let target = out.components[p].as_mut_slice();
            for (before, &i) in set.iter().enumerate() {
                let src = &form.components[self.layout.pos(mask & !(1 << i))];
                let sign = if before % 2 == 0 { ONE } else { -ONE };
                self.add_clifford(i, sign, src.as_slice(), target);
            }
        }
        Ok(out)
    }

    pub fn f_minus(&self, form: &SpinorForm) -> Result<SpinorForm> {
        self.check(form)?;
        if form.degree == 0 {
            return self.zero(0);
        }
        let n = self.space.dim();
        let mut out = self.zero(form.degree - 1)?;
        for (p, set) in self.subsets(form.degree - 1).iter().enumerate() {
            let mask = mask_of(set);
            let target = out.components[p].as_mut_slice();
            for i in (0..n).filter(|i| mask & (1 << i) == 0) {
                let before = set.iter().filter(|&&k| k < i).count();
                let src = &form.components[self.layout.pos(mask | (1 << i))];
                let sign = if before % 2 == 0 { -1.0 } else { 1.0 };
                for j in 0..n {
                    let w = self.space.omega_inv(i, j);
                    if w != 0.0 {
                        self.add_clifford(j, C64::new(sign * w, 0.0), src.as_slice(), target);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn h_op(&self, form: &SpinorForm) -> Result<SpinorForm> {
        self.check(form)?;
        let n = self.space.dim();
        if form.degree == 0 {
            return self.f_minus(&self.f_plus(form)?);
        }
        let down_up = self.f_plus(&self.f_minus(form)?)?;
        if form.degree == n {
            return Ok(down_up);
        }
        down_up.add(&self.f_minus(&self.f_plus(form)?)?)
    }

    fn expect_degree(form: &SpinorForm, degree: usize) -> Result<()> {
        if form.degree != degree {
            return Err(Error::Degree {
                degree: form.degree,
                reason: if degree == 1 {
                    "p10 acts on 1-forms"
                } else {
                    "p20 acts on 2-forms"
                },
            });
        }
        Ok(())
    }

    pub fn p10(&self, form: &SpinorForm) -> Result<SpinorForm> {
        Self::expect_degree(form, 1)?;
        let l = self.space.l() as f64;
        Ok(self.f_plus(&self.f_minus(form)?)?.scale(I / l))
    }

    pub fn p20(&self, form: &SpinorForm) -> Result<SpinorForm> {
        Self::expect_degree(form, 2)?;
        let l = self.space.l() as f64;
        let down = self.f_minus(&self.f_minus(form)?)?;
        Ok(self.f_plus(&self.f_plus(&down)?)?.scale(C64::new(1.0 / l, 0.0)))
    }

    /// `ω_{ij} ε^i ∧ ε^j ⊗ s` summed over all `i, j`: component `2ω_{ij} s` on `i < j`.
    pub fn omega_tensor(&self, s: &DVector<C64>) -> Result<SpinorForm> {
        Ok(self.omega_form(s)?.scale(C64::new(2.0, 0.0)))
    }

    /// The 2-form `(e_i, e_j) ↦ ω_{ij} s`.
    pub fn omega_form(&self, s: &DVector<C64>) -> Result<SpinorForm> {
        let mut out = self.zero(2)?;
        for (p, set) in self.subsets(2).iter().enumerate() {
            let w = self.space.omega(set[0], set[1]);
            if w != 0.0 {
                out.components[p] = s * C64::new(w, 0.0);
            }
        }
        Ok(out)
    }

    /// Components of `form` in the frame `e'_k = Σ_m g_{mk} e_m`:
    /// `α'_I = Σ_J det(g[J, I]) α_J`.
    pub fn change_frame(&self, form: &SpinorForm, g: &DMatrix<f64>) -> Result<SpinorForm> {
        self.check(form)?;
        let n = self.space.dim();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: g.nrows(),
            });
        }
        let sets = self.subsets(form.degree);
        let mut out = self.zero(form.degree)?;
        for (pi, iset) in sets.iter().enumerate() {
            for (pj, jset) in sets.iter().enumerate() {
                let minor = DMatrix::from_fn(iset.len(), iset.len(), |a, b| g[(jset[a], iset[b])]);
                let det = if iset.is_empty() { 1.0 } else { minor.determinant() };
                if det != 0.0 {
                    out.components[pi] += &form.components[pj] * C64::new(det, 0.0);
                }
            }
        }
        Ok(out)
    }
}
