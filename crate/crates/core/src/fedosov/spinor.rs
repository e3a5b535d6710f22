use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{ChartModel, RicciData};
use crate::error::{Error, Result};
use crate::fock::{EffectiveSubspace, FockModel, C64, I};
use crate::forms::{FormAlgebra, SpinorForm};

/// One spinor per grid node, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub model: FockModel,
    pub values: DMatrix<C64>,
}

impl SpinorField {
    pub fn zeros(model: FockModel, nodes: usize) -> Self {
        Self {
            model,
            values: DMatrix::zeros(model.dim(), nodes),
        }
    }

    pub fn constant(model: FockModel, s: &DVector<C64>, nodes: usize) -> Result<Self> {
        if s.len() != model.dim() {
            return Err(Error::LengthMismatch {
                expected: model.dim(),
                got: s.len(),
            });
        }
        let mut f = Self::zeros(model, nodes);
        for mut col in f.values.column_iter_mut() {
            col.copy_from(s);
        }
        Ok(f)
    }

    /// Samples `f(coords)` at every node of `chart`.
    pub fn from_fn(chart: &ChartModel, model: FockModel, f: impl Fn(&[f64]) -> DVector<C64> + Sync) -> Result<Self> {
        let cols: Vec<DVector<C64>> = (0..chart.len())
            .into_par_iter()
            .map(|n| f(&chart.grid().coords(n)))
            .collect();
        if let Some(bad) = cols.iter().find(|c| c.len() != model.dim()) {
            return Err(Error::LengthMismatch {
                expected: model.dim(),
                got: bad.len(),
            });
        }
        Ok(Self {
            model,
            values: DMatrix::from_columns(&cols),
        })
    }

    fn from_columns(model: FockModel, cols: &[DVector<C64>]) -> Self {
        Self {
            model,
            values: DMatrix::from_columns(cols),
        }
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn node(&self, n: usize) -> DVector<C64> {
        self.values.column(n).into_owned()
    }

    /// Max over `nodes` of the node norm restricted to `eff`.
    pub fn max_norm_on(&self, nodes: &[usize], eff: &EffectiveSubspace) -> f64 {
        nodes.iter().map(|&n| eff.norm_on(&self.node(n))).fold(0.0, f64::max)
    }

    fn check(&self, chart: &ChartModel) -> Result<()> {
        if self.len() != chart.len() {
            return Err(Error::LengthMismatch {
                expected: chart.len(),
                got: self.len(),
            });
        }
        if self.model.l() != chart.l() {
            return Err(Error::ModelMismatch(format!(
                "field with l = {} on a chart with l = {}",
                self.model.l(),
                chart.l()
            )));
        }
        Ok(())
    }
}

/// Clifford part of the spinor connection along `e_a` at `node`:
///
/// ```text
/// C_a v = -(i/2) Σ_i [ e_{i+l}.(∇_a e_i).v - e_i.(∇_a e_{i+l}).v ]
/// ```
pub fn connection_term(chart: &ChartModel, model: FockModel, node: usize, a: usize, v: &DVector<C64>) -> DVector<C64> {
    let l = chart.l();
    let n = 2 * l;
    let ek: Vec<_> = (0..n).map(|k| model.clifford_basis(k, v)).collect();
    let mut acc = DVector::zeros(v.len());
    let mut tmp = DVector::zeros(v.len());
    for i in 0..l {
        for (target, src, sign) in [(i + l, i, 1.0), (i, i + l, -1.0)] {
            tmp.fill(C64::new(0.0, 0.0));
            let mut any = false;
            for (k, ekv) in ek.iter().enumerate() {
                let g = chart.gamma(node, k, a, src);
                if g != 0.0 {
                    tmp.axpy(C64::new(g, 0.0), ekv, C64::new(1.0, 0.0));
                    any = true;
                }
            }
            if any {
                model.add_clifford(target, C64::new(sign, 0.0), tmp.as_slice(), acc.as_mut_slice());
            }
        }
    }
    acc * (-I / 2.0)
}

fn partials(chart: &ChartModel, field: &SpinorField) -> Vec<DMatrix<C64>> {
    (0..chart.space().dim())
        .map(|mu| chart.grid().derivative(&field.values, mu))
        .collect()
}

fn covariant_from_partials(chart: &ChartModel, field: &SpinorField, parts: &[DMatrix<C64>], a: usize) -> SpinorField {
    let n = chart.space().dim();
    let cols: Vec<DVector<C64>> = (0..chart.len())
        .into_par_iter()
        .map(|node| {
            let e = chart.frame(node);
            let mut col = connection_term(chart, field.model, node, a, &field.node(node));
            for (mu, part) in parts.iter().enumerate().take(n) {
                let w = e[(mu, a)];
                if w != 0.0 {
                    col.axpy(C64::new(w, 0.0), &part.column(node), C64::new(1.0, 0.0));
                }
            }
            col
        })
        .collect();
    SpinorField::from_columns(field.model, &cols)
}

/// `∇ˢ_a φ = Σ_μ E^μ_a ∂_μ φ + C_a φ` at every node.
pub fn covariant_derivative(chart: &ChartModel, field: &SpinorField, a: usize) -> Result<SpinorField> {
    field.check(chart)?;
    if a >= chart.space().dim() {
        return Err(Error::IndexOutOfRange {
            index: a,
            limit: chart.space().dim(),
        });
    }
    Ok(covariant_from_partials(chart, field, &partials(chart, field), a))
}

/// `∇ˢ φ` as one field per frame direction.
pub fn covariant_derivatives(chart: &ChartModel, field: &SpinorField) -> Result<Vec<SpinorField>> {
    field.check(chart)?;
    let parts = partials(chart, field);
    Ok((0..chart.space().dim())
        .map(|a| covariant_from_partials(chart, field, &parts, a))
        .collect())
}

fn clifford_vector(model: FockModel, y: &[f64], v: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(v.len());
    for (b, &yb) in y.iter().enumerate() {
        if yb != 0.0 {
            model.add_clifford(b, C64::new(yb, 0.0), v.as_slice(), out.as_mut_slice());
        }
    }
    out
}

/// Max over interior nodes of `‖∇ˢ_a(Y.φ) - (∇_a Y).φ - Y.(∇ˢ_a φ)‖` on `eff`,
/// with `y[node]` the frame components of `Y`.
pub fn leibniz_check(
    chart: &ChartModel,
    field: &SpinorField,
    y: &[Vec<f64>],
    a: usize,
    eff: &EffectiveSubspace,
) -> Result<f64> {
    field.check(chart)?;
    let n = chart.space().dim();
    if y.len() != chart.len() || y.iter().any(|v| v.len() != n) {
        return Err(Error::LengthMismatch {
            expected: chart.len(),
            got: y.len(),
        });
    }
    let model = field.model;
    let cols: Vec<_> = (0..chart.len())
        .map(|node| clifford_vector(model, &y[node], &field.node(node)))
        .collect();
    let y_phi = SpinorField::from_columns(model, &cols);
    let lhs = covariant_derivative(chart, &y_phi, a)?;
    let d_phi = covariant_derivative(chart, field, a)?;
    let dy: Vec<Vec<f64>> = (0..n)
        .map(|b| {
            let comp: Vec<f64> = y.iter().map(|v| v[b]).collect();
            chart.frame_derivative(&comp, a)
        })
        .collect();
    let worst = chart
        .grid()
        .interior(1)
        .into_par_iter()
        .map(|node| {
            let nabla_y: Vec<f64> = (0..n)
                .map(|b| dy[b][node] + (0..n).map(|c| y[node][c] * chart.gamma(node, b, a, c)).sum::<f64>())
                .collect();
            let rhs = clifford_vector(model, &nabla_y, &field.node(node))
                + clifford_vector(model, &y[node], &d_phi.node(node));
            eff.norm_on(&(lhs.node(node) - rhs))
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `Rˢ(e_a, e_b) φ = ∇ˢ_a ∇ˢ_b φ - ∇ˢ_b ∇ˢ_a φ - ∇ˢ_{[e_a, e_b]} φ` as a 2-form per node.
pub fn assembled_spinor_curvature(chart: &ChartModel, field: &SpinorField) -> Result<Vec<SpinorForm>> {
    let n = chart.space().dim();
    let model = field.model;
    let first = covariant_derivatives(chart, field)?;
    let second: Vec<Vec<SpinorField>> = first
        .iter()
        .map(|fb| covariant_derivatives(chart, fb))
        .collect::<Result<_>>()?;
    // second[b][a] = ∇ˢ_a ∇ˢ_b φ
    let alg = FormAlgebra::standard(model)?;
    let pairs: Vec<Vec<usize>> = alg.subsets(2).to_vec();
    Ok((0..chart.len())
        .into_par_iter()
        .map(|node| {
            let mut form = SpinorForm::zero(model, 2).expect("degree 2 exists for l >= 1");
            for (p, set) in pairs.iter().enumerate() {
                let (a, b) = (set[0], set[1]);
                let mut v = second[b][a].node(node) - second[a][b].node(node);
                for (m, fm) in first.iter().enumerate().take(n) {
                    let c = chart.bracket(node, m, a, b);
                    if c != 0.0 {
                        v.axpy(C64::new(-c, 0.0), &fm.node(node), C64::new(1.0, 0.0));
                    }
                }
                form.components[p] = v;
            }
            form
        })
        .collect())
}

/// `Σ_ij σ^{ij} e_i.e_j.v`.
pub fn sigma_action(model: FockModel, sigma_upper: &DMatrix<f64>, v: &DVector<C64>) -> DVector<C64> {
    let n = sigma_upper.nrows();
    let ej: Vec<_> = (0..n).map(|j| model.clifford_basis(j, v)).collect();
    let mut out = DVector::zeros(v.len());
    for i in 0..n {
        let mut tmp = DVector::<C64>::zeros(v.len());
        for (j, ejv) in ej.iter().enumerate() {
            let s = sigma_upper[(i, j)];
            if s != 0.0 {
                tmp.axpy(C64::new(s, 0.0), ejv, C64::new(1.0, 0.0));
            }
        }
        model.add_clifford(i, C64::new(1.0, 0.0), tmp.as_slice(), out.as_mut_slice());
    }
    out
}

/// Closed form of `p20 Rˢ φ`: the 2-form `(e_a, e_b) ↦ (i/2l) ω_{ab} σ^{ij} e_i.e_j.φ`.
pub fn curvature_action_p20(chart: &ChartModel, ricci: &RicciData, field: &SpinorField) -> Result<Vec<SpinorForm>> {
    field.check(chart)?;
    if ricci.sigma_upper.len() != chart.len() {
        return Err(Error::LengthMismatch {
            expected: chart.len(),
            got: ricci.sigma_upper.len(),
        });
    }
    let alg = FormAlgebra::standard(field.model)?;
    let scale = I / (2.0 * chart.l() as f64);
    (0..chart.len())
        .into_par_iter()
        .map(|node| {
            let s = sigma_action(field.model, &ricci.sigma_upper[node], &field.node(node));
            alg.omega_form(&(s * scale))
        })
        .collect()
}

/// Max over `nodes` of `‖p20(Rˢφ) - closed form‖` on `eff`.
pub fn p20_residual(
    chart: &ChartModel,
    ricci: &RicciData,
    field: &SpinorField,
    nodes: &[usize],
    eff: &EffectiveSubspace,
) -> Result<f64> {
    let assembled = assembled_spinor_curvature(chart, field)?;
    let closed = curvature_action_p20(chart, ricci, field)?;
    let alg = FormAlgebra::standard(field.model)?;
    let mut worst = 0.0f64;
    for &node in nodes {
        let p = alg.p20(&assembled[node])?;
        worst = worst.max(p.sub(&closed[node])?.norm_on(eff));
    }
    Ok(worst)
}
