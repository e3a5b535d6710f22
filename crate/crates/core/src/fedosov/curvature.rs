use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::ChartModel;
use crate::error::{Error, Result};
use crate::symalg::{raise_both, SymplecticSpace};

/// `R^p_{jkm}`: the `e_p` component of `R(e_k, e_m) e_j`, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    n: usize,
    values: Vec<Vec<f64>>,
}

impl CurvatureField {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: usize, p: usize, j: usize, k: usize, m: usize) -> f64 {
        let n = self.n;
        self.values[node][((p * n + j) * n + k) * n + m]
    }

    /// All `n^4` components at `node`, index `((p n + j) n + k) n + m`.
    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node]
    }

    /// Max of `|R^p_{jkm} + R^p_{jmk}|` over the given nodes.
    pub fn form_antisymmetry_defect(&self, nodes: &[usize]) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for &node in nodes {
            for p in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for m in 0..n {
                            worst = worst.max((self.get(node, p, j, k, m) + self.get(node, p, j, m, k)).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Frame derivatives `e_k(f)` for every `k`, per node.
fn frame_gradient(chart: &ChartModel, f: &[f64]) -> Vec<Vec<f64>> {
    let n = chart.space().dim();
    let partials: Vec<_> = (0..n).map(|mu| chart.grid().derivative_real(f, mu)).collect();
    (0..n)
        .map(|k| {
            (0..chart.len())
                .map(|node| (0..n).map(|mu| chart.frame(node)[(mu, k)] * partials[mu][node]).sum())
                .collect()
        })
        .collect()
}

/// Curvature from `Γ`, its frame derivatives and the frame brackets:
///
/// ```text
/// R^p_{jkm} = e_k(Γ^p_{mj}) - e_m(Γ^p_{kj})
///           + Γ^q_{mj} Γ^p_{kq} - Γ^q_{kj} Γ^p_{mq} - c^q_{km} Γ^p_{qj}
/// ```
pub fn curvature(chart: &ChartModel) -> Result<CurvatureField> {
    for ax in chart.grid().axes() {
        if !ax.periodic && ax.len() < 3 {
            return Err(Error::GridTooSmall(format!("axis {} has {} nodes", ax.name, ax.len())));
        }
    }
    let n = chart.space().dim();
    let nodes = chart.len();
    // dg[(p * n + i) * n + j][k][node] = e_k(Γ^p_{ij})
    let dg: Vec<Vec<Vec<f64>>> = (0..n * n * n)
        .into_par_iter()
        .map(|flat| {
            let (p, i, j) = (flat / (n * n), (flat / n) % n, flat % n);
            let f: Vec<f64> = (0..nodes).map(|node| chart.gamma(node, p, i, j)).collect();
            frame_gradient(chart, &f)
        })
        .collect();
    let values = (0..nodes)
        .into_par_iter()
        .map(|node| {
            let g = |p: usize, i: usize, j: usize| chart.gamma(node, p, i, j);
            let mut out = vec![0.0; n * n * n * n];
            for p in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for m in 0..n {
                            let mut v = dg[(p * n + m) * n + j][k][node] - dg[(p * n + k) * n + j][m][node];
                            for q in 0..n {
                                v += g(q, m, j) * g(p, k, q)
                                    - g(q, k, j) * g(p, m, q)
                                    - chart.bracket(node, q, k, m) * g(p, q, j);
                            }
                            out[((p * n + j) * n + k) * n + m] = v;
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(CurvatureField { n, values })
}

/// Symplectic Ricci tensor with both index placements, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciData {
    pub sigma_lower: Vec<DMatrix<f64>>,
    pub sigma_upper: Vec<DMatrix<f64>>,
}

impl RicciData {
    /// Constant `σ_{ij}` on every node of a grid with `nodes` nodes.
    pub fn constant(space: &SymplecticSpace, sigma_lower: DMatrix<f64>, nodes: usize) -> Self {
        let upper = raise_both(space, &sigma_lower);
        Self {
            sigma_lower: vec![sigma_lower; nodes],
            sigma_upper: vec![upper; nodes],
        }
    }

    pub fn max_asymmetry(&self, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .map(|&n| (&self.sigma_lower[n] - self.sigma_lower[n].transpose()).amax())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self, nodes: &[usize]) -> f64 {
        nodes.iter().map(|&n| self.sigma_lower[n].amax()).fold(0.0, f64::max)
    }

    /// The common value of `σ^{ij}` if it agrees on `nodes` to within `tol`.
    pub fn constant_upper(&self, nodes: &[usize], tol: f64) -> Option<DMatrix<f64>> {
        let first = self.sigma_upper.get(*nodes.first()?)?;
        nodes
            .iter()
            .all(|&n| (&self.sigma_upper[n] - first).amax() <= tol)
            .then(|| first.clone())
    }
}

/// `σ_{ij} = Σ_a R^a_{j a i}`, the trace of `V ↦ R(V, e_i) e_j`.
pub fn ricci_from(chart: &ChartModel, curv: &CurvatureField) -> RicciData {
    let n = curv.dim();
    let space = chart.space();
    let sigma_lower: Vec<_> = (0..curv.len())
        .map(|node| DMatrix::from_fn(n, n, |i, j| (0..n).map(|a| curv.get(node, a, j, a, i)).sum()))
        .collect();
    let sigma_upper = sigma_lower.iter().map(|s| raise_both(space, s)).collect();
    RicciData {
        sigma_lower,
        sigma_upper,
    }
}

pub fn ricci(chart: &ChartModel) -> Result<RicciData> {
    Ok(ricci_from(chart, &curvature(chart)?))
}

/// `σ̃_{abkm}` from `σ_{ij}`, index `((a n + b) n + k) n + m`:
///
/// ```text
/// 2(l+1) σ̃_{abkm} = ω_{am} σ_{bk} - ω_{ak} σ_{bm} + ω_{bm} σ_{ak} - ω_{bk} σ_{am} + 2 σ_{ab} ω_{km}
/// ```
pub fn extended_ricci(space: &SymplecticSpace, sigma: &DMatrix<f64>) -> Vec<f64> {
    let n = space.dim();
    let w = |i, j| space.omega(i, j);
    let scale = 1.0 / (2.0 * (space.l() as f64 + 1.0));
    let mut out = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                for m in 0..n {
                    out[((a * n + b) * n + k) * n + m] = scale
                        * (w(a, m) * sigma[(b, k)] - w(a, k) * sigma[(b, m)] + w(b, m) * sigma[(a, k)]
                            - w(b, k) * sigma[(a, m)]
                            + 2.0 * sigma[(a, b)] * w(k, m));
                }
            }
        }
    }
    out
}

/// `R♭_{abkm} = Σ_q ω_{qa} R^q_{bkm}`, same index layout as [`extended_ricci`].
pub fn lowered_curvature(space: &SymplecticSpace, curv: &CurvatureField, node: usize) -> Vec<f64> {
    let n = space.dim();
    let mut out = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                for m in 0..n {
                    out[((a * n + b) * n + k) * n + m] =
                        (0..n).map(|q| space.omega(q, a) * curv.get(node, q, b, k, m)).sum();
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CurvatureType {
    WeylType,
    RicciType,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: CurvatureType,
    /// Set when `R` vanishes, so the chart is of both types.
    pub both: bool,
    pub sigma_max: f64,
    pub ricci_defect: f64,
    pub curvature_max: f64,
}

/// Weyl type when `max |σ| < tol`, Ricci type when `max |R♭ - σ̃| < tol`,
/// evaluated on nodes one step inside the boundary.
pub fn classify(chart: &ChartModel, tol: f64) -> Result<Classification> {
    let curv = curvature(chart)?;
    let ric = ricci_from(chart, &curv);
    let nodes = chart.grid().interior(1);
    let space = chart.space();
    let mut ricci_defect = 0.0f64;
    let mut curvature_max = 0.0f64;
    for &node in &nodes {
        let flat = lowered_curvature(space, &curv, node);
        let tilde = extended_ricci(space, &ric.sigma_lower[node]);
        for (x, y) in flat.iter().zip(&tilde) {
            ricci_defect = ricci_defect.max((x - y).abs());
        }
        curvature_max = curv.at(node).iter().fold(curvature_max, |m, v| m.max(v.abs()));
    }
    let sigma_max = ric.max_abs(&nodes);
    let kind = if sigma_max < tol {
        CurvatureType::WeylType
    } else if ricci_defect < tol {
        CurvatureType::RicciType
    } else {
        CurvatureType::Generic
    };
    Ok(Classification {
        kind,
        both: curvature_max < tol,
        sigma_max,
        ricci_defect,
        curvature_max,
    })
}
