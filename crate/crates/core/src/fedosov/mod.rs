//! Chart-level Fedosov manifolds: a coordinate grid with an adapted symplectic
//! frame and the coefficients `Γ^k_{ij}` of a torsion-free symplectic
//! connection, `∇_{e_i} e_j = Σ_k Γ^k_{ij} e_k`.
//!
//! Three charts are provided: flat `R^{2l}`, the round sphere in `(θ, ϕ)` on
//! `[θ0, π - θ0] × S^1`, and flat space with a random torsion-free symplectic
//! perturbation. Metaplectic structures are trivial throughout.

mod curvature;
mod grid;
mod spinor;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symalg::{one_based, SymplecticSpace};

pub use curvature::{
    classify, curvature, extended_ricci, lowered_curvature, ricci, ricci_from, Classification, CurvatureField,
    CurvatureType, RicciData,
};
pub use grid::{Axis, Grid};
pub use spinor::{
    assembled_spinor_curvature, connection_term, covariant_derivative, covariant_derivatives, curvature_action_p20,
    leibniz_check, p20_residual, sigma_action, SpinorField,
};

/// Smallest pole margin accepted by the sphere chart.
pub const MIN_POLE_MARGIN: f64 = 0.01;
pub const DEFAULT_POLE_MARGIN: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum ChartKind {
    Flat,
    Sphere { radius: f64, pole_margin: f64 },
    Perturbed { amplitude: f64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ChartModel {
    kind: ChartKind,
    space: SymplecticSpace,
    grid: Grid,
    // E[(mu, a)]: coefficient of d/dx^mu in e_a
    frame: Vec<DMatrix<f64>>,
    frame_inv: Vec<DMatrix<f64>>,
    // [(k * n + i) * n + j]
    gamma: Vec<Vec<f64>>,
    omega_coord: Vec<DMatrix<f64>>,
    // [(m * n + k) * n + j]: [e_k, e_j] = c^m_{kj} e_m
    brackets: Vec<Vec<f64>>,
}

impl ChartModel {
    fn assemble(
        kind: ChartKind,
        space: SymplecticSpace,
        grid: Grid,
        frame_fn: impl Fn(&[f64]) -> DMatrix<f64>,
        gamma_fn: impl Fn(&[f64]) -> Vec<f64>,
        omega_fn: impl Fn(&[f64]) -> DMatrix<f64>,
    ) -> Result<Self> {
        let nodes = grid.len();
        let coords: Vec<_> = (0..nodes).map(|n| grid.coords(n)).collect();
        let frame: Vec<_> = coords.iter().map(|c| frame_fn(c)).collect();
        let frame_inv = frame
            .iter()
            .map(|e| {
                e.clone()
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidChart("degenerate frame".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let gamma = coords.iter().map(|c| gamma_fn(c)).collect();
        let omega_coord = coords.iter().map(|c| omega_fn(c)).collect();
        let mut chart = Self {
            kind,
            space,
            grid,
            frame,
            frame_inv,
            gamma,
            omega_coord,
            brackets: Vec::new(),
        };
        chart.brackets = chart.compute_brackets();
        Ok(chart)
    }

    /// Flat `R^{2l}` with coordinate frame and `Γ = 0` on `[-w, w]^{2l}`.
    pub fn flat(l: usize, nodes_per_axis: usize, half_width: f64) -> Result<Self> {
        let space = SymplecticSpace::standard(l)?;
        let n = space.dim();
        let axes = (0..n)
            .map(|a| Axis::uniform(&format!("x{}", one_based(a)), -half_width, half_width, nodes_per_axis))
            .collect::<Result<Vec<_>>>()?;
        let omega = space.omega_lower().clone();
        Self::assemble(
            ChartKind::Flat,
            space,
            Grid::new(axes),
            |_| DMatrix::identity(n, n),
            |_| vec![0.0; n * n * n],
            |_| omega.clone(),
        )
    }

    /// Round sphere of radius `r` with `e1 = (1/r) d/dθ`, `e2 = (1/(r sinθ)) d/dϕ`.
    pub fn sphere(radius: f64, pole_margin: f64, theta_nodes: usize, phi_nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidChart(format!("radius {radius}")));
        }
        if !(pole_margin >= MIN_POLE_MARGIN) {
            return Err(Error::InvalidChart(format!(
                "pole margin {pole_margin} below {MIN_POLE_MARGIN}: frame blows up near the poles"
            )));
        }
        if pole_margin >= PI / 2.0 - 1e-3 {
            return Err(Error::InvalidChart(format!(
                "pole margin {pole_margin} leaves no patch"
            )));
        }
        let space = SymplecticSpace::standard(1)?;
        let grid = Grid::new(vec![
            Axis::uniform("theta", pole_margin, PI - pole_margin, theta_nodes)?,
            Axis::periodic("phi", phi_nodes)?,
        ]);
        let r = radius;
        Self::assemble(
            ChartKind::Sphere { radius, pole_margin },
            space,
            grid,
            |c| DMatrix::from_row_slice(2, 2, &[1.0 / r, 0.0, 0.0, 1.0 / (r * c[0].sin())]),
            |c| {
                let cot = c[0].cos() / c[0].sin();
                let mut g = vec![0.0; 8];
                // ∇_{e2} e1 = (cot θ / r) e2, ∇_{e2} e2 = -(cot θ / r) e1
                let idx = |k: usize, i: usize, j: usize| (k * 2 + i) * 2 + j;
                g[idx(1, 1, 0)] = cot / r;
                g[idx(0, 1, 1)] = -cot / r;
                g
            },
            |c| {
                let a = r * r * c[0].sin();
                DMatrix::from_row_slice(2, 2, &[0.0, a, -a, 0.0])
            },
        )
    }

    /// Number of `θ` nodes giving spacing exactly `h` for the given margin.
    pub fn sphere_theta_nodes(pole_margin: f64, h: f64) -> Result<usize> {
        let intervals = (PI - 2.0 * pole_margin) / h;
        let k = intervals.round();
        if (intervals - k).abs() > 1e-9 || k < 2.0 {
            return Err(Error::InvalidChart(format!(
                "spacing {h} does not divide the patch [{pole_margin}, π - {pole_margin}]"
            )));
        }
        Ok(k as usize + 1)
    }

    /// Flat chart with `Γ^m_{ij} = Σ_k Ω^{-T}_{mk} S_{kij}(x)` for a random
    /// totally symmetric affine `S`, which makes `∇` torsion-free and symplectic.
    pub fn perturbed_flat(l: usize, nodes_per_axis: usize, half_width: f64, amplitude: f64, seed: u64) -> Result<Self> {
        let space = SymplecticSpace::standard(l)?;
        let n = space.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n * n * n * (n + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        // raw[((k * n + i) * n + j) * (n + 1) + mu], mu = n is the constant term
        let sym = |k: usize, i: usize, j: usize, mu: usize| {
            let perms = [(k, i, j), (k, j, i), (i, k, j), (i, j, k), (j, k, i), (j, i, k)];
            perms
                .iter()
                .map(|&(a, b, c)| raw[((a * n + b) * n + c) * (n + 1) + mu])
                .sum::<f64>()
                / 6.0
        };
        let omega_t_inv = space
            .omega_lower()
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular symplectic form".into()))?;
        let axes = (0..n)
            .map(|a| Axis::uniform(&format!("x{}", one_based(a)), -half_width, half_width, nodes_per_axis))
            .collect::<Result<Vec<_>>>()?;
        let omega = space.omega_lower().clone();
        Self::assemble(
            ChartKind::Perturbed { amplitude, seed },
            space,
            Grid::new(axes),
            |_| DMatrix::identity(n, n),
            |x| {
                let mut g = vec![0.0; n * n * n];
                for i in 0..n {
                    for j in 0..n {
                        for m in 0..n {
                            let mut acc = 0.0;
                            for k in 0..n {
                                let w = omega_t_inv[(m, k)];
                                if w == 0.0 {
                                    continue;
                                }
                                let mut s = sym(k, i, j, n);
                                for (mu, xm) in x.iter().enumerate() {
                                    s += sym(k, i, j, mu) * xm;
                                }
                                acc += w * s;
                            }
                            g[(m * n + i) * n + j] = amplitude * acc;
                        }
                    }
                }
                g
            },
            |_| omega.clone(),
        )
    }

    pub fn from_config(cfg: &ChartConfig) -> Result<Self> {
        match cfg.chart.as_str() {
            "flat" => Self::flat(
                cfg.l.unwrap_or(1),
                cfg.nodes.unwrap_or(17),
                cfg.half_width.unwrap_or(2.0),
            ),
            "sphere" => Self::sphere(
                cfg.radius.unwrap_or(1.0),
                cfg.pole_margin.unwrap_or(DEFAULT_POLE_MARGIN),
                cfg.theta_nodes.unwrap_or(64),
                cfg.phi_nodes.unwrap_or(16),
            ),
            "perturbed" => Self::perturbed_flat(
                cfg.l.unwrap_or(1),
                cfg.nodes.unwrap_or(9),
                cfg.half_width.unwrap_or(1.0),
                cfg.amplitude.unwrap_or(0.1),
                cfg.seed.unwrap_or(0),
            ),
            other => Err(Error::Config(format!("unknown chart \"{other}\""))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ChartConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_config(&cfg)
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn l(&self) -> usize {
        self.space.l()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn n(&self) -> usize {
        self.space.dim()
    }

    pub fn frame(&self, node: usize) -> &DMatrix<f64> {
        &self.frame[node]
    }

    /// `Γ^k_{ij}` at `node`.
    pub fn gamma(&self, node: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.gamma[node][(k * n + i) * n + j]
    }

    /// `c^m_{kj}` with `[e_k, e_j] = c^m_{kj} e_m`.
    pub fn bracket(&self, node: usize, m: usize, k: usize, j: usize) -> f64 {
        let n = self.n();
        self.brackets[node][(m * n + k) * n + j]
    }

    /// `e_a(f)` for a sampled scalar field.
    pub fn frame_derivative(&self, f: &[f64], a: usize) -> Vec<f64> {
        let partials: Vec<_> = (0..self.n()).map(|mu| self.grid.derivative_real(f, mu)).collect();
        (0..self.len())
            .map(|node| {
                (0..self.n())
                    .map(|mu| self.frame[node][(mu, a)] * partials[mu][node])
                    .sum()
            })
            .collect()
    }

    fn compute_brackets(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let nodes = self.len();
        // dE[(mu * n + b) * n + nu][node] = d/dx^nu E^mu_b
        let mut d_frame = Vec::with_capacity(n * n * n);
        for mu in 0..n {
            for b in 0..n {
                let f: Vec<f64> = (0..nodes).map(|node| self.frame[node][(mu, b)]).collect();
                for nu in 0..n {
                    d_frame.push(self.grid.derivative_real(&f, nu));
                }
            }
        }
        (0..nodes)
            .map(|node| {
                let e = &self.frame[node];
                let mut out = vec![0.0; n * n * n];
                for k in 0..n {
                    for j in 0..n {
                        let coord: Vec<f64> = (0..n)
                            .map(|mu| {
                                (0..n)
                                    .map(|nu| {
                                        e[(nu, k)] * d_frame[(mu * n + j) * n + nu][node]
                                            - e[(nu, j)] * d_frame[(mu * n + k) * n + nu][node]
                                    })
                                    .sum()
                            })
                            .collect();
                        for m in 0..n {
                            out[(m * n + k) * n + j] = (0..n).map(|mu| self.frame_inv[node][(m, mu)] * coord[mu]).sum();
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Frame components of the symplectic form at `node`.
    pub fn omega_frame(&self, node: usize) -> DMatrix<f64> {
        let e = &self.frame[node];
        e.transpose() * &self.omega_coord[node] * e
    }

    /// Max deviation of `ω(e_i, e_j)` from the standard form over all nodes.
    pub fn adapted_residual(&self) -> f64 {
        (0..self.len())
            .map(|node| (self.omega_frame(node) - self.space.omega_lower()).amax())
            .fold(0.0, f64::max)
    }

    /// Max of `|Γ^m_{ij} - Γ^m_{ji} - c^m_{ij}|` over interior nodes.
    pub fn torsion_residual(&self) -> f64 {
        self.torsion_residual_at(&self.grid.interior(1))
    }

    pub fn torsion_residual_at(&self, nodes: &[usize]) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for &node in nodes {
            for m in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let t = self.gamma(node, m, i, j) - self.gamma(node, m, j, i) - self.bracket(node, m, i, j);
                        worst = worst.max(t.abs());
                    }
                }
            }
        }
        worst
    }

    /// Max of `|(∇_k ω)_{ij}|` over interior nodes, with `e_k(ω_{ij})` by differences.
    pub fn omega_parallel_residual(&self) -> f64 {
        self.omega_parallel_residual_at(&self.grid.interior(1))
    }

    pub fn omega_parallel_residual_at(&self, nodes: &[usize]) -> f64 {
        let n = self.n();
        let total = self.len();
        let mut d_omega = vec![vec![Vec::new(); n]; n * n];
        for i in 0..n {
            for j in 0..n {
                let f: Vec<f64> = (0..total).map(|node| self.omega_frame(node)[(i, j)]).collect();
                for (k, slot) in d_omega[i * n + j].iter_mut().enumerate() {
                    *slot = self.frame_derivative(&f, k);
                }
            }
        }
        let mut worst = 0.0f64;
        for &node in nodes {
            let w = self.omega_frame(node);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = d_omega[i * n + j][k][node];
                        for m in 0..n {
                            v -= self.gamma(node, m, k, i) * w[(m, j)] + self.gamma(node, m, k, j) * w[(i, m)];
                        }
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// Writes node coordinates with `σ_{ij}` and `σ^{ij}` as CSV.
    pub fn write_ricci_csv<W: Write>(&self, ricci: &RicciData, out: W) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node".to_string()];
        header.extend(self.grid.axes().iter().map(|a| a.name.clone()));
        for prefix in ["sigma_lower", "sigma_upper"] {
            for i in 0..n {
                for j in 0..n {
                    header.push(format!("{prefix}_{}{}", one_based(i), one_based(j)));
                }
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for node in 0..self.len() {
            let mut row = vec![node.to_string()];
            row.extend(self.grid.coords(node).iter().map(|c| format!("{c:.17e}")));
            for m in [&ricci.sigma_lower[node], &ricci.sigma_upper[node]] {
                for i in 0..n {
                    for j in 0..n {
                        row.push(format!("{:.17e}", m[(i, j)]));
                    }
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes node coordinates with every `R^p_{jkn}` as CSV.
    pub fn write_curvature_csv<W: Write>(&self, curv: &CurvatureField, out: W) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node".to_string()];
        header.extend(self.grid.axes().iter().map(|a| a.name.clone()));
        for p in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        header.push(format!(
                            "R_{}{}{}{}",
                            one_based(p),
                            one_based(j),
                            one_based(k),
                            one_based(m)
                        ));
                    }
                }
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for node in 0..self.len() {
            let mut row = vec![node.to_string()];
            row.extend(self.grid.coords(node).iter().map(|c| format!("{c:.17e}")));
            row.extend(curv.at(node).iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Structured text description of a chart.
///
/// ```toml
/// chart = "sphere"
/// radius = 1.0
/// theta_nodes = 49
/// phi_nodes = 16
/// pole_margin = 0.39269908169872414
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub chart: String,
    pub l: Option<usize>,
    pub nodes: Option<usize>,
    pub half_width: Option<f64>,
    pub radius: Option<f64>,
    pub theta_nodes: Option<usize>,
    pub phi_nodes: Option<usize>,
    pub pole_margin: Option<f64>,
    pub amplitude: Option<f64>,
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_chart_is_adapted_and_parallel() {
        let c = ChartModel::flat(2, 5, 1.0).unwrap();
        assert_eq!(c.len(), 625);
        assert_eq!(c.adapted_residual(), 0.0);
        assert_eq!(c.torsion_residual(), 0.0);
        assert_eq!(c.omega_parallel_residual(), 0.0);
    }

    #[test]
    fn sphere_bracket_matches_closed_form() {
        let c = ChartModel::sphere(1.5, 0.3, 41, 8).unwrap();
        assert!(c.adapted_residual() < 1e-14);
        for node in c.grid().interior(1) {
            let th = c.grid().coords(node)[0];
            let want = -(th.cos() / th.sin()) / 1.5;
            assert!((c.bracket(node, 1, 0, 1) - want).abs() < 0.05 * want.abs().max(1.0));
            assert!(c.bracket(node, 0, 0, 1).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_checks_converge_at_second_order() {
        let m = PI / 8.0;
        let coarse = ChartModel::sphere(1.0, m, ChartModel::sphere_theta_nodes(m, PI / 32.0).unwrap(), 8).unwrap();
        let fine = ChartModel::sphere(1.0, m, ChartModel::sphere_theta_nodes(m, PI / 64.0).unwrap(), 8).unwrap();
        let common = coarse.grid().interior(1);
        let matched: Vec<usize> = common
            .iter()
            .map(|&n| {
                fine.grid()
                    .node(&[2 * coarse.grid().index(n, 0), coarse.grid().index(n, 1)])
            })
            .collect();
        let (a, b) = (coarse.torsion_residual_at(&common), fine.torsion_residual_at(&matched));
        let ratio = a / b;
        assert!(a > 0.0 && (ratio - 4.0).abs() < 0.5, "{a} {b} ratio {ratio}");
        // frame components of ω are constant and Γ is pointwise symplectic
        assert!(coarse.omega_parallel_residual() < 1e-13);
        assert!(fine.omega_parallel_residual() < 1e-13);
    }

    #[test]
    fn perturbed_chart_is_symplectic_and_torsion_free() {
        let c = ChartModel::perturbed_flat(2, 4, 1.0, 0.2, 5).unwrap();
        assert_eq!(c.torsion_residual(), 0.0);
        let n = 4;
        let space = c.space().clone();
        for node in 0..c.len() {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 0.0;
                        for m in 0..n {
                            v +=
                                c.gamma(node, m, k, i) * space.omega(m, j) + c.gamma(node, m, k, j) * space.omega(i, m);
                        }
                        assert!(v.abs() < 1e-14);
                    }
                }
            }
        }
        // affine data: differences are exact
        assert!(c.omega_parallel_residual() < 1e-14);
    }

    #[test]
    fn sphere_rejects_bad_margins() {
        assert!(matches!(
            ChartModel::sphere(1.0, 0.001, 32, 8),
            Err(Error::InvalidChart(_))
        ));
        assert!(matches!(
            ChartModel::sphere(1.0, 1.6, 32, 8),
            Err(Error::InvalidChart(_))
        ));
        assert!(matches!(
            ChartModel::sphere(-1.0, 0.2, 32, 8),
            Err(Error::InvalidChart(_))
        ));
        assert!(matches!(
            ChartModel::sphere(1.0, 0.2, 2, 8),
            Err(Error::GridTooSmall(_))
        ));
        assert_eq!(ChartModel::sphere_theta_nodes(PI / 8.0, PI / 64.0).unwrap(), 49);
        assert!(ChartModel::sphere_theta_nodes(0.15, PI / 64.0).is_err());
    }

    #[test]
    fn toml_config() {
        let c = ChartModel::from_toml("chart = \"sphere\"\nradius = 2.0\ntheta_nodes = 9\nphi_nodes = 4\n").unwrap();
        assert_eq!(
            c.kind(),
            &ChartKind::Sphere {
                radius: 2.0,
                pole_margin: DEFAULT_POLE_MARGIN
            }
        );
        assert_eq!(c.len(), 36);
        assert!(matches!(
            ChartModel::from_toml("chart = \"flat\"\nbogus = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ChartModel::from_toml("chart = \"torus\"\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn csv_export_shapes() {
        let c = ChartModel::sphere(1.0, 0.3, 5, 4).unwrap();
        let curv = curvature(&c).unwrap();
        let ric = ricci_from(&c, &curv);
        let mut buf = Vec::new();
        c.write_ricci_csv(&ric, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[0].starts_with("node,theta,phi,sigma_lower_11"));
        assert_eq!(lines[1].split(',').count(), 3 + 8);
        let mut buf = Vec::new();
        c.write_curvature_csv(&curv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 3 + 16);
    }
}
