//! Rectangular coordinate grids with second-order differences on bounded axes
//! and spectral differentiation on periodic ones.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fock::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub nodes: Vec<f64>,
    pub periodic: bool,
}

impl Axis {
    /// `count` nodes on `[a, b]`, endpoints included.
    pub fn uniform(name: &str, a: f64, b: f64, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::GridTooSmall(format!(
                "axis {name} has {count} nodes (need at least 3)"
            )));
        }
        if !(b > a) {
            return Err(Error::InvalidChart(format!("axis {name}: empty interval")));
        }
        let h = (b - a) / (count - 1) as f64;
        Ok(Self {
            name: name.into(),
            nodes: (0..count).map(|j| a + j as f64 * h).collect(),
            periodic: false,
        })
    }

    /// `count` nodes `2πk/count` on the circle.
    pub fn periodic(name: &str, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::GridTooSmall(format!(
                "periodic axis {name} has {count} nodes (need at least 3)"
            )));
        }
        Ok(Self {
            name: name.into(),
            nodes: (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect(),
            periodic: true,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            2.0 * PI / self.len() as f64
        } else {
            self.nodes[1] - self.nodes[0]
        }
    }
}

/// Tensor-product grid; node index has axis 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for a in (0..axes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].len();
        }
        Self { axes, strides }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.axes[axis].len()
    }

    pub fn node(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.axes[a].nodes[self.index(node, a)])
            .collect()
    }

    /// Nodes at least `layers` steps away from every bounded-axis end.
    pub fn is_interior(&self, node: usize, layers: usize) -> bool {
        self.axes.iter().enumerate().all(|(a, ax)| {
            if ax.periodic {
                return true;
            }
            let i = self.index(node, a);
            i >= layers && i + layers < ax.len()
        })
    }

    pub fn interior(&self, layers: usize) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_interior(n, layers)).collect()
    }

    /// Start nodes of every line along `axis`.
    fn line_starts(&self, axis: usize) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.index(n, axis) == 0).collect()
    }

    /// `∂/∂x^axis` of every row of `values` (columns are nodes).
    ///
    /// Bounded axes: central differences inside, second-order one-sided at the
    /// two ends. Periodic axes: FFT differentiation, Nyquist mode dropped.
    pub fn derivative(&self, values: &DMatrix<C64>, axis: usize) -> DMatrix<C64> {
        let ax = &self.axes[axis];
        let m = ax.len();
        let stride = self.strides[axis];
        let rows = values.nrows();
        let mut out = DMatrix::zeros(rows, values.ncols());
        if ax.periodic {
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(m);
            let inv = planner.plan_fft_inverse(m);
            let mut buf = vec![C64::new(0.0, 0.0); m];
            let mult: Vec<C64> = (0..m)
                .map(|j| {
                    let k = if j < m.div_ceil(2) {
                        j as f64
                    } else {
                        j as f64 - m as f64
                    };
                    if m.is_multiple_of(2) && j == m / 2 {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(0.0, k / m as f64)
                    }
                })
                .collect();
            for start in self.line_starts(axis) {
                for r in 0..rows {
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = values[(r, start + j * stride)];
                    }
                    fwd.process(&mut buf);
                    for (b, w) in buf.iter_mut().zip(&mult) {
                        *b *= w;
                    }
                    inv.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        out[(r, start + j * stride)] = *b;
                    }
                }
            }
        } else {
            let h = ax.spacing();
            let c = 1.0 / (2.0 * h);
            for start in self.line_starts(axis) {
                let at = |j: usize| start + j * stride;
                for r in 0..rows {
                    let f = |j: usize| values[(r, at(j))];
                    out[(r, at(0))] = (f(0) * -3.0 + f(1) * 4.0 - f(2)) * c;
                    for j in 1..m - 1 {
                        out[(r, at(j))] = (f(j + 1) - f(j - 1)) * c;
                    }
                    out[(r, at(m - 1))] = (f(m - 1) * 3.0 - f(m - 2) * 4.0 + f(m - 3)) * c;
                }
            }
        }
        out
    }

    /// Derivative of a real scalar field.
    pub fn derivative_real(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let m = DMatrix::from_iterator(1, values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        self.derivative(&m, axis).iter().map(|c| c.re).collect()
    }
}
