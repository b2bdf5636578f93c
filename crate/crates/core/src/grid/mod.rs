//! Angular grids on [0, L] with parity-folded spectral or local operators.
//!
//! Functions of θ are even or odd about θ = 0, so only the half-interval is
//! stored. The clustered family is the nonnegative half of a Chebyshev–Lobatto
//! grid on [−L, L]; its operators are the full-grid operators folded by parity.

mod chebyshev;
mod function;
mod uniform;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use uniform::fornberg;

pub use function::{GridFunction, TaylorJet};

/// Highest derivative order supported by [`GridFunction::differentiate`].
pub const MAX_DERIVATIVE_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFamily {
    /// Chebyshev–Lobatto points of [−L, L] restricted to [0, L].
    Clustered,
    /// Equispaced nodes with local Lagrange stencils.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Sign picked up under θ ↦ −θ.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Backend {
    Clustered(chebyshev::Chebyshev),
    Uniform(uniform::Uniform),
}

#[derive(Debug)]
pub struct AngularGrid {
    half_angle: f64,
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    family: NodeFamily,
    /// First derivative, indexed by the parity of the input.
    derivative: [DMatrix<f64>; 2],
    /// Orders 2..=5, built on first use.
    higher: [[OnceLock<DMatrix<f64>>; 2]; MAX_DERIVATIVE_ORDER - 1],
    /// ∫₀^θᵢ, indexed by the parity of the integrand.
    cumulative: [DMatrix<f64>; 2],
    filter: [OnceLock<DMatrix<f64>>; 2],
    backend: Backend,
}

/// Strength α and order p of the exponential filter exp(−α(k/N)^p).
pub const FILTER_STRENGTH: f64 = 36.0;
pub const FILTER_ORDER: i32 = 16;
/// Node count of the stencils behind [`AngularGrid::local_derivative_rows`].
pub const LOCAL_STENCIL: usize = 16;

impl AngularGrid {
    /// Clustered grid with `n` nodes on [0, `half_angle`].
    pub fn clustered(half_angle: f64, n: usize) -> Result<Arc<Self>> {
        Self::build(half_angle, n, NodeFamily::Clustered)
    }

    /// Uniform grid with `n` nodes on [0, `half_angle`].
    pub fn uniform(half_angle: f64, n: usize) -> Result<Arc<Self>> {
        Self::build(half_angle, n, NodeFamily::Uniform)
    }

    pub fn new(half_angle: f64, n: usize, family: NodeFamily) -> Result<Arc<Self>> {
        Self::build(half_angle, n, family)
    }

    fn build(half_angle: f64, n: usize, family: NodeFamily) -> Result<Arc<Self>> {
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!("half-angle {half_angle} must lie in (0, pi/2)")));
        }
        let min_nodes = match family {
            NodeFamily::Clustered => 3,
            NodeFamily::Uniform => uniform::STENCIL,
        };
        if n < min_nodes {
            return Err(Error::Resolution {
                nodes: n,
                what: format!("a {family:?} grid (at least {min_nodes} nodes required)"),
            });
        }
        let (nodes, derivative, cumulative, backend) = match family {
            NodeFamily::Clustered => {
                let c = chebyshev::Chebyshev::new(half_angle, n);
                let nodes = c.nodes();
                let d = [c.derivative(Parity::Even), c.derivative(Parity::Odd)];
                let s = [c.cumulative(Parity::Even), c.cumulative(Parity::Odd)];
                (nodes, d, s, Backend::Clustered(c))
            }
            NodeFamily::Uniform => {
                let u = uniform::Uniform::new(half_angle, n);
                let nodes = u.nodes();
                let d = [u.derivative(Parity::Even), u.derivative(Parity::Odd)];
                let s = [u.cumulative(Parity::Even), u.cumulative(Parity::Odd)];
                (nodes, d, s, Backend::Uniform(u))
            }
        };
        let quad_weights = cumulative[0].row(n - 1).iter().copied().collect();
        Ok(Arc::new(Self {
            half_angle,
            nodes,
            quad_weights,
            family,
            derivative,
            higher: Default::default(),
            cumulative,
            filter: Default::default(),
            backend,
        }))
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of ∫₀^L for even integrands.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn family(&self) -> NodeFamily {
        self.family
    }

    /// Same node set and operators.
    pub fn same_as(&self, other: &AngularGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.family == other.family
                && self.half_angle == other.half_angle
                && self.nodes.len() == other.nodes.len())
    }

    /// First-derivative matrix acting on functions of the given parity.
    pub fn derivative_matrix(&self, parity: Parity) -> &DMatrix<f64> {
        &self.derivative[parity.index()]
    }

    /// Matrix of the `order`-th derivative (order ≤ 5) acting on functions of the given parity.
    pub fn derivative_matrix_of_order(&self, parity: Parity, order: usize) -> DMatrix<f64> {
        let n = self.len();
        match order {
            0 => DMatrix::identity(n, n),
            1 => self.derivative_matrix(parity).clone(),
            _ => self.higher_derivative(parity, order).clone(),
        }
    }

    pub(crate) fn higher_derivative(&self, parity: Parity, order: usize) -> &DMatrix<f64> {
        assert!((2..=MAX_DERIVATIVE_ORDER).contains(&order));
        self.higher[order - 2][parity.index()].get_or_init(|| match &self.backend {
            Backend::Clustered(c) => c.derivative_of_order(parity, order),
            Backend::Uniform(u) => u.derivative_of_order(parity, order),
        })
    }

    /// Exponential spectral filter on the clustered family; `None` on uniform grids.
    pub fn filter_matrix(&self, parity: Parity) -> Option<&DMatrix<f64>> {
        match &self.backend {
            Backend::Clustered(c) => {
                Some(self.filter[parity.index()].get_or_init(|| c.filter(parity, FILTER_STRENGTH, FILTER_ORDER)))
            }
            Backend::Uniform(_) => None,
        }
    }

    /// Matrix of θᵢ ↦ ∫₀^θᵢ for integrands of the given parity.
    pub fn cumulative_matrix(&self, parity: Parity) -> &DMatrix<f64> {
        &self.cumulative[parity.index()]
    }

    /// Interpolation weights: f(θ) = Σⱼ rowⱼ fⱼ for f of the given parity.
    pub fn interpolation_row(&self, theta: f64, parity: Parity) -> Vec<f64> {
        match &self.backend {
            Backend::Clustered(c) => c.interpolation_row(theta, parity),
            Backend::Uniform(u) => u.interpolation_row(theta, parity),
        }
    }

    /// Rows of [`interpolation_row`](Self::interpolation_row) for many points.
    pub fn interpolation_matrix(&self, points: &[f64], parity: Parity) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(points.len(), n);
        for (i, &t) in points.iter().enumerate() {
            let row = self.interpolation_row(t, parity);
            for (j, r) in row.into_iter().enumerate() {
                m[(i, j)] = r;
            }
        }
        m
    }

    /// Rows mapping nodal values to the derivative of the interpolant of the given order at
    /// points strictly inside (−L, L).
    pub fn derivative_rows(&self, points: &[f64], parity: Parity, order: usize) -> DMatrix<f64> {
        match &self.backend {
            Backend::Clustered(c) => c.derivative_rows(points, parity, order),
            Backend::Uniform(_) if order == 0 => self.interpolation_matrix(points, parity),
            Backend::Uniform(_) => {
                let target = if order % 2 == 0 { parity } else { parity.flip() };
                self.interpolation_matrix(points, target) * self.derivative_matrix_of_order(parity, order)
            }
        }
    }

    /// Rows mapping nodal values to the `order`-th derivative at `points` of the polynomial
    /// through the [`LOCAL_STENCIL`] nearest nodes of the parity-extended grid.
    pub fn local_derivative_rows(&self, points: &[f64], parity: Parity, order: usize) -> DMatrix<f64> {
        let n = self.len();
        let mut ext: Vec<(f64, usize, f64)> = Vec::with_capacity(2 * n - 1);
        for (j, &t) in self.nodes.iter().enumerate() {
            ext.push((t, j, 1.0));
            if j > 0 {
                ext.push((-t, j, parity.sign()));
            }
        }
        let width = LOCAL_STENCIL.min(ext.len());
        let mut m = DMatrix::zeros(points.len(), n);
        for (i, &x) in points.iter().enumerate() {
            ext.sort_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()));
            let stencil = &ext[..width];
            let xs: Vec<f64> = stencil.iter().map(|e| e.0).collect();
            let w = fornberg(x, &xs, order);
            for (k, &(_, col, sign)) in stencil.iter().enumerate() {
                m[(i, col)] += sign * w[order][k];
            }
        }
        if parity == Parity::Odd {
            m.column_mut(0).fill(0.0);
        }
        m
    }

    /// ∫₀^θ of the grid interpolant of `values`, for 0 ≤ |θ| ≤ L.
    pub(crate) fn antiderivative(&self, values: &[f64], parity: Parity, theta: f64) -> f64 {
        match &self.backend {
            Backend::Clustered(c) => c.antiderivative(values, parity, theta),
            Backend::Uniform(u) => u.antiderivative(values, parity, theta, &self.cumulative[parity.index()]),
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Precondition(format!("expected {} nodal values, got {len}", self.len())));
        }
        Ok(())
    }
}

pub(crate) fn matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let out = m * DVector::from_column_slice(v);
    out.as_slice().to_vec()
}
