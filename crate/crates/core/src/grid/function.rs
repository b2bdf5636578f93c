use std::sync::Arc;

use super::uniform::fornberg;
use super::{matvec, AngularGrid, Parity, MAX_DERIVATIVE_ORDER};
use crate::error::{Error, Result};

/// Nodal values of an even or odd function of θ on an [`AngularGrid`].
/// Nodes of one parity class used by [`GridFunction::taylor_jet`].
const JET_STENCIL: usize = 12;

#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<AngularGrid>,
    values: Vec<f64>,
    parity: Parity,
}

/// Derivatives at θ = 0 with a rough conditioning estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorJet {
    pub derivatives: Vec<f64>,
    /// max over orders of Σ|Dᵏ₀ⱼ fⱼ| / max(|f⁽ᵏ⁾(0)|, ‖f‖∞).
    pub condition: f64,
}

impl GridFunction {
    pub fn new(grid: Arc<AngularGrid>, values: Vec<f64>, parity: Parity) -> Result<Self> {
        grid.check_len(values.len())?;
        let mut f = Self { grid, values, parity };
        if parity == Parity::Odd {
            f.values[0] = 0.0;
        }
        Ok(f)
    }

    pub fn from_fn(grid: &Arc<AngularGrid>, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid.clone(), values, parity).expect("length matches by construction")
    }

    pub fn zeros(grid: &Arc<AngularGrid>, parity: Parity) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()], parity }
    }

    pub fn grid(&self) -> &Arc<AngularGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid, new values of the given parity.
    pub fn with_values(&self, values: Vec<f64>, parity: Parity) -> Result<Self> {
        Self::new(self.grid.clone(), values, parity)
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let row = self.grid.interpolation_row(theta, self.parity);
        row.iter().zip(&self.values).map(|(a, b)| a * b).sum()
    }

    pub fn differentiate(&self, order: usize) -> Result<Self> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if self.grid.len() < order + 2 {
            return Err(Error::Resolution { nodes: self.grid.len(), what: format!("derivative of order {order}") });
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let m = if order == 1 {
            self.grid.derivative_matrix(self.parity)
        } else {
            self.grid.higher_derivative(self.parity, order)
        };
        let p = if order % 2 == 0 { self.parity } else { self.parity.flip() };
        Self::new(self.grid.clone(), matvec(m, &self.values), p)
    }

    /// θ ↦ ∫₀^θ f.
    pub fn cumulative_integral(&self) -> Self {
        let v = matvec(self.grid.cumulative_matrix(self.parity), &self.values);
        Self::new(self.grid.clone(), v, self.parity.flip()).expect("same grid")
    }

    /// ∫ₐᵇ f over the grid interpolant.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let l = self.grid.half_angle();
        if a > b {
            return Err(Error::Domain(format!("integration limits reversed: {a} > {b}")));
        }
        if a < 0.0 || b > l * (1.0 + 1e-14) {
            return Err(Error::Domain(format!("limits [{a}, {b}] outside [0, {l}]")));
        }
        if a == 0.0 && b == l {
            let w = self.grid.cumulative_matrix(self.parity).row(self.grid.len() - 1);
            return Ok(w.iter().zip(&self.values).map(|(x, y)| x * y).sum());
        }
        let fb = self.grid.antiderivative(&self.values, self.parity, b.min(l));
        let fa = if a == 0.0 { 0.0 } else { self.grid.antiderivative(&self.values, self.parity, a) };
        Ok(fb - fa)
    }

    /// f(0), f'(0), …, f⁽ᵏ⁾(0) from the interpolant in θ² through the nodes nearest 0
    /// (in θ²·(f/θ) for odd f);
    /// entries of the wrong parity are exactly zero.
    pub fn taylor_jet(&self, k: usize) -> Result<TaylorJet> {
        if k > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        let nodes = self.grid.nodes();
        let skip = usize::from(self.parity == Parity::Odd);
        let count = self.grid.len().min(JET_STENCIL + skip) - skip;
        let s: Vec<f64> = nodes[skip..skip + count].iter().map(|t| t * t).collect();
        let reduced: Vec<f64> = (skip..skip + count)
            .map(|i| match self.parity {
                Parity::Even => self.values[i],
                Parity::Odd => self.values[i] / nodes[i],
            })
            .collect();
        let weights = fornberg(0.0, &s, (count - 1).min(k / 2));
        let scale = self.sup_norm();
        let mut derivatives = Vec::with_capacity(k + 1);
        let mut condition: f64 = 1.0;
        for order in 0..=k {
            let p = if order % 2 == 0 { self.parity } else { self.parity.flip() };
            let power = match self.parity {
                Parity::Even => order / 2,
                Parity::Odd => order.saturating_sub(1) / 2,
            };
            if p == Parity::Odd || power >= weights.len() {
                derivatives.push(0.0);
                continue;
            }
            let factor = (power + 1..=order).map(|i| i as f64).product::<f64>();
            let terms: Vec<f64> = weights[power].iter().zip(&reduced).map(|(w, f)| factor * w * f).collect();
            let value: f64 = terms.iter().sum();
            if order > 0 {
                let mass: f64 = terms.iter().map(|t| t.abs()).sum();
                let denom = value.abs().max(scale).max(f64::MIN_POSITIVE);
                condition = condition.max(mass / denom);
            }
            derivatives.push(value);
        }
        Ok(TaylorJet { derivatives, condition })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect(), parity: self.parity }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// self + c·other; parities must agree.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.parity != other.parity {
            return Err(Error::Parity("cannot add functions of different parity".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Self::new(self.grid.clone(), values, self.parity)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Pointwise product; parity multiplies.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.grid.clone(), values, self.parity.times(other.parity))
    }

    /// Pointwise map over (θ, value); caller declares the parity of the result.
    pub fn map(&self, parity: Parity, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        Self::new(self.grid.clone(), values, parity).expect("same grid")
    }

    /// Exponentially filtered copy (unchanged on grids without a filter).
    pub fn filtered(&self) -> Self {
        match self.grid.filter_matrix(self.parity) {
            Some(f) => Self::new(self.grid.clone(), matvec(f, &self.values), self.parity).expect("same grid"),
            None => self.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
