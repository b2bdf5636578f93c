//! Weighted spaces: the weights φ, ψ, the Taylor part ℙ₂ and the H̃⁴ / H⁴ forms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{AngularGrid, GridFunction, Parity};
use crate::quadrature::gauss_legendre_on;

/// Parameters (L, ℓ₁, ℓ₂, K, B) of the H̃⁴ weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub half_angle: f64,
    pub l1: f64,
    pub l2: f64,
    pub k: f64,
    pub b: f64,
}

impl WeightParams {
    pub const DEFAULT_L1: f64 = 0.3;
    pub const DEFAULT_B: f64 = 1e4;

    /// Validated explicit parameters.
    pub fn new(half_angle: f64, l1: f64, l2: f64, k: f64, b: f64) -> Result<Self> {
        let wp = Self { half_angle, l1, l2, k, b };
        wp.validate()?;
        Ok(wp)
    }

    /// L − ℓ₂ = ℓ₁² and K = ℓ₁⁻⁴.
    pub fn linked(half_angle: f64, l1: f64, b: f64) -> Result<Self> {
        Self::new(half_angle, l1, half_angle - l1 * l1, l1.powi(-4), b)
    }

    pub fn default_for(half_angle: f64) -> Result<Self> {
        Self::linked(half_angle, Self::DEFAULT_L1, Self::DEFAULT_B)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { half_angle: l, l1, l2, k, b } = *self;
        let ok = 0.0 < l1 && l1 < l2 && l2 < l && l1 < 1.0 && l - l2 < 1.0 && k > 10.0 && b > 0.0;
        if !ok || !(l < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "weight parameters violate 0 < l1 < l2 < L < pi/2, l1 < 1, L - l2 < 1, K > 10, B > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

/// log φ(θ) for θ > 0, piecewise in log space so the pieces agree exactly at ℓ₁ and ℓ₂.
pub fn log_weight_phi(theta: f64, wp: &WeightParams) -> f64 {
    let base = -8.0 * wp.l1.ln();
    if theta <= wp.l1 {
        -8.0 * theta.ln()
    } else if theta <= wp.l2 {
        base - wp.k * (theta / wp.l1).ln()
    } else {
        base - wp.k * (wp.l2 / wp.l1).ln()
    }
}

/// log ψ(θ) for 0 ≤ θ < L.
pub fn log_weight_psi(theta: f64, wp: &WeightParams) -> f64 {
    if theta <= wp.l1 {
        0.0
    } else if theta <= wp.l2 {
        -wp.k * (theta / wp.l1).ln()
    } else {
        -wp.k * (wp.l2 / wp.l1).ln() + 6.5 * ((wp.half_angle - theta) / (wp.half_angle - wp.l2)).ln()
    }
}

pub fn weight_phi(theta: f64, wp: &WeightParams) -> Result<f64> {
    if !(theta > 0.0 && theta <= wp.half_angle) {
        return Err(Error::Domain(format!("phi needs 0 < theta <= L, got {theta}")));
    }
    Ok(log_weight_phi(theta, wp).exp())
}

pub fn weight_psi(theta: f64, wp: &WeightParams) -> Result<f64> {
    if !(theta >= 0.0 && theta <= wp.half_angle) {
        return Err(Error::Domain(format!("psi needs 0 <= theta <= L, got {theta}")));
    }
    if theta == wp.half_angle {
        return Ok(0.0);
    }
    Ok(log_weight_psi(theta, wp).exp())
}

fn require_even(f: &GridFunction) -> Result<()> {
    if f.parity() != Parity::Even {
        return Err(Error::Parity("weighted forms act on even functions".into()));
    }
    Ok(())
}

/// ℙ₂f = f(0) + ½f''(0)θ² on the grid of f.
pub fn taylor_part(f: &GridFunction) -> Result<GridFunction> {
    require_even(f)?;
    let jet = f.taylor_jet(2)?.derivatives;
    Ok(GridFunction::from_fn(f.grid(), Parity::Even, |t| jet[0] + 0.5 * jet[2] * t * t))
}

/// Rows of the linear functionals f ↦ f⁽ᵏ⁾(0) used by [`GridFunction::taylor_jet`].
pub fn jet_rows(grid: &Arc<AngularGrid>, orders: &[usize]) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let mut rows = DMatrix::zeros(orders.len(), n);
    let top = orders.iter().copied().max().unwrap_or(0);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let jet = GridFunction::new(grid.clone(), e, Parity::Even)?.taylor_jet(top)?.derivatives;
        if jet.iter().all(|&v| v == 0.0) {
            continue;
        }
        for (r, &k) in orders.iter().enumerate() {
            rows[(r, j)] = jet[k];
        }
    }
    Ok(rows)
}

/// The four summands of the H̃⁴ norm squared and the resulting norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub h4tilde: f64,
    pub h4: f64,
    /// f(0)², f''(0)², B∫(f − ℙ₂f)²φ, ∫(f⁗)²ψ.
    pub pieces: [f64; 4],
}

/// Quadrature points and weights for the three weight regions.
fn region_rules(wp: &WeightParams) -> [(Vec<f64>, Vec<f64>); 3] {
    let (x0, w0) = gauss_legendre_on(48, 0.0, wp.l1);
    let (mut x1, mut w1) = (Vec::new(), Vec::new());
    let mut a = wp.l1;
    for _ in 0..30 {
        let b = (a * (2.0 / wp.k).exp()).min(wp.l2);
        let (x, w) = gauss_legendre_on(8, a, b);
        x1.extend(x);
        w1.extend(w);
        a = b;
        if a >= wp.l2 {
            break;
        }
    }
    if a < wp.l2 {
        let (x, w) = gauss_legendre_on(24, a, wp.l2);
        x1.extend(x);
        w1.extend(w);
    }
    let (x2, w2) = gauss_legendre_on(32, wp.l2, wp.half_angle);
    [(x0, w0), (x1, w1), (x2, w2)]
}

/// Precomputed linear maps whose squared norms give the H̃⁴ and H⁴ forms on one grid.
#[derive(Debug, Clone)]
pub struct WeightedForms {
    pub grid: Arc<AngularGrid>,
    pub wp: WeightParams,
    /// f ↦ (f(0), f''(0)).
    pub jet: DMatrix<f64>,
    /// f ↦ √(Bwφ)(f − ℙ₂f) at the quadrature points of [0, ℓ₁], [ℓ₁, ℓ₂], [ℓ₂, L].
    pub low: [DMatrix<f64>; 3],
    /// f ↦ √(wψ) f⁗ at the same points.
    pub high: [DMatrix<f64>; 3],
    pub h4_low: DMatrix<f64>,
    pub h4_high: DMatrix<f64>,
}

impl WeightedForms {
    pub fn new(grid: &Arc<AngularGrid>, wp: WeightParams) -> Result<Self> {
        wp.validate()?;
        let l = grid.half_angle();
        if (wp.half_angle - l).abs() > 1e-12 * l {
            return Err(Error::Precondition(format!("weights built for L = {}, grid has L = {l}", wp.half_angle)));
        }
        let n = grid.len();
        let th = grid.nodes();
        let jet = jet_rows(grid, &[0, 2, 4])?;
        let (j0, j2, j4) = (jet.row(0).into_owned(), jet.row(1).into_owned(), jet.row(2).into_owned());

        let mut scaled = DMatrix::zeros(n, n);
        for i in 0..n {
            if i == 0 {
                scaled.row_mut(0).copy_from(&(&j4 / 24.0));
                continue;
            }
            let t4 = th[i].powi(4);
            let mut row = -(&j0 + &j2 * (0.5 * th[i] * th[i]));
            row[i] += 1.0;
            scaled.row_mut(i).copy_from(&(row / t4));
        }

        let rules = region_rules(&wp);
        let build = |r: usize, high: bool| -> DMatrix<f64> {
            let (x, w) = &rules[r];
            let interp = grid.local_derivative_rows(x, Parity::Even, 0);
            let mut m = if high {
                grid.local_derivative_rows(x, Parity::Even, 4)
            } else if r == 0 {
                &interp * &scaled
            } else {
                let mut m = interp.clone();
                for (q, &t) in x.iter().enumerate() {
                    let p2 = &j0 + &j2 * (0.5 * t * t);
                    let mut row = m.row_mut(q);
                    row -= p2;
                }
                m
            };
            for (q, (&t, &wq)) in x.iter().zip(w).enumerate() {
                let log_w = if high {
                    log_weight_psi(t, &wp)
                } else if r == 0 {
                    wp.b.ln()
                } else {
                    wp.b.ln() + log_weight_phi(t, &wp)
                };
                let s = (0.5 * (wq.ln() + log_w)).exp();
                m.row_mut(q).scale_mut(s);
            }
            m
        };
        let low = [build(0, false), build(1, false), build(2, false)];
        let high = [build(0, true), build(1, true), build(2, true)];

        let (xq, wq) = gauss_legendre_on(64, 0.0, l);
        let mut h4_low = grid.local_derivative_rows(&xq, Parity::Even, 0);
        let mut h4_high = grid.local_derivative_rows(&xq, Parity::Even, 4);
        for q in 0..xq.len() {
            h4_low.row_mut(q).scale_mut(wq[q].sqrt());
            h4_high.row_mut(q).scale_mut((wq[q] * (l - xq[q]).powf(6.5)).sqrt());
        }
        Ok(Self { grid: grid.clone(), wp, jet: jet.rows(0, 2).into_owned(), low, high, h4_low, h4_high })
    }

    fn vector(&self, f: &GridFunction) -> Result<DVector<f64>> {
        require_even(f)?;
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(DVector::from_column_slice(f.values()))
    }

    /// Per-region contributions (low, high) of ⟨f, g⟩ without the jet terms.
    fn region_terms(&self, f: &DVector<f64>, g: &DVector<f64>) -> ([f64; 3], [f64; 3]) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for r in 0..3 {
            lo[r] = (&self.low[r] * f).dot(&(&self.low[r] * g));
            hi[r] = (&self.high[r] * f).dot(&(&self.high[r] * g));
        }
        (lo, hi)
    }

    pub fn inner(&self, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        let (fv, gv) = (self.vector(f)?, self.vector(g)?);
        Ok(self.inner_vectors(&fv, &gv))
    }

    pub fn inner_vectors(&self, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        let jf = &self.jet * f;
        let jg = &self.jet * g;
        let (lo, hi) = self.region_terms(f, g);
        jf.dot(&jg) + lo.iter().sum::<f64>() + hi.iter().sum::<f64>()
    }

    pub fn h4_inner(&self, f: &GridFunction, g: &GridFunction) -> Result<f64> {
        let (fv, gv) = (self.vector(f)?, self.vector(g)?);
        Ok((&self.h4_low * &fv).dot(&(&self.h4_low * &gv)) + (&self.h4_high * &fv).dot(&(&self.h4_high * &gv)))
    }

    pub fn report(&self, f: &GridFunction) -> Result<NormReport> {
        let fv = self.vector(f)?;
        let jf = &self.jet * &fv;
        let (lo, hi) = self.region_terms(&fv, &fv);
        let pieces = [jf[0] * jf[0], jf[1] * jf[1], lo.iter().sum(), hi.iter().sum()];
        Ok(NormReport { h4tilde: pieces.iter().sum::<f64>().sqrt(), h4: self.h4_inner(f, f)?.sqrt(), pieces })
    }

    /// All maps stacked into one matrix A with ⟨f, g⟩_H̃⁴ = (Af)·(Ag).
    pub fn stacked(&self) -> DMatrix<f64> {
        let parts: Vec<&DMatrix<f64>> = std::iter::once(&self.jet).chain(&self.low).chain(&self.high).collect();
        let rows = parts.iter().map(|m| m.nrows()).sum();
        let mut a = DMatrix::zeros(rows, self.grid.len());
        let mut r = 0;
        for m in parts {
            a.rows_mut(r, m.nrows()).copy_from(m);
            r += m.nrows();
        }
        a
    }

    /// Symmetric W = AᵀA with ⟨f, g⟩_H̃⁴ = fᵀWg on nodal values.
    pub fn gram(&self) -> DMatrix<f64> {
        let a = self.stacked();
        a.transpose() * a
    }

    /// ∫₀^ℓ₁ (f − ℙ₂f)²θ⁻⁸ and ∫₀^ℓ₁ (f⁗)².
    pub fn hardy_sides(&self, f: &GridFunction) -> Result<(f64, f64)> {
        let fv = self.vector(f)?;
        let lhs = (&self.low[0] * &fv).norm_squared() / self.wp.b;
        let rhs = (&self.high[0] * &fv).norm_squared();
        Ok((lhs, rhs))
    }
}

pub fn h4tilde_inner(f: &GridFunction, g: &GridFunction, wp: &WeightParams) -> Result<f64> {
    WeightedForms::new(f.grid(), *wp)?.inner(f, g)
}

pub fn norm_report(f: &GridFunction, wp: &WeightParams) -> Result<NormReport> {
    WeightedForms::new(f.grid(), *wp)?.report(f)
}

/// Largest empirical constants of the weighted-space inequalities over a sample family.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub samples: usize,
    /// max ‖f‖_H̃⁴/‖f‖_H⁴.
    pub equivalence_upper: f64,
    /// max ‖f‖_H⁴/‖f‖_H̃⁴.
    pub equivalence_lower: f64,
    /// max ‖f‖∞/‖f‖_H⁴.
    pub embedding: f64,
    /// max ∫₀^ℓ₁(f − ℙ₂f)²θ⁻⁸ / ∫₀^ℓ₁(f⁗)².
    pub hardy: f64,
    /// Iterated Hardy bound (2/7 · 2/5 · 2/3 · 2)².
    pub hardy_bound: f64,
    /// max ∫f⁽ᵏ⁾²(L−θ)ᵖ / (∫f² + ∫f⁽ᵏ⁺¹⁾²(L−θ)ᵖ⁺²) on [ℓ₂, L] for (k, p) = (1, ½), (2, 5/2), (3, 9/2).
    pub interpolation: [f64; 3],
    /// max ‖fg‖_H⁴/(‖f‖_H⁴‖g‖_H⁴) over pairs.
    pub algebra: f64,
}

pub const HARDY_BOUND: f64 = (16.0 / 105.0) * (16.0 / 105.0);

pub fn verify_inequalities(samples: &[GridFunction], wp: &WeightParams) -> Result<InequalityReport> {
    let first = samples.first().ok_or_else(|| Error::Precondition("empty sample family".into()))?;
    let grid = first.grid().clone();
    let forms = WeightedForms::new(&grid, *wp)?;
    let l = grid.half_angle();
    let (xq, wq) = gauss_legendre_on(48, wp.l2, l);
    let rows: Vec<DMatrix<f64>> = (0..=4).map(|k| grid.derivative_rows(&xq, Parity::Even, k)).collect();
    let tail = |f: &GridFunction, k: usize, p: f64| -> f64 {
        let vals = &rows[k] * DVector::from_column_slice(f.values());
        xq.iter().zip(&wq).zip(vals.iter()).map(|((&x, &w), &v)| w * v * v * (l - x).powf(p)).sum()
    };
    let mut rep = InequalityReport {
        samples: samples.len(),
        equivalence_upper: 0.0,
        equivalence_lower: 0.0,
        embedding: 0.0,
        hardy: 0.0,
        hardy_bound: HARDY_BOUND,
        interpolation: [0.0; 3],
        algebra: 0.0,
    };
    let mut h4 = Vec::with_capacity(samples.len());
    for f in samples {
        let r = forms.report(f)?;
        h4.push(r.h4);
        if r.h4 > 0.0 && r.h4tilde > 0.0 {
            rep.equivalence_upper = rep.equivalence_upper.max(r.h4tilde / r.h4);
            rep.equivalence_lower = rep.equivalence_lower.max(r.h4 / r.h4tilde);
            rep.embedding = rep.embedding.max(f.sup_norm() / r.h4);
        }
        let (lhs, rhs) = forms.hardy_sides(f)?;
        if rhs > 0.0 {
            rep.hardy = rep.hardy.max(lhs / rhs);
        }
        let base = tail(f, 0, 0.0);
        for (i, (k, p)) in [(1usize, 0.5), (2, 2.5), (3, 4.5)].into_iter().enumerate() {
            let lhs = tail(f, k, p);
            let rhs = base + tail(f, k + 1, p + 2.0);
            if rhs > 0.0 {
                rep.interpolation[i] = rep.interpolation[i].max(lhs / rhs);
            }
        }
    }
    for i in 0..samples.len() {
        for j in i..samples.len() {
            if h4[i] > 0.0 && h4[j] > 0.0 {
                let prod = samples[i].mul(&samples[j])?;
                let n = forms.h4_inner(&prod, &prod)?.sqrt();
                rep.algebra = rep.algebra.max(n / (h4[i] * h4[j]));
            }
        }
    }
    Ok(rep)
}
