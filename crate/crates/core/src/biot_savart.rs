//! Angular Biot–Savart law G'' + 4G = M' cos²θ.
//!
//! With zero data at θ = 0 the solution is G₀ = ½ sin2θ·I₁ − ½ cos2θ·I₂, where
//! I₁ = ∫₀^θ M' cos²φ cos2φ and I₂ = ∫₀^θ M' cos²φ sin2φ. Integrating by parts moves
//! the derivative onto the kernels K₁ = 2cos²φ cos2φ − sin²2φ and
//! K₂ = sin2φ cos2φ + 2cos²φ sin2φ, so M' is never formed.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Parity};
use crate::weighted::WeightParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamVariant {
    /// G(0) = 0, G'(0) = 1.
    Ivp,
    /// G(0) = G(L) = 0.
    Bvp,
    /// G(0) = G'(0) = 0, plus the boundary correction enforcing G(L) = 0.
    Localized,
}

/// How the running integrals are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceForm {
    /// Differentiate M on the grid, then integrate M'·kernel.
    Derivative,
    /// Integrate M against K₁, K₂.
    #[default]
    IntegratedByParts,
}

/// Shape of the cutoff η on [½, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BumpProfile {
    /// 1 − (3s² − 2s³) with s = 2x − 1; C¹, max |η'| = 3.
    #[default]
    Cubic,
    /// Exponential smooth step; C∞, max |η'| ≈ 2.98.
    Smooth,
}

const SMOOTH_STEEPNESS: f64 = 0.6;

/// η(x): 1 on [0, ½], 0 on [1, ∞), nonincreasing in between.
pub fn bump_eta(x: f64, profile: BumpProfile) -> f64 {
    if x <= 0.5 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * x - 1.0;
    match profile {
        BumpProfile::Cubic => 1.0 - s * s * (3.0 - 2.0 * s),
        BumpProfile::Smooth => {
            let a = smooth_factor(1.0 - s);
            let b = smooth_factor(s);
            a / (a + b)
        }
    }
}

/// dη/dx.
pub fn bump_eta_derivative(x: f64, profile: BumpProfile) -> f64 {
    if x <= 0.5 || x >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * x - 1.0;
    let ds = match profile {
        BumpProfile::Cubic => -6.0 * s * (1.0 - s),
        BumpProfile::Smooth => {
            let a = smooth_factor(1.0 - s);
            let b = smooth_factor(s);
            let da = -a * SMOOTH_STEEPNESS / ((1.0 - s) * (1.0 - s));
            let db = b * SMOOTH_STEEPNESS / (s * s);
            (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
        }
    };
    2.0 * ds
}

fn smooth_factor(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-SMOOTH_STEEPNESS / t).exp()
    }
}

#[derive(Debug, Clone)]
pub struct StreamSolution {
    pub g: GridFunction,
    pub gp: GridFunction,
    pub i1: GridFunction,
    pub i2: GridFunction,
    pub variant: StreamVariant,
}

impl StreamSolution {
    /// max |G'' + 4G − M' cos²θ| with G'' taken as the grid derivative of G'.
    pub fn residual(&self, m: &GridFunction) -> Result<f64> {
        let gpp = self.gp.differentiate(1)?;
        let mp = m.differentiate(1)?;
        let th = m.grid().nodes();
        Ok((0..th.len())
            .map(|i| {
                let c = th[i].cos();
                (gpp.values()[i] + 4.0 * self.g.values()[i] - mp.values()[i] * c * c).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Zero-data particular solution and running integrals.
struct Particular {
    g0: Vec<f64>,
    g0p: Vec<f64>,
    i1: GridFunction,
    i2: GridFunction,
}

fn particular(m: &GridFunction, form: SourceForm) -> Result<Particular> {
    if m.parity() != Parity::Even {
        return Err(Error::Parity("the density coefficient must be even".into()));
    }
    let th = m.grid().nodes();
    let (i1, i2) = match form {
        SourceForm::Derivative => {
            let mp = m.differentiate(1)?;
            let a = mp.map(Parity::Odd, |t, v| v * t.cos().powi(2) * (2.0 * t).cos());
            let b = mp.map(Parity::Even, |t, v| v * t.cos().powi(2) * (2.0 * t).sin());
            (a.cumulative_integral(), b.cumulative_integral())
        }
        SourceForm::IntegratedByParts => {
            let j1 = m.map(Parity::Even, |t, v| v * kernel_k1(t)).cumulative_integral();
            let j2 = m.map(Parity::Odd, |t, v| v * kernel_k2(t)).cumulative_integral();
            let m0 = m.values()[0];
            let i1 = m.map(Parity::Even, |t, v| v * t.cos().powi(2) * (2.0 * t).cos() - m0);
            let i1 = i1.add(&j2)?;
            let i2 = m.map(Parity::Odd, |t, v| v * t.cos().powi(2) * (2.0 * t).sin());
            let i2 = i2.sub(&j1)?;
            (i1, i2)
        }
    };
    let mut g0 = Vec::with_capacity(th.len());
    let mut g0p = Vec::with_capacity(th.len());
    for (k, &t) in th.iter().enumerate() {
        let (s2, c2) = (2.0 * t).sin_cos();
        let a = i1.values()[k];
        let b = i2.values()[k];
        g0.push(0.5 * s2 * a - 0.5 * c2 * b);
        g0p.push(c2 * a + s2 * b);
    }
    Ok(Particular { g0, g0p, i1, i2 })
}

/// K₁(φ) = 2cos²φ cos2φ − sin²2φ.
pub fn kernel_k1(phi: f64) -> f64 {
    let (s2, c2) = (2.0 * phi).sin_cos();
    2.0 * phi.cos().powi(2) * c2 - s2 * s2
}

/// K₂(φ) = sin2φ cos2φ + 2cos²φ sin2φ.
pub fn kernel_k2(phi: f64) -> f64 {
    let (s2, c2) = (2.0 * phi).sin_cos();
    s2 * c2 + 2.0 * phi.cos().powi(2) * s2
}

fn assemble(
    m: &GridFunction,
    g: Vec<f64>,
    gp: Vec<f64>,
    p: Particular,
    variant: StreamVariant,
) -> Result<StreamSolution> {
    Ok(StreamSolution {
        g: m.with_values(g, Parity::Odd)?,
        gp: m.with_values(gp, Parity::Even)?,
        i1: p.i1,
        i2: p.i2,
        variant,
    })
}

/// Profile normalization G(0) = 0, G'(0) = 1, from the M' quadrature formula.
pub fn solve_ivp(m: &GridFunction) -> Result<StreamSolution> {
    solve_ivp_with(m, SourceForm::Derivative)
}

pub fn solve_ivp_with(m: &GridFunction, form: SourceForm) -> Result<StreamSolution> {
    let p = particular(m, form)?;
    let th = m.grid().nodes();
    let g = th.iter().zip(&p.g0).map(|(t, v)| v + 0.5 * (2.0 * t).sin()).collect();
    let gp = th.iter().zip(&p.g0p).map(|(t, v)| v + (2.0 * t).cos()).collect();
    assemble(m, g, gp, p, StreamVariant::Ivp)
}

/// G(0) = G(L) = 0, integrated-by-parts kernels.
pub fn solve_bvp(m: &GridFunction) -> Result<StreamSolution> {
    solve_bvp_with(m, SourceForm::IntegratedByParts)
}

pub fn solve_bvp_with(m: &GridFunction, form: SourceForm) -> Result<StreamSolution> {
    let l = m.grid().half_angle();
    let s2l = (2.0 * l).sin();
    if s2l < 1e-12 {
        return Err(Error::DegenerateDomain(l));
    }
    let p = particular(m, form)?;
    let th = m.grid().nodes();
    let c = -p.g0[th.len() - 1] / s2l;
    let mut g: Vec<f64> = th.iter().zip(&p.g0).map(|(t, v)| v + c * (2.0 * t).sin()).collect();
    let gp = th.iter().zip(&p.g0p).map(|(t, v)| v + 2.0 * c * (2.0 * t).cos()).collect();
    let last = g.len() - 1;
    g[last] = 0.0;
    assemble(m, g, gp, p, StreamVariant::Bvp)
}

/// (G̃_loc, G̃ = G̃_loc − G̃_nl) for a jet-free density M̃.
pub fn solve_localized(
    m_tilde: &GridFunction,
    wp: &WeightParams,
    bump: BumpProfile,
) -> Result<(StreamSolution, StreamSolution)> {
    let grid = m_tilde.grid();
    let l = grid.half_angle();
    let c2l = (2.0 * l).cos();
    if c2l.abs() < 1e-10 {
        return Err(Error::DegenerateDomain(l));
    }
    if (wp.half_angle - l).abs() > 1e-12 * l {
        return Err(Error::Precondition(format!("weight parameters are for L = {}, grid has L = {l}", wp.half_angle)));
    }
    let scale = m_tilde.sup_norm().max(1.0);
    let jet = m_tilde.taylor_jet(2)?.derivatives;
    if jet[0].abs() > 1e-8 * scale || jet[2].abs() > 1e-6 * scale {
        return Err(Error::Precondition(format!("localized Biot-Savart needs a jet-free density, got jet {jet:?}")));
    }
    let p = particular(m_tilde, SourceForm::IntegratedByParts)?;
    let th = grid.nodes();
    let n = th.len();
    let width = l - wp.l2;
    let amp = p.g0[n - 1] / c2l;
    let mut g = Vec::with_capacity(n);
    let mut gp = Vec::with_capacity(n);
    for (k, &t) in th.iter().enumerate() {
        let x = (l - t) / width;
        let (s2, c2) = (2.0 * t).sin_cos();
        let eta = bump_eta(x, bump);
        let deta = bump_eta_derivative(x, bump);
        g.push(p.g0[k] - amp * c2 * eta);
        gp.push(p.g0p[k] - amp * (-2.0 * s2 * eta - c2 * deta / width));
    }
    g[n - 1] = 0.0;
    let loc = StreamSolution {
        g: m_tilde.with_values(p.g0.clone(), Parity::Odd)?,
        gp: m_tilde.with_values(p.g0p.clone(), Parity::Even)?,
        i1: p.i1.clone(),
        i2: p.i2.clone(),
        variant: StreamVariant::Localized,
    };
    let full = assemble(m_tilde, g, gp, p, StreamVariant::Localized)?;
    Ok((loc, full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AngularGrid;
    use std::sync::Arc;

    fn grid(l: f64, n: usize) -> Arc<AngularGrid> {
        AngularGrid::clustered(l, n).unwrap()
    }

    #[test]
    fn eta_values() {
        for p in [BumpProfile::Cubic, BumpProfile::Smooth] {
            assert_eq!(bump_eta(0.25, p), 1.0);
            assert_eq!(bump_eta(2.0, p), 0.0);
            let mut prev = 1.0;
            let mut max_slope: f64 = 0.0;
            for i in 0..=10_000 {
                let x = 0.5 + 0.5 * i as f64 / 10_000.0;
                let v = bump_eta(x, p);
                assert!(v <= prev + 1e-15);
                prev = v;
                max_slope = max_slope.max(bump_eta_derivative(x, p).abs());
            }
            match p {
                BumpProfile::Cubic => assert!(max_slope <= 3.0 + 1e-9),
                BumpProfile::Smooth => assert!(max_slope < 3.0 && max_slope > 2.9),
            }
        }
    }

    #[test]
    fn eta_derivative_matches_finite_difference() {
        for p in [BumpProfile::Cubic, BumpProfile::Smooth] {
            for &x in &[0.55, 0.7, 0.75, 0.93] {
                let h = 1e-6;
                let fd = (bump_eta(x + h, p) - bump_eta(x - h, p)) / (2.0 * h);
                assert!((fd - bump_eta_derivative(x, p)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn ivp_of_constant_is_trivial_stream() {
        let g = grid(1.2, 64);
        let m = GridFunction::from_fn(&g, Parity::Even, |_| 4.0);
        for form in [SourceForm::Derivative, SourceForm::IntegratedByParts] {
            let s = solve_ivp_with(&m, form).unwrap();
            for (t, v) in g.nodes().iter().zip(s.g.values()) {
                assert!((v - 0.5 * (2.0 * t).sin()).abs() < 1e-10);
            }
            assert!((s.gp.values()[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bvp_of_constant_vanishes() {
        let g = grid(1.1, 64);
        let m = GridFunction::from_fn(&g, Parity::Even, |_| 2.5);
        let s = solve_bvp(&m).unwrap();
        assert!(s.g.sup_norm() <= 1e-12);
    }

    #[test]
    fn kernel_bound() {
        let g = grid(1.5, 200);
        for &t in g.nodes() {
            let (k1, k2) = (kernel_k1(t), kernel_k2(t));
            let lhs = k1 * k1 + k2 * k2;
            let rhs = 4.0 * t.cos().powi(4) + (2.0 * t).sin().powi(2);
            assert!((lhs - rhs).abs() < 1e-13 && lhs <= 4.0 + 1e-13);
        }
    }

    #[test]
    fn localized_on_quartic() {
        let g = grid(1.1, 96);
        let wp = WeightParams::default_for(1.1).unwrap();
        let m = GridFunction::from_fn(&g, Parity::Even, |t| t.powi(4));
        let (loc, full) = solve_localized(&m, &wp, BumpProfile::Smooth).unwrap();
        assert!(loc.g.values()[0].abs() < 1e-10 && loc.gp.values()[0].abs() < 1e-10);
        assert!(full.g.values()[95].abs() < 1e-10);
        assert!(full.gp.values()[0].abs() < 1e-10);
        let zero = GridFunction::zeros(&g, Parity::Even);
        let (a, b) = solve_localized(&zero, &wp, BumpProfile::Cubic).unwrap();
        assert_eq!(a.g.sup_norm(), 0.0);
        assert_eq!(b.g.sup_norm(), 0.0);
        let bad = GridFunction::from_fn(&g, Parity::Even, |t| 1.0 + t * t);
        assert!(matches!(solve_localized(&bad, &wp, BumpProfile::Cubic), Err(Error::Precondition(_))));
    }

    #[test]
    fn residuals_are_small() {
        let g = grid(1.1, 128);
        let m = GridFunction::from_fn(&g, Parity::Even, |t| 4.0 - t * t + 0.3 * (3.0 * t).cos());
        for s in [solve_ivp(&m).unwrap(), solve_bvp(&m).unwrap()] {
            assert!(s.residual(&m).unwrap() < 1e-9);
        }
    }

    #[test]
    fn degenerate_domain() {
        let g = AngularGrid::clustered(std::f64::consts::FRAC_PI_4, 32).unwrap();
        let wp = WeightParams::default_for(std::f64::consts::FRAC_PI_4).unwrap();
        let m = GridFunction::from_fn(&g, Parity::Even, |t| t.powi(4));
        assert!(matches!(solve_localized(&m, &wp, BumpProfile::Cubic), Err(Error::DegenerateDomain(_))));
    }
}
