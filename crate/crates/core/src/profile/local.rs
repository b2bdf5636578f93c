//! Local profile near θ = 0 from the Taylor-seeded singular fixed point.
//!
//! M = 4 − Aθ² + θ⁴m and G = θ − ((A+2)/3)θ³ + θ⁵g. With h = θg' the remainders
//! satisfy θy' + Ay = F(y, θ) for y = (m, g, h), where A has eigenvalues 4, 2, 5.

use std::sync::Arc;

use super::fixed_point::{
    solve_singular_fixed_point, FixedPointOptions, FixedPointSolution, SingularFixedPointProblem,
};
use crate::error::{Error, Result};
use crate::grid::{AngularGrid, GridFunction, Parity};

/// Eigenvalues of the linear part, in the order of the eigenvector columns below.
const SPECTRUM: [f64; 3] = [4.0, 2.0, 5.0];

#[derive(Debug, Clone, Copy)]
pub struct LocalOptions {
    pub fixed_point: FixedPointOptions,
    /// Upper bound on the handoff radius a.
    pub max_radius: f64,
    /// Nodes of the grid carrying m and g on [0, a].
    pub grid_nodes: usize,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self { fixed_point: FixedPointOptions::default(), max_radius: 0.2, grid_nodes: 33 }
    }
}

#[derive(Debug, Clone)]
pub struct LocalSeed {
    pub a_param: f64,
    pub radius: f64,
    /// Fourth-order remainder of M on [0, a].
    pub m: GridFunction,
    /// Fifth-order remainder of G on [0, a].
    pub g: GridFunction,
    /// θg'.
    pub h: GridFunction,
    /// Constant parts of the remainder forcing used by the solver.
    pub c1: f64,
    pub c2: f64,
    pub solution: FixedPointSolution,
}

/// Profile quantities at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState {
    pub m: f64,
    pub mp: f64,
    pub g: f64,
    pub gp: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Constants of the remainder system as printed alongside it: (C₁, C₂).
pub fn printed_constants(a: f64) -> (f64, f64) {
    (-(a + 2.0) / 3.0 * (a + 8.0) + 8.0 / 3.0 - 2.0 * a, 2.0 * a)
}

/// Constants obtained by substituting the ansatz into the profile equations.
pub fn forcing_constants(a: f64) -> (f64, f64) {
    (-(a * a + 16.0 * a + 8.0) / 6.0, 10.0 * a / 3.0 + 8.0 / 3.0)
}

/// (tan θ − θ − θ³/3)/θ⁵.
pub(crate) fn tan_remainder(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let x = t * t;
        2.0 / 15.0
            + x * (17.0 / 315.0
                + x * (62.0 / 2835.0
                    + x * (1382.0 / 155925.0 + x * (21844.0 / 6081075.0 + x * 929569.0 / 638512875.0))))
    } else {
        (t.tan() - t - t * t * t / 3.0) / t.powi(5)
    }
}

/// (sin²θ − θ²)/θ⁴.
fn sin2_remainder(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let x = t * t;
        -1.0 / 3.0
            + x * (2.0 / 45.0 + x * (-1.0 / 315.0 + x * (2.0 / 14175.0 + x * (-2.0 / 467775.0 + x * 4.0 / 42567525.0))))
    } else {
        (t.sin().powi(2) - t * t) / t.powi(4)
    }
}

fn sinc2(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (t.sin() / t).powi(2)
    }
}

/// Part of (rest₁ − C₁)/θ² without the q-term, and the q coefficient.
fn rest1_parts(a: f64, m: f64, g: f64, h: f64, t: f64) -> (f64, f64) {
    let x = t * t;
    let x2 = x * x;
    let tr = tan_remainder(t);
    let r0 = a * a / 3.0 - a / 9.0 - 8.0 / 9.0
        + x * (a * a / 9.0 + 2.0 * a / 9.0)
        + tr * (4.0 + x * (-7.0 * a / 3.0 - 8.0 / 3.0) + x2 * (a * a / 3.0 + 2.0 * a / 3.0))
        - h * a / 2.0
        + g * (4.0 - a / 2.0 + x * (4.0 / 3.0 - a) - a * x2 / 3.0)
        + g * tr * (4.0 * x2 - a * x2 * x)
        + m * (8.0 / 3.0 + 5.0 * a / 6.0 + x * (-a / 3.0 - 1.0 / 3.0) + x2 * (-a / 9.0 - 2.0 / 9.0))
        + m * tr * (x2 + x2 * x * (-a / 3.0 - 2.0 / 3.0))
        + m * h * x / 2.0
        + m * g * (x2 * x / 3.0 + x2 - 1.5 * x)
        + m * g * tr * x2 * x2;
    let cq = (a + 2.0) / 3.0 - g * x;
    (r0, cq)
}

/// (rest₂ − C₂)/θ².
fn rest2_part(a: f64, m: f64, g: f64, q: f64, t: f64) -> f64 {
    2.0 * a * sin2_remainder(t) - 4.0 * g - (4.0 * m + q) * sinc2(t)
}

/// θm' eliminated algebraically from the first equation.
fn q_of(a: f64, c1: f64, m: f64, g: f64, h: f64, t: f64) -> f64 {
    let (r0, cq) = rest1_parts(a, m, g, h, t);
    let x = t * t;
    (c1 + x * r0 - 4.0 * m + 10.0 * g + 2.0 * h) / (1.0 - x * cq)
}

/// y = Q z with eigenvector columns (1,0,0), (3,1,−2), (0,1,−5).
fn to_remainders(z: &[f64]) -> (f64, f64, f64) {
    (z[0] + 3.0 * z[1], z[1] + z[2], -2.0 * z[1] - 5.0 * z[2])
}

/// Q⁻¹(a, 0, c).
fn to_diagonal(a: f64, c: f64) -> [f64; 3] {
    [a - c, c / 3.0, -c / 3.0]
}

pub fn local_profile(a_param: f64) -> Result<LocalSeed> {
    local_profile_with(a_param, LocalOptions::default())
}

pub fn local_profile_with(a_param: f64, options: LocalOptions) -> Result<LocalSeed> {
    if !(a_param >= 0.0) || !a_param.is_finite() {
        return Err(Error::Domain(format!("A = {a_param} must be nonnegative")));
    }
    let (c1, c2) = forcing_constants(a_param);
    let a = a_param;
    let problem = SingularFixedPointProblem::new(
        SPECTRUM.to_vec(),
        to_diagonal(c1, c1 + c2).to_vec(),
        move |z, t| {
            let (m, g, h) = to_remainders(z);
            let (r0, cq) = rest1_parts(a, m, g, h, t);
            let q = q_of(a, c1, m, g, h, t);
            let rho1 = r0 + q * cq;
            let rho2 = rest2_part(a, m, g, q, t);
            to_diagonal(rho1, rho1 + rho2).to_vec()
        },
        |_, _| vec![0.0; 3],
    );
    let mut hint = options.max_radius;
    let mut last_err = None;
    for _ in 0..=options.fixed_point.max_shrinks {
        let solution = match solve_singular_fixed_point(&problem, hint, options.fixed_point) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                break;
            }
        };
        let radius = solution.radius;
        let seed = build_seed(a_param, c1, c2, solution, options.grid_nodes)?;
        if seed.state(radius).g >= 0.5 * radius {
            return Ok(seed);
        }
        hint = 0.5 * radius;
    }
    Err(last_err.unwrap_or(Error::NoConvergence { shrinks: options.fixed_point.max_shrinks, radius: hint }))
}

fn build_seed(a_param: f64, c1: f64, c2: f64, solution: FixedPointSolution, nodes: usize) -> Result<LocalSeed> {
    let grid: Arc<AngularGrid> = AngularGrid::clustered(solution.radius, nodes)?;
    let sample = |k: usize| -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&t| {
                let z: Vec<f64> = (0..3).map(|j| solution.evaluate(j, t)).collect();
                let y = to_remainders(&z);
                [y.0, y.1, y.2][k]
            })
            .collect()
    };
    let m = GridFunction::new(grid.clone(), sample(0), Parity::Even)?;
    let g = GridFunction::new(grid.clone(), sample(1), Parity::Even)?;
    let h = GridFunction::new(grid.clone(), sample(2), Parity::Even)?;
    Ok(LocalSeed { a_param, radius: solution.radius, m, g, h, c1, c2, solution })
}

impl LocalSeed {
    /// (m, g, h) at θ ∈ [0, a].
    pub fn remainders(&self, theta: f64) -> (f64, f64, f64) {
        let z: Vec<f64> = (0..3).map(|j| self.solution.evaluate(j, theta)).collect();
        to_remainders(&z)
    }

    /// Reconstructed M, M', G, G', I₁, I₂ at θ ∈ [0, a].
    pub fn state(&self, theta: f64) -> LocalState {
        let a = self.a_param;
        let b = (a + 2.0) / 3.0;
        let (m, g, h) = self.remainders(theta);
        let q = q_of(a, self.c1, m, g, h, theta);
        let t = theta;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t2 * t2;
        let mv = 4.0 - a * t2 + t4 * m;
        let mp = -2.0 * a * t + 4.0 * t3 * m + t3 * q;
        let gv = t - b * t3 + t4 * t * g;
        let gp = 1.0 - 3.0 * b * t2 + 5.0 * t4 * g + t4 * h;
        let (s2, c2) = (2.0 * t).sin_cos();
        LocalState { m: mv, mp, g: gv, gp, i1: 2.0 * gv * s2 + gp * c2 - 1.0, i2: -2.0 * gv * c2 + gp * s2 }
    }

    /// Max residual of the remainder system on (0, a] with θm', θg', θ²g'' from grid differentiation.
    pub fn residual(&self) -> Result<f64> {
        let a = self.a_param;
        let mp = self.m.differentiate(1)?;
        let gp = self.g.differentiate(1)?;
        let gpp = self.g.differentiate(2)?;
        let mut worst: f64 = 0.0;
        for (i, &t) in self.m.grid().nodes().iter().enumerate().skip(1) {
            let m = self.m.values()[i];
            let g = self.g.values()[i];
            let q = t * mp.values()[i];
            let h = t * gp.values()[i];
            let r = t * t * gpp.values()[i];
            let (r0, cq) = rest1_parts(a, m, g, h, t);
            let rest1 = self.c1 + t * t * (r0 + cq * q);
            let rest2 = self.c2 + t * t * rest2_part(a, m, g, q, t);
            let e1 = q + 4.0 * m - 10.0 * g - 2.0 * h - rest1;
            let e2 = r + 10.0 * h + 20.0 * g - q - 4.0 * m - rest2;
            worst = worst.max(e1.abs()).max(e2.abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_seed() {
        let s = local_profile(0.0).unwrap();
        assert!(s.m.sup_norm() <= 1e-10, "m = {}", s.m.sup_norm());
        assert!((s.g.values()[0] - 2.0 / 15.0).abs() <= 1e-6);
        for &t in &[0.0, 0.05, s.radius] {
            let st = s.state(t);
            assert!((st.g - 0.5 * (2.0 * t).sin()).abs() < 1e-13);
            assert!((st.m - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn printed_constants_at_one() {
        let (c1, c2) = printed_constants(1.0);
        assert!((c1 + 25.0 / 3.0).abs() < 1e-14 && (c2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn seed_jets_and_residual() {
        for a in [0.01, 1.0, 4.0, 8.0] {
            let s = local_profile(a).unwrap();
            assert!(s.radius <= 0.2 + 1e-15);
            assert!(s.state(s.radius).g >= 0.5 * s.radius);
            assert!(s.residual().unwrap() <= 1e-10, "A={a} res={}", s.residual().unwrap());
            // G'''(0) = 6·(−(A+2)/3) = −2A − 4
            assert!((6.0 * -(a + 2.0) / 3.0 + 2.0 * a + 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn series_helpers_match_direct_formulas() {
        for &t in &[0.099f64, 0.0999] {
            let direct = (t.tan() - t - t * t * t / 3.0) / t.powi(5);
            assert!((tan_remainder(t) - direct).abs() < 1e-9);
            let direct = (t.sin().powi(2) - t * t) / t.powi(4);
            assert!((sin2_remainder(t) - direct).abs() < 1e-9);
        }
    }
}
