//! Generic singular fixed point
//! y(θ) = θ²G(y,θ) + θ^{−λ}∫₀^θ φ^{λ−1}(v + φ²F(y,φ)) dφ, componentwise in λ.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

type Map<'a> = Box<dyn Fn(&[f64], f64) -> Vec<f64> + Sync + 'a>;

pub struct SingularFixedPointProblem<'a> {
    /// Positive eigenvalues λⱼ, one per component.
    pub spectrum: Vec<f64>,
    pub v: Vec<f64>,
    /// F(y, θ).
    pub forcing: Map<'a>,
    /// G(y, θ).
    pub graph: Map<'a>,
}

impl<'a> SingularFixedPointProblem<'a> {
    pub fn new(
        spectrum: Vec<f64>,
        v: Vec<f64>,
        forcing: impl Fn(&[f64], f64) -> Vec<f64> + Sync + 'a,
        graph: impl Fn(&[f64], f64) -> Vec<f64> + Sync + 'a,
    ) -> Self {
        Self { spectrum, v, forcing: Box::new(forcing), graph: Box::new(graph) }
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Chebyshev nodes on [0, d].
    pub nodes: usize,
    /// Gauss points for the η-integral.
    pub quadrature: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub max_shrinks: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { nodes: 28, quadrature: 64, tol: 1e-12, max_iterations: 400, max_shrinks: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub radius: f64,
    pub nodes: Vec<f64>,
    /// components[k][i] = y_k(nodes[i]).
    pub components: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Last Picard increment (sup norm).
    pub increment: f64,
    /// Observed contraction ratio of the final iterations.
    pub contraction: f64,
    pub shrinks: usize,
    bary: Vec<f64>,
}

impl FixedPointSolution {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Barycentric interpolant of component `k` at θ ∈ [0, radius].
    pub fn evaluate(&self, k: usize, theta: f64) -> f64 {
        barycentric(&self.nodes, &self.bary, &self.components[k], theta)
    }

    pub fn sup_norm(&self) -> f64 {
        self.components.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn chebyshev_nodes(d: f64, p: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = (0..p)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == p - 1 {
                d
            } else {
                d * (0.5 - 0.5 * (PI * j as f64 / (p - 1) as f64).cos())
            }
        })
        .collect();
    let bary = (0..p)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == p - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    (nodes, bary)
}

fn barycentric_row(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    let mut row = vec![0.0; nodes.len()];
    if let Some(j) = nodes.iter().position(|&t| t == x) {
        row[j] = 1.0;
        return row;
    }
    let mut denom = 0.0;
    for (j, (&t, &w)) in nodes.iter().zip(bary).enumerate() {
        let q = w / (x - t);
        row[j] = q;
        denom += q;
    }
    row.iter_mut().for_each(|r| *r /= denom);
    row
}

fn barycentric(nodes: &[f64], bary: &[f64], values: &[f64], x: f64) -> f64 {
    barycentric_row(nodes, bary, x).iter().zip(values).map(|(a, b)| a * b).sum()
}

/// Matrix of h ↦ (θ ↦ ∫₀¹ η^{λ−1} h(θη) dη) on the nodes.
fn averaging_matrix(nodes: &[f64], bary: &[f64], lambda: f64, q: usize) -> Vec<Vec<f64>> {
    let (u, w) = gauss_legendre_on(q, 0.0, 1.0);
    // η-points and weights absorbing η^{λ−1}
    let (eta, weight): (Vec<f64>, Vec<f64>) = if lambda >= 1.0 {
        (u.clone(), u.iter().zip(&w).map(|(e, wi)| wi * e.powf(lambda - 1.0)).collect())
    } else {
        (u.iter().map(|x| x.powf(1.0 / lambda)).collect(), w.iter().map(|wi| wi / lambda).collect())
    };
    nodes
        .iter()
        .map(|&theta| {
            let mut row = vec![0.0; nodes.len()];
            for (e, wq) in eta.iter().zip(&weight) {
                let r = barycentric_row(nodes, bary, theta * e);
                for (acc, rj) in row.iter_mut().zip(&r) {
                    *acc += wq * rj;
                }
            }
            row
        })
        .collect()
}

/// Picard iteration on a Chebyshev grid of [0, d], halving d on non-contraction.
pub fn solve_singular_fixed_point(
    problem: &SingularFixedPointProblem<'_>,
    d_hint: f64,
    options: FixedPointOptions,
) -> Result<FixedPointSolution> {
    let dim = problem.dim();
    if problem.v.len() != dim {
        return Err(Error::Precondition("v and spectrum have different lengths".into()));
    }
    if problem.spectrum.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Precondition("all eigenvalues must be positive".into()));
    }
    if !(d_hint > 0.0) {
        return Err(Error::Domain(format!("radius hint {d_hint} must be positive")));
    }
    let mut d = d_hint;
    for shrinks in 0..=options.max_shrinks {
        if let Some(sol) = iterate(problem, d, options, shrinks) {
            return Ok(sol);
        }
        d *= 0.5;
    }
    Err(Error::NoConvergence { shrinks: options.max_shrinks, radius: d })
}

fn iterate(
    problem: &SingularFixedPointProblem<'_>,
    d: f64,
    options: FixedPointOptions,
    shrinks: usize,
) -> Option<FixedPointSolution> {
    let dim = problem.dim();
    let (nodes, bary) = chebyshev_nodes(d, options.nodes);
    let p = nodes.len();
    let averaging: Vec<Vec<Vec<f64>>> =
        problem.spectrum.iter().map(|&l| averaging_matrix(&nodes, &bary, l, options.quadrature)).collect();
    let mut y: Vec<Vec<f64>> = (0..dim).map(|k| vec![problem.v[k] / problem.spectrum[k]; p]).collect();
    let mut prev_increment = f64::INFINITY;
    let mut contraction: f64 = 0.0;
    for it in 1..=options.max_iterations {
        let mut forcing = vec![vec![0.0; p]; dim];
        let mut graph = vec![vec![0.0; p]; dim];
        for i in 0..p {
            let yi: Vec<f64> = (0..dim).map(|k| y[k][i]).collect();
            let f = (problem.forcing)(&yi, nodes[i]);
            let g = (problem.graph)(&yi, nodes[i]);
            for k in 0..dim {
                forcing[k][i] = nodes[i] * nodes[i] * f[k];
                graph[k][i] = nodes[i] * nodes[i] * g[k];
            }
        }
        let mut next = vec![vec![0.0; p]; dim];
        for k in 0..dim {
            let base = problem.v[k] / problem.spectrum[k];
            for i in 0..p {
                let avg: f64 = averaging[k][i].iter().zip(&forcing[k]).map(|(a, b)| a * b).sum();
                next[k][i] = graph[k][i] + base + avg;
            }
        }
        let increment =
            next.iter().zip(&y).flat_map(|(a, b)| a.iter().zip(b).map(|(x, z)| (x - z).abs())).fold(0.0f64, f64::max);
        if !increment.is_finite() {
            return None;
        }
        y = next;
        let scale = y.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if it > 1 {
            contraction = increment / prev_increment;
        }
        if increment <= options.tol * scale {
            return Some(FixedPointSolution {
                radius: d,
                nodes,
                components: y,
                iterations: it,
                increment,
                contraction,
                shrinks,
                bary,
            });
        }
        if it > 4 && contraction > 0.95 {
            return None;
        }
        prev_increment = increment;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution_without_forcing() {
        let p = SingularFixedPointProblem::new(
            vec![4.0, 2.0, 5.0],
            vec![1.0, -2.0, 3.0],
            |_, _| vec![0.0; 3],
            |_, _| vec![0.0; 3],
        );
        let s = solve_singular_fixed_point(&p, 0.2, FixedPointOptions::default()).unwrap();
        for (k, expect) in [0.25, -1.0, 0.6].iter().enumerate() {
            for &t in &[0.0, 0.05, 0.2] {
                assert!((s.evaluate(k, t) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scalar_quadratic() {
        let p = SingularFixedPointProblem::new(vec![2.0], vec![0.0], |_, _| vec![1.0], |_, _| vec![0.0]);
        let s = solve_singular_fixed_point(&p, 0.5, FixedPointOptions::default()).unwrap();
        for &t in &[0.0, 0.1, 0.37, 0.5] {
            assert!((s.evaluate(0, t) - t * t / 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_eigenvalue() {
        // y = θ^{-1/2}∫φ^{-1/2}(1 + φ²) = 2 + (2/5)θ²
        let p = SingularFixedPointProblem::new(vec![0.5], vec![1.0], |_, _| vec![1.0], |_, _| vec![0.0]);
        let s = solve_singular_fixed_point(&p, 0.5, FixedPointOptions::default()).unwrap();
        for &t in &[0.0, 0.2, 0.5] {
            assert!((s.evaluate(0, t) - (2.0 + 0.4 * t * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn nonlinear_problem_shrinks_radius() {
        // strong nonlinearity: contraction only on a small interval
        let p = SingularFixedPointProblem::new(vec![1.0], vec![1.0], |y, _| vec![50.0 * y[0] * y[0]], |_, _| vec![0.0]);
        let s = solve_singular_fixed_point(&p, 1.0, FixedPointOptions::default()).unwrap();
        assert!(s.radius < 1.0);
        assert!(s.shrinks > 0);
    }

    #[test]
    fn rejects_nonpositive_spectrum() {
        let p = SingularFixedPointProblem::new(vec![0.0], vec![1.0], |_, _| vec![0.0], |_, _| vec![0.0]);
        assert!(matches!(
            solve_singular_fixed_point(&p, 0.1, FixedPointOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
