//! Structural self-tests of a converged profile.

use super::continuation::{ProfilePair, ProfileTrace};
use crate::error::{Error, Result};
use crate::grid::{AngularGrid, GridFunction, Parity};

/// Distance from L excluded by [`monotonicity_identity_residual`].
pub const IDENTITY_MARGIN: f64 = 0.1;

/// max |G'' + (2G tanθ)' − M'cos²θ − sec²θ·I₂| on a clustered grid of
/// [0, L − margin] carrying the profile, G'' by grid differentiation of G'.
pub fn monotonicity_identity_residual(p: &ProfilePair) -> Result<f64> {
    monotonicity_identity_residual_with(p, p.grid.len(), IDENTITY_MARGIN)
}

pub fn monotonicity_identity_residual_with(p: &ProfilePair, nodes: usize, margin: f64) -> Result<f64> {
    let cut = p.half_angle - margin;
    if !(cut > 0.0) {
        return Err(Error::Domain(format!("margin {margin} leaves no interior")));
    }
    identity_residual_on_trace(&p.trace, cut, nodes)
}

/// The same residual for any continuation trace on [0, cut].
pub fn identity_residual_on_trace(trace: &ProfileTrace, cut: f64, nodes: usize) -> Result<f64> {
    if !(cut > 0.0 && cut <= trace.theta_stop()) {
        return Err(Error::Domain(format!("cut {cut} outside (0, {}]", trace.theta_stop())));
    }
    let grid = AngularGrid::clustered(cut, nodes)?;
    let states: Vec<_> = grid.nodes().iter().map(|&t| trace.state_at(t)).collect();
    let gp = GridFunction::new(grid.clone(), states.iter().map(|s| s.gp).collect(), Parity::Even)?;
    let gpp = gp.differentiate(1)?;
    Ok(grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = t.cos();
            let s = &states[i];
            let transport = 2.0 * s.gp * t.tan() + 2.0 * s.g / (c * c);
            let lhs = gpp.values()[i] + transport;
            let rhs = s.mp * c * c + s.i2 / (c * c);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max))
}

/// Least-squares slope of log M against log(L − θ) over the last decade of nodes before L.
pub fn fit_boundary_exponent(p: &ProfilePair) -> Result<f64> {
    if !(p.gpl < 0.0) {
        return Err(Error::Precondition(format!("G'(L) = {} must be negative", p.gpl)));
    }
    fit_power_law(&p.m)
}

/// Slope of log f against log(L − θ) over nodes with L − θ within a factor 10 of the closest interior node.
pub fn fit_power_law(f: &GridFunction) -> Result<f64> {
    let grid = f.grid();
    let l = grid.half_angle();
    let th = grid.nodes();
    let n = th.len();
    let nearest = l - th[n - 2];
    let pts: Vec<(f64, f64)> = (1..n - 1)
        .rev()
        .map(|i| (l - th[i], f.values()[i]))
        .take_while(|(d, _)| *d <= 10.0 * nearest * (1.0 + 1e-12))
        .filter(|(_, v)| *v > 0.0)
        .map(|(d, v)| (d.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Resolution {
            nodes: n,
            what: format!("the boundary exponent ({} usable nodes in the last decade)", pts.len()),
        });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_power_law() {
        let grid = AngularGrid::clustered(1.1, 256).unwrap();
        let f = GridFunction::from_fn(&grid, Parity::Even, |t| (1.1 - t).abs().powf(0.7));
        assert!((fit_power_law(&f).unwrap() - 0.7).abs() < 0.01);
    }

    #[test]
    fn too_coarse_for_fit() {
        let grid = AngularGrid::clustered(1.1, 4).unwrap();
        let f = GridFunction::from_fn(&grid, Parity::Even, |t| (1.1 - t).abs().powf(0.7));
        assert!(matches!(fit_power_law(&f), Err(Error::Resolution { .. })));
    }
}
