//! Continuation of the local seed by the augmented ODE for (M, I₁, I₂) up to
//! the first root L of G.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use super::local::{local_profile_with, LocalOptions, LocalSeed, LocalState};
use crate::error::{Error, Result};
use crate::grid::{AngularGrid, GridFunction, Parity};
use crate::ode::{dopri_step, error_norm};

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    pub local: LocalOptions,
    pub rtol: f64,
    pub atol: f64,
    /// Nodes of the clustered output grid on [0, L].
    pub grid_nodes: usize,
    /// Integration stops once G drops below this value.
    pub stop_g: f64,
    /// Largest angle the continuation may reach before declaring no root.
    pub theta_max: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            local: LocalOptions::default(),
            rtol: 1e-12,
            atol: 1e-14,
            grid_nodes: 256,
            stop_g: 1e-10,
            theta_max: FRAC_PI_2 - 1e-7,
        }
    }
}

/// Stream quantities from (θ, I₁, I₂).
fn stream(t: f64, i1: f64, i2: f64) -> (f64, f64) {
    let (s, c) = (2.0 * t).sin_cos();
    (0.5 * s * (1.0 + i1) - 0.5 * c * i2, c * (1.0 + i1) + s * i2)
}

fn rhs(t: f64, y: &[f64]) -> Option<Vec<f64>> {
    let (g, gp) = stream(t, y[1], y[2]);
    if !(g > 0.0) {
        return None;
    }
    let mp = y[0] * (gp - 1.0 + 2.0 * g * t.tan()) / (2.0 * g);
    let (s, c) = (2.0 * t).sin_cos();
    let c2 = t.cos().powi(2);
    Some(vec![mp, mp * c2 * c, mp * c2 * s])
}

/// Accepted steps of the continuation; evaluates the profile anywhere on [0, L].
#[derive(Debug, Clone)]
pub struct ProfileTrace {
    pub seed: LocalSeed,
    /// Accepted step starts and states (M, I₁, I₂); the last entry is where integration stopped.
    pub thetas: Vec<f64>,
    pub states: Vec<[f64; 3]>,
    /// First root of G, if reached.
    pub root: Option<f64>,
    rtol: f64,
    atol: f64,
}

impl ProfileTrace {
    pub fn theta_stop(&self) -> f64 {
        *self.thetas.last().expect("trace is never empty")
    }

    fn state_from(&self, t: f64, y: &[f64]) -> LocalState {
        let (g, gp) = stream(t, y[1], y[2]);
        let mp = if g > 0.0 { y[0] * (gp - 1.0 + 2.0 * g * t.tan()) / (2.0 * g) } else { f64::NEG_INFINITY };
        LocalState { m: y[0], mp, g, gp, i1: y[1], i2: y[2] }
    }

    /// (M, I₁, I₂) at the root by removing the remaining mass ∫ M' over [θ_stop, L].
    fn root_state(&self, l: f64) -> [f64; 3] {
        let y = self.states.last().expect("nonempty");
        let c2 = l.cos().powi(2);
        let (s, c) = (2.0 * l).sin_cos();
        [0.0, y[1] - y[0] * c2 * c, y[2] - y[0] * c2 * s]
    }

    /// Profile quantities at θ ∈ [0, L].
    pub fn state_at(&self, t: f64) -> LocalState {
        if t <= self.seed.radius {
            return self.seed.state(t);
        }
        let stop = self.theta_stop();
        if t >= stop {
            return self.tail_state(t);
        }
        let k = match self.thetas.binary_search_by(|x| x.partial_cmp(&t).expect("finite")) {
            Ok(k) => return self.state_from(t, &self.states[k]),
            Err(k) => k - 1,
        };
        let y = &self.states[k];
        let t0 = self.thetas[k];
        let mut h = t - t0;
        // the accepted step covering t was at least this long; a shorter step is at least as accurate
        let mut cur_t = t0;
        let mut cur = y.to_vec();
        while cur_t < t {
            h = h.min(t - cur_t);
            match dopri_step(&rhs, cur_t, &cur, h) {
                Some(step) if error_norm(&step, &cur, self.rtol, self.atol) <= 1.0 || h < 1e-14 => {
                    cur_t = if h == t - cur_t { t } else { cur_t + h };
                    cur = step.y;
                }
                _ => h *= 0.5,
            }
        }
        self.state_from(t, &cur)
    }

    /// Between the last accepted point and L: G linear, M a power law.
    fn tail_state(&self, t: f64) -> LocalState {
        let stop = self.theta_stop();
        let y = self.states.last().expect("nonempty");
        let last = self.state_from(stop, y);
        let Some(l) = self.root else { return last };
        if t >= l {
            let r = self.root_state(l);
            let (g, gp) = stream(l, r[1], r[2]);
            let _ = g;
            return LocalState { m: 0.0, mp: f64::NEG_INFINITY, g: 0.0, gp, i1: r[1], i2: r[2] };
        }
        let frac = (l - t) / (l - stop);
        let alpha = 0.5 - 0.5 / last.gp;
        let m = last.m * frac.powf(alpha);
        let c2 = l.cos().powi(2);
        let (s, c) = (2.0 * l).sin_cos();
        let dm = last.m - m;
        let i1 = y[1] - dm * c2 * c;
        let i2 = y[2] - dm * c2 * s;
        let (g, gp) = stream(t, i1, i2);
        LocalState { m, mp: -alpha * m / (l - t), g, gp, i1, i2 }
    }
}

/// Integrates from the seed radius; stops at the first root of G or at `theta_end`.
pub fn continue_trace(seed: &LocalSeed, options: &ProfileOptions, theta_end: Option<f64>) -> Result<ProfileTrace> {
    let start = seed.state(seed.radius);
    if !(start.g > 0.0) {
        return Err(Error::Precondition(format!("G(a) = {} must be positive", start.g)));
    }
    let limit = theta_end.unwrap_or(options.theta_max).min(options.theta_max);
    let mut t = seed.radius;
    let mut y = vec![start.m, start.i1, start.i2];
    let mut thetas = vec![t];
    let mut states = vec![[y[0], y[1], y[2]]];
    let mut h: f64 = 1e-3;
    let mut root = None;
    let mut steps = 0usize;
    loop {
        let (g, gp) = stream(t, y[1], y[2]);
        if theta_end.is_none() && g < options.stop_g {
            root = Some(t + g / gp.abs());
            break;
        }
        if t >= limit {
            if theta_end.is_some() {
                break;
            }
            return Err(Error::NoRoot { theta: t });
        }
        if gp < 0.0 {
            h = h.min(0.5 * g / gp.abs());
        }
        h = h.min(limit - t);
        if h < 1e-16 * t.max(1.0) {
            return Err(Error::Integration { theta: t, reason: format!("step size underflow (h = {h:e})") });
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::Integration { theta: t, reason: "too many steps".into() });
        }
        match dopri_step(&rhs, t, &y, h) {
            Some(step) => {
                let err = error_norm(&step, &y, options.rtol, options.atol);
                if err <= 1.0 {
                    if step.y[0] < 0.0 {
                        return Err(Error::MonotonicityViolation { theta: t + h });
                    }
                    t = if (t + h - limit).abs() <= 1e-15 { limit } else { t + h };
                    y = step.y;
                    thetas.push(t);
                    states.push([y[0], y[1], y[2]]);
                }
                h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            }
            None => h *= 0.25,
        }
    }
    Ok(ProfileTrace { seed: seed.clone(), thetas, states, root, rtol: options.rtol, atol: options.atol })
}

/// Sampled profile (M*, G*) on a clustered grid of [0, L].
#[derive(Debug, Clone)]
pub struct ProfilePair {
    pub a_param: f64,
    pub half_angle: f64,
    pub grid: Arc<AngularGrid>,
    pub m: GridFunction,
    pub g: GridFunction,
    pub gp: GridFunction,
    pub i1: GridFunction,
    pub i2: GridFunction,
    /// G*·M*' = ½M*(G*' − 1 + 2G* tanθ), bounded up to θ = L.
    pub gm_prime: GridFunction,
    /// G'(L) from I₂(L)·[cos²2L/sin2L + sin2L].
    pub gpl: f64,
    /// G'(L) from cos2L(1 + I₁(L)) + sin2L·I₂(L).
    pub gpl_direct: f64,
    pub holder_alpha: f64,
    pub trace: Arc<ProfileTrace>,
}

pub fn continue_profile(seed: &LocalSeed) -> Result<ProfilePair> {
    continue_profile_with(seed, &ProfileOptions::default())
}

pub fn continue_profile_with(seed: &LocalSeed, options: &ProfileOptions) -> Result<ProfilePair> {
    let trace = continue_trace(seed, options, None)?;
    ProfilePair::from_trace(Arc::new(trace), options.grid_nodes)
}

/// Local seed plus continuation.
pub fn build_profile(a_param: f64, options: &ProfileOptions) -> Result<ProfilePair> {
    if !(a_param > 0.0) || !a_param.is_finite() {
        return Err(Error::Domain(format!("A = {a_param} must be positive")));
    }
    let seed = local_profile_with(a_param, options.local)?;
    continue_profile_with(&seed, options)
}

/// First root L(A) without sampling a grid.
pub fn root_angle_with(a_param: f64, options: &ProfileOptions) -> Result<f64> {
    if !(a_param > 0.0) || !a_param.is_finite() {
        return Err(Error::Domain(format!("A = {a_param} must be positive")));
    }
    let seed = local_profile_with(a_param, options.local)?;
    let trace = continue_trace(&seed, options, None)?;
    trace.root.ok_or(Error::NoRoot { theta: trace.theta_stop() })
}

impl ProfilePair {
    pub fn from_trace(trace: Arc<ProfileTrace>, nodes: usize) -> Result<Self> {
        let l = trace.root.ok_or(Error::NoRoot { theta: trace.theta_stop() })?;
        let grid = AngularGrid::clustered(l, nodes)?;
        let n = grid.len();
        let states: Vec<LocalState> = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &t)| if i == n - 1 { trace.tail_state(l) } else { trace.state_at(t) })
            .collect();
        let col = |f: fn(&LocalState) -> f64| -> Vec<f64> { states.iter().map(f).collect() };
        let m = GridFunction::new(grid.clone(), col(|s| s.m), Parity::Even)?;
        let mut gv = col(|s| s.g);
        gv[n - 1] = 0.0;
        let g = GridFunction::new(grid.clone(), gv, Parity::Odd)?;
        let gp = GridFunction::new(grid.clone(), col(|s| s.gp), Parity::Even)?;
        let i1 = GridFunction::new(grid.clone(), col(|s| s.i1), Parity::Even)?;
        let i2 = GridFunction::new(grid.clone(), col(|s| s.i2), Parity::Odd)?;
        let gm =
            grid.nodes().iter().zip(&states).map(|(&t, s)| 0.5 * s.m * (s.gp - 1.0 + 2.0 * s.g * t.tan())).collect();
        let gm_prime = GridFunction::new(grid.clone(), gm, Parity::Even)?;
        let root = trace.root_state(l);
        let (s2, c2) = (2.0 * l).sin_cos();
        let gpl = root[2] * (c2 * c2 / s2 + s2);
        let gpl_direct = c2 * (1.0 + root[1]) + s2 * root[2];
        Ok(Self {
            a_param: trace.seed.a_param,
            half_angle: l,
            grid,
            m,
            g,
            gp,
            i1,
            i2,
            gm_prime,
            gpl,
            gpl_direct,
            holder_alpha: 0.5 - 0.5 / gpl,
            trace,
        })
    }

    /// Same profile on a clustered grid with `nodes` nodes.
    pub fn resample(&self, nodes: usize) -> Result<Self> {
        Self::from_trace(self.trace.clone(), nodes)
    }

    /// M*' at the nodes from the profile equation (−∞ at θ = L).
    pub fn m_prime(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else if i == n - 1 {
                    f64::NEG_INFINITY
                } else {
                    self.gm_prime.values()[i] / self.g.values()[i]
                }
            })
            .collect()
    }

    /// Pointwise residual M + 2GM' − G'M − 2MG tanθ on interior nodes.
    pub fn ode_residual(&self) -> f64 {
        let n = self.grid.len();
        let mp = self.m_prime();
        (1..n - 1)
            .map(|i| {
                let t = self.grid.nodes()[i];
                let (m, g, gp) = (self.m.values()[i], self.g.values()[i], self.gp.values()[i]);
                (m + 2.0 * g * mp[i] - gp * m - 2.0 * m * g * t.tan()).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{identity_residual_on_trace, local_profile, monotonicity_identity_residual};

    fn unit_profile() -> ProfilePair {
        build_profile(1.0, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn trivial_seed_tracks_half_sine() {
        let seed = local_profile(0.0).unwrap();
        let trace = continue_trace(&seed, &ProfileOptions::default(), Some(1.5)).unwrap();
        assert!(trace.root.is_none());
        let mut worst: f64 = 0.0;
        for i in 0..=150 {
            let t = 1.5 * i as f64 / 150.0;
            let s = trace.state_at(t);
            worst = worst.max((s.m - 4.0).abs()).max((s.g - 0.5 * (2.0 * t).sin()).abs());
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(identity_residual_on_trace(&trace, 1.4, 128).unwrap() < 1e-7);
        assert!(matches!(continue_profile(&seed), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn unit_parameter_profile() {
        let p = unit_profile();
        let l = p.half_angle;
        let n = p.grid.len();
        assert!(l > 0.0 && l < FRAC_PI_2);
        assert!(p.m.values()[n - 1] <= 1e-6);
        assert!(p.g.values().iter().all(|&g| g >= -1e-12));
        assert!(p.gpl < 0.0);
        assert!((p.gpl - p.gpl_direct).abs() < 1e-8);
        assert!(p.m_prime().iter().all(|&d| d <= 1e-10));
        assert!(p.m.values().iter().all(|&m| (-1e-12..=4.0 + 1e-12).contains(&m)));
        assert!(p.ode_residual() < 1e-9);
        assert!(p.holder_alpha >= 0.5);
        let jet = p.m.taylor_jet(2).unwrap().derivatives;
        assert!((jet[0] - 4.0).abs() < 1e-6 && jet[1] == 0.0 && (jet[2] + 2.0).abs() < 1e-6, "{jet:?}");
        assert!(monotonicity_identity_residual(&p).unwrap() < 1e-6);
    }

    #[test]
    fn identity_residual_shrinks_under_refinement() {
        let p = unit_profile();
        let coarse = crate::profile::monotonicity_identity_residual_with(&p, 12, 0.1).unwrap();
        let fine = crate::profile::monotonicity_identity_residual_with(&p, 24, 0.1).unwrap();
        assert!(fine < coarse / 10.0, "{coarse} {fine}");
    }

    #[test]
    fn root_is_continuous_in_parameter() {
        let o = ProfileOptions::default();
        let a = root_angle_with(1.0, &o).unwrap();
        let b = root_angle_with(1.001, &o).unwrap();
        assert!((a - b).abs() < 1e-2 && a > b);
    }

    #[test]
    fn resampling_is_consistent() {
        let p = unit_profile();
        let q = p.resample(64).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            assert!((p.trace.state_at(t).m - q.trace.state_at(t).m).abs() < 1e-14);
        }
        assert_eq!(q.half_angle, p.half_angle);
    }

    #[test]
    fn rejects_nonpositive_parameter() {
        let o = ProfileOptions::default();
        assert!(matches!(build_profile(0.0, &o), Err(Error::Domain(_))));
        assert!(matches!(build_profile(-1.0, &o), Err(Error::Domain(_))));
    }
}
