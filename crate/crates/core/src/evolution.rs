//! Time stepping of the scale-invariant system in physical time t and logarithmic time
//! s = −log(1 − t), in the variable M = P/cosθ.
//!
//! Plain runs evolve M directly by collocation. Runs about a profile evolve w with
//! M = M*(1 + w) and G = G* + F, F the boundary-value stream of M*·w, so that M*' only
//! enters through the bounded product G*·M*':
//!
//!   ∂w = (1 + w)[F' + 2F tanθ − (F/G*)(G*' − 1 + 2G* tanθ) + κ] − 2(G* + F)w',
//!
//! with κ = 0 in s and κ = 1 in t.

use std::sync::Arc;

use crate::biot_savart::{bump_eta, solve_bvp, BumpProfile, StreamSolution};
use crate::error::{Error, Result};
use crate::grid::{AngularGrid, GridFunction, Parity};
use crate::profile::ProfilePair;
use crate::weighted::{WeightParams, WeightedForms};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Physical,
    Logarithmic,
}

impl Frame {
    fn shift(self) -> f64 {
        match self {
            Frame::Physical => 1.0,
            Frame::Logarithmic => 0.0,
        }
    }
}

/// CFL number c of the guard dt ≤ c·minⱼ Δθⱼ/|2Gⱼ| enforced by [`step`].
pub const DEFAULT_CFL: f64 = 2.0;
/// CFL number used to choose steps in [`run`] and [`run_decay_experiment`].
pub const STABLE_CFL: f64 = 0.5;
/// Runs stop once ‖P‖∞ exceeds this value.
pub const BLOWUP_SUP: f64 = 1e6;
/// Runs stop once the CFL guard asks for a smaller step.
pub const MIN_STEP: f64 = 1e-12;

/// Profile quantities sampled on the profile grid.
#[derive(Debug, Clone)]
pub struct Background {
    pub profile: ProfilePair,
    pub grid: Arc<AngularGrid>,
    /// G*' − 1 + 2G* tanθ.
    pub stretch: Vec<f64>,
    /// Boundary-value stream of M* on the grid, the denominator of F/G*.
    pub discrete: StreamSolution,
}

impl Background {
    pub fn new(profile: &ProfilePair) -> Result<Self> {
        let grid = profile.grid.clone();
        let th = grid.nodes();
        let stretch = th
            .iter()
            .zip(profile.g.values())
            .zip(profile.gp.values())
            .map(|((&t, &g), &gp)| gp - 1.0 + 2.0 * g * t.tan())
            .collect();
        let discrete = solve_bvp(&profile.m)?;
        Ok(Self { profile: profile.clone(), grid, stretch, discrete })
    }

    pub fn m(&self) -> &GridFunction {
        &self.profile.m
    }

    /// F/G* at the nodes, by l'Hôpital at θ = 0 and θ = L.
    pub fn ratio(&self, f: &StreamSolution) -> Vec<f64> {
        let n = self.grid.len();
        let g = self.discrete.g.values();
        let gp = self.discrete.gp.values();
        (0..n).map(|i| if i == 0 || i == n - 1 { f.gp.values()[i] / gp[i] } else { f.g.values()[i] / g[i] }).collect()
    }

    /// Stream of M*·w.
    pub fn perturbation_stream(&self, w: &GridFunction) -> Result<StreamSolution> {
        solve_bvp(&self.profile.m.mul(w)?)
    }
}

fn local_spacing(grid: &AngularGrid) -> Vec<f64> {
    let th = grid.nodes();
    let n = th.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { th[1] } else { th[i] - th[i - 1] };
            let right = if i + 1 == n { left } else { th[i + 1] - th[i] };
            left.min(right)
        })
        .collect()
}

fn require_even(f: &GridFunction) -> Result<()> {
    if f.parity() != Parity::Even {
        return Err(Error::Parity("densities are even".into()));
    }
    Ok(())
}

/// Collocation right-hand side −2GM' + G'M + 2MG tanθ − κM with G the boundary-value stream of M.
fn plain_rhs(m: &GridFunction, frame: Frame) -> Result<(GridFunction, StreamSolution)> {
    require_even(m)?;
    let st = solve_bvp(m)?;
    let mp = m.differentiate(1)?;
    let th = m.grid().nodes();
    let kappa = 1.0 - frame.shift();
    let v = (0..th.len())
        .map(|i| {
            let (mv, g, gp) = (m.values()[i], st.g.values()[i], st.gp.values()[i]);
            -2.0 * g * mp.values()[i] + gp * mv + 2.0 * mv * g * th[i].tan() - kappa * mv
        })
        .collect();
    Ok((m.with_values(v, Parity::Even)?, st))
}

/// ∂ₜP = −2GP' + G'P for even P, computed in the variable M = P/cosθ.
pub fn rhs_physical(p: &GridFunction) -> Result<GridFunction> {
    require_even(p)?;
    let m = p.map(Parity::Even, |t, v| v / t.cos());
    let (r, _) = plain_rhs(&m, Frame::Physical)?;
    Ok(r.map(Parity::Even, |t, v| v * t.cos()))
}

/// ∂ₛM = −M − 2GM' + G'M + 2MG tanθ.
pub fn rhs_logarithmic(m: &GridFunction) -> Result<GridFunction> {
    Ok(plain_rhs(m, Frame::Logarithmic)?.0)
}

/// The s-frame right-hand side at M* + f, with G = G* + F[f] and G*M*' taken from the profile.
pub fn rhs_logarithmic_about(bg: &Background, f: &GridFunction) -> Result<GridFunction> {
    require_even(f)?;
    let p = &bg.profile;
    let st = solve_bvp(f)?;
    let ratio = bg.ratio(&st);
    let fp = f.differentiate(1)?;
    let th = bg.grid.nodes();
    let v = (0..th.len())
        .map(|i| {
            let tan = th[i].tan();
            let (ms, gs, gps, gm) = (p.m.values()[i], p.g.values()[i], p.gp.values()[i], p.gm_prime.values()[i]);
            let (fv, ff, ffp) = (f.values()[i], st.g.values()[i], st.gp.values()[i]);
            let m = ms + fv;
            let g = gs + ff;
            -m - 2.0 * gm * (1.0 + ratio[i]) - 2.0 * g * fp.values()[i] + (gps + ffp) * m + 2.0 * m * g * tan
        })
        .collect();
    f.with_values(v, Parity::Even)
}

/// Right-hand side for w about the profile, with the total stream G* + F.
fn relative_rhs(bg: &Background, w: &GridFunction, frame: Frame) -> Result<(GridFunction, Vec<f64>)> {
    let st = bg.perturbation_stream(w)?;
    let ratio = bg.ratio(&st);
    let wp = w.differentiate(1)?;
    let th = bg.grid.nodes();
    let gs = bg.profile.g.values();
    let kappa = frame.shift();
    let mut speed = Vec::with_capacity(th.len());
    let v = (0..th.len())
        .map(|i| {
            let (ff, ffp) = (st.g.values()[i], st.gp.values()[i]);
            let bracket = ffp + 2.0 * ff * th[i].tan() - ratio[i] * bg.stretch[i] + kappa;
            let g = gs[i] + ff;
            speed.push(g);
            (1.0 + w.values()[i]) * bracket - 2.0 * g * wp.values()[i]
        })
        .collect();
    Ok((w.with_values(v, Parity::Even)?, speed))
}

#[derive(Debug, Clone)]
pub enum Model {
    Plain,
    AboutProfile(Arc<Background>),
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub time: f64,
    pub frame: Frame,
    pub model: Model,
    /// M for plain runs, w for runs about a profile.
    pub unknown: GridFunction,
}

impl EvolutionState {
    pub fn plain(m: GridFunction, frame: Frame) -> Result<Self> {
        require_even(&m)?;
        Ok(Self { time: 0.0, frame, model: Model::Plain, unknown: m })
    }

    /// M = M*(1 + w).
    pub fn about_profile(bg: Arc<Background>, w: GridFunction, frame: Frame) -> Result<Self> {
        require_even(&w)?;
        if !w.grid().same_as(&bg.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { time: 0.0, frame, model: Model::AboutProfile(bg), unknown: w })
    }

    pub fn grid(&self) -> &Arc<AngularGrid> {
        self.unknown.grid()
    }

    pub fn density(&self) -> GridFunction {
        match &self.model {
            Model::Plain => self.unknown.clone(),
            Model::AboutProfile(bg) => bg
                .m()
                .map(Parity::Even, |_, v| v)
                .mul(&self.unknown.map(Parity::Even, |_, v| 1.0 + v))
                .expect("same grid"),
        }
    }

    /// P = M cosθ.
    pub fn physical_density(&self) -> GridFunction {
        self.density().map(Parity::Even, |t, v| v * t.cos())
    }

    pub fn stream(&self) -> Result<StreamSolution> {
        solve_bvp(&self.density())
    }

    fn rhs(&self, u: &GridFunction) -> Result<(GridFunction, Vec<f64>)> {
        match &self.model {
            Model::Plain => {
                let (r, st) = plain_rhs(u, self.frame)?;
                Ok((r, st.g.into_values()))
            }
            Model::AboutProfile(bg) => relative_rhs(bg, u, self.frame),
        }
    }

    /// Largest dt allowed by the CFL guard for the current state.
    pub fn step_limit(&self, cfl: f64) -> Result<f64> {
        let (_, speed) = self.rhs(&self.unknown)?;
        Ok(limit_from_speed(self.grid(), &speed, cfl))
    }
}

fn limit_from_speed(grid: &AngularGrid, speed: &[f64], cfl: f64) -> f64 {
    let spacing = local_spacing(grid);
    speed
        .iter()
        .zip(&spacing)
        .map(|(g, h)| if *g == 0.0 { f64::INFINITY } else { cfl * h / (2.0 * g.abs()) })
        .fold(f64::INFINITY, f64::min)
}

/// One classical RK4 step of size dt, guarded by the CFL condition with number `cfl`.
pub fn step_with(state: &EvolutionState, dt: f64, cfl: f64) -> Result<EvolutionState> {
    if !(dt > 0.0) {
        return Err(Error::StepSize { dt, limit: f64::NAN });
    }
    let u0 = &state.unknown;
    let (k1, speed) = state.rhs(u0)?;
    let limit = limit_from_speed(state.grid(), &speed, cfl);
    if dt > limit {
        return Err(Error::StepSize { dt, limit });
    }
    let (k2, _) = state.rhs(&u0.axpy(0.5 * dt, &k1)?)?;
    let (k3, _) = state.rhs(&u0.axpy(0.5 * dt, &k2)?)?;
    let (k4, _) = state.rhs(&u0.axpy(dt, &k3)?)?;
    let mut v = u0.values().to_vec();
    for i in 0..v.len() {
        v[i] += dt / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::BlowUp { time: state.time + dt });
    }
    Ok(EvolutionState {
        time: state.time + dt,
        frame: state.frame,
        model: state.model.clone(),
        unknown: u0.with_values(v, Parity::Even)?,
    })
}

pub fn step(state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
    step_with(state, dt, DEFAULT_CFL)
}

/// Time series of a physical-time run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlowupDiagnostics {
    pub times: Vec<f64>,
    /// ‖P(t)‖∞.
    pub sup_density: Vec<f64>,
    /// ∫₀ᵗ max over interior nodes of |∂θP|.
    pub accumulated_gradient: Vec<f64>,
    /// Whether the run stopped on the ‖P‖∞ or step-size guard before the final time.
    pub blew_up: bool,
}

impl BlowupDiagnostics {
    /// ‖P(t)‖∞·(1 − t).
    pub fn rescaled_sup(&self) -> Vec<f64> {
        self.times.iter().zip(&self.sup_density).map(|(t, s)| s * (1.0 - t)).collect()
    }
}

/// max over nodes other than θ = L of |∂θP|, with M*' from the profile for runs about it.
fn gradient_sup(state: &EvolutionState) -> Result<f64> {
    let th = state.grid().nodes();
    let n = th.len();
    let m = state.density();
    let mp: Vec<f64> = match &state.model {
        Model::Plain => m.differentiate(1)?.into_values(),
        Model::AboutProfile(bg) => {
            let w = &state.unknown;
            let wp = w.differentiate(1)?;
            let msp = bg.profile.m_prime();
            (0..n).map(|i| msp[i] * (1.0 + w.values()[i]) + bg.m().values()[i] * wp.values()[i]).collect()
        }
    };
    Ok((0..n - 1).map(|i| (mp[i] * th[i].cos() - m.values()[i] * th[i].sin()).abs()).fold(0.0, f64::max))
}

/// Options for [`run`].
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Steps are capped at this CFL number.
    pub cfl: f64,
    /// Record every this many steps (and the last).
    pub record_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt: 1e-2, t_end: 1.0, cfl: STABLE_CFL, record_every: 1 }
    }
}

/// Steps to `t_end` with dt = min(options.dt, CFL limit, remaining time), recording diagnostics.
/// Stops early when ‖P‖∞ > 10⁶ or the guard forces dt < 10⁻¹².
pub fn run(initial: EvolutionState, options: &RunOptions) -> Result<(EvolutionState, BlowupDiagnostics)> {
    let mut state = initial;
    let mut diag = BlowupDiagnostics::default();
    let mut grad = gradient_sup(&state)?;
    let mut acc = 0.0;
    let record = |st: &EvolutionState, acc: f64, d: &mut BlowupDiagnostics| {
        d.times.push(st.time);
        d.sup_density.push(st.physical_density().sup_norm());
        d.accumulated_gradient.push(acc);
    };
    record(&state, acc, &mut diag);
    let mut steps = 0usize;
    while state.time < options.t_end * (1.0 - 1e-15) {
        let limit = state.step_limit(options.cfl)?;
        let dt = options.dt.min(limit).min(options.t_end - state.time);
        if dt < MIN_STEP && options.t_end - state.time > MIN_STEP {
            diag.blew_up = true;
            break;
        }
        let next = match step_with(&state, dt, DEFAULT_CFL.max(options.cfl)) {
            Ok(s) => s,
            Err(Error::BlowUp { .. }) => {
                diag.blew_up = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let g_next = gradient_sup(&next)?;
        acc += 0.5 * dt * (grad + g_next);
        grad = g_next;
        state = next;
        steps += 1;
        let sup = state.physical_density().sup_norm();
        let done = state.time >= options.t_end * (1.0 - 1e-15);
        if sup > BLOWUP_SUP {
            diag.blew_up = true;
            record(&state, acc, &mut diag);
            break;
        }
        if done || steps % options.record_every.max(1) == 0 {
            record(&state, acc, &mut diag);
        }
    }
    Ok((state, diag))
}

/// χ_a(θ) = η((L − θ)/(2a)): 1 on [L − a, L], 0 on [0, L − 2a].
pub fn truncation(grid: &Arc<AngularGrid>, cutoff_a: f64) -> GridFunction {
    let l = grid.half_angle();
    GridFunction::from_fn(grid, Parity::Even, |t| {
        if cutoff_a == 0.0 {
            0.0
        } else {
            bump_eta((l - t) / (2.0 * cutoff_a), BumpProfile::Smooth)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySample {
    pub s: f64,
    /// ‖M(s) − M*‖∞.
    pub sup: f64,
    /// ‖M(s) − M*‖ in H̃⁴.
    pub h4tilde: f64,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub cutoff_a: f64,
    pub series: Vec<DecaySample>,
    /// Final perturbation sup norm strictly below the initial one.
    pub decayed: bool,
    pub final_state: EvolutionState,
}

#[derive(Debug, Clone, Copy)]
pub struct DecayOptions {
    pub dt: f64,
    pub cfl: f64,
    pub record_every: usize,
    /// Apply the grid's exponential filter to w after every step.
    pub filter: bool,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { dt: 1e-2, cfl: STABLE_CFL, record_every: 10, filter: true }
    }
}

/// Evolves M₀ = M*(1 − χ_a) in s to s_max and records the perturbation norms.
pub fn run_decay_experiment(
    profile: &ProfilePair,
    cutoff_a: f64,
    s_max: f64,
    options: &DecayOptions,
) -> Result<DecayReport> {
    let l = profile.half_angle;
    let wp = WeightParams::default_for(l)?;
    if !(cutoff_a >= 0.0) || 2.0 * cutoff_a > l - wp.l2 {
        return Err(Error::Precondition(format!(
            "cutoff a = {cutoff_a} must satisfy 0 <= 2a <= L - l2 = {}",
            l - wp.l2
        )));
    }
    let bg = Arc::new(Background::new(profile)?);
    let forms = WeightedForms::new(&bg.grid, wp)?;
    let w0 = truncation(&bg.grid, cutoff_a).scale(-1.0);
    let mut state = EvolutionState::about_profile(bg.clone(), w0, Frame::Logarithmic)?;
    let sample = |st: &EvolutionState| -> Result<DecaySample> {
        let pert = bg.m().mul(&st.unknown)?;
        Ok(DecaySample { s: st.time, sup: pert.sup_norm(), h4tilde: forms.report(&pert)?.h4tilde })
    };
    let mut series = vec![sample(&state)?];
    let mut steps = 0usize;
    while state.time < s_max * (1.0 - 1e-15) {
        let limit = state.step_limit(options.cfl)?;
        let dt = options.dt.min(limit).min(s_max - state.time);
        if dt < MIN_STEP {
            return Err(Error::StepSize { dt, limit });
        }
        state = step_with(&state, dt, DEFAULT_CFL.max(options.cfl))?;
        if options.filter {
            state.unknown = state.unknown.filtered();
        }
        steps += 1;
        if steps % options.record_every.max(1) == 0 || state.time >= s_max * (1.0 - 1e-15) {
            series.push(sample(&state)?);
        }
    }
    let decayed = series.last().map(|x| x.sup) < series.first().map(|x| x.sup);
    Ok(DecayReport { cutoff_a, series, decayed, final_state: state })
}

/// Maps a physical-time state about the profile to logarithmic time: s = −log(1 − t), M ↦ (1 − t)M.
pub fn to_logarithmic(state: &EvolutionState) -> Result<EvolutionState> {
    if state.frame != Frame::Physical {
        return Err(Error::Precondition("state is already in logarithmic time".into()));
    }
    let t = state.time;
    if !(t < 1.0) {
        return Err(Error::Domain(format!("t = {t} is past the blow-up time")));
    }
    let unknown = match state.model {
        Model::Plain => state.unknown.scale(1.0 - t),
        Model::AboutProfile(_) => state.unknown.map(Parity::Even, |_, w| (1.0 - t) * (1.0 + w) - 1.0),
    };
    Ok(EvolutionState { time: -(1.0 - t).ln(), frame: Frame::Logarithmic, model: state.model.clone(), unknown })
}
