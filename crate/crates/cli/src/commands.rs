//! One function per command: compute, tabulate, summarize.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use ipm_core::evolution::{
    run, run_decay_experiment, Background, DecayOptions, EvolutionState, Frame, RunOptions, STABLE_CFL,
};
use ipm_core::linearized::{coercivity_quotient, discrete_spectrum, CoercivityOptions};
use ipm_core::profile::{build_profile, fit_boundary_exponent, ProfileOptions, ProfilePair};
use ipm_core::samples::random_even_samples;
use ipm_core::shooting::{shoot_with, ShootOptions};
use ipm_core::weighted::{verify_inequalities, WeightParams, WeightedForms};
use ipm_core::{GridFunction, Parity};

use crate::config::{Command, FrameArg, RunConfig, UsageError};
use crate::output::{Cell, Table};

/// Self-similar band on ‖P(t)‖∞(1 − t) checked up to this time.
pub const SELF_SIMILAR_HORIZON: f64 = 0.9;
pub const SELF_SIMILAR_BAND: (f64, f64) = (3.92, 4.08);
/// Default truncation width as a fraction of L.
pub const CUTOFF_FRACTION: f64 = 0.02;
pub const HISTOGRAM_BINS: usize = 10;
/// Seeded samples tabulated by `norms`.
pub const NORM_SAMPLES: usize = 20;

#[derive(Debug)]
pub enum CommandError {
    Usage(UsageError),
    Core(ipm_core::Error),
}

impl From<ipm_core::Error> for CommandError {
    fn from(e: ipm_core::Error) -> Self {
        CommandError::Core(e)
    }
}

impl From<UsageError> for CommandError {
    fn from(e: UsageError) -> Self {
        CommandError::Usage(e)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub results: Map<String, Value>,
    /// False when the run completed but its scientific check failed.
    pub passed: bool,
}

type CmdResult = Result<Outcome, CommandError>;

pub fn execute(cfg: &RunConfig) -> CmdResult {
    match cfg.command {
        Command::Profile => profile(cfg),
        Command::Shoot => shoot(cfg),
        Command::Evolve => evolve(cfg),
        Command::Decay => decay(cfg),
        Command::Coercivity => coercivity(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Norms => norms(cfg),
    }
}

fn build(cfg: &RunConfig) -> Result<ProfilePair, CommandError> {
    let options = ProfileOptions { grid_nodes: cfg.n, ..ProfileOptions::default() };
    Ok(build_profile(cfg.a, &options)?)
}

/// Linked defaults for L with the configured overrides applied.
pub fn weight_params(cfg: &RunConfig, half_angle: f64) -> Result<WeightParams, UsageError> {
    let bad = |e: ipm_core::Error| UsageError(format!("weight parameters: {e}"));
    let mut wp = match cfg.wp.l1 {
        Some(l1) => {
            let b = cfg.wp.b.unwrap_or(WeightParams::default_for(half_angle).map_err(bad)?.b);
            WeightParams::linked(half_angle, l1, b).map_err(bad)?
        }
        None => WeightParams::default_for(half_angle).map_err(bad)?,
    };
    if let Some(l2) = cfg.wp.l2 {
        wp.l2 = l2;
    }
    if let Some(k) = cfg.wp.k {
        wp.k = k;
    }
    if let Some(b) = cfg.wp.b {
        wp.b = b;
    }
    wp.validate().map_err(bad)?;
    Ok(wp)
}

fn wp_json(wp: &WeightParams) -> Value {
    json!({ "l1": wp.l1, "l2": wp.l2, "K": wp.k, "B": wp.b })
}

fn profile_results(p: &ProfilePair) -> Result<Map<String, Value>, CommandError> {
    let n = p.grid.len();
    let max_mprime = p.m_prime()[..n - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut r = Map::new();
    r.insert("A".into(), json!(p.a_param));
    r.insert("L".into(), json!(p.half_angle));
    r.insert("GpL".into(), json!(p.gpl));
    r.insert("GpL_direct".into(), json!(p.gpl_direct));
    r.insert("holder_alpha".into(), json!(p.holder_alpha));
    r.insert("fitted_exponent".into(), json!(fit_boundary_exponent(p)?));
    r.insert("M0".into(), json!(p.m.values()[0]));
    r.insert("G_at_L".into(), json!(p.g.values()[n - 1]));
    r.insert("M_at_L".into(), json!(p.m.values()[n - 1]));
    r.insert("max_Mprime".into(), json!(max_mprime));
    r.insert("nodes".into(), json!(n));
    Ok(r)
}

fn profile(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let mut t = Table::new("profile.csv", &["theta", "M", "G", "Gp"]);
    for (i, &th) in p.grid.nodes().iter().enumerate() {
        t.push(vec![th.into(), p.m.values()[i].into(), p.g.values()[i].into(), p.gp.values()[i].into()]);
    }
    Ok(Outcome { tables: vec![t], results: profile_results(&p)?, passed: true })
}

fn shoot(cfg: &RunConfig) -> CmdResult {
    let options = ShootOptions {
        profile: ProfileOptions { grid_nodes: cfg.n, ..ProfileOptions::default() },
        ..ShootOptions::default()
    };
    let res = shoot_with(cfg.target_l, cfg.bracket, &options)?;
    let mut t = Table::new("sweep.csv", &["A", "L"]);
    for &(a, l) in &res.sweep {
        t.push(vec![a.into(), l.into()]);
    }
    let mut r = Map::new();
    r.insert("target_L".into(), json!(res.target_l));
    r.insert("A_star".into(), json!(res.a_star));
    r.insert("achieved_L".into(), json!(res.achieved_l));
    r.insert("iterations".into(), json!(res.iterations));
    r.insert("evaluations".into(), json!(res.sweep.len()));
    Ok(Outcome { tables: vec![t], results: r, passed: true })
}

fn evolve(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let bg = Arc::new(Background::new(&p)?);
    let (frame, t_end) = match cfg.frame {
        FrameArg::T => (Frame::Physical, cfg.t_max),
        FrameArg::S => (Frame::Logarithmic, cfg.s_max),
    };
    let zero = GridFunction::zeros(&bg.grid, Parity::Even);
    let initial = EvolutionState::about_profile(bg.clone(), zero, frame)?;
    let options = RunOptions { dt: cfg.dt, t_end, cfl: STABLE_CFL, record_every: 1 };
    let (state, diag) = run(initial, &options)?;
    let mut r = Map::new();
    r.insert("L".into(), json!(p.half_angle));
    r.insert("nodes".into(), json!(p.grid.len()));
    r.insert("final_time".into(), json!(state.time));
    r.insert("blew_up".into(), json!(diag.blew_up));
    r.insert("records".into(), json!(diag.times.len()));
    r.insert("final_accum_grad".into(), json!(diag.accumulated_gradient.last().copied().unwrap_or(0.0)));
    let mut passed = true;
    let table = match cfg.frame {
        FrameArg::T => {
            let rescaled = diag.rescaled_sup();
            let mut t = Table::new("series.csv", &["t", "sup_P", "sup_P_times_1mt", "accum_grad"]);
            for i in 0..diag.times.len() {
                t.push(vec![
                    diag.times[i].into(),
                    diag.sup_density[i].into(),
                    rescaled[i].into(),
                    diag.accumulated_gradient[i].into(),
                ]);
            }
            let window: Vec<f64> = diag
                .times
                .iter()
                .zip(&rescaled)
                .filter(|(t, _)| **t <= SELF_SIMILAR_HORIZON + 1e-12)
                .map(|(_, r)| *r)
                .collect();
            let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            passed = lo >= SELF_SIMILAR_BAND.0 && hi <= SELF_SIMILAR_BAND.1;
            r.insert("min_rescaled_sup".into(), json!(lo));
            r.insert("max_rescaled_sup".into(), json!(hi));
            r.insert("self_similar".into(), json!(passed));
            t
        }
        FrameArg::S => {
            let mut t = Table::new("series.csv", &["s", "sup_P", "accum_grad"]);
            for i in 0..diag.times.len() {
                t.push(vec![diag.times[i].into(), diag.sup_density[i].into(), diag.accumulated_gradient[i].into()]);
            }
            let deviation = bg.m().mul(&state.unknown)?.sup_norm();
            r.insert("final_deviation".into(), json!(deviation));
            t
        }
    };
    Ok(Outcome { tables: vec![table], results: r, passed })
}

fn decay(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let a = cfg.cutoff_a.unwrap_or(CUTOFF_FRACTION * p.half_angle);
    let options = DecayOptions { dt: cfg.dt, filter: cfg.filter, ..DecayOptions::default() };
    let rep = run_decay_experiment(&p, a, cfg.s_max, &options).map_err(|e| match e {
        ipm_core::Error::Precondition(m) => CommandError::Usage(UsageError(m)),
        e => CommandError::Core(e),
    })?;
    let mut t = Table::new("decay.csv", &["s", "sup", "h4tilde"]);
    for x in &rep.series {
        t.push(vec![x.s.into(), x.sup.into(), x.h4tilde.into()]);
    }
    let sups: Vec<f64> = rep.series.iter().map(|x| x.sup).collect();
    let mut r = Map::new();
    r.insert("L".into(), json!(p.half_angle));
    r.insert("nodes".into(), json!(p.grid.len()));
    r.insert("cutoff_a".into(), json!(a));
    r.insert("initial_sup".into(), json!(sups.first()));
    r.insert("final_sup".into(), json!(sups.last()));
    r.insert("min_sup".into(), json!(sups.iter().copied().fold(f64::INFINITY, f64::min)));
    r.insert("decayed".into(), json!(rep.decayed));
    Ok(Outcome { tables: vec![t], results: r, passed: true })
}

fn coercivity(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let wp = weight_params(cfg, p.half_angle)?;
    let options = CoercivityOptions { samples: cfg.samples, seed: cfg.seed, ..CoercivityOptions::default() };
    let rep = coercivity_quotient(&p, &wp, &options)?;
    let mut t =
        Table::new("coercivity.csv", &["attempt", "l1", "l2", "K", "B", "min_quotient", "min_eigenvalue", "certified"]);
    let mut h = Table::new("quotient_histogram.csv", &["attempt", "bin_lo", "bin_hi", "count"]);
    for (i, a) in rep.attempts.iter().enumerate() {
        t.push(vec![
            i.into(),
            a.wp.l1.into(),
            a.wp.l2.into(),
            a.wp.k.into(),
            a.wp.b.into(),
            a.min_quotient.into(),
            a.min_eigenvalue.into(),
            a.certified().into(),
        ]);
        let (lo, hi) = a.histogram_range;
        let width = (hi - lo) / a.histogram.len() as f64;
        for (k, &c) in a.histogram.iter().enumerate() {
            let edge = |j: usize| if j == a.histogram.len() { hi } else { lo + j as f64 * width };
            h.push(vec![i.into(), edge(k).into(), edge(k + 1).into(), c.into()]);
        }
    }
    let last = rep.last();
    let mut r = Map::new();
    r.insert("L".into(), json!(p.half_angle));
    r.insert("nodes".into(), json!(p.grid.len()));
    r.insert("samples".into(), json!(rep.samples));
    r.insert("seed".into(), json!(rep.seed));
    r.insert("attempts".into(), json!(rep.attempts.len()));
    r.insert("min_quotient".into(), json!(last.min_quotient));
    r.insert("min_eigenvalue".into(), json!(last.min_eigenvalue));
    r.insert("wp".into(), wp_json(&last.wp));
    r.insert("certified".into(), json!(rep.certified()));
    Ok(Outcome { tables: vec![t, h], results: r, passed: rep.certified() })
}

fn spectrum(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let wp = weight_params(cfg, p.half_angle)?;
    let rep = discrete_spectrum(&p, &wp, cfg.n)?;
    let mut t = Table::new("spectrum.csv", &["nodes", "re", "im", "resolved"]);
    for z in &rep.coarse {
        t.push(vec![rep.nodes.0.into(), z.re.into(), z.im.into(), rep.resolved.contains(z).into()]);
    }
    for z in &rep.fine {
        t.push(vec![rep.nodes.1.into(), z.re.into(), z.im.into(), Cell::Text(String::new())]);
    }
    let pairs = |v: &[ipm_core::linearized::Complex<f64>]| -> Value { v.iter().map(|z| json!([z.re, z.im])).collect() };
    let mut r = Map::new();
    r.insert("L".into(), json!(p.half_angle));
    r.insert("nodes".into(), json!([rep.nodes.0, rep.nodes.1]));
    r.insert("resolved".into(), pairs(&rep.resolved));
    r.insert("unstable_count".into(), json!(rep.unstable.len()));
    r.insert("unstable".into(), pairs(&rep.unstable));
    r.insert("translation_residual".into(), json!(rep.translation_residual));
    r.insert("nearest_translation".into(), json!([rep.nearest_translation.re, rep.nearest_translation.im]));
    Ok(Outcome { tables: vec![t], results: r, passed: true })
}

fn norms(cfg: &RunConfig) -> CmdResult {
    let p = build(cfg)?;
    let wp = weight_params(cfg, p.half_angle)?;
    let forms = WeightedForms::new(&p.grid, wp)?;
    let mut t = Table::new("norms.csv", &["function", "h4tilde", "h4", "jet0", "jet2", "low", "high"]);
    let mut row = |name: &str, f: &GridFunction| -> Result<(), CommandError> {
        let n = forms.report(f)?;
        let mut cells: Vec<Cell> = vec![name.into(), n.h4tilde.into(), n.h4.into()];
        cells.extend(n.pieces.iter().map(|&x| Cell::from(x)));
        t.push(cells);
        Ok(())
    };
    row("profile", &p.m)?;
    let samples = random_even_samples(&p.grid, cfg.samples, cfg.seed);
    for (i, f) in samples.iter().take(NORM_SAMPLES).enumerate() {
        row(&format!("sample_{i}"), f)?;
    }
    let ineq = verify_inequalities(&samples, &wp)?;
    let mut r = Map::new();
    r.insert("L".into(), json!(p.half_angle));
    r.insert("nodes".into(), json!(p.grid.len()));
    r.insert("wp".into(), wp_json(&wp));
    r.insert("samples".into(), json!(ineq.samples));
    r.insert("equivalence_upper".into(), json!(ineq.equivalence_upper));
    r.insert("equivalence_lower".into(), json!(ineq.equivalence_lower));
    r.insert("embedding".into(), json!(ineq.embedding));
    r.insert("hardy".into(), json!(ineq.hardy));
    r.insert("hardy_bound".into(), json!(ineq.hardy_bound));
    r.insert("interpolation".into(), json!(ineq.interpolation));
    r.insert("algebra".into(), json!(ineq.algebra));
    let passed = ineq.hardy <= ineq.hardy_bound
        && [ineq.equivalence_upper, ineq.equivalence_lower, ineq.embedding, ineq.algebra]
            .iter()
            .chain(&ineq.interpolation)
            .all(|c| c.is_finite());
    Ok(Outcome { tables: vec![t], results: r, passed })
}
