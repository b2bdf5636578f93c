//! Acceptance runner: one PASS/FAIL line per criterion; exits nonzero if a gating criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use ipm_core::biot_savart::{solve_bvp, solve_ivp, solve_localized, BumpProfile};
use ipm_core::evolution::{
    rhs_logarithmic_about, run, run_decay_experiment, step, Background, DecayOptions, EvolutionState, Frame, RunOptions,
};
use ipm_core::linearized::{coercivity_quotient, CoercivityOptions, Linearization, OperatorLabel, RANK_CUTOFF};
use ipm_core::profile::{
    build_profile, continue_trace, fit_boundary_exponent, local_profile, monotonicity_identity_residual_with,
    root_angle_with, ProfileOptions, ProfilePair, IDENTITY_MARGIN,
};
use ipm_core::samples::random_even_samples;
use ipm_core::weighted::{
    log_weight_phi, log_weight_psi, taylor_part, verify_inequalities, WeightParams, WeightedForms,
};
use ipm_core::{AngularGrid, GridFunction, Parity};

const NODES: usize = 256;

struct Verdict {
    pass: bool,
    /// Reported but not gating.
    finding: bool,
    detail: String,
}

fn gate(pass: bool, detail: String) -> Verdict {
    Verdict { pass, finding: false, detail }
}

fn profile(nodes: usize) -> ProfilePair {
    build_profile(1.0, &ProfileOptions { grid_nodes: nodes, ..ProfileOptions::default() }).unwrap()
}

fn default_wp(p: &ProfilePair) -> WeightParams {
    WeightParams::default_for(p.half_angle).unwrap()
}

fn trivial_solution() -> Verdict {
    let seed = local_profile(0.0).unwrap();
    let trace = continue_trace(&seed, &ProfileOptions::default(), Some(1.5)).unwrap();
    let worst = (0..=1500)
        .map(|i| {
            let t = 1.5 * i as f64 / 1500.0;
            let s = trace.state_at(t);
            (s.m - 4.0).abs().max((s.g - 0.5 * (2.0 * t).sin()).abs())
        })
        .fold(0.0, f64::max);
    gate(worst <= 1e-8 && trace.root.is_none(), format!("max |M - 4|, |G - sin(2t)/2| on [0, 1.5] = {worst:.2e}"))
}

fn unit_profile() -> Verdict {
    let p = profile(NODES);
    let n = p.grid.len();
    let g_l = p.g.values()[n - 1].abs();
    let m_l = p.m.values()[n - 1];
    let max_mp = p.m_prime().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gap = (p.gpl - p.gpl_direct).abs();
    let fit = fit_boundary_exponent(&p).unwrap();
    let pass = p.half_angle < FRAC_PI_2
        && g_l <= 1e-9
        && m_l <= 1e-6
        && p.gpl < 0.0
        && max_mp <= 1e-10
        && gap <= 1e-8
        && (fit - p.holder_alpha).abs() <= 0.05
        && fit >= 0.5;
    gate(
        pass,
        format!(
            "L = {:.12}, |G(L)| = {g_l:.1e}, M(L) = {m_l:.1e}, G'(L) = {:.10}, max M' = {max_mp:.1e}, \
             formula gap = {gap:.1e}, exponent fit = {fit:.4} vs {:.4}",
            p.half_angle, p.gpl, p.holder_alpha
        ),
    )
}

fn monotonicity_identity() -> Verdict {
    let p = profile(NODES);
    let sizes = [16usize, 32, 64, 128, 256];
    let r: Vec<f64> =
        sizes.iter().map(|&n| monotonicity_identity_residual_with(&p, n, IDENTITY_MARGIN).unwrap()).collect();
    let floor = 1e-10;
    let shrinking = r.windows(2).all(|w| w[1] <= w[0].max(floor)) && r[1] < r[0];
    let list: Vec<String> = sizes.iter().zip(&r).map(|(n, v)| format!("n={n}: {v:.1e}")).collect();
    gate(r[4] <= 1e-6 && shrinking, format!("residual {}", list.join(", ")))
}

fn shooting_trend() -> Verdict {
    let base = ProfileOptions::default();
    let mut fine = base;
    fine.local.fixed_point.nodes *= 2;
    fine.local.fixed_point.quadrature *= 2;
    fine.local.grid_nodes = 2 * fine.local.grid_nodes - 1;
    fine.rtol = base.rtol / 10.0;
    fine.atol = base.atol / 10.0;
    let params = [0.01, 0.1, 1.0];
    let l: Vec<(f64, f64)> =
        params.par_iter().map(|&a| (root_angle_with(a, &base).unwrap(), root_angle_with(a, &fine).unwrap())).collect();
    let drift = l.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let pass = l[0].0 > l[1].0 && l[1].0 > l[2].0 && l[0].0 > FRAC_PI_2 - 0.1 && drift <= 1e-6;
    gate(
        pass,
        format!(
            "L(0.01) = {:.10}, L(0.1) = {:.10}, L(1) = {:.10}, refinement drift = {drift:.1e}",
            l[0].0, l[1].0, l[2].0
        ),
    )
}

fn stationarity() -> Verdict {
    let p = profile(NODES);
    let bg = Arc::new(Background::new(&p).unwrap());
    let zero = GridFunction::zeros(&bg.grid, Parity::Even);
    let mut state = EvolutionState::about_profile(bg.clone(), zero, Frame::Logarithmic).unwrap();
    for _ in 0..100 {
        state = step(&state, 1e-2).unwrap();
    }
    let dev = state.density().max_abs_diff(bg.m());
    gate(
        dev <= 1e-5 && (state.time - 1.0).abs() < 1e-12,
        format!("max |M(1) - M*| = {dev:.1e} after 100 steps of 1e-2"),
    )
}

fn self_similar_blowup() -> Verdict {
    let p = profile(NODES);
    let bg = Arc::new(Background::new(&p).unwrap());
    let zero = GridFunction::zeros(&bg.grid, Parity::Even);
    let initial = EvolutionState::about_profile(bg, zero, Frame::Physical).unwrap();
    let (_, diag) = run(initial, &RunOptions::default()).unwrap();
    let r = diag.rescaled_sup();
    let window: Vec<f64> = diag.times.iter().zip(&r).filter(|(t, _)| **t <= 0.9 + 1e-12).map(|(_, v)| *v).collect();
    let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let acc = &diag.accumulated_gradient;
    let at = |t: f64| {
        let k = diag.times.iter().position(|&s| s >= t).unwrap_or(acc.len() - 1);
        acc[k]
    };
    let monotone = acc.windows(2).all(|w| w[1] >= w[0]);
    let end = *acc.last().unwrap();
    let growth = end / at(0.9);
    let pass = lo >= 3.92 && hi <= 4.08 && diag.blew_up && monotone && growth > 3.0;
    gate(
        pass,
        format!(
            "sup P (1-t) in [{lo:.7}, {hi:.7}] for t <= 0.9; stopped at t = {:.6}; accumulated gradient \
             {:.1} (t=0.9), {:.1} (t=0.99), {:.1} (t=0.999), {end:.1} (end)",
            diag.times.last().unwrap(),
            at(0.9),
            at(0.99),
            at(0.999)
        ),
    )
}

fn biot_savart_residuals() -> Verdict {
    let p = profile(NODES);
    let grid = p.grid.clone();
    let wp = default_wp(&p);
    let suite: Vec<GridFunction> = vec![
        GridFunction::from_fn(&grid, Parity::Even, |t| 4.0 - t * t + 0.3 * (3.0 * t).cos()),
        GridFunction::from_fn(&grid, Parity::Even, |t| (2.0 * t).cos()),
        GridFunction::from_fn(&grid, Parity::Even, |t| (-t * t).exp() * (1.0 + t.powi(4))),
        GridFunction::from_fn(&grid, Parity::Even, |t| t.powi(4)),
    ];
    let mut worst = [0.0f64; 3];
    for m in &suite {
        worst[0] = worst[0].max(solve_ivp(m).unwrap().residual(m).unwrap());
        worst[1] = worst[1].max(solve_bvp(m).unwrap().residual(m).unwrap());
        let jet_free = m.sub(&taylor_part(m).unwrap()).unwrap();
        let (loc, _) = solve_localized(&jet_free, &wp, BumpProfile::Smooth).unwrap();
        worst[2] = worst[2].max(loc.residual(&jet_free).unwrap());
    }
    let constant = GridFunction::from_fn(&grid, Parity::Even, |_| 4.0);
    let g0 = solve_bvp(&constant).unwrap().g.sup_norm();
    gate(
        worst.iter().all(|&w| w <= 1e-7) && g0 <= 1e-12,
        format!(
            "residual ivp {:.1e}, bvp {:.1e}, localized {:.1e}; BVP of constant {g0:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn weighted_suite() -> Verdict {
    let p = profile(NODES);
    let w = default_wp(&p);
    let (base, l2_log) = (-8.0 * w.l1.ln(), (w.l2 / w.l1).ln());
    let phi_l1 = log_weight_phi(w.l1, &w) == base - w.k * (w.l1 / w.l1).ln();
    let phi_l2 = log_weight_phi(w.l2, &w) == base - w.k * l2_log;
    let psi_l1 = log_weight_psi(w.l1, &w) == -w.k * (w.l1 / w.l1).ln();
    let psi_l2 = log_weight_psi(w.l2, &w) == -w.k * l2_log + 6.5 * ((w.half_angle - w.l2) / (w.half_angle - w.l2)).ln();
    let continuous = phi_l1 && phi_l2 && psi_l1 && psi_l2;
    let forms = WeightedForms::new(&p.grid, w).unwrap();
    let samples = random_even_samples(&p.grid, 100, 0);
    let min_norm = samples.iter().map(|f| forms.inner(f, f).unwrap()).fold(f64::INFINITY, f64::min);
    let coarse = AngularGrid::clustered(p.half_angle, 128).unwrap();
    let a = verify_inequalities(&random_even_samples(&coarse, 12, 5), &w).unwrap();
    let b = verify_inequalities(&random_even_samples(&p.grid, 12, 5), &w).unwrap();
    let pairs = [
        ("equivalence", a.equivalence_upper.max(a.equivalence_lower), b.equivalence_upper.max(b.equivalence_lower)),
        ("embedding", a.embedding, b.embedding),
        ("hardy", a.hardy, b.hardy),
        ("algebra", a.algebra, b.algebra),
        ("interpolation", a.interpolation[0], b.interpolation[0]),
    ];
    let drift = pairs.iter().map(|(_, x, y)| (x / y).max(y / x)).fold(0.0, f64::max);
    let finite = pairs.iter().all(|(_, x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        && a.interpolation.iter().chain(&b.interpolation).all(|c| c.is_finite());
    let hardy_ok = b.hardy <= b.hardy_bound;
    let list: Vec<String> = pairs.iter().map(|(n, _, y)| format!("{n} {y:.3}")).collect();
    gate(
        continuous && min_norm > 0.0 && finite && drift <= 2.0 && hardy_ok,
        format!(
            "weights continuous: {continuous}; min |f|^2 over 100 samples = {min_norm:.2e}; constants {}; \
             max drift 128->256 = {drift:.3}; hardy {:.2e} <= {:.2e}",
            list.join(", "),
            b.hardy,
            b.hardy_bound
        ),
    )
}

fn operator_decomposition() -> Verdict {
    let p = profile(NODES);
    let wp = default_wp(&p);
    let ranks: Vec<(usize, f64)> = [64usize, 128, 256]
        .iter()
        .map(|&n| {
            let lin = Linearization::new(&p.resample(n).unwrap(), wp).unwrap();
            let full = lin.assemble(OperatorLabel::Full).unwrap();
            let bar = lin.assemble(OperatorLabel::Bar).unwrap();
            let k = lin.assemble(OperatorLabel::Compact).unwrap();
            let gap = (&full.entries - &bar.entries - &k.entries).abs().max();
            (k.numerical_rank(RANK_CUTOFF), gap)
        })
        .collect();
    let gap = ranks.iter().map(|r| r.1).fold(0.0, f64::max);
    let stable = ranks.windows(2).all(|w| w[0].0.abs_diff(w[1].0) <= 1);
    let pass = gap <= 1e-10 && ranks.iter().all(|r| r.0 <= 8) && stable;
    gate(
        pass,
        format!(
            "max |L - L_bar - L_K| = {gap:.1e}; rank of L_K at n = 64/128/256: {}/{}/{}",
            ranks[0].0, ranks[1].0, ranks[2].0
        ),
    )
}

fn coercivity() -> Verdict {
    let p = profile(NODES);
    let rep = coercivity_quotient(&p, &default_wp(&p), &CoercivityOptions::default()).unwrap();
    let a = rep.last();
    gate(
        rep.certified(),
        format!(
            "after {} attempt(s) at l1 = {}, B = {}: min quotient {:.4} over {} samples, symmetrized eigenvalue {:.4}",
            rep.attempts.len(),
            a.wp.l1,
            a.wp.b,
            a.min_quotient,
            rep.samples,
            a.min_eigenvalue
        ),
    )
}

fn nonlinear_consistency() -> Verdict {
    let p = profile(NODES);
    let lin = Linearization::new(&p, default_wp(&p)).unwrap();
    let bg = lin.background.clone();
    let worst = random_even_samples(lin.grid(), 20, 11)
        .par_iter()
        .map(|f| {
            let f = f.scale(0.1 / f.sup_norm());
            let lhs = rhs_logarithmic_about(&bg, &f).unwrap();
            let rhs = lin.apply_n(&f, &f).unwrap().sub(&lin.apply_l(&f).unwrap()).unwrap();
            lhs.max_abs_diff(&rhs)
        })
        .reduce(|| 0.0, f64::max);
    gate(worst <= 1e-9, format!("max |rhs(M* + f) + L f - N(f, f)| over 20 samples = {worst:.1e}"))
}

fn decay_experiment() -> Verdict {
    let p = profile(NODES);
    let rep = run_decay_experiment(&p, 0.02 * p.half_angle, 5.0, &DecayOptions::default()).unwrap();
    let curve: Vec<String> = rep.series.iter().step_by(5).map(|x| format!("{:.2}:{:.2e}", x.s, x.sup)).collect();
    let first = rep.series.first().unwrap().sup;
    let last = rep.series.last().unwrap().sup;
    Verdict {
        pass: rep.decayed,
        finding: true,
        detail: format!("sup |M - M*| {first:.3e} -> {last:.3e}; curve (s:sup) {}", curve.join(" ")),
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Verdict)> = vec![
        ("trivial solution", trivial_solution),
        ("profile at A = 1", unit_profile),
        ("monotonicity identity", monotonicity_identity),
        ("shooting trend", shooting_trend),
        ("stationarity", stationarity),
        ("self-similar blow-up", self_similar_blowup),
        ("Biot-Savart residual", biot_savart_residuals),
        ("weighted-space suite", weighted_suite),
        ("operator decomposition", operator_decomposition),
        ("coercivity certification", coercivity),
        ("nonlinear consistency", nonlinear_consistency),
        ("decay experiment", decay_experiment),
    ];
    let start = Instant::now();
    let verdicts: Vec<(Verdict, f64)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let t = Instant::now();
            let v = f();
            (v, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for ((name, _), (v, secs)) in criteria.iter().zip(&verdicts) {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let kind = if v.finding { " [finding]" } else { "" };
        println!("{tag} {name}{kind} ({secs:.1}s): {}", v.detail);
        if !v.pass && !v.finding {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} criteria, {failed} gating failure(s), {:.1}s",
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
