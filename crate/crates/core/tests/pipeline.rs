use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use ipm_core::evolution::{
    rhs_logarithmic_about, rhs_physical, run, run_decay_experiment, to_logarithmic, truncation, Background,
    DecayOptions, EvolutionState, Frame, RunOptions,
};
use ipm_core::linearized::{apply_l, discrete_spectrum, Linearization, OperatorLabel};
use ipm_core::profile::{build_profile, ProfileOptions, ProfilePair};
use ipm_core::shooting::{shoot, DEFAULT_BRACKET};
use ipm_core::weighted::WeightParams;
use ipm_core::{Error, GridFunction, Parity};

fn profile(n: usize) -> ProfilePair {
    build_profile(1.0, &ProfileOptions { grid_nodes: n, ..ProfileOptions::default() }).unwrap()
}

#[test]
fn shot_profile_has_target_root() {
    let r = shoot(1.3, DEFAULT_BRACKET).unwrap();
    let p = build_profile(r.a_star, &ProfileOptions { grid_nodes: 64, ..ProfileOptions::default() }).unwrap();
    assert_eq!(p.half_angle, r.achieved_l);
    assert!(p.half_angle >= 1.3 && p.half_angle < FRAC_PI_2);
    assert!(p.gpl < 0.0 && p.holder_alpha >= 0.5);
}

#[test]
fn physical_rhs_of_profile_density_is_itself() {
    let p = profile(128);
    let pstar = p.m.map(Parity::Even, |t, v| v * t.cos());
    let r = rhs_physical(&pstar).unwrap();
    let n = pstar.len();
    let gap = (0..n - 8).map(|i| (r.values()[i] - pstar.values()[i]).abs()).fold(0.0, f64::max);
    assert!(gap < 5e-3, "{gap}");
}

#[test]
fn physical_run_maps_onto_logarithmic_run() {
    let p = profile(64);
    let bg = Arc::new(Background::new(&p).unwrap());
    let w0 = GridFunction::from_fn(&bg.grid, Parity::Even, |t| 0.05 * (2.0 * t).cos() * (1.0 - t / p.half_angle));
    let t_end = 1.0 - (-0.3f64).exp();
    let phys = EvolutionState::about_profile(bg.clone(), w0.clone(), Frame::Physical).unwrap();
    let (phys, _) = run(phys, &RunOptions { dt: 2e-3, t_end, ..RunOptions::default() }).unwrap();
    let mapped = to_logarithmic(&phys).unwrap();
    let log = EvolutionState::about_profile(bg, w0, Frame::Logarithmic).unwrap();
    let (log, _) = run(log, &RunOptions { dt: 2e-3, t_end: 0.3, ..RunOptions::default() }).unwrap();
    assert!((mapped.time - 0.3).abs() < 1e-12);
    assert!(mapped.density().max_abs_diff(&log.density()) < 1e-6);
    assert!(matches!(to_logarithmic(&log), Err(Error::Precondition(_))));
}

#[test]
fn small_perturbation_follows_linearization() {
    let p = profile(64);
    let lin = Linearization::new(&p, WeightParams::default_for(p.half_angle).unwrap()).unwrap();
    let f = GridFunction::from_fn(lin.grid(), Parity::Even, |t| (3.0 * t).cos() * (p.half_angle - t));
    let eps = 1e-4;
    let r = rhs_logarithmic_about(&lin.background, &f.scale(eps)).unwrap().scale(1.0 / eps);
    let l = apply_l(&f, &p).unwrap();
    let gap = r.add(&l).unwrap().sup_norm() / l.sup_norm();
    assert!(gap < 1e-3, "{gap}");
}

#[test]
fn assembled_operator_matches_direct_application() {
    let p = profile(48);
    let lin = Linearization::new(&p, WeightParams::default_for(p.half_angle).unwrap()).unwrap();
    let full = lin.assemble(OperatorLabel::Full).unwrap();
    let ms = lin.background.m();
    let direct = lin.apply_l(ms).unwrap();
    assert!(full.apply(ms).unwrap().max_abs_diff(&direct) <= 1e-9 * (1.0 + direct.sup_norm()));
    assert_eq!(full.label.name(), "L_full");
}

#[test]
fn spectrum_contains_boundary_eigenvalue() {
    let p = profile(64);
    let rep = discrete_spectrum(&p, &WeightParams::default_for(p.half_angle).unwrap(), 48).unwrap();
    assert_eq!(rep.nodes, (48, 95));
    let boundary = -1.0 + p.gpl;
    assert!(rep.resolved.iter().any(|z| (z.re - boundary).abs() < 1e-3 && z.im.abs() < 1e-6));
    assert!(rep.translation_residual < 1e-2);
}

#[test]
fn decay_run_records_initial_truncation() {
    let p = profile(64);
    let a = 0.02 * p.half_angle;
    let rep = run_decay_experiment(&p, a, 0.2, &DecayOptions { record_every: 1, ..DecayOptions::default() }).unwrap();
    let first = rep.series[0];
    assert_eq!(first.s, 0.0);
    let removed = p.m.mul(&truncation(&p.grid, a)).unwrap().sup_norm();
    assert!((first.sup - removed).abs() < 1e-12, "{} {removed}", first.sup);
    assert!(rep.series.windows(2).all(|w| w[1].s > w[0].s));
    assert!(matches!(run_decay_experiment(&p, 0.5, 1.0, &DecayOptions::default()), Err(Error::Precondition(_))));
}
