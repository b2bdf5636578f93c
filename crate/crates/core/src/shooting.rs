//! Outer shooting problem: choose A so that the first root L(A) of G meets a target.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::{root_angle_with, ProfileOptions};

pub const DEFAULT_BRACKET: (f64, f64) = (1e-3, 8.0);

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub profile: ProfileOptions,
    /// Accept once achieved_L − target_L lies in [0, this).
    pub tolerance: f64,
    pub min_width: f64,
    /// Log-spaced A values evaluated concurrently before bisection.
    pub sweep_points: usize,
    pub max_iterations: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            profile: ProfileOptions::default(),
            tolerance: 1e-4,
            min_width: 1e-10,
            sweep_points: 9,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub target_l: f64,
    pub a_star: f64,
    pub achieved_l: f64,
    pub iterations: usize,
    /// (A, L(A)) for every evaluation, sorted by A.
    pub sweep: Vec<(f64, f64)>,
}

pub fn root_angle(a_param: f64) -> Result<f64> {
    root_angle_with(a_param, &ProfileOptions::default())
}

/// L(A) for each A, evaluated in parallel.
pub fn sweep(params: &[f64], options: &ProfileOptions) -> Result<Vec<(f64, f64)>> {
    params.par_iter().map(|&a| root_angle_with(a, options).map(|l| (a, l))).collect()
}

pub fn shoot(target_l: f64, bracket: (f64, f64)) -> Result<ShootingResult> {
    shoot_with(target_l, bracket, &ShootOptions::default())
}

/// Bisection in log A on L(A) − target_L, keeping the small-A end at or above the target.
pub fn shoot_with(target_l: f64, bracket: (f64, f64), options: &ShootOptions) -> Result<ShootingResult> {
    if target_l >= FRAC_PI_2 {
        return Err(Error::ImpossibleTarget(target_l));
    }
    if !(target_l > 0.0) {
        return Err(Error::Domain(format!("target L = {target_l} must be positive")));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Domain(format!("bracket ({lo}, {hi}) must satisfy 0 < A_lo < A_hi")));
    }
    let k = options.sweep_points.max(2);
    let params: Vec<f64> = (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect();
    let mut evals = sweep(&params, &options.profile)?;
    let (l_lo, l_hi) = (evals[0].1, evals[k - 1].1);
    if !(l_lo >= target_l && l_hi <= target_l) {
        return Err(Error::Bracket { lo, hi, l_lo, l_hi });
    }
    let mut a = evals[0];
    let mut b = evals[k - 1];
    for w in evals.windows(2) {
        if w[0].1 >= target_l && w[1].1 < target_l {
            a = w[0];
            b = w[1];
            break;
        }
    }
    let mut iterations = 0;
    while a.1 - target_l >= options.tolerance && b.0 - a.0 >= options.min_width {
        if iterations == options.max_iterations {
            return Err(Error::NoConvergence { shrinks: iterations, radius: b.0 - a.0 });
        }
        let mid = (a.0 * b.0).sqrt();
        let l = root_angle_with(mid, &options.profile)?;
        evals.push((mid, l));
        if l >= target_l {
            a = (mid, l);
        } else {
            b = (mid, l);
        }
        iterations += 1;
    }
    evals.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(ShootingResult { target_l, a_star: a.0, achieved_l: a.1, iterations, sweep: evals })
}

/// Whether L strictly decreases along A sorted ascending.
pub fn strictly_decreasing(sweep: &[(f64, f64)]) -> bool {
    sweep.windows(2).all(|w| w[1].1 < w[0].1)
}
