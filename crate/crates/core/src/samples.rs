//! Seeded families of smooth even test functions.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{AngularGrid, GridFunction, Parity};

/// Cosine modes in the remainder of each sample.
pub const SAMPLE_MODES: usize = 7;

/// Coefficients (c₀, c₂, a₀ … a₆) of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCoefficients {
    pub c0: f64,
    pub c2: f64,
    pub modes: Vec<f64>,
}

impl SampleCoefficients {
    /// c₀ + c₂θ² + (θ/L)⁴ Σₖ aₖ cos(kπθ/L)/(1+k)².
    pub fn evaluate(&self, theta: f64, half_angle: f64) -> f64 {
        let x = theta / half_angle;
        let tail: f64 =
            self.modes.iter().enumerate().map(|(k, a)| a * (k as f64 * PI * x).cos() / ((1 + k) as f64).powi(2)).sum();
        self.c0 + self.c2 * theta * theta + x.powi(4) * tail
    }
}

/// `count` coefficient sets drawn uniformly from [−1, 1) by a ChaCha8 stream seeded with `seed`.
pub fn sample_coefficients(count: usize, seed: u64) -> Vec<SampleCoefficients> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut draw = || rng.random_range(-1.0..1.0);
            SampleCoefficients { c0: draw(), c2: draw(), modes: (0..SAMPLE_MODES).map(|_| draw()).collect() }
        })
        .collect()
}

pub fn random_even_samples(grid: &Arc<AngularGrid>, count: usize, seed: u64) -> Vec<GridFunction> {
    let l = grid.half_angle();
    sample_coefficients(count, seed)
        .into_iter()
        .map(|c| GridFunction::from_fn(grid, Parity::Even, |t| c.evaluate(t, l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        assert_eq!(sample_coefficients(3, 7), sample_coefficients(3, 7));
        assert_ne!(sample_coefficients(3, 7), sample_coefficients(3, 8));
    }

    #[test]
    fn jet_is_the_quadratic_part() {
        let c = &sample_coefficients(1, 1)[0];
        let grid = AngularGrid::clustered(1.0, 64).unwrap();
        let f = GridFunction::from_fn(&grid, Parity::Even, |t| c.evaluate(t, 1.0));
        let j = f.taylor_jet(2).unwrap().derivatives;
        assert!((j[0] - c.c0).abs() < 1e-10 && (j[2] - 2.0 * c.c2).abs() < 1e-8);
    }
}
