//! Dormand–Prince 5(4) steps.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Result of one step: fifth-order solution and embedded error estimate.
#[derive(Debug, Clone)]
pub struct DpStep {
    pub y: Vec<f64>,
    pub error: Vec<f64>,
}

/// One Dormand–Prince step from (t, y) of size h. `f` returns `None` where the
/// right-hand side is undefined, which rejects the step.
pub fn dopri_step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Option<DpStep>
where
    F: Fn(f64, &[f64]) -> Option<Vec<f64>>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut ys = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..n {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        let ks = f(t + C[s] * h, &ys)?;
        if ks.iter().any(|v| !v.is_finite()) {
            return None;
        }
        k.push(ks);
    }
    let mut y5 = y.to_vec();
    let mut err = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    Some(DpStep { y: y5, error: err })
}

/// Scaled max-norm of the error estimate.
pub fn error_norm(step: &DpStep, y: &[f64], rtol: f64, atol: f64) -> f64 {
    step.error
        .iter()
        .zip(y.iter().zip(&step.y))
        .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Adaptive integration of y' = f(t, y) from t0 to t1.
pub fn integrate<F>(f: &F, t0: f64, y0: &[f64], t1: f64, rtol: f64, atol: f64) -> Option<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Option<Vec<f64>>,
{
    let mut t = t0;
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Some(y);
    }
    let mut h = span / 100.0;
    for _ in 0..1_000_000 {
        if (t1 - t) * span.signum() <= 0.0 {
            return Some(y);
        }
        if (t + h - t1) * span.signum() > 0.0 {
            h = t1 - t;
        }
        match dopri_step(f, t, &y, h) {
            Some(step) => {
                let err = error_norm(&step, &y, rtol, atol);
                if err <= 1.0 {
                    t = if (t + h - t1).abs() < 1e-15 * span.abs() { t1 } else { t + h };
                    y = step.y;
                }
                h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            }
            None => h *= 0.5,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let f = |_: f64, y: &[f64]| Some(vec![y[0]]);
        let y = integrate(&f, 0.0, &[1.0], 1.0, 1e-12, 1e-14).unwrap();
        assert!((y[0] - 1f64.exp()).abs() < 1e-11);
        let f = |_: f64, y: &[f64]| Some(vec![y[1], -4.0 * y[0]]);
        let y = integrate(&f, 0.0, &[0.0, 1.0], 2.0, 1e-12, 1e-14).unwrap();
        assert!((y[0] - 0.5 * 4f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn fifth_order_convergence() {
        let f = |t: f64, _: &[f64]| Some(vec![t.cos()]);
        let e = |h: f64| (dopri_step(&f, 0.0, &[0.0], h).unwrap().y[0] - h.sin()).abs();
        let ratio = e(0.2) / e(0.1);
        assert!(ratio > 40.0, "ratio {ratio}");
    }
}
