use nalgebra::DMatrix;

use super::Parity;
use crate::quadrature::gauss_legendre_on;

/// Width of the local Lagrange stencils.
pub(crate) const STENCIL: usize = 9;

#[derive(Debug)]
pub(crate) struct Uniform {
    l: f64,
    n: usize,
    h: f64,
}

impl Uniform {
    pub fn new(l: f64, n: usize) -> Self {
        Self { l, n, h: l / (n - 1) as f64 }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| if i == self.n - 1 { self.l } else { i as f64 * self.h }).collect()
    }

    fn stencil(&self, t: f64) -> Vec<i64> {
        let last = self.n as i64 - 1;
        let w = STENCIL as i64;
        let lo = ((t / self.h).round() as i64 - w / 2).clamp(-last, last - (w - 1));
        (lo..lo + w).collect()
    }

    fn position(&self, e: i64) -> f64 {
        let p = self.nodes()[e.unsigned_abs() as usize];
        if e < 0 {
            -p
        } else {
            p
        }
    }

    fn fold_into(&self, row: &mut [f64], stencil: &[i64], weights: &[f64], parity: Parity, scale: f64) {
        for (&e, &w) in stencil.iter().zip(weights) {
            let (col, s) = if e >= 0 { (e as usize, 1.0) } else { ((-e) as usize, parity.sign()) };
            if parity == Parity::Odd && col == 0 {
                continue;
            }
            row[col] += scale * s * w;
        }
    }

    fn local_weights(&self, t: f64, order: usize) -> (Vec<i64>, Vec<f64>) {
        let st = self.stencil(t);
        let x: Vec<f64> = st.iter().map(|&e| self.position(e)).collect();
        let c = fornberg(t, &x, order);
        (st, c[order].clone())
    }

    pub fn derivative(&self, parity: Parity) -> DMatrix<f64> {
        self.derivative_of_order(parity, 1)
    }

    pub fn derivative_of_order(&self, parity: Parity, order: usize) -> DMatrix<f64> {
        let out_parity = if order % 2 == 0 { parity } else { parity.flip() };
        let nodes = self.nodes();
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, &t) in nodes.iter().enumerate() {
            if i == 0 && out_parity == Parity::Odd {
                continue;
            }
            let (st, w) = self.local_weights(t, order);
            let mut row = vec![0.0; self.n];
            self.fold_into(&mut row, &st, &w, parity, 1.0);
            for (j, r) in row.into_iter().enumerate() {
                m[(i, j)] = r;
            }
        }
        m
    }

    /// ∫ over [a, b] of the local interpolant centred on the interval.
    fn piece_row(&self, a: f64, b: f64, parity: Parity) -> Vec<f64> {
        let mut row = vec![0.0; self.n];
        if b <= a {
            return row;
        }
        let st = self.stencil(0.5 * (a + b));
        let x: Vec<f64> = st.iter().map(|&e| self.position(e)).collect();
        let (q, wq) = gauss_legendre_on(STENCIL.div_ceil(2) + 1, a, b);
        for (qi, wi) in q.iter().zip(&wq) {
            let c = fornberg(*qi, &x, 0);
            self.fold_into(&mut row, &st, &c[0], parity, *wi);
        }
        row
    }

    pub fn cumulative(&self, parity: Parity) -> DMatrix<f64> {
        let nodes = self.nodes();
        let mut m = DMatrix::zeros(self.n, self.n);
        let mut acc = vec![0.0; self.n];
        for i in 1..self.n {
            let piece = self.piece_row(nodes[i - 1], nodes[i], parity);
            for (a, p) in acc.iter_mut().zip(&piece) {
                *a += p;
            }
            for (j, a) in acc.iter().enumerate() {
                m[(i, j)] = *a;
            }
        }
        m
    }

    pub fn interpolation_row(&self, theta: f64, parity: Parity) -> Vec<f64> {
        let (st, w) = self.local_weights(theta, 0);
        let mut row = vec![0.0; self.n];
        self.fold_into(&mut row, &st, &w, parity, 1.0);
        row
    }

    pub fn antiderivative(&self, values: &[f64], parity: Parity, theta: f64, cumulative: &DMatrix<f64>) -> f64 {
        let t = theta.abs().min(self.l);
        let k = ((t / self.h).floor() as usize).min(self.n - 2);
        let base: f64 = cumulative.row(k).iter().zip(values).map(|(a, b)| a * b).sum();
        let piece = self.piece_row(self.nodes()[k], t, parity);
        let tail: f64 = piece.iter().zip(values).map(|(a, b)| a * b).sum();
        let v = base + tail;
        if theta < 0.0 {
            -parity.sign() * v
        } else {
            v
        }
    }
}

/// Finite-difference weights of orders 0..=m at `z` for nodes `x` (Fornberg 1988).
pub(crate) fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let np = x.len();
    let mut c = vec![vec![0.0; np]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
