use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{matvec, Parity};

/// Half of the Chebyshev–Lobatto grid of degree `big_n = 2(n − 1)` on [−L, L].
#[derive(Debug)]
pub(crate) struct Chebyshev {
    l: f64,
    n: usize,
    big_n: usize,
    full_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// Folded values → Chebyshev coefficients, by parity.
    coeff: [DMatrix<f64>; 2],
}

impl Chebyshev {
    pub fn new(l: f64, n: usize) -> Self {
        let big_n = 2 * (n - 1);
        let nf = big_n as f64;
        let full_nodes: Vec<f64> = (0..=big_n)
            .map(|j| {
                if j == 0 {
                    -l
                } else if j == big_n {
                    l
                } else {
                    l * ((2.0 * j as f64 - nf) * PI / (2.0 * nf)).sin()
                }
            })
            .collect();
        let bary: Vec<f64> = (0..=big_n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == big_n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let mut me = Self { l, n, big_n, full_nodes, bary, coeff: [DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)] };
        me.coeff = [me.build_coeff(Parity::Even), me.build_coeff(Parity::Odd)];
        me
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.full_nodes[self.n - 1..].to_vec()
    }

    fn center(&self) -> usize {
        self.n - 1
    }

    /// Half index and sign of full index `j`.
    fn fold(&self, j: usize, parity: Parity) -> (usize, f64) {
        let c = self.center();
        if j >= c {
            (j - c, 1.0)
        } else {
            (c - j, parity.sign())
        }
    }

    fn diff(&self, a: usize, b: usize) -> f64 {
        let nf = self.big_n as f64;
        let s = (a + b) as f64 - nf;
        let d = a as f64 - b as f64;
        2.0 * self.l * (s * PI / (2.0 * nf)).cos() * (d * PI / (2.0 * nf)).sin()
    }

    pub fn derivative(&self, parity: Parity) -> DMatrix<f64> {
        self.derivative_of_order(parity, 1)
    }

    /// Folded `order`-th derivative matrix built row by row with the
    /// recursion D⁽ᵏ⁾ᵢⱼ = k/(yᵢ − yⱼ)·(wⱼ/wᵢ·D⁽ᵏ⁻¹⁾ᵢᵢ − D⁽ᵏ⁻¹⁾ᵢⱼ) and
    /// negative-sum diagonals at every order.
    pub fn derivative_of_order(&self, parity: Parity, order: usize) -> DMatrix<f64> {
        let n = self.n;
        let full = self.big_n + 1;
        let mut m = DMatrix::zeros(n, n);
        let out_parity = if order % 2 == 0 { parity } else { parity.flip() };
        let mut prev = vec![0.0; full];
        let mut cur = vec![0.0; full];
        for i in 0..n {
            if i == 0 && out_parity == Parity::Odd {
                continue;
            }
            let a = self.center() + i;
            prev.iter_mut().for_each(|v| *v = 0.0);
            prev[a] = 1.0;
            for k in 1..=order {
                let mut diag = 0.0;
                for b in 0..full {
                    if b == a {
                        continue;
                    }
                    let v = k as f64 / self.diff(a, b) * (self.bary[b] / self.bary[a] * prev[a] - prev[b]);
                    cur[b] = v;
                    diag -= v;
                }
                cur[a] = diag;
                std::mem::swap(&mut prev, &mut cur);
            }
            for b in 0..full {
                let (col, s) = self.fold(b, parity);
                m[(i, col)] += s * prev[b];
            }
        }
        if parity == Parity::Odd {
            m.column_mut(0).fill(0.0);
        }
        m
    }

    fn build_coeff(&self, parity: Parity) -> DMatrix<f64> {
        let big = self.big_n;
        let mut c = DMatrix::zeros(big + 1, self.n);
        let want = match parity {
            Parity::Even => 0,
            Parity::Odd => 1,
        };
        for k in 0..=big {
            if k % 2 != want {
                continue;
            }
            let ck = if k == 0 || k == big { 2.0 } else { 1.0 };
            let scale = 2.0 / (big as f64 * ck);
            for j in 0..=big {
                let delta = if j == 0 || j == big { 0.5 } else { 1.0 };
                let r = (k * (big - j)) % (2 * big);
                let t = (PI * r as f64 / big as f64).cos();
                let (col, s) = self.fold(j, parity);
                c[(k, col)] += scale * delta * s * t;
            }
        }
        if parity == Parity::Odd {
            c.column_mut(0).fill(0.0);
        }
        c
    }

    /// Antiderivative coefficients (vanishing constant dropped).
    fn antiderivative_coeffs(a: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; a.len() + 1];
        for (k, &ak) in a.iter().enumerate() {
            if ak == 0.0 {
                continue;
            }
            match k {
                0 => b[1] += ak,
                1 => b[2] += ak / 4.0,
                _ => {
                    b[k + 1] += ak / (2.0 * (k as f64 + 1.0));
                    b[k - 1] -= ak / (2.0 * (k as f64 - 1.0));
                }
            }
        }
        b
    }

    pub fn cumulative(&self, parity: Parity) -> DMatrix<f64> {
        let big = self.big_n;
        let n = self.n;
        // P[i][k] = A_k(x_i) − A_k(0), A_k the antiderivative of T_k.
        let t_at = |m: usize, i: usize| -> f64 {
            let r = (m * (big - 2 * i)) % (4 * big);
            (PI * r as f64 / (2.0 * big as f64)).cos()
        };
        let t_zero = |m: usize| -> f64 {
            match m % 4 {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            }
        };
        let mut p = DMatrix::zeros(n, big + 1);
        for i in 0..n {
            for k in 0..=big {
                let a = |m: usize| t_at(m, i) - t_zero(m);
                let v = match k {
                    0 => a(1),
                    1 => a(2) / 4.0,
                    _ => a(k + 1) / (2.0 * (k as f64 + 1.0)) - a(k - 1) / (2.0 * (k as f64 - 1.0)),
                };
                p[(i, k)] = v;
            }
        }
        let mut s = (p * &self.coeff[parity_index(parity)]) * self.l;
        s.row_mut(0).fill(0.0);
        s
    }

    pub fn interpolation_row(&self, theta: f64, parity: Parity) -> Vec<f64> {
        let mut row = vec![0.0; self.n];
        if let Some(j) = self.full_nodes.iter().position(|&y| y == theta) {
            let (col, s) = self.fold(j, parity);
            if !(parity == Parity::Odd && col == 0) {
                row[col] = s;
            }
            return row;
        }
        let q: Vec<f64> = self.full_nodes.iter().zip(&self.bary).map(|(y, w)| w / (theta - y)).collect();
        let denom: f64 = q.iter().sum();
        for (j, qj) in q.iter().enumerate() {
            let (col, s) = self.fold(j, parity);
            row[col] += s * qj / denom;
        }
        if parity == Parity::Odd {
            row[0] = 0.0;
        }
        row
    }

    /// Rows mapping folded values to the derivative of the given order at points with |θ| < L,
    /// summed in the Chebyshev basis.
    pub fn derivative_rows(&self, points: &[f64], parity: Parity, order: usize) -> DMatrix<f64> {
        let c = &self.coeff[parity_index(parity)];
        let mut out = DMatrix::zeros(points.len(), self.n);
        let mut basis = DMatrix::zeros(1, self.big_n + 1);
        let scale = self.l.powi(-(order as i32));
        for (i, &x) in points.iter().enumerate() {
            let y = x / self.l;
            let t = y.acos();
            let (sin_t, one_minus) = (t.sin(), 1.0 - y * y);
            for k in 0..=self.big_n {
                let kf = k as f64;
                let mut d = [(kf * t).cos(), kf * (kf * t).sin() / sin_t, 0.0];
                for m in 0..order.saturating_sub(1) {
                    let mf = m as f64;
                    d[2] = ((2.0 * mf + 1.0) * y * d[1] - (kf * kf - mf * mf) * d[0]) / one_minus;
                    d = [d[1], d[2], 0.0];
                }
                basis[(0, k)] = if order == 0 { d[0] } else { d[1] } * scale;
            }
            out.row_mut(i).copy_from(&(&basis * c));
        }
        out
    }

    /// Folded values → values with the k-th Chebyshev coefficient scaled by exp(−α(k/N)^p).
    pub fn filter(&self, parity: Parity, alpha: f64, power: i32) -> DMatrix<f64> {
        let big = self.big_n;
        let mut synth = DMatrix::zeros(self.n, big + 1);
        for i in 0..self.n {
            let r = self.center() + i;
            for k in 0..=big {
                let sigma = (-alpha * (k as f64 / big as f64).powi(power)).exp();
                let idx = (k * (big - r)) % (2 * big);
                synth[(i, k)] = sigma * (PI * idx as f64 / big as f64).cos();
            }
        }
        let mut m = synth * &self.coeff[parity_index(parity)];
        if parity == Parity::Odd {
            m.row_mut(0).fill(0.0);
        }
        m
    }

    pub fn antiderivative(&self, values: &[f64], parity: Parity, theta: f64) -> f64 {
        let a = matvec(&self.coeff[parity_index(parity)], values);
        let b = Self::antiderivative_coeffs(&a);
        let x = (theta / self.l).clamp(-1.0, 1.0);
        self.l * (clenshaw(&b, x) - clenshaw(&b, 0.0))
    }
}

fn parity_index(p: Parity) -> usize {
    match p {
        Parity::Even => 0,
        Parity::Odd => 1,
    }
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c[0]
}
