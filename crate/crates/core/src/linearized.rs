//! The linearization ℒ of the logarithmic-time system about a profile, its splitting
//! ℒ = L̄ + ℒ_K into a localized part and a finite-rank remainder, the quadratic term N,
//! and the discrete diagnostics built on them (rank, coercivity, spectrum).
//!
//!   ℒf = f + 2G*f' + 2FM*' − G*'f − F'M* − 2M*F tanθ − 2fG* tanθ,  F = BVP stream of f,
//!   L̄f = same with (f, F) ↦ (f̃, G̃), f̃ = f − ℙ₂f, G̃ = G̃_loc − G̃_nl, plus ℙ₂f,
//!   N(f, g) = −2F g' + F' g + 2gF tanθ,
//!
//! so that the s-frame right-hand side at M* + f equals −ℒf + N(f, f). Products F·M*' are
//! evaluated as (F/G*)·(G*M*') with both factors bounded up to θ = L.

use std::sync::Arc;

pub use nalgebra::Complex;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::biot_savart::{solve_bvp, solve_localized, BumpProfile, StreamSolution};
use crate::error::{Error, Result};
use crate::evolution::Background;
use crate::grid::{AngularGrid, GridFunction, Parity};
use crate::profile::ProfilePair;
use crate::samples::random_even_samples;
use crate::weighted::{taylor_part, WeightParams, WeightedForms};

/// Largest grid for dense assembly.
pub const MAX_DENSE_NODES: usize = 1024;
/// Relative singular-value cutoff for numerical rank.
pub const RANK_CUTOFF: f64 = 1e-8;
/// Retries of the coercivity certification, each halving ℓ₁ and doubling B.
pub const COERCIVITY_RETRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorLabel {
    Full,
    Bar,
    Compact,
    /// g ↦ N(f, g) for a fixed f.
    FrozenNonlinear,
}

impl OperatorLabel {
    pub fn name(self) -> &'static str {
        match self {
            OperatorLabel::Full => "L_full",
            OperatorLabel::Bar => "L_bar",
            OperatorLabel::Compact => "L_K",
            OperatorLabel::FrozenNonlinear => "N_frozen",
        }
    }
}

/// Dense matrix acting on nodal values of even functions.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub grid: Arc<AngularGrid>,
    pub entries: DMatrix<f64>,
    pub label: OperatorLabel,
}

impl OperatorMatrix {
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let v = &self.entries * DVector::from_column_slice(f.values());
        f.with_values(v.as_slice().to_vec(), Parity::Even)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.entries.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Number of singular values above `cutoff`·σ₁.
    pub fn numerical_rank(&self, cutoff: f64) -> usize {
        let s = self.singular_values();
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        s.iter().filter(|&&v| v > cutoff * top).count()
    }
}

/// Operators about one profile with fixed weights and cutoff profile.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub background: Arc<Background>,
    pub wp: WeightParams,
    pub bump: BumpProfile,
}

impl Linearization {
    pub fn new(profile: &ProfilePair, wp: WeightParams) -> Result<Self> {
        Self::with_bump(profile, wp, BumpProfile::Smooth)
    }

    pub fn with_bump(profile: &ProfilePair, wp: WeightParams, bump: BumpProfile) -> Result<Self> {
        wp.validate()?;
        Ok(Self { background: Arc::new(Background::new(profile)?), wp, bump })
    }

    pub fn grid(&self) -> &Arc<AngularGrid> {
        &self.background.grid
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.parity() != Parity::Even {
            return Err(Error::Parity("linearized operators act on even functions".into()));
        }
        if !f.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// u + 2G*u' + 2SM*' − G*'u − S'M* − 2M*S tanθ − 2uG* tanθ.
    fn transport_stretch(&self, u: &GridFunction, s: &StreamSolution) -> Result<Vec<f64>> {
        let bg = &self.background;
        let p = &bg.profile;
        let ratio = bg.ratio(s);
        let up = u.differentiate(1)?;
        let th = bg.grid.nodes();
        Ok((0..th.len())
            .map(|i| {
                let tan = th[i].tan();
                let (ms, gs, gps, gm) = (p.m.values()[i], p.g.values()[i], p.gp.values()[i], p.gm_prime.values()[i]);
                let (uv, sg, sgp) = (u.values()[i], s.g.values()[i], s.gp.values()[i]);
                uv + 2.0 * gs * up.values()[i] + 2.0 * ratio[i] * gm
                    - gps * uv
                    - sgp * ms
                    - 2.0 * ms * sg * tan
                    - 2.0 * uv * gs * tan
            })
            .collect())
    }

    pub fn apply_l(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let v = self.transport_stretch(f, &solve_bvp(f)?)?;
        f.with_values(v, Parity::Even)
    }

    pub fn apply_l_bar(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        let jet = taylor_part(f)?;
        let rem = f.sub(&jet)?;
        let (_, g_tilde) = solve_localized(&rem, &self.wp, self.bump)?;
        let v = self.transport_stretch(&rem, &g_tilde)?;
        let v = v.iter().zip(jet.values()).map(|(a, b)| a + b).collect();
        f.with_values(v, Parity::Even)
    }

    pub fn apply_l_k(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply_l(f)?.sub(&self.apply_l_bar(f)?)
    }

    /// N(f, g) = −2F g' + F' g + 2gF tanθ with F the BVP stream of f.
    pub fn apply_n(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        self.check(g)?;
        let st = solve_bvp(f)?;
        let gp = g.differentiate(1)?;
        let th = self.grid().nodes();
        let v = (0..th.len())
            .map(|i| {
                let (ff, ffp, gv) = (st.g.values()[i], st.gp.values()[i], g.values()[i]);
                -2.0 * ff * gp.values()[i] + ffp * gv + 2.0 * gv * ff * th[i].tan()
            })
            .collect();
        g.with_values(v, Parity::Even)
    }

    pub fn apply(&self, label: OperatorLabel, f: &GridFunction) -> Result<GridFunction> {
        match label {
            OperatorLabel::Full => self.apply_l(f),
            OperatorLabel::Bar => self.apply_l_bar(f),
            OperatorLabel::Compact => self.apply_l_k(f),
            OperatorLabel::FrozenNonlinear => Err(Error::Precondition(
                "the frozen nonlinearity needs its first argument; use assemble_frozen_nonlinear".into(),
            )),
        }
    }

    fn assemble_columns(
        &self,
        label: OperatorLabel,
        column: impl Fn(&GridFunction) -> Result<GridFunction> + Sync,
    ) -> Result<OperatorMatrix> {
        let grid = self.grid().clone();
        let n = grid.len();
        if n > MAX_DENSE_NODES {
            return Err(Error::MemoryGuard(n));
        }
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                column(&GridFunction::new(grid.clone(), e, Parity::Even)?).map(GridFunction::into_values)
            })
            .collect::<Result<_>>()?;
        let entries = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        Ok(OperatorMatrix { grid, entries, label })
    }

    /// Column j is the operator applied to the j-th nodal unit vector.
    pub fn assemble(&self, label: OperatorLabel) -> Result<OperatorMatrix> {
        self.assemble_columns(label, |e| self.apply(label, e))
    }

    pub fn assemble_frozen_nonlinear(&self, f: &GridFunction) -> Result<OperatorMatrix> {
        self.check(f)?;
        self.assemble_columns(OperatorLabel::FrozenNonlinear, |e| self.apply_n(f, e))
    }

    /// Smallest eigenvalue of the symmetric part of L̄ in the H̃⁴ inner product over the even
    /// Chebyshev modes T₂ₖ(θ/L), k < n/8, keeping directions whose H̃⁴ factor exceeds `cutoff`·σ₁.
    pub fn symmetrized_min_eigenvalue(&self, l_bar: &OperatorMatrix, cutoff: f64) -> Result<f64> {
        let forms = WeightedForms::new(self.grid(), self.wp)?;
        let modes = (self.grid().len() / SMOOTH_MODE_FRACTION).max(4);
        symmetrized_min_eigenvalue(&forms, &l_bar.entries, &smooth_modes(self.grid(), modes), cutoff)
    }
}

/// The eigenvalue test uses n / this many smooth modes.
pub const SMOOTH_MODE_FRACTION: usize = 8;

/// Nodal values of T₂ₖ(θ/L) for k < `count`, one per column.
pub fn smooth_modes(grid: &AngularGrid, count: usize) -> DMatrix<f64> {
    let l = grid.half_angle();
    let th = grid.nodes();
    DMatrix::from_fn(th.len(), count, |i, k| ((2 * k) as f64 * (th[i] / l).clamp(-1.0, 1.0).acos()).cos())
}

fn symmetrized_min_eigenvalue(
    forms: &WeightedForms,
    l_bar: &DMatrix<f64>,
    basis: &DMatrix<f64>,
    cutoff: f64,
) -> Result<f64> {
    let full = forms.stacked();
    let a = &full * basis;
    let svd = a.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Eigen("singular vectors unavailable".into())),
    };
    let sigma = &svd.singular_values;
    let top = sigma.max();
    let keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cutoff * top).collect();
    if keep.is_empty() {
        return Err(Error::Eigen("stacked form factor vanishes".into()));
    }
    let k = keep.len();
    let uk = DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, keep[c])]);
    let vk = DMatrix::from_fn(vt.ncols(), k, |r, c| vt[(keep[c], r)] / sigma[keep[c]]);
    let c = uk.transpose() * (&full * l_bar * basis) * vk;
    let sym = (&c + c.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    Ok(eig.min())
}

pub fn apply_l(f: &GridFunction, p: &ProfilePair) -> Result<GridFunction> {
    Linearization::new(p, WeightParams::default_for(p.half_angle)?)?.apply_l(f)
}

pub fn apply_l_bar(f: &GridFunction, p: &ProfilePair, wp: &WeightParams) -> Result<GridFunction> {
    Linearization::new(p, *wp)?.apply_l_bar(f)
}

pub fn apply_n(f: &GridFunction, g: &GridFunction, p: &ProfilePair) -> Result<GridFunction> {
    Linearization::new(p, WeightParams::default_for(p.half_angle)?)?.apply_n(f, g)
}

/// One attempt of the coercivity certification.
#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityAttempt {
    pub wp: WeightParams,
    pub min_quotient: f64,
    pub min_eigenvalue: f64,
    /// Ten equal bins between the smallest and largest quotient.
    pub histogram: Vec<usize>,
    pub histogram_range: (f64, f64),
}

impl CoercivityAttempt {
    pub fn certified(&self) -> bool {
        self.min_quotient > 0.0 && self.min_eigenvalue > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub samples: usize,
    pub seed: u64,
    pub attempts: Vec<CoercivityAttempt>,
}

impl CoercivityReport {
    pub fn certified(&self) -> bool {
        self.attempts.last().is_some_and(CoercivityAttempt::certified)
    }

    pub fn last(&self) -> &CoercivityAttempt {
        self.attempts.last().expect("at least one attempt")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoercivityOptions {
    pub samples: usize,
    pub seed: u64,
    pub retries: usize,
    pub eigen_cutoff: f64,
}

impl Default for CoercivityOptions {
    fn default() -> Self {
        Self { samples: 200, seed: 0, retries: COERCIVITY_RETRIES, eigen_cutoff: RANK_CUTOFF }
    }
}

fn histogram(values: &[f64], bins: usize) -> (Vec<usize>, (f64, f64)) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; bins];
    for &v in values {
        let k = if hi > lo { (((v - lo) / (hi - lo)) * bins as f64) as usize } else { 0 };
        counts[k.min(bins - 1)] += 1;
    }
    (counts, (lo, hi))
}

/// ⟨f, L̄f⟩/⟨f, f⟩ in H̃⁴ for each sample.
pub fn rayleigh_quotients(lin: &Linearization, samples: &[GridFunction]) -> Result<Vec<f64>> {
    let forms = WeightedForms::new(lin.grid(), lin.wp)?;
    samples
        .par_iter()
        .map(|f| {
            let lf = lin.apply_l_bar(f)?;
            Ok(forms.inner(f, &lf)? / forms.inner(f, f)?)
        })
        .collect()
}

/// Samples the H̃⁴ Rayleigh quotient of L̄ and the symmetrized eigenvalue; on failure retries
/// with ℓ₁ halved (ℓ₂, K linked) and B doubled.
pub fn coercivity_quotient(
    p: &ProfilePair,
    wp: &WeightParams,
    options: &CoercivityOptions,
) -> Result<CoercivityReport> {
    if options.samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let mut wp = *wp;
    let mut attempts = Vec::new();
    for attempt in 0..=options.retries {
        if attempt > 0 {
            wp = WeightParams::linked(wp.half_angle, 0.5 * wp.l1, 2.0 * wp.b)?;
        }
        let lin = Linearization::new(p, wp)?;
        let samples = random_even_samples(lin.grid(), options.samples, options.seed);
        let q = rayleigh_quotients(&lin, &samples)?;
        let min_quotient = q.iter().copied().fold(f64::INFINITY, f64::min);
        let l_bar = lin.assemble(OperatorLabel::Bar)?;
        let min_eigenvalue = lin.symmetrized_min_eigenvalue(&l_bar, options.eigen_cutoff)?;
        let (histogram, histogram_range) = histogram(&q, 10);
        let a = CoercivityAttempt { wp, min_quotient, min_eigenvalue, histogram, histogram_range };
        let done = a.certified();
        attempts.push(a);
        if done {
            break;
        }
    }
    Ok(CoercivityReport { samples: options.samples, seed: options.seed, attempts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub nodes: (usize, usize),
    /// Eigenvalues of −ℒ on the coarse grid.
    pub coarse: Vec<Complex<f64>>,
    pub fine: Vec<Complex<f64>>,
    /// Coarse eigenvalues with a fine-grid eigenvalue within the agreement tolerance.
    pub resolved: Vec<Complex<f64>>,
    /// Resolved eigenvalues with nonnegative real part.
    pub unstable: Vec<Complex<f64>>,
    /// ‖(−ℒ − 1)M*‖∞/‖M*‖∞.
    pub translation_residual: f64,
    /// Coarse eigenvalue closest to 1.
    pub nearest_translation: Complex<f64>,
}

/// Relative agreement for an eigenvalue to count as resolved.
pub const SPECTRUM_AGREEMENT: f64 = 1e-3;

pub fn eigenvalues_of_minus_l(lin: &Linearization) -> Result<Vec<Complex<f64>>> {
    let m = lin.assemble(OperatorLabel::Full)?;
    let minus = -m.entries;
    let ev = minus
        .try_schur(1e-12, 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?
        .complex_eigenvalues();
    let mut v: Vec<Complex<f64>> = ev.iter().copied().collect();
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(v)
}

/// Eigenvalues of −ℒ at `nodes` and `2·nodes − 1` grid points with the agreement filter.
pub fn discrete_spectrum(p: &ProfilePair, wp: &WeightParams, nodes: usize) -> Result<SpectrumReport> {
    let fine_nodes = 2 * nodes - 1;
    if fine_nodes > MAX_DENSE_NODES {
        return Err(Error::MemoryGuard(fine_nodes));
    }
    let coarse_lin = Linearization::new(&p.resample(nodes)?, *wp)?;
    let fine_lin = Linearization::new(&p.resample(fine_nodes)?, *wp)?;
    let coarse = eigenvalues_of_minus_l(&coarse_lin)?;
    let fine = eigenvalues_of_minus_l(&fine_lin)?;
    let resolved: Vec<Complex<f64>> = coarse
        .iter()
        .copied()
        .filter(|z| fine.iter().any(|w| (z - w).norm() <= SPECTRUM_AGREEMENT * z.norm().max(1.0)))
        .collect();
    let unstable = resolved.iter().copied().filter(|z| z.re >= 0.0).collect();
    let ms = coarse_lin.background.m();
    let lm = coarse_lin.apply_l(ms)?;
    let translation_residual = lm.add(ms)?.sup_norm() / ms.sup_norm();
    let one = Complex::new(1.0, 0.0);
    let nearest_translation = coarse
        .iter()
        .copied()
        .min_by(|a, b| (a - one).norm().total_cmp(&(b - one).norm()))
        .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
    Ok(SpectrumReport {
        nodes: (nodes, fine_nodes),
        coarse,
        fine,
        resolved,
        unstable,
        translation_residual,
        nearest_translation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::rhs_logarithmic_about;
    use crate::profile::{build_profile, ProfileOptions};

    fn lin(nodes: usize) -> Linearization {
        let o = ProfileOptions { grid_nodes: nodes, ..ProfileOptions::default() };
        let p = build_profile(1.0, &o).unwrap();
        Linearization::new(&p, WeightParams::default_for(p.half_angle).unwrap()).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let l = lin(32);
        let z = GridFunction::zeros(l.grid(), Parity::Even);
        for label in [OperatorLabel::Full, OperatorLabel::Bar, OperatorLabel::Compact] {
            assert_eq!(l.apply(label, &z).unwrap().sup_norm(), 0.0);
        }
        let g = GridFunction::from_fn(l.grid(), Parity::Even, |t| t.cos());
        assert_eq!(l.apply_n(&z, &g).unwrap().sup_norm(), 0.0);
        assert_eq!(l.apply_n(&g, &z).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn linear_and_bilinear() {
        let l = lin(48);
        let f = GridFunction::from_fn(l.grid(), Parity::Even, |t| (2.0 * t).cos() + t.powi(4));
        let g = GridFunction::from_fn(l.grid(), Parity::Even, |t| 1.0 / (1.0 + t * t));
        let combo = f.scale(2.0).axpy(-3.0, &g).unwrap();
        let lhs = l.apply_l(&combo).unwrap();
        let rhs = l.apply_l(&f).unwrap().scale(2.0).axpy(-3.0, &l.apply_l(&g).unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * (1.0 + lhs.sup_norm()));
        let n1 = l.apply_n(&f.scale(2.0), &g.scale(3.0)).unwrap();
        let n2 = l.apply_n(&f, &g).unwrap().scale(6.0);
        assert!(n1.max_abs_diff(&n2) <= 1e-12 * (1.0 + n2.sup_norm()));
    }

    #[test]
    fn jets_pass_through_l_bar() {
        let l = lin(48);
        let q = GridFunction::from_fn(l.grid(), Parity::Even, |t| 2.0 - 3.0 * t * t);
        assert!(l.apply_l_bar(&q).unwrap().max_abs_diff(&q) < 1e-9);
        let quartic = GridFunction::from_fn(l.grid(), Parity::Even, |t| t.powi(4));
        let out = l.apply_l_bar(&quartic).unwrap();
        let jet = out.taylor_jet(2).unwrap().derivatives;
        assert!(jet[0].abs() < 1e-9 && jet[2].abs() < 1e-6, "{jet:?}");
    }

    #[test]
    fn nonlinear_identity() {
        let l = lin(64);
        let bg = &l.background;
        for f in random_even_samples(l.grid(), 5, 3) {
            let f = f.scale(0.01);
            let lhs = rhs_logarithmic_about(bg, &f).unwrap();
            let rhs = l.apply_n(&f, &f).unwrap().sub(&l.apply_l(&f).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) <= 1e-9, "{}", lhs.max_abs_diff(&rhs));
        }
    }

    #[test]
    fn finite_difference_linearization() {
        let l = lin(64);
        let bg = &l.background;
        let ms = bg.m();
        let eps = 1e-5;
        let plus = rhs_logarithmic_about(bg, &ms.scale(eps)).unwrap();
        let minus = rhs_logarithmic_about(bg, &ms.scale(-eps)).unwrap();
        let fd = plus.sub(&minus).unwrap().scale(-0.5 / eps);
        let lm = l.apply_l(ms).unwrap();
        assert!(fd.max_abs_diff(&lm) <= 1e-4 * lm.sup_norm());
        let one_sided = plus.scale(-1.0 / eps);
        assert!(one_sided.max_abs_diff(&lm) <= 1e-4 * lm.sup_norm());
    }

    #[test]
    fn translation_mode() {
        let l = lin(128);
        let ms = l.background.m();
        let r = l.apply_l(ms).unwrap().add(ms).unwrap().sup_norm() / ms.sup_norm();
        assert!(r < 1e-2, "{r}");
    }

    #[test]
    fn decomposition_and_rank() {
        let l = lin(48);
        let full = l.assemble(OperatorLabel::Full).unwrap();
        let bar = l.assemble(OperatorLabel::Bar).unwrap();
        let k = l.assemble(OperatorLabel::Compact).unwrap();
        let gap = (&full.entries - &bar.entries - &k.entries).abs().max();
        assert!(gap <= 1e-10, "{gap}");
        assert!(k.numerical_rank(RANK_CUTOFF) <= 8, "{}", k.numerical_rank(RANK_CUTOFF));
        let ms = l.background.m();
        let direct = l.apply_l(ms).unwrap();
        assert!(full.apply(ms).unwrap().max_abs_diff(&direct) <= 1e-9 * (1.0 + direct.sup_norm()));
    }

    #[test]
    fn spectrum_contains_stable_boundary_mode() {
        let o = ProfileOptions { grid_nodes: 48, ..ProfileOptions::default() };
        let p = build_profile(1.0, &o).unwrap();
        let wp = WeightParams::default_for(p.half_angle).unwrap();
        let s = discrete_spectrum(&p, &wp, 48).unwrap();
        assert_eq!(s.coarse.len(), 48);
        assert_eq!(s.fine.len(), 95);
        let boundary = -1.0 + p.gpl;
        assert!(s.resolved.iter().any(|z| (z.re - boundary).abs() < 1e-3 && z.im.abs() < 1e-9), "{:?}", s.resolved);
        assert!(s.translation_residual < 0.05);
    }

    #[test]
    fn memory_guard() {
        let o = ProfileOptions { grid_nodes: 32, ..ProfileOptions::default() };
        let p = build_profile(1.0, &o).unwrap();
        let wp = WeightParams::default_for(p.half_angle).unwrap();
        assert!(matches!(discrete_spectrum(&p, &wp, 600), Err(Error::MemoryGuard(_))));
    }

    #[test]
    fn constant_quotient_is_one() {
        let l = lin(48);
        let c = GridFunction::from_fn(l.grid(), Parity::Even, |_| 1.0);
        let q = rayleigh_quotients(&l, &[c]).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-9, "{q:?}");
    }

    #[test]
    fn histogram_counts_everything() {
        let (h, (lo, hi)) = histogram(&[0.0, 0.5, 1.0, 1.0], 4);
        assert_eq!(h.iter().sum::<usize>(), 4);
        assert_eq!((lo, hi), (0.0, 1.0));
        assert_eq!(h[3], 2);
    }
}
