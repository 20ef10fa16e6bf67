//! Brute-force reference values for the charge module.
//!
//! [`integrated_charge`] integrates the current at a fixed point over time;
//! the interference part of that integral is only conditionally convergent,
//! so it is Abel-regularized (`exp(-eps t)` damping, extrapolated to
//! `eps -> 0`). [`depletion_charge`] uses the continuity equation instead:
//! whatever is left between the probes once the excitation has moved away
//! is what flowed out.
//!
//! Both work on anything implementing [`Excitation`]: a sampled excitation
//! ([`SpectralProbe`], free evolution by direct summation over its spectrum,
//! so probes and times are arbitrary and no time stepping error enters) or a
//! Gaussian packet (closed-form free evolution, no box at all, which is what
//! slow packets need: their interference current dies off only as
//! `t^(-1/2)`).

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::free_propagate;
use crate::gaussian::GaussianPacket;
use crate::grid::Grid;
use crate::scalar::Real;
use crate::units::UnitSystem;
use crate::wave::{PlaneWave, WaveFunction};

/// Current density at `(x, t)`, split as `j = j0 + j1 + jc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSample<T> {
    pub x: T,
    pub t: T,
    pub j_total: T,
    pub j0: T,
    pub j1: T,
    pub jc: T,
}

/// An excitation whose free evolution can be evaluated pointwise.
pub trait Excitation<T: Real>: Sync {
    fn units(&self) -> &UnitSystem<T>;

    /// `(psi1(x, t), d/dx psi1(x, t))`.
    fn eval(&self, x: T, t: T) -> (Complex<T>, Complex<T>);

    /// Largest `|p|` carried with non-negligible weight.
    fn p_max(&self) -> T;

    fn check_probe(&self, _x: T) -> Result<()> {
        Ok(())
    }

    /// Current components at `(x, t)` with the plane wave `pw` as background.
    fn current(&self, pw: &PlaneWave<T>, x: T, t: T) -> CurrentSample<T> {
        let (psi1, d1) = self.eval(x, t);
        assemble(self.units(), pw, x, t, psi1, d1)
    }

    /// `j1 (+ jc)` at `x` for `t = t0 + k step`, `k < count`.
    fn excess_series(&self, pw: &PlaneWave<T>, x: T, t0: T, step: T, count: usize, include_cross: bool) -> Vec<T> {
        (0..count)
            .into_par_iter()
            .map(|k| {
                let c = self.current(pw, x, t0 + step * T::from_usize_lossy(k));
                if include_cross {
                    c.j1 + c.jc
                } else {
                    c.j1
                }
            })
            .collect()
    }
}

fn assemble<T: Real>(
    u: &UnitSystem<T>,
    pw: &PlaneWave<T>,
    x: T,
    t: T,
    psi1: Complex<T>,
    d1: Complex<T>,
) -> CurrentSample<T> {
    let k = u.hbar / u.mass;
    let psi0 = Complex::from_polar(T::one(), pw.p0() * x / u.hbar - u.dispersion(pw.p0()) * t);
    let d0 = psi0 * Complex::new(T::zero(), pw.p0() / u.hbar);
    let j1 = k * (psi1.conj() * d1).im;
    let jc = k * (psi0.conj() * d1 + psi1.conj() * d0).im;
    let j0 = pw.p0() / u.mass;
    CurrentSample { x, t, j_total: j0 + j1 + jc, j0, j1, jc }
}

/// Bins whose amplitude is below this fraction of the largest are dropped.
const PRUNE: f64 = 1e-15;

/// `psi1(x, t)` and `d/dx psi1(x, t)` by direct summation over the spectrum.
#[derive(Debug, Clone)]
pub struct SpectralProbe<T> {
    grid: Grid<T>,
    /// `(p_j, psi1~(p_j) dp / sqrt(2 pi hbar), omega(p_j))`
    bins: Vec<(T, Complex<T>, T)>,
}

impl<T: Real> SpectralProbe<T> {
    pub fn new(psi1: &WaveFunction<T>) -> Self {
        let grid = *psi1.grid();
        let spec = psi1.to_momentum();
        let u = grid.units();
        let w = grid.dp() / (T::lit(2.0) * T::PI() * u.hbar).sqrt();
        let peak = spec.samples().iter().fold(T::zero(), |m, c| m.max(c.norm()));
        let cut = peak * T::lit(PRUNE);
        let bins = spec
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > cut)
            .map(|(j, c)| {
                let p = grid.momentum(j);
                (p, c * w, u.dispersion(p))
            })
            .collect();
        Self { grid, bins }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
}

impl<T: Real> Excitation<T> for SpectralProbe<T> {
    fn units(&self) -> &UnitSystem<T> {
        self.grid.units()
    }

    fn eval(&self, x: T, t: T) -> (Complex<T>, Complex<T>) {
        let hbar = self.grid.units().hbar;
        let mut v = Complex::new(T::zero(), T::zero());
        let mut d = v;
        for &(p, a, w) in &self.bins {
            let term = a * Complex::from_polar(T::one(), p * x / hbar - w * t);
            v = v + term;
            d = d + term * Complex::new(T::zero(), p / hbar);
        }
        (v, d)
    }

    fn p_max(&self) -> T {
        self.bins.iter().fold(T::zero(), |m, b| m.max(b.0.abs()))
    }

    fn check_probe(&self, x: T) -> Result<()> {
        self.grid.check_contains(x)
    }

    /// Time phases are advanced by repeated multiplication and re-seeded
    /// exactly every [`RESEED`] steps, far cheaper than evaluating each
    /// sample from scratch.
    fn excess_series(&self, pw: &PlaneWave<T>, x: T, t0: T, step: T, count: usize, include_cross: bool) -> Vec<T> {
        let hbar = self.grid.units().hbar;
        let at_x: Vec<(Complex<T>, Complex<T>)> = self
            .bins
            .iter()
            .map(|&(p, a, _)| {
                let b = a * Complex::from_polar(T::one(), p * x / hbar);
                (b, b * Complex::new(T::zero(), p / hbar))
            })
            .collect();
        let rot: Vec<Complex<T>> = self.bins.iter().map(|b| Complex::from_polar(T::one(), -b.2 * step)).collect();
        (0..count.div_ceil(RESEED))
            .into_par_iter()
            .flat_map_iter(|c| {
                let start = c * RESEED;
                let end = count.min(start + RESEED);
                let ts = t0 + step * T::from_usize_lossy(start);
                let mut z: Vec<Complex<T>> =
                    self.bins.iter().map(|b| Complex::from_polar(T::one(), -b.2 * ts)).collect();
                let mut out = Vec::with_capacity(end - start);
                for idx in start..end {
                    let zero = Complex::new(T::zero(), T::zero());
                    let (mut v, mut d) = (zero, zero);
                    for (((b, db), zj), r) in at_x.iter().zip(z.iter_mut()).zip(&rot) {
                        v = v + *b * *zj;
                        d = d + *db * *zj;
                        *zj = *zj * *r;
                    }
                    let t = t0 + step * T::from_usize_lossy(idx);
                    let c = assemble(self.grid.units(), pw, x, t, v, d);
                    out.push(if include_cross { c.j1 + c.jc } else { c.j1 });
                }
                out
            })
            .collect()
    }
}

/// Steps between exact phase re-seeds in [`SpectralProbe::excess_series`].
const RESEED: usize = 256;

/// Spectral weight beyond `|p - p_G| = 12 sigma_p` is below `1e-15`.
const GAUSSIAN_REACH: f64 = 12.0;

/// Closed-form free evolution of the packet on the infinite line.
impl<T: Real> Excitation<T> for GaussianPacket<T> {
    fn units(&self) -> &UnitSystem<T> {
        GaussianPacket::units(self)
    }

    fn eval(&self, x: T, t: T) -> (Complex<T>, Complex<T>) {
        let u = GaussianPacket::units(self);
        let sx2 = self.sigma_x() * self.sigma_x();
        let s = Complex::new(T::one(), u.hbar * t / (T::lit(2.0) * u.mass * sx2));
        let y = x - self.x_g();
        let drift = y - self.p_g() * t / u.mass;
        let k = self.p_g() / u.hbar;
        let amp = (T::lit(2.0) * T::PI() * sx2).powf(T::lit(-0.25));
        let gauss = Complex::new(-drift * drift / (T::lit(4.0) * sx2), T::zero()) / s;
        let phase = Complex::new(T::zero(), k * y - u.dispersion(self.p_g()) * t);
        let psi = (gauss + phase).exp() * amp / s.sqrt();
        let slope = Complex::new(-drift / (T::lit(2.0) * sx2), T::zero()) / s + Complex::new(T::zero(), k);
        (psi, psi * slope)
    }

    fn p_max(&self) -> T {
        self.p_g().abs() + T::lit(GAUSSIAN_REACH) * self.sigma_p()
    }
}

/// Current components at `t = 0` (spectral derivative).
pub fn current_components<T: Real>(psi1: &WaveFunction<T>, pw: &PlaneWave<T>, x: T) -> Result<CurrentSample<T>> {
    psi1.grid().check_contains(x)?;
    Ok(SpectralProbe::new(psi1).current(pw, x, T::zero()))
}

/// Settings for [`integrated_charge`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOptions<T> {
    /// Damping rates, decreasing.
    pub eps_schedule: Vec<T>,
    /// Largest extrapolation spread accepted.
    pub tolerance: T,
    /// Absolute error target of the time quadrature.
    pub quadrature_tolerance: T,
    /// Include the interference current `jc`; `false` integrates `j1` only.
    pub include_cross: bool,
}

impl<T: Real> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self {
            eps_schedule: [0.08, 0.04, 0.02, 0.01].iter().map(|&e| T::lit(e)).collect(),
            tolerance: T::lit(5e-3),
            quadrature_tolerance: T::lit(1e-10),
            include_cross: true,
        }
    }
}

impl<T: Real> IntegrationOptions<T> {
    /// Default options with the damping rates capped at `omega(p0) / 16`.
    /// The damped integral is analytic in `eps` only within `|eps| <
    /// omega(p0)`, so a slow background needs proportionally smaller rates
    /// (and a window of many `1 / eps`).
    pub fn scaled_to(pw: &PlaneWave<T>, units: &UnitSystem<T>) -> Self {
        let base = Self::default();
        let cap = units.dispersion(pw.p0()) / T::lit(16.0);
        let top = base.eps_schedule[0];
        if top <= cap {
            return base;
        }
        let eps_schedule = base.eps_schedule.iter().map(|e| *e * cap / top).collect();
        Self { eps_schedule, ..base }
    }

    /// `40 / eps_min`: the damped integrands are down to `exp(-40)` there.
    pub fn damping_window(&self) -> T {
        let min = self.eps_schedule.iter().fold(T::infinity(), |m, e| m.min(*e));
        T::lit(40.0) / min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratedCharge<T> {
    /// Extrapolated `eps -> 0` value.
    pub value: T,
    /// `|extrapolation from all rates - extrapolation from the finest three|`.
    pub spread: T,
    /// Damped integrals, one per rate.
    pub damped: Vec<T>,
    /// `t_max |j1 + jc|` at the end of the window: charge still to come,
    /// to first order.
    pub residual: T,
    /// Whether the residual is below the tolerance.
    pub cleared: bool,
    pub evaluations: usize,
}

/// Default integration window for a probe at `x`: four times the time the
/// slowest relevant momentum, `p_G - 3 sigma_p` floored at `0.1 sigma_p`,
/// needs to get from the packet center to the probe.
pub fn default_t_max<T: Real>(psi1: &WaveFunction<T>, x: T) -> T {
    let g = psi1.grid();
    let dens = psi1.density();
    let total = dens.iter().fold(T::zero(), |a, &b| a + b);
    if total == T::zero() {
        return T::zero();
    }
    let center = g.xs().iter().zip(&dens).fold(T::zero(), |a, (x, r)| a + *x * *r) / total;
    let spec = psi1.to_momentum().spectral_density();
    let stotal = spec.iter().fold(T::zero(), |a, &b| a + b);
    let (m1, m2) = spec.iter().enumerate().fold((T::zero(), T::zero()), |(a, b), (j, r)| {
        let p = g.momentum(j);
        (a + p * *r, b + p * p * *r)
    });
    let mean = m1 / stotal;
    let sigma = (m2 / stotal - mean * mean).max(T::zero()).sqrt();
    transit_window(center, mean, sigma, g.units().mass, x)
}

/// [`default_t_max`] from the packet parameters.
pub fn default_t_max_packet<T: Real>(packet: &GaussianPacket<T>, x: T) -> T {
    transit_window(packet.x_g(), packet.p_g(), packet.sigma_p(), packet.units().mass, x)
}

fn transit_window<T: Real>(center: T, mean: T, sigma: T, mass: T, x: T) -> T {
    let slow = (mean.abs() - T::lit(3.0) * sigma).max(T::lit(0.1) * sigma);
    T::lit(4.0) * (x - center).abs() * mass / slow
}

/// Quadratic least-squares fit in `eps`, evaluated at 0.
fn extrapolate<T: Real>(eps: &[T], vals: &[T]) -> T {
    // Normal equations for c0 + c1 e + c2 e^2, solved by Cramer's rule.
    let mut s = [T::zero(); 5];
    let mut r = [T::zero(); 3];
    for (&e, &v) in eps.iter().zip(vals) {
        let mut pw = T::one();
        for (k, sk) in s.iter_mut().enumerate() {
            *sk = *sk + pw;
            if k < 3 {
                r[k] = r[k] + pw * v;
            }
            pw = pw * e;
        }
    }
    let det3 = |m: [[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let a0 = [[r[0], s[1], s[2]], [r[1], s[2], s[3]], [r[2], s[3], s[4]]];
    det3(a0) / det3(a)
}

/// Bisection limit per initial panel.
const MAX_DEPTH: usize = 20;

/// Vector-valued adaptive Simpson rule with Richardson correction.
struct Simpson<'a, T> {
    f: &'a (dyn Fn(T) -> Vec<T> + Sync),
    evaluations: usize,
}

impl<T: Real> Simpson<'_, T> {
    fn max_abs(a: &[T], b: &[T]) -> T {
        a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
    }

    fn accept(both: &[T], whole: &[T], tol: T) -> bool {
        let err = Self::max_abs(both, whole);
        // Differences below a few ulps of the panel value are roundoff.
        let scale = both.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        err <= T::lit(15.0) * tol || err <= T::lit(64.0) * T::epsilon() * scale
    }

    fn richardson(both: &[T], whole: &[T]) -> Vec<T> {
        both.iter().zip(whole).map(|(s2, s1)| *s2 + (*s2 - *s1) / T::lit(15.0)).collect()
    }

    fn rule(h: T, fa: &[T], fm: &[T], fb: &[T]) -> Vec<T> {
        let w = h / T::lit(6.0);
        fa.iter().zip(fm).zip(fb).map(|((a, m), b)| w * (*a + T::lit(4.0) * *m + *b)).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: T,
        b: T,
        fa: Vec<T>,
        fm: Vec<T>,
        fb: Vec<T>,
        whole: Vec<T>,
        tol: T,
        depth: usize,
    ) -> Vec<T> {
        let m = T::lit(0.5) * (a + b);
        let (lm, rm) = (T::lit(0.5) * (a + m), T::lit(0.5) * (m + b));
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        self.evaluations += 2;
        let left = Self::rule(m - a, &fa, &flm, &fm);
        let right = Self::rule(b - m, &fm, &frm, &fb);
        let both: Vec<T> = left.iter().zip(&right).map(|(l, r)| *l + *r).collect();
        if depth == 0 || Self::accept(&both, &whole, tol) {
            return Self::richardson(&both, &whole);
        }
        let half = T::lit(0.5) * tol;
        let l = self.refine(a, m, fa, flm, fm.clone(), left, half, depth - 1);
        let r = self.refine(m, b, fm, frm, fb, right, half, depth - 1);
        l.iter().zip(&r).map(|(x, y)| *x + *y).collect()
    }
}

/// Time-integrated excess current `∫_0^inf (j - j0)(x_probe, t) dt`,
/// Abel-regularized.
pub fn integrated_charge<T: Real>(
    psi1: &WaveFunction<T>,
    pw: &PlaneWave<T>,
    x_probe: T,
    t_max: T,
    opts: &IntegrationOptions<T>,
) -> Result<IntegratedCharge<T>> {
    psi1.grid().check_contains(x_probe)?;
    integrated_charge_of(&SpectralProbe::new(psi1), pw, x_probe, t_max, opts)
}

/// [`integrated_charge`] for any [`Excitation`].
pub fn integrated_charge_of<T: Real, E: Excitation<T>>(
    probe: &E,
    pw: &PlaneWave<T>,
    x_probe: T,
    t_max: T,
    opts: &IntegrationOptions<T>,
) -> Result<IntegratedCharge<T>> {
    probe.check_probe(x_probe)?;
    if !(t_max.is_finite() && t_max >= T::zero()) {
        return Err(Error::InvalidParameter("t_max must be finite and non-negative".into()));
    }
    let eps = &opts.eps_schedule;
    if eps.len() < 4 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > T::zero())) {
        return Err(Error::InvalidParameter("eps schedule needs at least four decreasing positive rates".into()));
    }
    let excess = |t: T| {
        let c = probe.current(pw, x_probe, t);
        if opts.include_cross {
            c.j1 + c.jc
        } else {
            c.j1
        }
    };
    let f = |t: T| {
        let v = excess(t);
        eps.iter().map(|e| v * (-*e * t).exp()).collect::<Vec<T>>()
    };
    // Initial panels resolve the fastest phase, 0.25 / omega(p_max) apart.
    let u = probe.units();
    let fastest = u.dispersion(probe.p_max().max(pw.p0().abs())).max(T::lit(1e-12));
    let panels = (t_max * fastest / T::lit(0.25)).ceil().to_usize().unwrap_or(1).clamp(1, 1 << 24);
    let h = t_max / T::from_usize_lossy(panels);
    let tol = opts.quadrature_tolerance / T::from_usize_lossy(panels);
    // Both Simpson levels of every panel come from one uniform series; only
    // panels failing the Richardson test are refined by direct evaluation.
    let quarter = h * T::lit(0.25);
    let series = probe.excess_series(pw, x_probe, T::zero(), quarter, 4 * panels + 1, opts.include_cross);
    let damp = |t: T, v: T| eps.iter().map(|e| v * (-*e * t).exp()).collect::<Vec<T>>();
    let (damped, evaluations) = (0..panels)
        .into_par_iter()
        .map(|i| {
            let node = |k: usize| {
                let t = quarter * T::from_usize_lossy(4 * i + k);
                damp(t, series[4 * i + k])
            };
            let a = h * T::from_usize_lossy(i);
            let b = a + h;
            let m = T::lit(0.5) * (a + b);
            let (fa, flm, fm, frm, fb) = (node(0), node(1), node(2), node(3), node(4));
            let whole = Simpson::<T>::rule(h, &fa, &fm, &fb);
            let left = Simpson::<T>::rule(m - a, &fa, &flm, &fm);
            let right = Simpson::<T>::rule(b - m, &fm, &frm, &fb);
            let both: Vec<T> = left.iter().zip(&right).map(|(l, r)| *l + *r).collect();
            if Simpson::<T>::accept(&both, &whole, tol) {
                return (Simpson::<T>::richardson(&both, &whole), 0);
            }
            let mut s = Simpson { f: &f, evaluations: 0 };
            let half = T::lit(0.5) * tol;
            let l = s.refine(a, m, fa, flm, fm.clone(), left, half, MAX_DEPTH);
            let r = s.refine(m, b, fm, frm, fb, right, half, MAX_DEPTH);
            (l.iter().zip(&r).map(|(x, y)| *x + *y).collect(), s.evaluations)
        })
        .reduce(
            || (vec![T::zero(); eps.len()], 4 * panels + 1),
            |(a, n), (b, m)| (a.iter().zip(&b).map(|(x, y)| *x + *y).collect(), n + m),
        );
    let value = extrapolate(eps, &damped);
    let k = eps.len();
    let finest = extrapolate(&eps[k - 3..], &damped[k - 3..]);
    let spread = (value - finest).abs();
    let residual = t_max * excess(t_max).abs();
    if !(spread <= opts.tolerance) {
        return Err(Error::Convergence(format!(
            "Abel extrapolation spread {spread:e} exceeds tolerance {:e}",
            opts.tolerance
        )));
    }
    Ok(IntegratedCharge { value, spread, damped, residual, cleared: residual <= opts.tolerance, evaluations })
}

/// Continuity-equation estimate `∫_{x1}^{x2} (rho(x, 0) - rho(x, t_final)) dx`
/// with `rho = |psi0 + psi1|^2`.
pub fn depletion_charge<T: Real>(psi1: &WaveFunction<T>, pw: &PlaneWave<T>, x1: T, x2: T, t_final: T) -> Result<T> {
    depletion_charge_with(psi1, pw, x1, x2, t_final, T::lit(1e-3))
}

/// As [`depletion_charge`], with the residual-density tolerance explicit.
pub fn depletion_charge_with<T: Real>(
    psi1: &WaveFunction<T>,
    pw: &PlaneWave<T>,
    x1: T,
    x2: T,
    t_final: T,
    residual_tol: T,
) -> Result<T> {
    let g = *psi1.grid();
    g.check_contains(x1)?;
    g.check_contains(x2)?;
    if t_final == T::zero() || x1 == x2 {
        return Ok(T::zero());
    }
    let total = |t: T| -> Vec<T> {
        let moved = free_propagate(psi1, t);
        moved.samples().iter().zip(g.xs()).map(|(c, x)| (pw.value(&g, x, t) + c).norm_sqr()).collect()
    };
    let start = total(T::zero());
    let end = total(t_final);
    let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let k_lo = ((lo - g.x_min()) / g.dx()).ceil().to_usize().unwrap();
    let k_hi = ((hi - g.x_min()) / g.dx()).floor().to_usize().unwrap().min(g.len() - 1);
    let worst = (k_lo..=k_hi).fold(T::zero(), |m, k| m.max((end[k] - T::one()).abs()));
    if worst >= residual_tol {
        return Err(Error::Accuracy(format!(
            "density at t = {t_final} still deviates by {worst:e} between the probes; wait longer"
        )));
    }
    let diff: Vec<T> = start.iter().zip(&end).map(|(a, b)| *a - *b).collect();
    let v = trapezoid(&g, &diff, lo, hi);
    Ok(if x1 <= x2 { v } else { -v })
}

/// [`depletion_charge_with`] for any [`Excitation`], by composite Simpson
/// over `intervals` (rounded up to even) equal cells between the probes.
/// Nothing here is periodic, so `t_final` may be as large as needed.
pub fn depletion_charge_of<T: Real, E: Excitation<T>>(
    probe: &E,
    pw: &PlaneWave<T>,
    x1: T,
    x2: T,
    t_final: T,
    residual_tol: T,
    intervals: usize,
) -> Result<T> {
    probe.check_probe(x1)?;
    probe.check_probe(x2)?;
    if t_final == T::zero() || x1 == x2 {
        return Ok(T::zero());
    }
    let u = *probe.units();
    let n = intervals.max(2).div_ceil(2) * 2;
    let h = (x2 - x1) / T::from_usize_lossy(n);
    let rho = |x: T, t: T| {
        let psi0 = Complex::from_polar(T::one(), pw.p0() * x / u.hbar - u.dispersion(pw.p0()) * t);
        (psi0 + probe.eval(x, t).0).norm_sqr()
    };
    let nodes: Vec<(T, T)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let x = x1 + h * T::from_usize_lossy(k);
            (rho(x, T::zero()), rho(x, t_final))
        })
        .collect();
    let worst = nodes.iter().fold(T::zero(), |m, n| m.max((n.1 - T::one()).abs()));
    if worst >= residual_tol {
        return Err(Error::Accuracy(format!(
            "density at t = {t_final} still deviates by {worst:e} between the probes; wait longer"
        )));
    }
    let sum = nodes.iter().enumerate().fold(T::zero(), |acc, (k, (a, b))| {
        let w = if k == 0 || k == n {
            T::one()
        } else if k % 2 == 1 {
            T::lit(4.0)
        } else {
            T::lit(2.0)
        };
        acc + w * (*a - *b)
    });
    Ok(sum * h / T::lit(3.0))
}

/// Trapezoid rule for nodal data on `[lo, hi]`, linearly interpolating the
/// partial cells at either end.
fn trapezoid<T: Real>(g: &Grid<T>, f: &[T], lo: T, hi: T) -> T {
    let n = g.len();
    let at = |x: T| {
        let s = (x - g.x_min()) / g.dx();
        let k = s.floor().to_usize().unwrap().min(n - 2);
        let w = s - T::from_usize_lossy(k);
        f[k] * (T::one() - w) + f[k + 1] * w
    };
    let k_lo = ((lo - g.x_min()) / g.dx()).ceil().to_usize().unwrap();
    let k_hi = ((hi - g.x_min()) / g.dx()).floor().to_usize().unwrap().min(n - 1);
    if k_lo > k_hi {
        return (hi - lo) * T::lit(0.5) * (at(lo) + at(hi));
    }
    let half = T::lit(0.5);
    let mut acc = (g.x(k_lo) - lo) * half * (at(lo) + f[k_lo]);
    for k in k_lo..k_hi {
        acc = acc + g.dx() * half * (f[k] + f[k + 1]);
    }
    acc + (hi - g.x(k_hi)) * half * (f[k_hi] + at(hi))
}
