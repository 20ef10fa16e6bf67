//! Extra transported charge from the `t = 0` excitation, without time
//! integration.
//!
//! For two probes the charge difference reduces to
//!
//! ```text
//! dQd(x2, x1) = ∫_{x1}^{x2} |psi1|^2 dx + 2 Re ∫_{x1}^{x2} psi1(x) exp(-i p0 x / hbar) dx
//! ```
//!
//! The spatially constant terms of the single-point charge cancel, so only
//! differences are exposed, plus the two constant pieces that have a
//! closed form ([`sign_charge`], [`qc_boundary_term`]) for diagnostics.
//!
//! Both integrals are evaluated with the exact antiderivative of the
//! trigonometric interpolant of the sampled integrand. For band-limited
//! data that is spectrally accurate, and probes need not sit on grid nodes.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;
use crate::wave::{PlaneWave, SpectralFunction, WaveFunction};

/// Tunables of the charge quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeOptions<T> {
    /// Largest `|psi1|` tolerated near the box edges.
    pub boundary_threshold: T,
    /// Weight of the density integral. Anything but 1 is wrong; other
    /// values exist so the verification suite can show that it notices.
    pub density_coefficient: T,
}

impl<T: Real> Default for ChargeOptions<T> {
    fn default() -> Self {
        Self { boundary_threshold: T::lit(1e-8), density_coefficient: T::one() }
    }
}

/// Components of the charge difference between `x1` and `x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeBreakdown<T> {
    pub delta_q1: T,
    pub delta_qc: T,
    pub delta_qd: T,
    pub x1: T,
    pub x2: T,
}

impl<T: Real> ChargeBreakdown<T> {
    fn zero(x: T) -> Self {
        Self { delta_q1: T::zero(), delta_qc: T::zero(), delta_qd: T::zero(), x1: x, x2: x }
    }
}

/// Fraction of the box on each side that must be empty.
const EDGE_FRACTION: usize = 32;

/// Exact antiderivative (from `x_min`) of a sampled periodic function.
#[derive(Debug, Clone)]
struct Antiderivative<T> {
    grid: Grid<T>,
    /// Mean value `F_0 / n`.
    mean: T,
    mean_im: T,
    /// `F_j / n` in FFT order.
    coeffs: Vec<Complex<T>>,
    /// Antiderivative at each node.
    nodes: Vec<Complex<T>>,
}

impl<T: Real> Antiderivative<T> {
    fn new(grid: Grid<T>, samples: Vec<Complex<T>>, planner: &mut FftPlanner<T>) -> Self {
        let n = grid.len();
        let nf = T::from_usize_lossy(n);
        let mut coeffs = samples;
        planner.plan_fft_forward(n).process(&mut coeffs);
        for c in coeffs.iter_mut() {
            *c = *c / nf;
        }
        let length = grid.length();
        let two_pi = T::lit(2.0) * T::PI();
        // G_j = c_j L / (2 pi i m_j); zero for the mean and the Nyquist bin,
        // whose cosine interpolant integrates to zero at every node.
        let nyquist = if n.is_multiple_of(2) { Some(n / 2) } else { None };
        let mut g: Vec<Complex<T>> = (0..n)
            .map(|j| {
                if j == 0 || Some(j) == nyquist {
                    return Complex::new(T::zero(), T::zero());
                }
                let m = T::from_i64(grid.wavenumber_index(j)).unwrap();
                coeffs[j] * length / Complex::new(T::zero(), two_pi * m)
            })
            .collect();
        let g_sum = g.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
        planner.plan_fft_inverse(n).process(&mut g);
        let mean = coeffs[0];
        let nodes = (0..n)
            .map(|k| {
                let s = grid.dx() * T::from_usize_lossy(k);
                mean * s + g[k] - g_sum
            })
            .collect();
        Self { grid, mean: mean.re, mean_im: mean.im, coeffs, nodes }
    }

    /// Value at `x`; exact node lookup when `x` is a node.
    fn at(&self, x: T) -> Complex<T> {
        let g = &self.grid;
        let s = x - g.x_min();
        let kf = s / g.dx();
        let kr = kf.round();
        if (kf - kr).abs() <= T::lit(1e-12) * T::one().max(kr) {
            return self.nodes[kr.to_usize().unwrap().min(g.len() - 1)];
        }
        let n = g.len();
        let length = g.length();
        let two_pi = T::lit(2.0) * T::PI();
        let nyquist = if n.is_multiple_of(2) { Some(n / 2) } else { None };
        let mut acc = Complex::new(self.mean, self.mean_im) * s;
        for j in 1..n {
            let m = T::from_i64(g.wavenumber_index(j)).unwrap();
            let theta = two_pi * m * s / length;
            if Some(j) == nyquist {
                // cos(n pi s / L) interpolant of the Nyquist bin, m = -n/2
                acc = acc + self.coeffs[j] * (theta.sin() / (two_pi * m / length));
                continue;
            }
            let rot = Complex::new(theta.cos() - T::one(), theta.sin());
            acc = acc + self.coeffs[j] * rot / Complex::new(T::zero(), two_pi * m / length);
        }
        acc
    }
}

/// Precomputed antiderivatives of `|psi1|^2` and `psi1 exp(-i p0 x / hbar)`;
/// each evaluation afterwards is a node lookup or one `O(n)` sum.
#[derive(Debug, Clone)]
pub struct ChargeIntegrator<T> {
    density: Antiderivative<T>,
    cross: Antiderivative<T>,
    opts: ChargeOptions<T>,
}

impl<T: Real> ChargeIntegrator<T> {
    pub fn new(psi1: &WaveFunction<T>, pw: &PlaneWave<T>, opts: ChargeOptions<T>) -> Result<Self> {
        let grid = *psi1.grid();
        let edge = (grid.len() / EDGE_FRACTION).max(2);
        let amp = psi1.edge_amplitude(edge);
        if amp >= opts.boundary_threshold {
            return Err(Error::Accuracy(format!(
                "|psi1| reaches {amp:e} near the box edges (threshold {:e}); enlarge the domain",
                opts.boundary_threshold
            )));
        }
        let mut planner = FftPlanner::new();
        let rho = psi1.density().into_iter().map(|r| Complex::new(r, T::zero())).collect();
        let hbar = grid.units().hbar;
        let mixed = psi1
            .samples()
            .iter()
            .zip(grid.xs())
            .map(|(c, x)| c * Complex::from_polar(T::one(), -pw.p0() * x / hbar))
            .collect();
        Ok(Self {
            density: Antiderivative::new(grid, rho, &mut planner),
            cross: Antiderivative::new(grid, mixed, &mut planner),
            opts,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.density.grid
    }

    /// `(∫ rho, 2 Re ∫ psi1 e^{-i p0 x})` from the left box edge to `x`.
    pub fn cumulative(&self, x: T) -> Result<(T, T)> {
        self.grid().check_contains(x)?;
        let q1 = self.density.at(x).re * self.opts.density_coefficient;
        let qc = T::lit(2.0) * self.cross.at(x).re;
        Ok((q1, qc))
    }

    pub fn delta(&self, x1: T, x2: T) -> Result<ChargeBreakdown<T>> {
        self.grid().check_contains(x1)?;
        self.grid().check_contains(x2)?;
        if x1 == x2 {
            return Ok(ChargeBreakdown::zero(x1));
        }
        let (a1, c1) = self.cumulative(x1)?;
        let (a2, c2) = self.cumulative(x2)?;
        let delta_q1 = a2 - a1;
        let delta_qc = c2 - c1;
        Ok(ChargeBreakdown { delta_q1, delta_qc, delta_qd: delta_q1 + delta_qc, x1, x2 })
    }
}

/// Charge difference between `x1` and `x2` carried by the excitation `psi1`.
pub fn delta_charge<T: Real>(psi1: &WaveFunction<T>, pw: &PlaneWave<T>, x1: T, x2: T) -> Result<ChargeBreakdown<T>> {
    delta_charge_with(psi1, pw, x1, x2, ChargeOptions::default())
}

pub fn delta_charge_with<T: Real>(
    psi1: &WaveFunction<T>,
    pw: &PlaneWave<T>,
    x1: T,
    x2: T,
    opts: ChargeOptions<T>,
) -> Result<ChargeBreakdown<T>> {
    ChargeIntegrator::new(psi1, pw, opts)?.delta(x1, x2)
}

/// `dQd(x_ref, probe)` for every probe, sharing one precomputation.
pub fn charge_profile<T: Real>(psi1: &WaveFunction<T>, pw: &PlaneWave<T>, x_ref: T, probes: &[T]) -> Result<Vec<T>> {
    let integ = ChargeIntegrator::new(psi1, pw, ChargeOptions::default())?;
    probes.iter().map(|&x| integ.delta(x_ref, x).map(|b| b.delta_qd)).collect()
}

/// `1/2 ∫ sign(p) |psi1~(p)|^2 dp`: the net charge the bare packet sends right.
pub fn sign_charge<T: Real>(spec1: &SpectralFunction<T>) -> T {
    let g = spec1.grid();
    let sum =
        spec1.spectral_density().into_iter().enumerate().fold(T::zero(), |acc, (j, r)| acc + g.momentum(j).sign0() * r);
    T::lit(0.5) * sum * g.dp()
}

/// `sqrt(2 pi hbar) sign(p0) Re psi1~(p0)`, the constant part of the
/// interference charge. Requires `p0` on the momentum lattice.
pub fn qc_boundary_term<T: Real>(spec1: &SpectralFunction<T>, pw: &PlaneWave<T>) -> Result<T> {
    let hbar = spec1.grid().units().hbar;
    let at_p0 = spec1.at(pw.p0())?;
    Ok((T::lit(2.0) * T::PI() * hbar).sqrt() * pw.p0().sign0() * at_p0.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Case;
    use crate::units::UnitSystem;

    fn grid() -> Grid<f64> {
        Grid::centered(2.5, 64.0, 1024, UnitSystem::atomic()).unwrap()
    }

    #[test]
    fn empty_interval_and_zero_excitation() {
        let g = grid();
        let pw = PlaneWave::new(5.0).unwrap();
        let psi = Case::A.packet().sample_position(&g).unwrap();
        let b = delta_charge(&psi, &pw, 1.7, 1.7).unwrap();
        assert_eq!((b.delta_q1, b.delta_qc, b.delta_qd), (0.0, 0.0, 0.0));
        let b = delta_charge(&WaveFunction::zeros(g), &pw, -3.0, 4.0).unwrap();
        assert_eq!(b.delta_qd, 0.0);
    }

    #[test]
    fn reference_probe_pair_matches_closed_form() {
        let g = grid();
        let packet = Case::A.packet::<f64>();
        let pw = PlaneWave::new(5.0).unwrap();
        let psi = packet.sample_position(&g).unwrap();
        let b = delta_charge(&psi, &pw, -2.57843, 7.82843).unwrap();
        let exact = packet.delta_qd_analytic(&pw, -2.57843, 7.82843);
        assert!((b.delta_qd - exact).abs() < 1e-8, "{} vs {}", b.delta_qd, exact);
        assert!((b.delta_q1 - packet.density_integral(-2.57843, 7.82843)).abs() < 1e-10);
        assert_eq!(b.delta_qd, b.delta_q1 + b.delta_qc);
    }

    #[test]
    fn node_and_off_node_paths_agree() {
        let g = grid();
        let pw = PlaneWave::new(4.5).unwrap();
        let psi = Case::B.packet().sample_position(&g).unwrap();
        let integ = ChargeIntegrator::new(&psi, &pw, ChargeOptions::default()).unwrap();
        let x = g.x(600);
        let on = integ.cumulative(x).unwrap();
        let off = integ.cumulative(x + 1e-9).unwrap();
        assert!((on.0 - off.0).abs() < 1e-8 && (on.1 - off.1).abs() < 1e-8);
    }

    #[test]
    fn antisymmetry_is_exact_and_additivity_tight() {
        let g = grid();
        let pw = PlaneWave::new(5.0).unwrap();
        let psi = Case::A.packet().sample_position(&g).unwrap();
        let f = delta_charge(&psi, &pw, -1.3, 2.9).unwrap();
        let r = delta_charge(&psi, &pw, 2.9, -1.3).unwrap();
        assert_eq!(f.delta_qd, -r.delta_qd);
        assert_eq!(f.delta_q1, -r.delta_q1);
        assert_eq!(f.delta_qc, -r.delta_qc);
        let a = delta_charge(&psi, &pw, -1.3, 0.4).unwrap().delta_qd;
        let b = delta_charge(&psi, &pw, 0.4, 2.9).unwrap().delta_qd;
        assert!((a + b - f.delta_qd).abs() < 1e-12);
    }

    #[test]
    fn profile_is_consistent_with_pairs() {
        let g = grid();
        let pw = PlaneWave::new(5.0).unwrap();
        let psi = Case::A.packet().sample_position(&g).unwrap();
        let probes = [-4.0, -1.0, 0.25, 3.3, 9.0];
        let prof = charge_profile(&psi, &pw, -2.0, &probes).unwrap();
        for (x, q) in probes.iter().zip(&prof) {
            assert_eq!(*q, delta_charge(&psi, &pw, -2.0, *x).unwrap().delta_qd);
        }
        assert_eq!(charge_profile(&psi, &pw, 1.0, &[1.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn probes_outside_domain_and_leaky_packets_are_rejected() {
        let g = grid();
        let pw = PlaneWave::new(5.0).unwrap();
        let psi = Case::A.packet().sample_position(&g).unwrap();
        assert!(matches!(delta_charge(&psi, &pw, -100.0, 0.0), Err(Error::OutOfDomain { .. })));
        let wide = crate::gaussian::GaussianPacket::new(0.0, 1.0, 0.02, UnitSystem::atomic()).unwrap();
        let psi = wide.sample_position(&g).unwrap();
        assert!(matches!(delta_charge(&psi, &pw, 0.0, 1.0), Err(Error::Accuracy(_))));
    }

    #[test]
    fn sign_charge_of_gaussians() {
        let g = grid();
        let a = Case::A.packet::<f64>().sample_spectrum(&g).unwrap();
        let expect = 0.5 * crate::gaussian::erf(5.0f64);
        assert!((sign_charge(&a) - expect).abs() < 1e-10);
        let centered = crate::gaussian::GaussianPacket::new(0.25, 0.0, 0.7, UnitSystem::atomic()).unwrap();
        assert!(sign_charge(&centered.sample_spectrum(&g).unwrap()).abs() < 1e-10);
        assert_eq!(sign_charge(&SpectralFunction::zeros(g)), 0.0);
    }

    #[test]
    fn boundary_term_reads_the_lattice() {
        let g: Grid<f64> = Grid::commensurate(2.5, 64.0, 1024, 5.0, UnitSystem::atomic()).unwrap();
        let packet = Case::A.packet::<f64>();
        let pw = PlaneWave::new(5.0).unwrap();
        let s = packet.sample_spectrum(&g).unwrap();
        let expect = (2.0 * std::f64::consts::PI).sqrt()
            * (2.0 * std::f64::consts::PI).powf(-0.25)
            * packet.sigma_p().powf(-0.5)
            * (5.0f64 * 0.25).cos();
        assert!((qc_boundary_term(&s, &pw).unwrap() - expect).abs() < 1e-10);
        let off = PlaneWave::new(5.0 + 0.5 * g.dp()).unwrap();
        assert!(matches!(qc_boundary_term(&s, &off), Err(Error::OffLattice { .. })));
        assert_eq!(qc_boundary_term(&SpectralFunction::zeros(g), &pw).unwrap(), 0.0);
    }
}
