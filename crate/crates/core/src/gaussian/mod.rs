//! Closed-form benchmark: a Gaussian excitation on top of the plane wave.
//!
//! The packet is specified in momentum space,
//!
//! ```text
//! psi~(p) = (sqrt(2 pi) sigma_p)^(-1/2) exp(-(p - p_G)^2 / (4 sigma_p^2) - i p x_G / hbar)
//! ```
//!
//! and is a minimum-uncertainty state, `sigma_x = hbar / (2 sigma_p)`. All
//! charge integrals then reduce to error functions, with a complex argument
//! for the interference part.

mod erf;

use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;
use crate::units::UnitSystem;
use crate::wave::{PlaneWave, SpectralFunction, WaveFunction};

pub use erf::{cerf, erf, erf_shifted_scaled, erfcx, faddeeva, STRIP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket<T> {
    x_g: T,
    p_g: T,
    sigma_p: T,
    units: UnitSystem<T>,
}

impl<T: Real> GaussianPacket<T> {
    pub fn new(x_g: T, p_g: T, sigma_p: T, units: UnitSystem<T>) -> Result<Self> {
        if !(x_g.is_finite() && p_g.is_finite()) {
            return Err(Error::InvalidParameter("packet center and mean momentum must be finite".into()));
        }
        if !(sigma_p.is_finite() && sigma_p > T::zero()) {
            return Err(Error::InvalidParameter("sigma_p must be finite and positive".into()));
        }
        units.validate()?;
        Ok(Self { x_g, p_g, sigma_p, units })
    }

    #[inline]
    pub fn x_g(&self) -> T {
        self.x_g
    }

    #[inline]
    pub fn p_g(&self) -> T {
        self.p_g
    }

    #[inline]
    pub fn sigma_p(&self) -> T {
        self.sigma_p
    }

    #[inline]
    pub fn sigma_x(&self) -> T {
        self.units.hbar / (T::lit(2.0) * self.sigma_p)
    }

    #[inline]
    pub fn units(&self) -> &UnitSystem<T> {
        &self.units
    }

    /// Same packet moved to a new center.
    pub fn with_center(self, x_g: T) -> Self {
        Self { x_g, ..self }
    }

    fn norm_factor(&self) -> T {
        (T::lit(2.0) * T::PI()).sqrt().mul(self.sigma_p).sqrt().recip()
    }

    /// `sqrt(2 pi hbar) (sqrt(2 pi) sigma_p)^(-1/2)`, the interference prefactor.
    pub(crate) fn cross_prefactor(&self) -> T {
        (T::lit(2.0) * T::PI() * self.units.hbar).sqrt() * self.norm_factor()
    }

    /// `c = (p0 - p_G) / (2 sigma_p)`.
    fn detuning(&self, pw: &PlaneWave<T>) -> T {
        (pw.p0() - self.p_g) / (T::lit(2.0) * self.sigma_p)
    }

    /// Momentum-space amplitude at `p`.
    pub fn spectral_amplitude(&self, p: T) -> Complex<T> {
        let d = (p - self.p_g) / self.sigma_p;
        let modulus = self.norm_factor() * (-T::lit(0.25) * d * d).exp();
        Complex::from_polar(modulus, -p * self.x_g / self.units.hbar)
    }

    /// Position-space amplitude, the exact inverse transform of
    /// [`spectral_amplitude`](Self::spectral_amplitude).
    pub fn position_amplitude(&self, x: T) -> Complex<T> {
        let hbar = self.units.hbar;
        let y = x - self.x_g;
        let a = self.sigma_p * y / hbar;
        let modulus = self.norm_factor() * self.sigma_p * (T::lit(2.0) / hbar).sqrt() * (-a * a).exp();
        Complex::from_polar(modulus, self.p_g * y / hbar)
    }

    pub fn sample_position(&self, grid: &Grid<T>) -> Result<WaveFunction<T>> {
        WaveFunction::from_fn(*grid, |x| self.position_amplitude(x))
    }

    pub fn sample_spectrum(&self, grid: &Grid<T>) -> Result<SpectralFunction<T>> {
        SpectralFunction::from_fn(*grid, |p| self.spectral_amplitude(p))
    }

    /// `int_{x1}^{x2} |psi|^2 dx`.
    pub fn density_integral(&self, x1: T, x2: T) -> T {
        let s = T::SQRT_2() * self.sigma_x();
        T::lit(0.5) * (erf((x2 - self.x_g) / s) - erf((x1 - self.x_g) / s))
    }

    /// Charge carried past `x` by the packet alone.
    pub fn q1_analytic(&self, x: T) -> T {
        let half = T::lit(0.5);
        half * erf((x - self.x_g) / (T::SQRT_2() * self.sigma_x()))
            + half * erf(self.p_g / (T::SQRT_2() * self.sigma_p))
    }

    /// `exp(-c^2) exp(-i p0 x_G / hbar) erf(u + i c)` at `u = (x - x_G) / (2 sigma_x)`.
    fn cross_kernel(&self, pw: &PlaneWave<T>, x: T) -> Complex<T> {
        let u = (x - self.x_g) / (T::lit(2.0) * self.sigma_x());
        let phase = Complex::from_polar(T::one(), -pw.p0() * self.x_g / self.units.hbar);
        phase * erf_shifted_scaled(u, self.detuning(pw))
    }

    /// Interference part `2 Re int_{x1}^{x2} psi(x) exp(-i p0 x / hbar) dx`.
    pub fn cross_integral(&self, pw: &PlaneWave<T>, x1: T, x2: T) -> T {
        self.cross_prefactor() * (self.cross_kernel(pw, x2) - self.cross_kernel(pw, x1)).re
    }

    /// Charge difference `Q_d(x2) - Q_d(x1)` with the plane wave present.
    pub fn delta_qd_analytic(&self, pw: &PlaneWave<T>, x1: T, x2: T) -> T {
        if x1 == x2 {
            return T::zero();
        }
        self.density_integral(x1, x2) + self.cross_integral(pw, x1, x2)
    }

    /// Interference charge at `x`, including its spatially constant part.
    pub fn qc_analytic(&self, pw: &PlaneWave<T>, x: T) -> T {
        let c = self.detuning(pw);
        let constant = pw.p0().sign0() * (pw.p0() * self.x_g / self.units.hbar).cos() * (-c * c).exp();
        self.cross_prefactor() * (constant + self.cross_kernel(pw, x).re)
    }
}

/// The four parameter sets `(x_G, p_G)` used as reference cases, all with
/// `sigma_p = 1/sqrt 2` in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
    C,
    D,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::A, Case::B, Case::C, Case::D];

    /// `(x_G, p_G)`.
    pub fn center_and_momentum(self) -> (f64, f64) {
        match self {
            Case::A => (0.25, 5.0),
            Case::B => (5.0, 5.0),
            Case::C => (0.25, 0.25),
            Case::D => (5.0, 0.25),
        }
    }

    pub fn packet<T: Real>(self) -> GaussianPacket<T> {
        let (x, p) = self.center_and_momentum();
        GaussianPacket::new(T::lit(x), T::lit(p), T::FRAC_1_SQRT_2(), UnitSystem::atomic())
            .expect("reference parameters are valid")
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Case::A),
            "B" | "b" => Ok(Case::B),
            "C" | "c" => Ok(Case::C),
            "D" | "d" => Ok(Case::D),
            other => Err(Error::InvalidParameter(format!("unknown case {other:?}; expected A, B, C or D"))),
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

    fn grid() -> Grid<f64> {
        Grid::centered(2.5, 80.0, 2048, UnitSystem::atomic()).unwrap()
    }

    #[test]
    fn widths_follow_minimum_uncertainty() {
        let g = Case::A.packet::<f64>();
        assert!((g.sigma_x() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(GaussianPacket::new(0.0, 1.0, 0.0, UnitSystem::<f64>::atomic()).is_err());
        assert!(GaussianPacket::new(0.0, 1.0, -1.0, UnitSystem::<f64>::atomic()).is_err());
    }

    #[test]
    fn spectral_peak_and_normalization() {
        let g = GaussianPacket::new(0.0, 5.0, 0.7, UnitSystem::<f64>::atomic()).unwrap();
        let peak = g.spectral_amplitude(5.0);
        assert!(peak.im.abs() < 1e-16);
        assert!((peak.re - (SQRT_2PI * 0.7f64).powf(-0.5)).abs() < 1e-15);

        let b = Case::B.packet::<f64>();
        let expected = 1.0 / (SQRT_2PI * std::f64::consts::FRAC_1_SQRT_2);
        assert!((b.spectral_amplitude(5.0).norm_sqr() - expected).abs() < 1e-14);

        let s = b.sample_spectrum(&grid()).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn position_form_is_the_inverse_transform() {
        let gr = grid();
        for case in Case::ALL {
            let g = case.packet::<f64>();
            let via_fft = g.sample_spectrum(&gr).unwrap().to_position();
            let direct = g.sample_position(&gr).unwrap();
            assert!(via_fft.max_diff(&direct) < 1e-9, "{case}");
            assert!((direct.norm_sqr() - 1.0).abs() < 1e-10);
            let dens = direct.density();
            let kmax = (0..dens.len()).max_by(|&a, &b| dens[a].total_cmp(&dens[b])).unwrap();
            assert!((gr.x(kmax) - g.x_g()).abs() <= gr.dx());
        }
    }

    #[test]
    fn q1_limits_and_reference_values() {
        let a = Case::A.packet::<f64>();
        let far_left = a.q1_analytic(-1e3);
        assert!((far_left - (-0.5 + 0.5 * erf(5.0f64))).abs() < 1e-15);
        let c = Case::C.packet::<f64>();
        assert!((c.q1_analytic(0.25) - 0.5 * erf(0.25f64)).abs() < 1e-15);
        let mut last = f64::NEG_INFINITY;
        for k in 0..200 {
            let q = a.q1_analytic(-10.0 + 0.1 * k as f64);
            assert!(q >= last && (-1.0..=1.0).contains(&q));
            last = q;
        }
    }

    #[test]
    fn q1_difference_is_the_density_integral() {
        let g = Case::D.packet::<f64>();
        for &(x1, x2) in &[(-3.0, 4.0), (4.2, 5.1), (9.0, -1.0)] {
            let d = g.q1_analytic(x2) - g.q1_analytic(x1);
            assert!((d - g.density_integral(x1, x2)).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_qd_is_antisymmetric_and_vanishes_on_diagonal() {
        let g = Case::A.packet::<f64>();
        let pw = PlaneWave::new(5.0).unwrap();
        assert_eq!(g.delta_qd_analytic(&pw, 1.3, 1.3), 0.0);
        let v = g.delta_qd_analytic(&pw, -2.57843, 7.82843);
        assert!(v.is_finite());
        assert_eq!(v, -g.delta_qd_analytic(&pw, 7.82843, -2.57843));
    }

    #[test]
    fn detuned_plane_wave_decouples_for_wide_probes() {
        // With probes far outside the packet both erf terms sit on their
        // asymptotes and the interference is damped by exp(-16).
        let g = Case::A.packet::<f64>();
        let pw = PlaneWave::new(5.0 + 8.0 * g.sigma_p()).unwrap();
        let d = g.delta_qd_analytic(&pw, -10.0, 10.0) - g.density_integral(-10.0, 10.0);
        assert!(d.abs() < 1e-6, "{d}");
        // The exp(-c^2) envelope only bounds Q_c away from the packet; near
        // x_G the interference decays algebraically, like 1/|c|.
        let c: f64 = 4.0;
        let envelope = g.cross_prefactor() * (-c * c).exp() * 2.0;
        for x in [-12.0, -8.0, 8.0, 12.0] {
            assert!(g.qc_analytic(&pw, x).abs() <= envelope, "x = {x}");
        }
        let algebraic = g.cross_prefactor() * 1.01 / (std::f64::consts::PI.sqrt() * c);
        for x in [-1.0, 0.0, 0.25, 2.0] {
            assert!(g.qc_analytic(&pw, x).abs() <= algebraic, "x = {x}");
        }
    }

    #[test]
    fn qc_differences_match_cross_part() {
        let pw = PlaneWave::new(4.0).unwrap();
        for case in Case::ALL {
            let g = case.packet::<f64>();
            for &(x1, x2) in &[(-2.0, 3.0), (0.1, 0.2), (6.0, -4.0)] {
                let dq = g.qc_analytic(&pw, x2) - g.qc_analytic(&pw, x1);
                assert!((dq - g.cross_integral(&pw, x1, x2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_detuning_stays_finite() {
        let g = Case::C.packet::<f64>();
        let pw = PlaneWave::new(30.0).unwrap();
        let v = g.delta_qd_analytic(&pw, -3.0, 3.0);
        assert!(v.is_finite());
        let c = (30.0 - 0.25) / (2.0 * g.sigma_p());
        let bound = 2.0 * g.cross_prefactor() / (std::f64::consts::PI.sqrt() * c);
        assert!((v - g.density_integral(-3.0, 3.0)).abs() < bound);
    }

    #[test]
    fn case_labels_parse() {
        assert_eq!("b".parse::<Case>().unwrap(), Case::B);
        assert!("E".parse::<Case>().is_err());
    }
}
