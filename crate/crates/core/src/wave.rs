//! Wave functions in position and momentum representation.
//!
//! The continuum convention is
//!
//! ```text
//! psi~(p) = (2 pi hbar)^(-1/2) ∫ psi(x) exp(-i p x / hbar) dx
//! psi(x)  = (2 pi hbar)^(-1/2) ∫ psi~(p) exp(+i p x / hbar) dp
//! ```
//!
//! and the discrete transforms carry the `dx`/`dp` measures and the phase
//! from the grid origin so that the lattice values approximate the
//! continuum functions themselves, not just their shapes.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

fn check_samples<T: Real>(grid: &Grid<T>, samples: &[Complex<T>]) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::InvalidParameter(format!("expected {} samples, got {}", grid.len(), samples.len())));
    }
    if samples.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::InvalidParameter("samples must be finite".into()));
    }
    Ok(())
}

/// Complex amplitudes at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    grid: Grid<T>,
    samples: Vec<Complex<T>>,
}

/// Complex amplitudes at the lattice momenta, stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction<T> {
    grid: Grid<T>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction<T> {
    pub fn new(grid: Grid<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        check_samples(&grid, &samples)?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, samples: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let samples = grid.xs().into_iter().map(f).collect();
        Self::new(grid, samples)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    /// `|psi(x)|^2` at every node.
    pub fn density(&self) -> Vec<T> {
        self.samples.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum |psi|^2 dx`.
    pub fn norm_sqr(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.grid.dx()
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    /// Largest amplitude among the `width` nodes nearest each end of the box.
    pub fn edge_amplitude(&self, width: usize) -> T {
        let n = self.samples.len();
        let w = width.clamp(1, n / 2);
        self.samples[..w].iter().chain(&self.samples[n - w..]).fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    pub fn to_momentum(&self) -> SpectralFunction<T> {
        let g = &self.grid;
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(g.len()).process(&mut buf);
        let scale = g.dx() / (T::lit(2.0) * T::PI() * g.units().hbar).sqrt();
        for (j, c) in buf.iter_mut().enumerate() {
            let phase = -g.momentum(j) * g.x_min() / g.units().hbar;
            *c = *c * Complex::from_polar(scale, phase);
        }
        SpectralFunction { grid: *g, samples: buf }
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("wave functions live on different grids".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, samples })
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("wave functions live on different grids".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, samples })
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|c| c * factor).collect() }
    }

    /// `sup |self - other|`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.samples.iter().zip(&other.samples).fold(T::zero(), |acc, (a, b)| acc.max((a - b).norm()))
    }
}

impl<T: Real> SpectralFunction<T> {
    pub fn new(grid: Grid<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        check_samples(&grid, &samples)?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, samples: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    /// Samples `f(p)` at every lattice momentum.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let samples = grid.momenta().into_iter().map(f).collect();
        Self::new(grid, samples)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    /// Amplitude at lattice momentum `p`.
    pub fn at(&self, p: T) -> Result<Complex<T>> {
        Ok(self.samples[self.grid.momentum_bin(p)?])
    }

    /// `|psi~(p)|^2` at every lattice momentum.
    pub fn spectral_density(&self) -> Vec<T> {
        self.samples.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum |psi~|^2 dp`.
    pub fn norm_sqr(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.grid.dp()
    }

    pub fn to_position(&self) -> WaveFunction<T> {
        let g = &self.grid;
        let hbar = g.units().hbar;
        let mut buf: Vec<Complex<T>> = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, c)| c * Complex::from_polar(T::one(), g.momentum(j) * g.x_min() / hbar))
            .collect();
        FftPlanner::new().plan_fft_inverse(g.len()).process(&mut buf);
        let scale = g.dp() / (T::lit(2.0) * T::PI() * hbar).sqrt();
        for c in buf.iter_mut() {
            *c = *c * scale;
        }
        WaveFunction { grid: *g, samples: buf }
    }
}

/// The reference state `exp(i (p0 x / hbar - omega(p0) t))`.
///
/// Unit amplitude, phase anchored so that the wave is `exp(i p0 x / hbar)`
/// at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave<T> {
    p0: T,
}

impl<T: Real> PlaneWave<T> {
    /// `p0 = 0` is rejected: the charge formulas depend on `sign(p0)`.
    pub fn new(p0: T) -> Result<Self> {
        if !p0.is_finite() || p0 == T::zero() {
            return Err(Error::InvalidParameter("plane-wave momentum must be finite and nonzero".into()));
        }
        Ok(Self { p0 })
    }

    #[inline]
    pub fn p0(&self) -> T {
        self.p0
    }

    /// Constant current `p0 / m` carried by the wave.
    pub fn current(&self, grid: &Grid<T>) -> T {
        self.p0 / grid.units().mass
    }

    /// Value at `(x, t)`.
    pub fn value(&self, grid: &Grid<T>, x: T, t: T) -> Complex<T> {
        let u = grid.units();
        Complex::from_polar(T::one(), self.p0 * x / u.hbar - u.dispersion(self.p0) * t)
    }

    /// Samples the wave on the grid at time `t`.
    pub fn sample(&self, grid: &Grid<T>, t: T) -> WaveFunction<T> {
        let samples = grid.xs().into_iter().map(|x| self.value(grid, x, t)).collect();
        WaveFunction { grid: *grid, samples }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::UnitSystem;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn gauss_grid() -> Grid<f64> {
        Grid::centered(0.0, 40.0, 512, UnitSystem::atomic()).unwrap()
    }

    fn unit_gaussian(x: f64) -> C {
        C::new((-0.5 * x * x).exp() / std::f64::consts::PI.powf(0.25), 0.0)
    }

    #[test]
    fn unit_gaussian_is_its_own_transform() {
        let psi = WaveFunction::from_fn(gauss_grid(), unit_gaussian).unwrap();
        let spec = psi.to_momentum();
        for (j, c) in spec.samples().iter().enumerate() {
            let p = spec.grid().momentum(j);
            assert!((c - unit_gaussian(p)).norm() < 1e-10, "p = {p}: {c}");
        }
    }

    #[test]
    fn offset_origin_keeps_the_convention() {
        // Shifted box: the x_min phase must be accounted for.
        let g = Grid::new(-13.7, 0.07, 400, UnitSystem::atomic()).unwrap();
        let psi = WaveFunction::from_fn(g, unit_gaussian).unwrap();
        let spec = psi.to_momentum();
        for (j, c) in spec.samples().iter().enumerate() {
            assert!((c - unit_gaussian(g.momentum(j))).norm() < 1e-10);
        }
    }

    #[test]
    fn single_bin_spectrum_is_flat_plane_wave() {
        let g = gauss_grid();
        let j = 7;
        let mut spec = SpectralFunction::zeros(g);
        spec.samples_mut()[j] = C::new(1.0 / g.dp().sqrt(), 0.0);
        let psi = spec.to_position();
        let expected = g.dp().sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        let p = g.momentum(j);
        for (k, c) in psi.samples().iter().enumerate() {
            assert!((c.norm() - expected).abs() < 1e-13);
            let phase = C::from_polar(expected, p * g.x(k));
            assert!((c - phase).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_spectrum_gives_zero_wave() {
        let psi = SpectralFunction::zeros(gauss_grid()).to_position();
        assert!(psi.samples().iter().all(|c| *c == C::new(0.0, 0.0)));
        assert!(psi.density().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn plane_wave_rejects_zero_momentum() {
        assert!(PlaneWave::new(0.0).is_err());
        assert!(PlaneWave::new(f64::INFINITY).is_err());
        let pw = PlaneWave::new(5.0).unwrap();
        let g = gauss_grid();
        assert!((pw.value(&g, 0.3, 0.0) - C::from_polar(1.0, 1.5)).norm() < 1e-15);
    }

    #[test]
    fn length_mismatch_and_nan_rejected() {
        let g = gauss_grid();
        assert!(WaveFunction::new(g, vec![C::new(0.0, 0.0); 3]).is_err());
        let mut v = vec![C::new(0.0, 0.0); g.len()];
        v[4] = C::new(f64::NAN, 0.0);
        assert!(WaveFunction::new(g, v).is_err());
    }

    fn arb_wave() -> impl Strategy<Value = WaveFunction<f64>> {
        (8usize..80, -20.0..20.0f64, 0.01..1.0f64).prop_flat_map(|(n, x0, dx)| {
            prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n).prop_map(move |v| {
                let g = Grid::new(x0, dx, n, UnitSystem::atomic()).unwrap();
                WaveFunction::new(g, v.into_iter().map(|(a, b)| C::new(a, b)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(psi in arb_wave()) {
            let spec = psi.to_momentum();
            let back = spec.to_position();
            prop_assert!(back.max_diff(&psi) < 1e-12);
            let again = back.to_momentum();
            let d = spec.samples().iter().zip(again.samples()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            prop_assert!(d < 1e-12);
            let nx = psi.norm_sqr();
            let np = spec.norm_sqr();
            prop_assert!((nx - np).abs() <= 1e-10 * nx.max(1e-300));
        }
    }
}
