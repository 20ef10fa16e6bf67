use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::units::UnitSystem;

/// Uniform periodic sampling of the line, `x_k = x_min + k dx` for `k < n`.
///
/// The box has length `L = n dx`; its reciprocal lattice has spacing
/// `dp = 2 pi hbar / L` and, in FFT order, covers `[-pi hbar / dx, pi hbar / dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    x_min: T,
    dx: T,
    n: usize,
    units: UnitSystem<T>,
}

pub const MIN_POINTS: usize = 8;

impl<T: Real> Grid<T> {
    pub fn new(x_min: T, dx: T, n: usize, units: UnitSystem<T>) -> Result<Self> {
        if !(dx.is_finite() && dx > T::zero()) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        if !x_min.is_finite() {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {MIN_POINTS} points")));
        }
        units.validate()?;
        Ok(Self { x_min, dx, n, units })
    }

    /// Grid of `n` points spanning a box of the given length centered on `center`.
    pub fn centered(center: T, length: T, n: usize, units: UnitSystem<T>) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {MIN_POINTS} points")));
        }
        let dx = length / T::from_usize_lossy(n);
        Self::new(center - T::lit(0.5) * length, dx, n, units)
    }

    /// Like [`Grid::centered`], with the box length adjusted to the nearest
    /// value for which `p0` is a lattice momentum.
    pub fn commensurate(center: T, approx_length: T, n: usize, p0: T, units: UnitSystem<T>) -> Result<Self> {
        if p0 == T::zero() || !p0.is_finite() {
            return Err(Error::InvalidParameter("commensurate grid needs a finite nonzero momentum".into()));
        }
        let two_pi_hbar = T::lit(2.0) * T::PI() * units.hbar;
        let cycles = (p0.abs() * approx_length / two_pi_hbar).round().max(T::one());
        Self::centered(center, cycles * two_pi_hbar / p0.abs(), n, units)
    }

    #[inline]
    pub fn x_min(&self) -> T {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> T {
        self.x(self.n - 1)
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn units(&self) -> &UnitSystem<T> {
        &self.units
    }

    #[inline]
    pub fn length(&self) -> T {
        self.dx * T::from_usize_lossy(self.n)
    }

    #[inline]
    pub fn x(&self, k: usize) -> T {
        self.x_min + self.dx * T::from_usize_lossy(k)
    }

    pub fn xs(&self) -> Vec<T> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    #[inline]
    pub fn dp(&self) -> T {
        T::lit(2.0) * T::PI() * self.units.hbar / self.length()
    }

    /// Signed lattice index of FFT bin `j`.
    #[inline]
    pub fn wavenumber_index(&self, j: usize) -> i64 {
        let j = j as i64;
        let n = self.n as i64;
        if j < n - n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Momentum of FFT bin `j`.
    #[inline]
    pub fn momentum(&self, j: usize) -> T {
        T::from_i64(self.wavenumber_index(j)).unwrap() * self.dp()
    }

    /// Lattice momenta in FFT order.
    pub fn momenta(&self) -> Vec<T> {
        (0..self.n).map(|j| self.momentum(j)).collect()
    }

    /// FFT bin holding momentum `p`, if `p` is a lattice momentum.
    pub fn momentum_bin(&self, p: T) -> Result<usize> {
        let dp = self.dp();
        let m = p / dp;
        let mr = m.round();
        let half = T::from_usize_lossy(self.n / 2);
        let off_lattice = || Error::OffLattice { p: p.to_f64().unwrap(), dp: dp.to_f64().unwrap() };
        if (m - mr).abs() > T::lit(1e-9) * T::one().max(mr.abs())
            || mr < -half
            || mr >= T::from_usize_lossy(self.n) - half
        {
            return Err(off_lattice());
        }
        let m = mr.to_i64().unwrap();
        Ok(if m >= 0 { m as usize } else { (m + self.n as i64) as usize })
    }

    pub fn is_commensurate(&self, p: T) -> bool {
        self.momentum_bin(p).is_ok()
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_min && x <= self.x_max()
    }

    pub fn check_contains(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x: x.to_f64().unwrap_or(f64::NAN),
                min: self.x_min.to_f64().unwrap(),
                max: self.x_max().to_f64().unwrap(),
            })
        }
    }

    /// Index of the node nearest to `x` together with the snap distance.
    pub fn nearest_node(&self, x: T) -> Result<(usize, T)> {
        self.check_contains(x)?;
        let k = ((x - self.x_min) / self.dx).round().to_usize().unwrap().min(self.n - 1);
        Ok((k, (x - self.x(k)).abs()))
    }
}
