//! Physical constants and unit conversions.
//!
//! All numerics run in a unit system where `hbar` and `mass` are explicit
//! parameters; the default profile is atomic units (`hbar = m = e = 1`).
//! SI-flavoured inputs such as nanometres or V/m are converted here and
//! nowhere else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bohr radii per nanometre.
pub const BOHR_PER_NM: f64 = 18.897_261_246_22;
/// Atomic time units per femtosecond.
pub const AU_TIME_PER_FS: f64 = 41.341_373_335_18;
/// Atomic field units per V/m.
pub const AU_FIELD_PER_V_PER_M: f64 = 1.0 / 5.142_206_747_63e11;
/// Speed of light in atomic units (inverse fine-structure constant).
pub const SPEED_OF_LIGHT_AU: f64 = 137.035_999_084;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem<T> {
    pub hbar: T,
    pub mass: T,
    pub bohr_per_nm: T,
    pub time_per_fs: T,
    pub field_per_v_per_m: T,
    pub speed_of_light: T,
}

impl<T: Real> UnitSystem<T> {
    /// Atomic units: `hbar = m = 1`.
    pub fn atomic() -> Self {
        Self {
            hbar: T::one(),
            mass: T::one(),
            bohr_per_nm: T::lit(BOHR_PER_NM),
            time_per_fs: T::lit(AU_TIME_PER_FS),
            field_per_v_per_m: T::lit(AU_FIELD_PER_V_PER_M),
            speed_of_light: T::lit(SPEED_OF_LIGHT_AU),
        }
    }

    /// Atomic conversion factors with a custom `hbar` and particle mass.
    pub fn with_constants(hbar: T, mass: T) -> Result<Self> {
        let units = Self { hbar, mass, ..Self::atomic() };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("bohr_per_nm", self.bohr_per_nm),
            ("time_per_fs", self.time_per_fs),
            ("field_per_v_per_m", self.field_per_v_per_m),
            ("speed_of_light", self.speed_of_light),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and positive")));
            }
        }
        Ok(())
    }

    /// Free-particle dispersion `omega(p) = p^2 / (2 m hbar)`.
    #[inline]
    pub fn dispersion(&self, p: T) -> T {
        p * p / (T::lit(2.0) * self.mass * self.hbar)
    }

    pub fn nm(&self, length_nm: T) -> T {
        length_nm * self.bohr_per_nm
    }

    pub fn fs(&self, time_fs: T) -> T {
        time_fs * self.time_per_fs
    }

    pub fn v_per_m(&self, field: T) -> T {
        field * self.field_per_v_per_m
    }

    /// Angular frequency of light with the given vacuum wavelength in nm.
    pub fn wavelength_nm_to_omega(&self, wavelength_nm: T) -> T {
        T::lit(2.0) * T::PI() * self.speed_of_light / self.nm(wavelength_nm)
    }
}

impl<T: Real> Default for UnitSystem<T> {
    fn default() -> Self {
        Self::atomic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_values() {
        let u = UnitSystem::<f64>::atomic();
        assert_eq!(u.dispersion(0.0), 0.0);
        assert_eq!(u.dispersion(1.0), 0.5);
        for p in [0.3, 1.7, 5.0, 12.25] {
            assert_eq!(u.dispersion(p), u.dispersion(-p));
        }
        let heavy = UnitSystem::with_constants(1.0, 4.0).unwrap();
        assert_eq!(heavy.dispersion(2.0), 0.5);
    }

    #[test]
    fn rejects_nonpositive_constants() {
        assert!(UnitSystem::with_constants(0.0, 1.0).is_err());
        assert!(UnitSystem::with_constants(1.0, -1.0).is_err());
        assert!(UnitSystem::with_constants(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn eight_hundred_nm_carrier() {
        let u = UnitSystem::<f64>::atomic();
        let w = u.wavelength_nm_to_omega(800.0);
        // 1.55 eV photon
        assert!((w - 0.056_954).abs() < 1e-5, "{w}");
        assert!((u.nm(800.0) - 15_117.8).abs() < 0.1);
    }
}
