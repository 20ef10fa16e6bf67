use crate::error::{Error, Result};
use crate::scalar::Real;

/// A vector potential `A(x, t)` coupling through `(p - e A)^2 / 2m`, `e = 1`.
pub trait VectorPotential<T: Real>: Sync {
    fn value(&self, x: T, t: T) -> T;

    /// Interval outside which `A` vanishes at all times, if there is one.
    /// Lets the stepper skip coupling work where it is known to be zero.
    fn support(&self) -> Option<(T, T)> {
        None
    }
}

/// Localized few-cycle pulse,
///
/// ```text
/// A(x, t) = A0 cos^2(pi (x - x0) / l) sin^2(pi t / tau) cos(omega0 t)
/// ```
///
/// on `|x - x0| <= l/2`, `-tau <= t <= 0`, and zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams<T> {
    a0: T,
    omega0: T,
    tau: T,
    x_center: T,
    width: T,
}

/// Samples per carrier cycle used when locating the field maximum.
const PEAK_SAMPLES_PER_CYCLE: usize = 256;

impl<T: Real> PulseParams<T> {
    pub fn new(a0: T, omega0: T, tau: T, x_center: T, width: T) -> Result<Self> {
        if !a0.is_finite() {
            return Err(Error::InvalidParameter("A0 must be finite".into()));
        }
        for (name, v) in [("omega0", omega0), ("tau", tau), ("width", width)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and positive")));
            }
        }
        if !x_center.is_finite() {
            return Err(Error::InvalidParameter("pulse center must be finite".into()));
        }
        Ok(Self { a0, omega0, tau, x_center, width })
    }

    /// Pulse whose largest `|E|` over space and time equals `f0`.
    pub fn from_peak_field(f0: T, omega0: T, tau: T, x_center: T, width: T) -> Result<Self> {
        let unit = Self::new(T::one(), omega0, tau, x_center, width)?;
        if !(f0.is_finite() && f0 >= T::zero()) {
            return Err(Error::InvalidParameter("peak field must be finite and non-negative".into()));
        }
        // E is linear in A0, so the calibration is a single division.
        Ok(Self { a0: f0 / unit.peak_field_per_a0(), ..unit })
    }

    /// Four carrier cycles.
    pub fn default_tau(omega0: T) -> T {
        T::lit(8.0) * T::PI() / omega0
    }

    #[inline]
    pub fn a0(&self) -> T {
        self.a0
    }

    #[inline]
    pub fn omega0(&self) -> T {
        self.omega0
    }

    #[inline]
    pub fn tau(&self) -> T {
        self.tau
    }

    #[inline]
    pub fn x_center(&self) -> T {
        self.x_center
    }

    #[inline]
    pub fn width(&self) -> T {
        self.width
    }

    /// `[x0 - l/2, x0 + l/2]`.
    pub fn region(&self) -> (T, T) {
        let h = T::lit(0.5) * self.width;
        (self.x_center - h, self.x_center + h)
    }

    /// Peak electric field.
    pub fn f0(&self) -> T {
        self.a0.abs() * self.peak_field_per_a0()
    }

    fn spatial(&self, x: T) -> T {
        let d = x - self.x_center;
        if d.abs() > T::lit(0.5) * self.width {
            return T::zero();
        }
        let c = (T::PI() * d / self.width).cos();
        c * c
    }

    fn active(&self, t: T) -> bool {
        t >= -self.tau && t <= T::zero()
    }

    /// Temporal profile `sin^2(pi t / tau) cos(omega0 t)`.
    fn envelope(&self, t: T) -> T {
        let s = (T::PI() * t / self.tau).sin();
        s * s * (self.omega0 * t).cos()
    }

    /// Time derivative of [`envelope`](Self::envelope).
    fn envelope_rate(&self, t: T) -> T {
        let w = T::PI() / self.tau;
        let s = (w * t).sin();
        w * (T::lit(2.0) * w * t).sin() * (self.omega0 * t).cos() - self.omega0 * s * s * (self.omega0 * t).sin()
    }

    pub fn vector_potential(&self, x: T, t: T) -> T {
        if !self.active(t) {
            return T::zero();
        }
        self.a0 * self.spatial(x) * self.envelope(t)
    }

    /// `E = -dA/dt`.
    pub fn electric_field(&self, x: T, t: T) -> T {
        if !self.active(t) {
            return T::zero();
        }
        -self.a0 * self.spatial(x) * self.envelope_rate(t)
    }

    /// `max_t |d/dt envelope|`, by dense sampling refined with a golden-section search.
    fn peak_field_per_a0(&self) -> T {
        let cycles = (self.omega0 * self.tau / (T::lit(2.0) * T::PI())).max(T::one());
        let samples = (cycles.to_f64().unwrap().ceil() as usize * PEAK_SAMPLES_PER_CYCLE).clamp(1024, 1 << 22);
        let h = self.tau / T::from_usize_lossy(samples);
        let f = |t: T| self.envelope_rate(t).abs();
        let (mut best_k, mut best) = (0, T::zero());
        for k in 0..=samples {
            let v = f(-self.tau + h * T::from_usize_lossy(k));
            if v > best {
                best = v;
                best_k = k;
            }
        }
        let centre = -self.tau + h * T::from_usize_lossy(best_k);
        let (mut a, mut b) = ((centre - h).max(-self.tau), (centre + h).min(T::zero()));
        let r = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
        for _ in 0..80 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.max(f(T::lit(0.5) * (a + b)))
    }
}

impl<T: Real> VectorPotential<T> for PulseParams<T> {
    fn value(&self, x: T, t: T) -> T {
        self.vector_potential(x, t)
    }

    fn support(&self) -> Option<(T, T)> {
        Some(self.region())
    }
}

/// A spatially and temporally constant potential. On a periodic box it is a
/// pure gauge when `e A L / (2 pi hbar)` is an integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPotential<T>(pub T);

impl<T: Real> VectorPotential<T> for ConstantPotential<T> {
    fn value(&self, _x: T, _t: T) -> T {
        self.0
    }
}

/// Pointwise sum of two potentials.
#[derive(Debug, Clone, Copy)]
pub struct Superposed<P, Q>(pub P, pub Q);

impl<T: Real, P: VectorPotential<T>, Q: VectorPotential<T>> VectorPotential<T> for Superposed<P, Q> {
    fn value(&self, x: T, t: T) -> T {
        self.0.value(x, t) + self.1.value(x, t)
    }

    fn support(&self) -> Option<(T, T)> {
        match (self.0.support(), self.1.support()) {
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn pulse() -> PulseParams<f64> {
        let w = 0.057;
        PulseParams::new(0.3, w, PulseParams::default_tau(w), 100.0, 400.0).unwrap()
    }

    #[test]
    fn vanishes_at_window_and_region_edges() {
        let p = pulse();
        let (l, r) = p.region();
        for x in [l, r, l - 10.0, r + 1.0] {
            for t in [-200.0, -50.0, -1.0] {
                assert!(p.vector_potential(x, t).abs() < 1e-15);
                assert!(p.electric_field(x, t).abs() < 1e-15);
            }
        }
        for x in [0.0, 100.0, 250.0] {
            assert!(p.vector_potential(x, -p.tau()).abs() < 1e-15);
            assert!(p.vector_potential(x, 0.0).abs() < 1e-15);
            assert_eq!(p.vector_potential(x, 1.0), 0.0);
        }
    }

    #[test]
    fn centre_of_pulse_value() {
        let p = pulse();
        let v = p.vector_potential(100.0, -0.5 * p.tau());
        assert!((v - 0.3 * (0.057 * 0.5 * p.tau()).cos()).abs() < 1e-15);
    }

    #[test]
    fn field_is_minus_time_derivative() {
        let p = pulse();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let h = 1e-4;
        for _ in 0..100 {
            let x = rng.gen_range(-120.0..320.0);
            let t = rng.gen_range(-p.tau() + 2.0 * h..-2.0 * h);
            let fd = -(p.vector_potential(x, t + h) - p.vector_potential(x, t - h)) / (2.0 * h);
            let e = p.electric_field(x, t);
            // central difference error ~ h^2 |A'''| / 6
            assert!((fd - e).abs() <= 1e-8 * e.abs().max(1e-2), "x={x} t={t} {fd} {e}");
        }
        let zero = PulseParams::new(0.0, 0.057, 400.0, 0.0, 10.0).unwrap();
        assert_eq!(zero.electric_field(0.0, -100.0), 0.0);
    }

    #[test]
    fn peak_field_calibration_round_trips() {
        let w = 0.057;
        let tau = PulseParams::default_tau(w);
        let p: PulseParams<f64> = PulseParams::from_peak_field(2e-3, w, tau, 0.0, 50.0).unwrap();
        assert!((p.f0() - 2e-3).abs() < 1e-15);
        let mut peak = 0.0f64;
        for k in 0..200_000 {
            let t = -tau * k as f64 / 200_000.0;
            peak = peak.max(p.electric_field(0.0, t).abs());
        }
        assert!(peak <= 2e-3 * (1.0 + 1e-12) && peak > 2e-3 * (1.0 - 1e-8), "{peak}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PulseParams::new(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(PulseParams::new(1.0, 1.0, -1.0, 0.0, 1.0).is_err());
        assert!(PulseParams::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PulseParams::from_peak_field(-1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }
}
