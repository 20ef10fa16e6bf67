//! Error function of complex argument.
//!
//! Two evaluation routes cover the first quadrant; the other quadrants
//! follow from `erf(-z) = -erf(z)` and `erf(conj z) = conj erf(z)`, applied
//! exactly so that both symmetries hold bit for bit.
//!
//! * Maclaurin series, when `|z| <= 2.5` or when `Re z <= 1` and `|z| <= 8`.
//!   Near the imaginary axis the terms share (almost) one phase, so the sum
//!   does not cancel even where `|erf|` is huge.
//! * Laplace continued fraction for the scaled complement
//!   `erfcx(z) = exp(z^2) erfc(z)`, evaluated with the modified Lentz
//!   recurrence, everywhere else in the right half plane.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-width of the strip `|Im z| <= STRIP` on which [`cerf`] is defined.
pub const STRIP: f64 = 12.0;

const MAX_SERIES_TERMS: usize = 4000;
const MAX_CF_TERMS: usize = 20_000;

#[inline]
fn use_series<T: Real>(z: Complex<T>) -> bool {
    let r = z.norm();
    r <= T::lit(2.5) || (z.re.abs() <= T::one() && r <= T::lit(8.0))
}

/// Maclaurin series `2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))`.
fn erf_series<T: Real>(z: Complex<T>) -> Complex<T> {
    let eps = T::epsilon();
    let minus_z2 = -(z * z);
    let peak = z.norm_sqr();
    let mut term = z;
    let mut sum = z;
    for n in 1..MAX_SERIES_TERMS {
        let nf = T::from_usize_lossy(n);
        term = term * minus_z2 / nf;
        let contrib = term / (T::lit(2.0) * nf + T::one());
        sum = sum + contrib;
        if nf > peak && contrib.norm() <= eps * T::lit(0.25) * sum.norm() {
            break;
        }
    }
    sum * (T::lit(2.0) / T::PI().sqrt())
}

/// `erfcx(z)` for `Re z >= 0` from
/// `sqrt(pi) erfcx(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`.
fn erfcx_continued_fraction<T: Real>(z: Complex<T>) -> Complex<T> {
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let small = Complex::new(tiny, T::zero());
    let mut f = if z.norm() == T::zero() { small } else { z };
    let mut c = f;
    let mut d = Complex::new(T::zero(), T::zero());
    for n in 1..MAX_CF_TERMS {
        let a = T::from_usize_lossy(n) * T::lit(0.5);
        d = z + d * a;
        if d.norm() == T::zero() {
            d = small;
        }
        c = z + c.inv() * a;
        if c.norm() == T::zero() {
            c = small;
        }
        d = d.inv();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).norm() <= eps {
            break;
        }
    }
    f.inv() / T::PI().sqrt()
}

/// Scaled complementary error function `exp(z^2) erfc(z)` for `Re z >= 0`.
pub fn erfcx<T: Real>(z: Complex<T>) -> Complex<T> {
    debug_assert!(z.re >= T::zero());
    let lower = z.im < T::zero();
    let q = Complex::new(z.re, z.im.abs());
    let v = if use_series(q) {
        (q * q).exp() * (Complex::new(T::one(), T::zero()) - erf_series(q))
    } else {
        erfcx_continued_fraction(q)
    };
    if lower {
        v.conj()
    } else {
        v
    }
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-i z)` in the closed upper half plane.
pub fn faddeeva<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if z.im < T::zero() {
        return Err(Error::Range("faddeeva is evaluated for Im z >= 0 only".into()));
    }
    Ok(erfcx(Complex::new(z.im, -z.re)))
}

fn erf_first_quadrant<T: Real>(z: Complex<T>) -> Complex<T> {
    if use_series(z) {
        erf_series(z)
    } else {
        Complex::new(T::one(), T::zero()) - (-(z * z)).exp() * erfcx_continued_fraction(z)
    }
}

/// Error function of complex argument on the strip `|Im z| <= 12`.
pub fn cerf<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Range("cerf argument must be finite".into()));
    }
    if z.im.abs() > T::lit(STRIP) {
        return Err(Error::Range(format!("|Im z| = {} exceeds the supported strip {STRIP}", z.im.abs())));
    }
    let (negate, w) = if z.re < T::zero() { (true, -z) } else { (false, z) };
    let v = erf_first_quadrant(Complex::new(w.re, w.im.abs()));
    let v = if w.im < T::zero() { v.conj() } else { v };
    Ok(if negate { -v } else { v })
}

/// Real error function.
pub fn erf<T: Real>(x: T) -> T {
    // Real arguments always lie in the strip.
    cerf(Complex::new(x, T::zero())).map(|v| v.re).unwrap_or(T::nan())
}

/// `exp(-c^2) erf(u + i c)`, finite and accurate for any real `u`, `c`.
///
/// Inside the strip this is a plain product; outside it the Gaussian factor
/// is folded into the scaled complement so that nothing overflows.
pub fn erf_shifted_scaled<T: Real>(u: T, c: T) -> Complex<T> {
    let damp = (-c * c).exp();
    if c.abs() <= T::lit(STRIP) {
        return cerf(Complex::new(u, c)).expect("argument within strip") * damp;
    }
    let (sign, u, c) = if u < T::zero() { (-T::one(), -u, -c) } else { (T::one(), u, c) };
    let phase = Complex::new(-u * u, -T::lit(2.0) * u * c).exp();
    (Complex::new(damp, T::zero()) - phase * erfcx(Complex::new(u, c))) * sign
}
