//! Fixed-point big-integer Maclaurin summation of erf(z).
//!
//! Arguments are exact rationals `(re_num + i im_num) / den`. Every partial
//! sum is carried with `FRAC_BITS` fractional bits, so the cancellation that
//! ruins the series in double precision is harmless here. Only the final
//! `2/sqrt(pi)` factor is applied in f64.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

const FRAC_BITS: u64 = 512;

fn to_f64(v: &BigInt) -> f64 {
    // Keep 64 significant bits before converting.
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap() / 2f64.powi(FRAC_BITS as i32);
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    top.to_f64().unwrap() * 2f64.powi(shift as i32 - FRAC_BITS as i32)
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> FRAC_BITS
}

pub fn erf_rational(re_num: i64, im_num: i64, den: i64) -> (f64, f64) {
    let one: BigInt = BigInt::one() << FRAC_BITS;
    let zr: BigInt = (BigInt::from(re_num) * &one) / den;
    let zi: BigInt = (BigInt::from(im_num) * &one) / den;
    // w = -z^2
    let wr = -(mul(&zr, &zr) - mul(&zi, &zi));
    let wi: BigInt = -(mul(&zr, &zi) << 1u32);

    let (mut tr, mut ti) = (zr.clone(), zi.clone());
    let (mut sr, mut si) = (zr, zi);
    let threshold: BigInt = BigInt::one() << 8;
    let mut n: i64 = 1;
    loop {
        let nr = (mul(&tr, &wr) - mul(&ti, &wi)) / n;
        let ni = (mul(&tr, &wi) + mul(&ti, &wr)) / n;
        tr = nr;
        ti = ni;
        let k = 2 * n + 1;
        sr += &tr / k;
        si += &ti / k;
        if tr.abs() < threshold && ti.abs() < threshold && n > 10 {
            break;
        }
        n += 1;
        assert!(n < 100_000);
    }
    if sr.is_zero() && si.is_zero() {
        return (0.0, 0.0);
    }
    let f = 2.0 / std::f64::consts::PI.sqrt();
    (to_f64(&sr) * f, to_f64(&si) * f)
}
