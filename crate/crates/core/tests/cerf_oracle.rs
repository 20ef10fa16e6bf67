mod common;

use chargeflow::gaussian::cerf;
use common::erf_oracle::erf_rational;
use num_complex::Complex64;

fn rel_err(z: Complex64, reference: (f64, f64)) -> f64 {
    let r = Complex64::new(reference.0, reference.1);
    let v = cerf(z).unwrap();
    (v - r).norm() / r.norm()
}

#[test]
fn real_axis_against_series() {
    let r = erf_rational(5, 0, 1);
    assert!((cerf(Complex64::new(5.0, 0.0)).unwrap().re - r.0).abs() < 1e-13);
    assert_eq!(r.1, 0.0);
}

#[test]
fn imaginary_axis_against_series() {
    let r = erf_rational(0, 1, 1);
    let v = cerf(Complex64::new(0.0, 1.0)).unwrap();
    assert_eq!(v.re, 0.0);
    // i erfi(1) = i 1.6504257587975428...
    assert!((v.im - r.1).abs() < 1e-13 * r.1);
    assert!((r.1 - 1.650_425_758_797_542_8).abs() < 1e-14);
}

#[test]
fn dense_scan_of_the_strip() {
    let mut worst = (0.0, 0.0, 0.0);
    for i in 0..=48 {
        for j in 0..=48 {
            // (re, im) = (-12 + i/2, -12 + j/2) restricted to |z| <= 13
            let (a, b) = (-24 + i, -24 + j);
            if a * a + b * b > 26 * 26 || (a == 0 && b == 0) {
                continue;
            }
            let z = Complex64::new(a as f64 / 2.0, b as f64 / 2.0);
            let e = rel_err(z, erf_rational(a, b, 2));
            if e > worst.0 {
                worst = (e, z.re, z.im);
            }
        }
    }
    assert!(worst.0 <= 1e-12, "worst relative error {worst:?}");
}
