//! Accurate evaluation of `exp(-i * omega * t)` for large `omega * t`.

use num_complex::Complex64;

const TWO_PI_HI: f64 = std::f64::consts::TAU;
// TAU - TWO_PI_HI, the part of 2*pi not representable in TWO_PI_HI.
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Reduces the product `a * b` modulo 2*pi into `[-pi, pi]`.
///
/// The product is formed exactly as a double-double with a fused
/// multiply-add, and 2*pi is carried to roughly 32 digits, so the result keeps
/// full relative precision even when `a * b` is tens of thousands of radians.
pub fn reduce_product(a: f64, b: f64) -> f64 {
    let p = a * b;
    let p_err = a.mul_add(b, -p);
    let k = (p / TWO_PI_HI).round();
    // k * TWO_PI_HI is close to p, so the fma cancels without rounding loss.
    let r = (-k).mul_add(TWO_PI_HI, p);
    r - k * TWO_PI_LO + p_err
}

/// `exp(-i * energy * t)` with the phase reduced before the trig calls.
pub fn unit_phasor(energy: f64, t: f64) -> Complex64 {
    let theta = reduce_product(energy, t);
    let (s, c) = theta.sin_cos();
    Complex64::new(c, -s)
}
