//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

/// Arguments above this switch sinh/cosh powers to log space.
pub const LOG_SPACE_THRESHOLD: f64 = 300.0;

pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `ln(sinh(x))` for `x > 0`, stable for large arguments.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `ln(cosh(x))`, stable for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-2.0 * x).exp().ln_1p()
    } else {
        x.cosh().ln()
    }
}

/// `sinh(x)^a * cosh(x)^b` for `x >= 0`, routed through logarithms when `x`
/// exceeds [`LOG_SPACE_THRESHOLD`].
pub fn sinh_cosh_pow(x: f64, a: i32, b: i32) -> f64 {
    if x > LOG_SPACE_THRESHOLD {
        (a as f64 * ln_sinh(x) + b as f64 * ln_cosh(x)).exp()
    } else {
        x.sinh().powi(a) * x.cosh().powi(b)
    }
}

/// Volume of the round unit sphere `S^m` (so `S^1` has length `2*pi`).
pub fn sphere_volume(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_volume(m - 2),
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// Neumaier-compensated sum. Order dependent only through the input order,
/// so callers get bit-stable results by fixing that order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Two-level Richardson extrapolation to `h -> 0` from samples at
/// `h, h/10, h/100`, assuming an expansion `f0 + a h + b h^2 + ...`.
pub fn richardson_to_zero(f_h: f64, f_h10: f64, f_h100: f64) -> f64 {
    let r1 = (10.0 * f_h10 - f_h) / 9.0;
    let r2 = (10.0 * f_h100 - f_h10) / 9.0;
    (100.0 * r2 - r1) / 99.0
}
