use std::f64::consts::{PI, TAU};

/// Wraps an angle to the half-open interval `(-pi, pi]`.
///
/// Values already inside the interval are returned unchanged (bit-exact).
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = (a + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        w = PI;
    }
    w
}

/// Difference `a - b` wrapped to `(-pi, pi]`.
pub fn wrapped_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}
