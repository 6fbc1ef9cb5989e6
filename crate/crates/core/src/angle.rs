//! Principal-angle reduction.

use std::f64::consts::{PI, TAU};

/// Reduces an angle into `[-π, π)`.
pub fn principal_angle_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to TAU for tiny negative inputs
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn principal_angle_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Four-quadrant phase of `(re, im)` in `[-π, π)` with `atan2(0, 0) = 0`.
pub fn phase(re: f64, im: f64) -> f64 {
    if re == 0.0 && im == 0.0 {
        return 0.0;
    }
    principal_angle_pi(im.atan2(re))
}
