use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Log of the first-passage density of `B(0) = 0` to the line `a1 + b1·s`.
pub fn ln_g01(s: f64, a1: f64, b1: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::NonPositiveTime(s));
    }
    if !(a1 < 0.0) {
        return Err(Error::InvalidLine(a1));
    }
    let level = a1 + b1 * s;
    Ok((-a1).ln() - 0.5 * (2.0 * PI * s * s * s).ln() - level * level / (2.0 * s))
}

/// `|a1| / sqrt(2π s³) · exp(-(a1 + b1 s)² / (2s))`.
pub fn g01(s: f64, a1: f64, b1: f64) -> Result<f64> {
    ln_g01(s, a1, b1).map(f64::exp)
}

/// Log of the first-passage density from level `start` at time `s` to the
/// horizontal line at `a2`, evaluated at time `s_prime`.
pub fn ln_g12(s_prime: f64, s: f64, start: f64, a2: f64) -> Result<f64> {
    if !(s > 0.0 && s_prime > s && s_prime.is_finite()) {
        return Err(Error::TimeOrderViolation { s_prime, s });
    }
    let gap = start - a2;
    let h = s_prime - s;
    Ok(gap.abs().ln() - 0.5 * (2.0 * PI * h * h * h).ln() - gap * gap / (2.0 * h))
}

/// `|start - a2| / sqrt(2π (s' - s)³) · exp(-(start - a2)² / (2(s' - s)))`.
pub fn g12(s_prime: f64, s: f64, start: f64, a2: f64) -> Result<f64> {
    ln_g12(s_prime, s, start, a2).map(f64::exp)
}
