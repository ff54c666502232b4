use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Probability that a Brownian bridge over a step of length `h` starting at
/// distance `d0 > 0` above a straight line and ending at `d1 > 0` above it
/// touches the line.
#[inline]
pub fn bridge_crossing_probability(d0: f64, d1: f64, h: f64) -> f64 {
    (-2.0 * d0 * d1 / h).exp()
}

/// Draws the first time a Brownian bridge hits a straight line, as a
/// fraction of the step length `h`, given that it does.
///
/// `d0 > 0` is the starting distance above the line and `d1` the end
/// distance, of either sign. A bridge conditioned to touch the line and end
/// above it has the same hitting time as the reflected bridge ending at
/// `-|d1|`. Under `u = h r / (h + r)` the bridge becomes a free Brownian
/// motion hitting the line `-d0 + (|d1|/h)·r`, whose hitting time is inverse
/// Gaussian with mean `d0·h/|d1|` and shape `d0²`.
pub fn bridge_hitting_fraction<R: Rng + ?Sized>(d0: f64, d1: f64, h: f64, rng: &mut R) -> f64 {
    let r = if d1 == 0.0 {
        // Driftless limit: hitting time of level d0 is d0²/Z².
        let z: f64 = StandardNormal.sample(rng);
        d0 * d0 / (z * z)
    } else {
        inverse_gaussian(d0 * h / d1.abs(), d0 * d0, rng)
    };
    if r.is_infinite() {
        return 1.0;
    }
    (r / (h + r)).clamp(0.0, 1.0)
}

/// Michael-Schucany-Haas sampler in a form that stays accurate when the
/// mean is much larger than the shape.
fn inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let phi = mean * z * z / (2.0 * shape);
    let x = mean / (1.0 + phi + (phi * (2.0 + phi)).sqrt());
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}
