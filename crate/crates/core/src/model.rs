//! Ornstein-Uhlenbeck parameters, the exponential clock `s = e^{2βt} - 1`
//! and the pathwise representation of the process through a standard
//! Brownian motion running on that clock.
//!
//! ```text
//! dX = -β X dt + σ dW,   X(0) = x0
//! X(t) = x0 e^{-βt} + σ e^{-βt} / sqrt(2β) · B(e^{2βt} - 1)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated parameters of a suprathreshold OU first-passage problem.
///
/// `beta`, `sigma`, `theta` are positive and `x0 > theta`, so the noiseless
/// flow starting at `x0` decays through the threshold toward the mean `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    beta: f64,
    sigma: f64,
    x0: f64,
    theta: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

impl OuParams {
    pub fn new(beta: f64, sigma: f64, x0: f64, theta: f64) -> Result<Self> {
        let beta = positive("beta", beta)?;
        let sigma = positive("sigma", sigma)?;
        let theta = positive("theta", theta)?;
        let x0 = positive("x0", x0)?;
        if x0 <= theta {
            return Err(Error::SubthresholdInitialCondition { x0, theta });
        }
        Ok(Self {
            beta,
            sigma,
            x0,
            theta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Crossing time of the noiseless flow, `ln(x0/θ)/β`.
    pub fn deterministic_crossing_time(&self) -> f64 {
        (self.x0 / self.theta).ln() / self.beta
    }

    /// `sqrt(2β)/σ`, the factor converting OU distances into Brownian units.
    pub(crate) fn brownian_scale(&self) -> f64 {
        (2.0 * self.beta).sqrt() / self.sigma
    }

    /// Mean and variance of `X(t + dt)` given `X(t) = x`.
    pub fn transition_moments(&self, x: f64, dt: f64) -> (f64, f64) {
        let mean = x * (-self.beta * dt).exp();
        let var = self.sigma * self.sigma * (-(-2.0 * self.beta * dt).exp_m1()) / (2.0 * self.beta);
        (mean, var)
    }
}

fn check_time(t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// `s = e^{2βt} - 1`.
pub fn time_to_s(t: f64, beta: f64) -> Result<f64> {
    let t = check_time(t)?;
    Ok((2.0 * beta * t).exp_m1())
}

/// `t = ln(1 + s) / (2β)`.
pub fn s_to_time(s: f64, beta: f64) -> Result<f64> {
    let s = check_time(s)?;
    Ok(s.ln_1p() / (2.0 * beta))
}

/// A point on the two clocks. `ln_s_plus_one = 2βt` is kept so that callers
/// needing `e^{2βt}` in a bound never have to form it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePair {
    pub t: f64,
    pub s: f64,
    pub ln_s_plus_one: f64,
}

impl TimePair {
    pub fn from_t(t: f64, beta: f64) -> Result<Self> {
        let s = time_to_s(t, beta)?;
        Ok(Self {
            t,
            s,
            ln_s_plus_one: 2.0 * beta * t,
        })
    }

    pub fn from_s(s: f64, beta: f64) -> Result<Self> {
        let t = s_to_time(s, beta)?;
        Ok(Self {
            t,
            s,
            ln_s_plus_one: s.ln_1p(),
        })
    }
}

/// Evaluates `X(t)` from a Brownian trajectory given as a function of `s`.
pub fn ou_from_brownian_path<F>(params: &OuParams, brownian: F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let t = check_time(t)?;
    let s = (2.0 * params.beta * t).exp_m1();
    Ok(ou_from_brownian_value(params, t, brownian(s)))
}

/// `X(t)` given the Brownian value `B(e^{2βt} - 1)` already sampled.
pub fn ou_from_brownian_value(params: &OuParams, t: f64, b: f64) -> f64 {
    let decay = (-params.beta * t).exp();
    params.x0 * decay + params.sigma * decay / (2.0 * params.beta).sqrt() * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> OuParams {
        OuParams::new(1.0, 0.5, 2.0, 1.0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(OuParams::new(1.0, 0.5, 2.0, 1.0).is_ok());
        assert_eq!(
            OuParams::new(1.0, 0.5, 1.0, 1.0),
            Err(Error::SubthresholdInitialCondition {
                x0: 1.0,
                theta: 1.0
            })
        );
        assert!(matches!(
            OuParams::new(0.0, 0.5, 2.0, 1.0),
            Err(Error::NonPositiveParameter { name: "beta", .. })
        ));
        assert!(matches!(
            OuParams::new(1.0, f64::NAN, 2.0, 1.0),
            Err(Error::NonPositiveParameter { name: "sigma", .. })
        ));
        assert!(matches!(
            OuParams::new(1.0, 0.5, 2.0, -1.0),
            Err(Error::NonPositiveParameter { name: "theta", .. })
        ));
    }

    #[test]
    fn clock_examples() {
        assert_eq!(time_to_s(0.0, 1.0).unwrap(), 0.0);
        assert!((time_to_s(3f64.ln() / 2.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((time_to_s(1.0, 0.5).unwrap() - 1.718281828459045).abs() < 1e-14);
        assert_eq!(s_to_time(0.0, 1.0).unwrap(), 0.0);
        assert!((s_to_time(2.0, 1.0).unwrap() - 3f64.ln() / 2.0).abs() < 1e-15);
        assert!((s_to_time(8.0, 1.0).unwrap() - 9f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn clock_rejects_bad_times() {
        assert_eq!(time_to_s(-1.0, 1.0), Err(Error::NegativeTime(-1.0)));
        assert!(time_to_s(f64::INFINITY, 1.0).is_err());
        assert!(s_to_time(f64::NAN, 1.0).is_err());
        assert!(ou_from_brownian_path(&fig1(), |_| 0.0, -0.5).is_err());
    }

    #[test]
    fn brownian_representation_examples() {
        let p = fig1();
        assert_eq!(ou_from_brownian_path(&p, |_| 0.0, 0.0).unwrap(), 2.0);
        assert!(ou_from_brownian_path(&p, |_| 0.0, 50.0).unwrap() < 1e-20);
        let x = ou_from_brownian_path(&p, f64::sqrt, 3f64.ln() / 2.0).unwrap();
        assert!((x - 2.5 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn deterministic_crossing() {
        assert!((fig1().deterministic_crossing_time() - 2f64.ln()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn clock_round_trip(t in 0.0f64..50.0, beta in 0.01f64..10.0) {
            prop_assume!(beta * t < 300.0);
            let back = s_to_time(time_to_s(t, beta).unwrap(), beta).unwrap();
            prop_assert!((back - t).abs() <= 1e-12 * t.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn clock_is_increasing(t in 0.0f64..20.0, dt in 1e-6f64..1.0, beta in 0.01f64..5.0) {
            prop_assert!(time_to_s(t + dt, beta).unwrap() > time_to_s(t, beta).unwrap());
        }
    }
}
