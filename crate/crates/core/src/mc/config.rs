use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which clock a set of passage times or a histogram lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinate {
    OriginalT,
    RescaledS,
}

/// Monte Carlo run settings. For Brownian runs `dt` and `t_max` are read as
/// the step and horizon on the `s` clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1e-3,
            t_max: 10.0,
            seed: 0,
            bridge_correction: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max.is_finite() && self.dt < self.t_max) {
            return Err(Error::InvalidConfig(format!(
                "horizon {} must be finite and exceed dt = {}",
                self.t_max, self.dt
            )));
        }
        Ok(())
    }

    /// Number of whole steps that fit in the horizon.
    pub fn n_steps(&self) -> u64 {
        (self.t_max / self.dt * (1.0 + 1e-12)).floor() as u64
    }
}

/// Time grid for Brownian runs on the `s` clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SGrid {
    /// `s_i = i·ds`.
    Uniform { ds: f64 },
    /// `s_i = e^{2β·i·dt} - 1`, the image of a uniform OU grid, so that
    /// Brownian and OU runs with the same seed share every Gaussian draw.
    OuImage { dt: f64, beta: f64 },
}

impl SGrid {
    #[inline]
    pub fn at(&self, i: u64) -> f64 {
        match *self {
            SGrid::Uniform { ds } => i as f64 * ds,
            SGrid::OuImage { dt, beta } => (2.0 * beta * dt * i as f64).exp_m1(),
        }
    }
}
