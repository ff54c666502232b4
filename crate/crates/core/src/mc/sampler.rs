use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::bridge::{bridge_crossing_probability, bridge_hitting_fraction};
use super::config::{Coordinate, SGrid, SimConfig};
use crate::error::Result;
use crate::geometry::Boundary;
use crate::model::OuParams;
use crate::rng::{PathStream, StreamKey};

/// First passage of one path: the crossing time and the index of the grid
/// step during which it happened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passage {
    pub time: f64,
    pub step: u64,
}

/// Passage times of every simulated path, in path order. `None` marks a
/// path still alive at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstPassageTimes {
    pub coordinate: Coordinate,
    pub horizon: f64,
    pub passages: Vec<Option<Passage>>,
}

impl FirstPassageTimes {
    pub fn n_paths(&self) -> usize {
        self.passages.len()
    }

    pub fn n_censored(&self) -> usize {
        self.passages.iter().filter(|p| p.is_none()).count()
    }

    pub fn captured_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.passages.iter().flatten().map(|p| p.time)
    }
}

/// Exact one-step OU transition plus the bridge test against the threshold.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OuStepper {
    pub decay: f64,
    pub noise_sd: f64,
    /// `2β / (σ² sinh(β dt))`: the bridge exponent per unit squared distance.
    pub bridge_rate: f64,
    pub scale: f64,
    pub growth: f64,
    pub h: f64,
    pub two_beta: f64,
    pub theta: f64,
    pub dt: f64,
    pub bridge: bool,
}

impl OuStepper {
    pub fn new(params: &OuParams, dt: f64, bridge: bool) -> Self {
        let beta = params.beta();
        let sigma = params.sigma();
        let (_, var) = params.transition_moments(0.0, dt);
        Self {
            decay: (-beta * dt).exp(),
            noise_sd: var.sqrt(),
            bridge_rate: 2.0 * beta / (sigma * sigma * (beta * dt).sinh()),
            scale: (2.0 * beta).sqrt() / sigma,
            growth: (beta * dt).exp(),
            h: (2.0 * beta * dt).exp_m1(),
            two_beta: 2.0 * beta,
            theta: params.theta(),
            dt,
            bridge,
        }
    }

    /// Advances `x` over one step starting at `t0`. The deterministic part
    /// `drift` (e.g. forcing) is added to the decayed state. Returns the
    /// crossing time if the threshold was met during the step.
    #[inline]
    pub fn advance<R: Rng>(&self, x: &mut f64, drift: f64, t0: f64, rng: &mut R) -> Option<f64> {
        let z: f64 = StandardNormal.sample(rng);
        let next = *x * self.decay + drift + self.noise_sd * z;
        let above0 = *x - self.theta;
        let above1 = next - self.theta;
        *x = next;
        if above1 <= 0.0 {
            return Some(if self.bridge {
                t0 + self.hitting_offset(above0, above1, rng)
            } else {
                t0 + self.dt
            });
        }
        if self.bridge {
            let p = (-self.bridge_rate * above0 * above1).exp();
            if p > 0.0 && rng.random::<f64>() < p {
                return Some(t0 + self.hitting_offset(above0, above1, rng));
            }
        }
        None
    }

    /// Crossing time inside a step, drawn on the `s` clock with both
    /// distances rescaled to the start of the step.
    fn hitting_offset<R: Rng>(&self, above0: f64, above1: f64, rng: &mut R) -> f64 {
        let d0 = self.scale * above0;
        let d1 = self.scale * self.growth * above1;
        let frac = bridge_hitting_fraction(d0, d1, self.h, rng);
        ((frac * self.h).ln_1p() / self.two_beta).min(self.dt)
    }
}

pub(crate) fn ou_passage(
    stepper: &OuStepper,
    x0: f64,
    n_steps: u64,
    stream: &PathStream,
) -> Option<Passage> {
    let mut x = x0;
    for i in 0..n_steps {
        let t0 = i as f64 * stepper.dt;
        let mut rng = stream.step(i);
        if let Some(time) = stepper.advance(&mut x, 0.0, t0, &mut rng) {
            return Some(Passage { time, step: i });
        }
    }
    None
}

/// Samples OU first-passage times to `θ` from `x0` with exact Gaussian
/// transitions on a uniform grid of step `cfg.dt`.
pub fn sample_fpt_ou(params: &OuParams, cfg: &SimConfig) -> Result<FirstPassageTimes> {
    cfg.validate()?;
    let stepper = OuStepper::new(params, cfg.dt, cfg.bridge_correction);
    let n_steps = cfg.n_steps();
    let key = StreamKey::new(cfg.seed);
    let passages = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| ou_passage(&stepper, params.x0(), n_steps, &key.path(p)))
        .collect();
    Ok(FirstPassageTimes {
        coordinate: Coordinate::OriginalT,
        horizon: n_steps as f64 * cfg.dt,
        passages,
    })
}

fn brownian_passage<B: Boundary>(
    bdy: &B,
    grid: SGrid,
    horizon: f64,
    bridge: bool,
    stream: &PathStream,
) -> Option<Passage> {
    let mut w = 0.0;
    let mut s0 = 0.0;
    let mut d0 = -bdy.level(0.0);
    if d0 <= 0.0 {
        return Some(Passage { time: 0.0, step: 0 });
    }
    let mut i = 0u64;
    loop {
        let s1 = grid.at(i + 1);
        if s1 > horizon * (1.0 + 1e-12) {
            return None;
        }
        let h = s1 - s0;
        let mut rng = stream.step(i);
        let z: f64 = StandardNormal.sample(&mut rng);
        w += h.sqrt() * z;
        let d1 = w - bdy.level(s1);
        let crossed = if d1 <= 0.0 {
            true
        } else {
            bridge && {
                let p = bridge_crossing_probability(d0, d1, h);
                p > 0.0 && rng.random::<f64>() < p
            }
        };
        if crossed {
            let time = if bridge {
                s0 + h * bridge_hitting_fraction(d0, d1, h, &mut rng)
            } else {
                s1
            };
            return Some(Passage { time, step: i });
        }
        s0 = s1;
        d0 = d1;
        i += 1;
    }
}

/// Samples first-passage times of a standard Brownian motion started at 0
/// to `bdy` on the uniform `s` grid of step `cfg.dt` up to `cfg.t_max`.
pub fn sample_fpt_brownian<B: Boundary>(bdy: &B, cfg: &SimConfig) -> Result<FirstPassageTimes> {
    sample_fpt_brownian_on_grid(bdy, cfg, SGrid::Uniform { ds: cfg.dt })
}

/// As [`sample_fpt_brownian`] on an arbitrary increasing grid; `cfg.dt` is
/// only used for validation and `cfg.t_max` is the horizon on the `s` clock.
pub fn sample_fpt_brownian_on_grid<B: Boundary>(
    bdy: &B,
    cfg: &SimConfig,
    grid: SGrid,
) -> Result<FirstPassageTimes> {
    cfg.validate()?;
    let key = StreamKey::new(cfg.seed);
    let passages = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| brownian_passage(bdy, grid, cfg.t_max, cfg.bridge_correction, &key.path(p)))
        .collect();
    Ok(FirstPassageTimes {
        coordinate: Coordinate::RescaledS,
        horizon: cfg.t_max,
        passages,
    })
}

/// The Brownian path of one seeded path on `grid`, `B(s_0), …, B(s_n)`,
/// built from the same draws the samplers use.
pub fn simulate_brownian_path(seed: u64, path: u64, grid: SGrid, n_steps: u64) -> Vec<f64> {
    let stream = StreamKey::new(seed).path(path);
    let mut out = Vec::with_capacity(n_steps as usize + 1);
    let mut w = 0.0;
    out.push(w);
    for i in 0..n_steps {
        let h = grid.at(i + 1) - grid.at(i);
        let z: f64 = StandardNormal.sample(&mut stream.step(i));
        w += h.sqrt() * z;
        out.push(w);
    }
    out
}
