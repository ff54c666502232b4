//! Periodically forced leaky integrate-and-fire model
//!
//! ```text
//! dX = (-β X + h(t)) dt + σ dW,   X reset to x0 at each crossing of θ
//! ```
//!
//! The phases `φ_n = (τ_n mod T)/T ∈ [0, 1)` of successive crossings form a
//! Markov chain on the circle. This module estimates its transition matrix
//! on `n` equal phase bins, the invariant density by power iteration, and
//! the discrete infimum criterion `Σ_φ min_ψ K^m(ψ → φ)`.
//!
//! Each step integrates the deterministic part exactly for sinusoidal
//! forcing and by the midpoint rule otherwise, then adds the exact OU noise.
//! The bridge correction, when on, uses the unforced bridge formula.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::{OuStepper, SimConfig};
use crate::model::OuParams;
use crate::rng::{PathStream, StreamKey};

const MEAN_CHECK_POINTS: usize = 4096;
const MEAN_TOLERANCE: f64 = 1e-8;
const MAX_POWER_ITERATIONS: usize = 100_000;

/// Zero-mean periodic drive `h(t)`.
#[derive(Clone)]
pub enum Forcing {
    None,
    /// `A·sin(2πt/T)`.
    Sinusoid {
        amplitude: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => write!(f, "None"),
            Forcing::Sinusoid { amplitude } => write!(f, "Sinusoid {{ amplitude: {amplitude} }}"),
            Forcing::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForcedLifParams {
    base: OuParams,
    forcing: Forcing,
    period: f64,
}

impl ForcedLifParams {
    /// Checks `T > 0` and that the mean of `h` over one period is within
    /// `1e-8` of zero (periodic trapezoid rule on 4096 points).
    pub fn new(base: OuParams, forcing: Forcing, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::NonPositiveParameter {
                name: "period",
                value: period,
            });
        }
        let p = Self {
            base,
            forcing,
            period,
        };
        match &p.forcing {
            Forcing::Sinusoid { amplitude } if !amplitude.is_finite() => {
                return Err(Error::InvalidConfig(format!(
                    "forcing amplitude must be finite, got {amplitude}"
                )));
            }
            Forcing::Custom(_) => {
                let mean = (0..MEAN_CHECK_POINTS)
                    .map(|i| p.h(period * i as f64 / MEAN_CHECK_POINTS as f64))
                    .sum::<f64>()
                    / MEAN_CHECK_POINTS as f64;
                if !(mean.abs() <= MEAN_TOLERANCE) {
                    return Err(Error::InvalidConfig(format!(
                        "forcing must have zero mean over one period, got {mean:e}"
                    )));
                }
            }
            _ => {}
        }
        Ok(p)
    }

    pub fn unforced(base: OuParams, period: f64) -> Result<Self> {
        Self::new(base, Forcing::None, period)
    }

    pub fn sinusoidal(base: OuParams, amplitude: f64, period: f64) -> Result<Self> {
        Self::new(base, Forcing::Sinusoid { amplitude }, period)
    }

    pub fn base(&self) -> &OuParams {
        &self.base
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn h(&self, t: f64) -> f64 {
        match &self.forcing {
            Forcing::None => 0.0,
            Forcing::Sinusoid { amplitude } => amplitude * (2.0 * PI * t / self.period).sin(),
            Forcing::Custom(h) => h(t),
        }
    }

    /// `∫_{t0}^{t0+dt} e^{-β(t0+dt-u)} h(u) du`.
    pub fn forcing_increment(&self, t0: f64, dt: f64) -> f64 {
        let beta = self.base.beta();
        match &self.forcing {
            Forcing::None => 0.0,
            Forcing::Sinusoid { amplitude } => {
                let w = 2.0 * PI / self.period;
                let t1 = t0 + dt;
                let edge = |t: f64| beta * (w * t).sin() - w * (w * t).cos();
                amplitude * (edge(t1) - (-beta * dt).exp() * edge(t0)) / (beta * beta + w * w)
            }
            Forcing::Custom(h) => dt * (-0.5 * beta * dt).exp() * h(t0 + 0.5 * dt),
        }
    }

    pub fn phase_of(&self, t: f64) -> f64 {
        let phase = (t / self.period).rem_euclid(1.0);
        if phase >= 1.0 {
            0.0
        } else {
            phase
        }
    }
}

/// Time from a reset at absolute time `start` to the next crossing, or
/// `None` if none occurs within `n_steps`.
fn interspike_interval(
    p: &ForcedLifParams,
    stepper: &OuStepper,
    start: f64,
    n_steps: u64,
    stream: &PathStream,
) -> Option<f64> {
    let mut x = p.base.x0();
    for i in 0..n_steps {
        let offset = i as f64 * stepper.dt;
        let drift = p.forcing_increment(start + offset, stepper.dt);
        let mut rng = stream.step(i);
        if let Some(t) = stepper.advance(&mut x, drift, offset, &mut rng) {
            return Some(t);
        }
    }
    None
}

fn check_phase(phi: f64) -> Result<f64> {
    if (0.0..1.0).contains(&phi) {
        Ok(phi)
    } else {
        Err(Error::InvalidConfig(format!(
            "phase must lie in [0, 1), got {phi}"
        )))
    }
}

/// Phases `φ_1 … φ_n` of successive crossings starting from a reset at phase
/// `phi0`. Interval `k` uses path stream `k` of `cfg.seed`; `cfg.n_paths` is
/// not used. An interval longer than `cfg.t_max` is an error.
pub fn simulate_phase_sequence(
    p: &ForcedLifParams,
    cfg: &SimConfig,
    n_resets: usize,
    phi0: f64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut phase = check_phase(phi0)?;
    let stepper = OuStepper::new(&p.base, cfg.dt, cfg.bridge_correction);
    let key = StreamKey::new(cfg.seed);
    let n_steps = cfg.n_steps();
    let mut out = Vec::with_capacity(n_resets);
    for k in 0..n_resets {
        let start = phase * p.period;
        let isi = interspike_interval(p, &stepper, start, n_steps, &key.path(k as u64))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "interval {k} did not end before t_max = {}",
                    cfg.t_max
                ))
            })?;
        phase = p.phase_of(start + isi);
        out.push(phase);
    }
    Ok(out)
}

/// Row-stochastic estimate of the phase transition matrix. Row `i` is the
/// law of the next phase bin after a reset at the center of bin `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseKernel {
    pub n_bins: usize,
    pub matrix: Vec<Vec<f64>>,
    /// Crossings observed per row.
    pub counts_per_row: Vec<u64>,
    /// Resets per row with no crossing before the horizon.
    pub censored_per_row: Vec<u64>,
}

impl PhaseKernel {
    /// Normalises each row of a nonnegative matrix.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n < 2 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(
                "kernel must be square with at least 2 bins".into(),
            ));
        }
        if matrix
            .iter()
            .flatten()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidConfig(
                "kernel entries must be finite and nonnegative".into(),
            ));
        }
        let mut rows = Vec::with_capacity(n);
        for r in matrix {
            let total: f64 = r.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidConfig("kernel row has no mass".into()));
            }
            rows.push(r.iter().map(|v| v / total).collect());
        }
        Ok(Self {
            n_bins: n,
            matrix: rows,
            counts_per_row: vec![0; n],
            censored_per_row: vec![0; n],
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().sum()).collect()
    }

    /// Product `self · other` of two kernels on the same bins.
    pub fn compose(&self, other: &PhaseKernel) -> PhaseKernel {
        let n = self.n_bins;
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.matrix.iter().enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out[i].iter_mut().zip(&other.matrix[k]) {
                    *o += a * b;
                }
            }
        }
        PhaseKernel {
            n_bins: n,
            matrix: out,
            counts_per_row: vec![0; n],
            censored_per_row: vec![0; n],
        }
    }

    pub fn power(&self, m: usize) -> PhaseKernel {
        let mut out = self.clone();
        for _ in 1..m {
            out = out.compose(self);
        }
        out
    }

    /// Density row vector pushed one step: `(fK)_j = Σ_i f_i K_ij`.
    pub fn push_forward(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_bins];
        for (fi, row) in f.iter().zip(&self.matrix) {
            if *fi == 0.0 {
                continue;
            }
            for (o, k) in out.iter_mut().zip(row) {
                *o += fi * k;
            }
        }
        out
    }
}

/// Estimates the transition matrix with `samples_per_bin` resets per row.
/// Sample `k` of row `i` uses path stream `i·samples_per_bin + k`;
/// `cfg.n_paths` is not used.
pub fn estimate_kernel(
    p: &ForcedLifParams,
    cfg: &SimConfig,
    n_bins: usize,
    samples_per_bin: usize,
) -> Result<PhaseKernel> {
    cfg.validate()?;
    if n_bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_bins must be at least 2, got {n_bins}"
        )));
    }
    if samples_per_bin == 0 {
        return Err(Error::InvalidConfig(
            "samples_per_bin must be at least 1".into(),
        ));
    }
    let stepper = OuStepper::new(&p.base, cfg.dt, cfg.bridge_correction);
    let key = StreamKey::new(cfg.seed);
    let n_steps = cfg.n_steps();
    let per_row = samples_per_bin as u64;
    let landing: Vec<Option<usize>> = (0..n_bins as u64 * per_row)
        .into_par_iter()
        .map(|idx| {
            let row = idx / per_row;
            let start = (row as f64 + 0.5) / n_bins as f64 * p.period;
            interspike_interval(p, &stepper, start, n_steps, &key.path(idx)).map(|isi| {
                let phase = p.phase_of(start + isi);
                ((phase * n_bins as f64) as usize).min(n_bins - 1)
            })
        })
        .collect();
    let mut counts = vec![vec![0u64; n_bins]; n_bins];
    let mut censored = vec![0u64; n_bins];
    for (idx, land) in landing.iter().enumerate() {
        let row = idx / samples_per_bin;
        match land {
            Some(col) => counts[row][*col] += 1,
            None => censored[row] += 1,
        }
    }
    let mut matrix = Vec::with_capacity(n_bins);
    let mut counts_per_row = Vec::with_capacity(n_bins);
    for (row, c) in counts.iter().enumerate() {
        let total: u64 = c.iter().sum();
        if total == 0 {
            return Err(Error::InvalidConfig(format!(
                "no crossing observed from phase bin {row}"
            )));
        }
        matrix.push(c.iter().map(|&v| v as f64 / total as f64).collect());
        counts_per_row.push(total);
    }
    Ok(PhaseKernel {
        n_bins,
        matrix,
        counts_per_row,
        censored_per_row: censored,
    })
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Fixed point of `f ↦ fK` reached from the uniform density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantDensity {
    /// Probability of each bin; sums to one.
    pub mass: Vec<f64>,
    pub iterations: usize,
    /// `‖fK - f‖_TV` at return.
    pub residual: f64,
    /// True when iteration from a point mass at bin 0 fails to reach the
    /// same density, so the fixed point is not shown to be unique.
    pub degenerate: bool,
}

impl InvariantDensity {
    /// Density with respect to normalised phase, `mass·n_bins`.
    pub fn density(&self) -> Vec<f64> {
        let n = self.mass.len() as f64;
        self.mass.iter().map(|m| m * n).collect()
    }
}

fn iterate(
    kernel: &PhaseKernel,
    mut f: Vec<f64>,
    tol: f64,
) -> std::result::Result<(Vec<f64>, usize, f64), f64> {
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mut next = kernel.push_forward(&f);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = total_variation(&next, &f);
        f = next;
        if residual <= tol {
            return Ok((f, it, residual));
        }
    }
    Err(residual)
}

pub fn invariant_density(kernel: &PhaseKernel, tol: f64) -> Result<InvariantDensity> {
    let n = kernel.n_bins;
    let (mass, iterations, residual) =
        iterate(kernel, vec![1.0 / n as f64; n], tol).map_err(|residual| {
            Error::NonConvergence {
                iterations: MAX_POWER_ITERATIONS,
                residual,
            }
        })?;
    let mut delta = vec![0.0; n];
    delta[0] = 1.0;
    let degenerate = match iterate(kernel, delta, tol) {
        Ok((other, _, _)) => total_variation(&other, &mass) > 1e-3_f64.max(100.0 * tol),
        Err(_) => true,
    };
    Ok(InvariantDensity {
        mass,
        iterations,
        residual,
        degenerate,
    })
}

/// `Σ_φ min_ψ K^m(ψ → φ)`: the Riemann sum of `∫ inf_y K_m(x, y) dx` with
/// the bin width absorbed into the transition probabilities.
pub fn infimum_criterion(kernel: &PhaseKernel, m: usize) -> f64 {
    let km = kernel.power(m.max(1));
    (0..km.n_bins)
        .map(|col| {
            km.matrix
                .iter()
                .map(|r| r[col])
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
