use rayon::prelude::*;
use serde::Serialize;

use super::config::{Coordinate, SimConfig};
use super::sampler::{ou_passage, FirstPassageTimes, OuStepper};
use crate::error::{Error, Result};
use crate::model::OuParams;
use crate::rng::StreamKey;

/// Histogram estimate of a first-passage sub-density on `[edges[0], edges[n]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub coordinate: Coordinate,
    pub bin_edges: Vec<f64>,
    pub bin_counts: Vec<u64>,
    pub bin_density: Vec<f64>,
    pub bin_std_err: Vec<f64>,
    pub n_paths: usize,
    pub n_captured: usize,
    pub n_censored: usize,
}

impl DensityEstimate {
    fn from_counts(
        coordinate: Coordinate,
        edges: Vec<f64>,
        counts: Vec<u64>,
        n_paths: usize,
        n_censored: usize,
    ) -> Self {
        let n = n_paths as f64;
        let mut density = Vec::with_capacity(counts.len());
        let mut std_err = Vec::with_capacity(counts.len());
        for (k, &c) in counts.iter().enumerate() {
            let width = edges[k + 1] - edges[k];
            let p = c as f64 / n;
            density.push(p / width);
            std_err.push((p * (1.0 - p) / n).sqrt() / width);
        }
        Self {
            coordinate,
            bin_edges: edges,
            bin_counts: counts,
            bin_density: density,
            bin_std_err: std_err,
            n_paths,
            n_captured: n_paths - n_censored,
            n_censored,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.bin_counts.len()
    }

    pub fn bin_width(&self, k: usize) -> f64 {
        self.bin_edges[k + 1] - self.bin_edges[k]
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        0.5 * (self.bin_edges[k] + self.bin_edges[k + 1])
    }

    pub fn censored_fraction(&self) -> f64 {
        self.n_censored as f64 / self.n_paths as f64
    }

    /// `Σ density·width + censored fraction`; one up to rounding.
    pub fn total_mass(&self) -> f64 {
        let binned: f64 = (0..self.n_bins())
            .map(|k| self.bin_density[k] * self.bin_width(k))
            .sum();
        binned + self.censored_fraction()
    }

    /// Center of the most populated bin.
    pub fn mode(&self) -> f64 {
        let k = (0..self.n_bins())
            .max_by(|&a, &b| self.bin_density[a].total_cmp(&self.bin_density[b]))
            .unwrap_or(0);
        self.bin_center(k)
    }
}

/// `n` equal bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let w = (hi - lo) / n as f64;
    let mut edges: Vec<f64> = (0..n).map(|k| lo + k as f64 * w).collect();
    edges.push(hi);
    edges
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidConfig(
            "at least two bin edges are required".into(),
        ));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "bin edges must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Bins `[e_k, e_{k+1})`, the last one closed. Every captured time must lie
/// within the edges; censored paths count toward the normalisation only.
pub fn estimate_density(fpts: &FirstPassageTimes, edges: &[f64]) -> Result<DensityEstimate> {
    check_edges(edges)?;
    let n_censored = fpts.n_censored();
    if n_censored == fpts.n_paths() {
        return Err(Error::NoCapturedPaths);
    }
    let last = edges.len() - 2;
    let mut counts = vec![0u64; last + 1];
    for t in fpts.captured_times() {
        if t < edges[0] || t > edges[last + 1] {
            return Err(Error::BinningDoesNotCover(t));
        }
        let k = edges
            .partition_point(|&e| e <= t)
            .saturating_sub(1)
            .min(last);
        counts[k] += 1;
    }
    Ok(DensityEstimate::from_counts(
        fpts.coordinate,
        edges.to_vec(),
        counts,
        fpts.n_paths(),
        n_censored,
    ))
}

/// Maps an `s`-clock histogram onto the `t` clock. Each bin keeps its count,
/// since `t' ∈ [t_k, t_{k+1})` exactly when `s' ∈ [s_k, s_{k+1})`; only the
/// widths change. This is the bin-integrated form of
/// `ρ_X(t) = 2β e^{2βt} ρ_B(e^{2βt} - 1)`.
pub fn transport_to_t(est: &DensityEstimate, beta: f64) -> Result<DensityEstimate> {
    if est.coordinate != Coordinate::RescaledS {
        return Err(Error::InvalidConfig(
            "histogram is not on the s clock".into(),
        ));
    }
    let edges = est
        .bin_edges
        .iter()
        .map(|&s| crate::model::s_to_time(s, beta))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityEstimate::from_counts(
        Coordinate::OriginalT,
        edges,
        est.bin_counts.clone(),
        est.n_paths,
        est.n_censored,
    ))
}

/// Wilson score interval for a binomial proportion `k/n` at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Settings of the local tail estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Events required inside the window.
    pub min_events: usize,
    /// Normal quantile of the Wilson interval.
    pub z: f64,
    /// Starting half-width; `None` means two time steps.
    pub initial_half_width: Option<f64>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            min_events: 50,
            z: 3.0,
            initial_half_width: None,
        }
    }
}

/// Log-density `ln(count/(n·2h))` in the window `[t-h, t+h]` with Wilson bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub half_width: f64,
    pub events: usize,
    pub n_paths: usize,
    pub ln_density: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

/// Grows a window around `t` by a factor 1.25 until it holds
/// `opts.min_events` of the sorted `times`, without leaving `[0, limit]`.
pub fn tail_window_estimate(
    sorted_times: &[f64],
    n_paths: usize,
    t: f64,
    limit: f64,
    initial_half_width: f64,
    opts: &TailOptions,
) -> Result<TailEstimate> {
    let max_half = t.min(limit - t);
    let count = |h: f64| {
        let lo = sorted_times.partition_point(|&x| x < t - h);
        let hi = sorted_times.partition_point(|&x| x <= t + h);
        hi - lo
    };
    let mut h = initial_half_width.min(max_half);
    loop {
        let events = count(h);
        if events >= opts.min_events {
            let width = 2.0 * h * n_paths as f64;
            let (lo, hi) = wilson_interval(events, n_paths, opts.z);
            let n = n_paths as f64;
            return Ok(TailEstimate {
                t,
                half_width: h,
                events,
                n_paths,
                ln_density: (events as f64 / width).ln(),
                ln_lower: (lo * n / width).ln(),
                ln_upper: (hi * n / width).ln(),
            });
        }
        if h >= max_half {
            return Err(Error::InsufficientTailData {
                t,
                events,
                required: opts.min_events,
            });
        }
        h = (h * 1.25).min(max_half);
    }
}

const TAIL_CHUNK: u64 = 1 << 16;

/// Local OU first-passage density near `t`, streaming `cfg.n_paths` paths
/// and keeping only passages inside the widest admissible window.
pub fn estimate_log_tail(
    params: &OuParams,
    cfg: &SimConfig,
    t: f64,
    opts: &TailOptions,
) -> Result<TailEstimate> {
    cfg.validate()?;
    if !(t.is_finite() && t > 0.0 && t < cfg.t_max) {
        return Err(Error::InvalidConfig(format!(
            "tail time {t} must lie in (0, t_max = {})",
            cfg.t_max
        )));
    }
    let initial = opts.initial_half_width.unwrap_or(2.0 * cfg.dt);
    let max_half = t.min(cfg.t_max - t);
    let (lo, hi) = (t - max_half, t + max_half);
    let stepper = OuStepper::new(params, cfg.dt, cfg.bridge_correction);
    // Paths alive past the window can be dropped.
    let n_steps = ((hi / cfg.dt).ceil() as u64 + 1).min(cfg.n_steps());
    let key = StreamKey::new(cfg.seed);
    let n = cfg.n_paths as u64;
    let mut times = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + TAIL_CHUNK).min(n);
        let chunk: Vec<f64> = (start..end)
            .into_par_iter()
            .filter_map(|p| ou_passage(&stepper, params.x0(), n_steps, &key.path(p)))
            .map(|p| p.time)
            .filter(|&x| x >= lo && x <= hi)
            .collect();
        times.extend(chunk);
        start = end;
    }
    times.sort_by(f64::total_cmp);
    tail_window_estimate(&times, cfg.n_paths, t, cfg.t_max, initial, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{sample_fpt_ou, Passage};

    fn synthetic(times: &[Option<f64>], coordinate: Coordinate) -> FirstPassageTimes {
        FirstPassageTimes {
            coordinate,
            horizon: 1.0,
            passages: times
                .iter()
                .map(|t| t.map(|time| Passage { time, step: 0 }))
                .collect(),
        }
    }

    #[test]
    fn point_mass() {
        let f = synthetic(&[Some(0.3); 10], Coordinate::OriginalT);
        let est = estimate_density(&f, &[0.25, 0.5]).unwrap();
        assert_eq!(est.bin_density, vec![4.0]);
        assert_eq!(est.bin_std_err, vec![0.0]);
        assert!((est.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_times() {
        let n = 100_000;
        let times: Vec<_> = (0..n).map(|i| Some((i as f64 + 0.5) / n as f64)).collect();
        let f = synthetic(&times, Coordinate::OriginalT);
        let est = estimate_density(&f, &uniform_edges(0.0, 1.0, 10)).unwrap();
        for k in 0..10 {
            assert!((est.bin_density[k] - 1.0).abs() <= 3.0 * est.bin_std_err[k] + 1e-12);
        }
    }

    #[test]
    fn censoring_and_mass() {
        let f = synthetic(&[Some(0.1), None, Some(0.9), None], Coordinate::OriginalT);
        let est = estimate_density(&f, &uniform_edges(0.0, 1.0, 3)).unwrap();
        assert_eq!(est.n_censored, 2);
        assert_eq!(est.n_captured, 2);
        assert!((est.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(est.bin_counts, vec![1, 0, 1]);
    }

    #[test]
    fn right_edge_is_closed() {
        let f = synthetic(&[Some(1.0)], Coordinate::OriginalT);
        let est = estimate_density(&f, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(est.bin_counts, vec![0, 1]);
    }

    #[test]
    fn errors() {
        let none = synthetic(&[None, None], Coordinate::OriginalT);
        assert_eq!(
            estimate_density(&none, &[0.0, 1.0]),
            Err(Error::NoCapturedPaths)
        );
        let f = synthetic(&[Some(2.0)], Coordinate::OriginalT);
        assert_eq!(
            estimate_density(&f, &[0.0, 1.0]),
            Err(Error::BinningDoesNotCover(2.0))
        );
        assert!(estimate_density(&f, &[1.0]).is_err());
        assert!(estimate_density(&f, &[0.0, 0.0, 3.0]).is_err());
    }

    #[test]
    fn transport_keeps_counts() {
        let f = synthetic(&[Some(0.5), Some(2.5), None], Coordinate::RescaledS);
        let est = estimate_density(&f, &[0.0, 1.0, 3.0]).unwrap();
        let t = transport_to_t(&est, 1.0).unwrap();
        assert_eq!(t.coordinate, Coordinate::OriginalT);
        assert_eq!(t.bin_counts, est.bin_counts);
        assert!((t.bin_edges[2] - 4f64.ln() / 2.0).abs() < 1e-15);
        assert!((t.total_mass() - 1.0).abs() < 1e-12);
        assert!(transport_to_t(&t, 1.0).is_err());
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn mode_near_noiseless_crossing() {
        let p = OuParams::new(1.0, 0.05, 2.0, 1.0).unwrap();
        let cfg = SimConfig {
            n_paths: 20_000,
            dt: 1e-3,
            t_max: 2.0,
            seed: 4,
            bridge_correction: true,
        };
        let f = sample_fpt_ou(&p, &cfg).unwrap();
        let est = estimate_density(&f, &uniform_edges(0.0, 2.0, 100)).unwrap();
        assert!((est.mode() - 2f64.ln()).abs() < 0.03, "{}", est.mode());
    }

    #[test]
    fn tail_window_grows_then_fails() {
        let times: Vec<f64> = (0..100).map(|i| 0.5 + i as f64 * 1e-3).collect();
        let opts = TailOptions::default();
        let e = tail_window_estimate(&times, 1000, 0.55, 1.0, 1e-3, &opts).unwrap();
        assert!(e.events >= 50 && e.ln_lower <= e.ln_density && e.ln_density <= e.ln_upper);
        assert!(matches!(
            tail_window_estimate(&times, 1000, 0.9, 1.0, 1e-3, &opts),
            Err(Error::InsufficientTailData { .. })
        ));
    }

    #[test]
    fn tail_beyond_observed_passages() {
        let p = OuParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let cfg = SimConfig {
            n_paths: 1000,
            dt: 1e-2,
            t_max: 7.0,
            seed: 1,
            bridge_correction: true,
        };
        assert!(matches!(
            estimate_log_tail(&p, &cfg, 6.0, &TailOptions::default()),
            Err(Error::InsufficientTailData { .. })
        ));
        assert!(estimate_log_tail(&p, &cfg, 7.0, &TailOptions::default()).is_err());
    }

    #[test]
    fn tail_seeds_overlap() {
        let p = OuParams::new(1.0, 0.5, 2.0, 1.0).unwrap();
        let cfg = SimConfig {
            n_paths: 100_000,
            dt: 5e-3,
            t_max: 3.0,
            seed: 1,
            bridge_correction: true,
        };
        let a = estimate_log_tail(&p, &cfg, 1.2, &TailOptions::default()).unwrap();
        let b = estimate_log_tail(
            &p,
            &SimConfig { seed: 2, ..cfg },
            1.2,
            &TailOptions::default(),
        )
        .unwrap();
        assert!(a.ln_lower <= b.ln_upper && b.ln_lower <= a.ln_upper);
    }
}
