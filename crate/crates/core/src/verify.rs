//! Sweeps a parameter grid and checks every inequality behind the tail
//! bound, one [`CheckReport`] per (check, grid point).
//!
//! Margins are signed slacks in log-space (`ln lhs - ln rhs` for a claim
//! `lhs ≥ rhs`), except for the Monte Carlo consistency check, whose margin
//! is in standard-error units. A negative margin is a failure.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{
    g2_quadrature, lemma4_chain, lemma4_threshold, mmax, remark_constants, theorem_log_bound,
    DEFAULT_REL_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{q2_eval, PiecewiseLinearFrame, SqrtBoundary};
use crate::mc::{
    estimate_density, sample_fpt_brownian_on_grid, sample_fpt_ou, tail_window_estimate,
    transport_to_t, uniform_edges, FirstPassageTimes, SGrid, SimConfig, TailOptions,
};
use crate::model::{time_to_s, OuParams};

pub const CHECK_IDS: [&str; 11] = [
    "c-inequality",
    "corollary1-consistency",
    "delta-identity",
    "ladder",
    "lemma2-convexity",
    "lemma3-q1-bound",
    "lemma4-g2-bound",
    "m-optimization",
    "q2-interior-bound",
    "theorem1-chain",
    "theorem1-mc-tail",
];

const FRACTION_GRID: usize = 1000;
const M_GRID_STEP: f64 = 1e-3;
const M_GRID_SLACK: f64 = 1e-9;
const DELTA_TOLERANCE: f64 = 1e-10;
/// Family-wise false-alarm rate of the histogram comparison at one parameter set.
const FAMILY_ALPHA: f64 = 1e-3;
const MIN_BIN_COUNT: u64 = 100;
const CONSISTENCY_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    SkippedHypothesis,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::SkippedHypothesis => "skipped-hypothesis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub beta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub theta: f64,
    pub s_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub grid_index: usize,
    pub param_set: ParamSet,
    pub status: Status,
    /// `None` when the check was skipped.
    pub margin: Option<f64>,
    pub detail: String,
}

/// Monte Carlo settings of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "default_mc_paths")]
    pub n_paths: usize,
    /// Time step is `dt_scale/β`.
    #[serde(default = "default_dt_scale")]
    pub dt_scale: f64,
}

fn default_mc_paths() -> usize {
    1_000_000
}

fn default_dt_scale() -> f64 {
    0.01
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: default_mc_paths(),
            dt_scale: default_dt_scale(),
        }
    }
}

/// Cartesian parameter grid. Missing fields take the default values;
/// `"mc": null` disables the Monte Carlo checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub betas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub x0_theta: Vec<(f64, f64)>,
    pub s_primes: Vec<f64>,
    pub mc: Option<McSpec>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            betas: vec![0.25, 1.0, 4.0],
            sigmas: vec![0.1, 0.5, 2.0],
            x0_theta: vec![(2.0, 1.0), (1.1, 1.0), (10.0, 1.0)],
            s_primes: vec![8.5, 10.0, 20.0, 100.0],
            mc: Some(McSpec::default()),
        }
    }
}

impl GridSpec {
    pub fn analytic_only(mut self) -> Self {
        self.mc = None;
        self
    }

    /// Grid points in `(β, σ, (x0, θ), s')` lexicographic order.
    pub fn points(&self) -> Vec<ParamSet> {
        let mut out = Vec::new();
        for &beta in &self.betas {
            for &sigma in &self.sigmas {
                for &(x0, theta) in &self.x0_theta {
                    for &s_prime in &self.s_primes {
                        out.push(ParamSet {
                            beta,
                            sigma,
                            x0,
                            theta,
                            s_prime,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Parses a grid file; any parse error is reported as `InvalidConfig`.
pub fn parse_grid(text: &str) -> Result<GridSpec> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("grid file: {e}")))
}

struct Outcome {
    status: Status,
    margin: Option<f64>,
    detail: String,
}

fn judged(margin: f64, detail: String) -> Outcome {
    let status = if margin >= 0.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    Outcome {
        status,
        margin: Some(margin),
        detail,
    }
}

fn skipped(detail: String) -> Outcome {
    Outcome {
        status: Status::SkippedHypothesis,
        margin: None,
        detail,
    }
}

fn failed(detail: String) -> Outcome {
    Outcome {
        status: Status::Fail,
        margin: Some(f64::MIN),
        detail,
    }
}

fn interior(k: usize) -> f64 {
    k as f64 / FRACTION_GRID as f64
}

fn check_delta(frame: &PiecewiseLinearFrame) -> Outcome {
    let residual = ((frame.delta + 2.0 * frame.delta.sqrt() - frame.s_prime) / frame.s_prime).abs();
    judged(
        DELTA_TOLERANCE.ln() - residual.max(f64::MIN_POSITIVE).ln(),
        format!("relative residual of Δ + 2√Δ = s' is {residual:e}"),
    )
}

fn check_convexity(p: &OuParams, s_prime: f64) -> Outcome {
    if s_prime <= 8.0 {
        return skipped(format!("requires s' > 8, got {s_prime}"));
    }
    let lhs = 4.0 * p.x0() + p.theta() * s_prime;
    let rhs = 4.0 * p.theta() * (1.0 + s_prime).sqrt();
    judged(
        lhs.ln() - rhs.ln(),
        format!("4x0 + θs' = {lhs:.6e} against 4θ√(1+s') = {rhs:.6e}"),
    )
}

fn check_q1(p: &OuParams, frame: &PiecewiseLinearFrame) -> Outcome {
    let ratio = p.x0() / p.theta();
    let threshold = 8f64.max(1.0 + ratio * ratio);
    if frame.s_prime <= threshold {
        return skipped(format!("requires s' > {threshold}, got {}", frame.s_prime));
    }
    let bound = frame.delta * frame.delta * p.theta() * p.theta() * frame.s_prime;
    let mut worst = f64::NEG_INFINITY;
    for k in 1..FRACTION_GRID {
        match frame.q1(frame.interior_point(interior(k))) {
            Ok(q) => worst = worst.max(q),
            Err(e) => return failed(e.to_string()),
        }
    }
    judged(
        bound.ln() - worst.ln(),
        format!("max interior Q1 = {worst:.6e} against Δ²θ²s' = {bound:.6e}"),
    )
}

fn check_q2(frame: &PiecewiseLinearFrame) -> Outcome {
    if frame.s_prime <= 8.0 {
        return skipped(format!("requires s' > 8, got {}", frame.s_prime));
    }
    // Q2 is concave, so over η < ν the minimum sits at η → 0 or η = ν.
    let Ok(at_start) = q2_eval(frame.s_prime, frame.s_star) else {
        return failed("s* outside [0, s']".into());
    };
    let mut margin = f64::INFINITY;
    let mut witness = 0.0;
    for k in 1..FRACTION_GRID {
        let nu = interior(k);
        let Ok(q) = q2_eval(frame.s_prime, frame.interior_point(nu)) else {
            return failed(format!("interior point for ν = {nu} outside [0, s']"));
        };
        let m = q.min(at_start).ln() - (16.0 * (1.0 - nu * nu)).ln();
        if m < margin {
            margin = m;
            witness = nu;
        }
    }
    judged(margin, format!("tightest at ν = {witness}"))
}

fn frame_b(p: &OuParams, frame: &PiecewiseLinearFrame) -> f64 {
    let (beta, sigma, theta) = (p.beta(), p.sigma(), p.theta());
    beta * theta * theta * frame.delta * frame.delta * frame.s_prime / (128.0 * sigma * sigma)
}

fn check_c(p: &OuParams, frame: &PiecewiseLinearFrame) -> Outcome {
    let b = frame_b(p, frame);
    let w = match mmax(b) {
        Ok(w) => w,
        Err(e) => return failed(e.to_string()),
    };
    let c = w.c_value;
    let one_minus_c = w.nu_plus * w.nu_plus;
    if !(c > 0.0 && one_minus_c > 0.0) {
        return failed(format!("C = {c} outside (0, 1)"));
    }
    // C < 1.
    let mut margin = -c.ln();
    let mut detail = format!("B = {b:.6e}, C = {c:.12}");
    if b > 0.25 {
        margin = margin.min(c.ln() - 0.5f64.ln());
        detail.push_str("; C > 1/2");
    }
    if b >= 1.0 {
        margin = margin.min(one_minus_c.ln() - (0.25 / b).ln());
        detail.push_str("; 1 - C > 1/(4B)");
    }
    judged(margin, detail)
}

/// Largest `ln M(η, ν)` on the lattice `η, ν ∈ step·ℕ` inside the triangle.
pub fn grid_max_ln_m(b: f64, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for j in 2..n {
        let nu = j as f64 * step;
        let pen = -2.0 * b / (1.0 - nu * nu);
        for i in 1..j {
            let eta = i as f64 * step;
            let v = eta.ln() + (nu - eta).ln() + pen;
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn check_m(p: &OuParams, frame: &PiecewiseLinearFrame) -> Outcome {
    let b = frame_b(p, frame);
    let w = match mmax(b) {
        Ok(w) => w,
        Err(e) => return failed(e.to_string()),
    };
    let grid = grid_max_ln_m(b, M_GRID_STEP);
    judged(
        w.ln_m_max - grid + M_GRID_SLACK,
        format!(
            "ln M_max = {:.12e}, grid max = {grid:.12e} (slack {M_GRID_SLACK:e})",
            w.ln_m_max
        ),
    )
}

fn check_lemma4(p: &OuParams, s_prime: f64) -> Outcome {
    let threshold = lemma4_threshold(p);
    if s_prime <= threshold {
        return skipped(format!("requires s' > {threshold}, got {s_prime}"));
    }
    let chain = match lemma4_chain(p, s_prime) {
        Ok(c) => c,
        Err(e) => return failed(e.to_string()),
    };
    let g2 = match g2_quadrature(&SqrtBoundary::new(*p), s_prime, DEFAULT_REL_TOL) {
        Ok(g) => g,
        Err(e) => return failed(e.to_string()),
    };
    let links = [
        g2.ln_value - chain.optimized,
        chain.optimized - chain.relaxed,
        chain.relaxed - chain.final_bound,
    ];
    let margin = links.iter().copied().fold(f64::INFINITY, f64::min);
    judged(
        margin,
        format!(
            "ln g2 = {:.6e} ≥ ln(A·M_max) = {:.6e} ≥ ln A - 4B - ln 16B = {:.6e} ≥ bound = {:.6e}",
            g2.ln_value, chain.optimized, chain.relaxed, chain.final_bound
        ),
    )
}

fn point_time(p: &OuParams, s_prime: f64) -> f64 {
    s_prime.ln_1p() / (2.0 * p.beta())
}

fn check_ladder(p: &OuParams, s_prime: f64) -> Outcome {
    let bt = p.beta() * point_time(p, s_prime);
    if bt <= 1.0 {
        return skipped(format!("requires βt > 1, got {bt}"));
    }
    // -10βt > -e^{6βt}  ⇔  6βt > ln(10βt).
    judged(6.0 * bt - (10.0 * bt).ln(), format!("βt = {bt:.6}"))
}

fn check_theorem_chain(p: &OuParams, s_prime: f64) -> Outcome {
    let cert = remark_constants(p);
    let t = point_time(p, s_prime);
    let bound = match theorem_log_bound(&cert, t) {
        Ok(v) => v,
        Err(_) => return skipped(format!("requires t > u = {}, got {t}", cert.u)),
    };
    let g2 = match g2_quadrature(&SqrtBoundary::new(*p), s_prime, DEFAULT_REL_TOL) {
        Ok(g) => g,
        Err(e) => return failed(e.to_string()),
    };
    let transported = (2.0 * p.beta()).ln() + s_prime.ln_1p() + g2.ln_value;
    judged(
        transported - bound,
        format!(
            "t = {t:.6}: ln ρ lower bound via g2 = {transported:.6e}, theorem bound = {bound:.6e}"
        ),
    )
}

/// Monte Carlo samples shared by the checks at one `(β, σ, x0, θ)`.
struct McSamples {
    ou: FirstPassageTimes,
    brownian: FirstPassageTimes,
    dt: f64,
    beta: f64,
}

fn mc_samples(p: &OuParams, spec: &McSpec, horizon: f64, seed: u64) -> Result<McSamples> {
    let dt = spec.dt_scale / p.beta();
    let cfg = SimConfig {
        n_paths: spec.n_paths,
        dt,
        t_max: horizon,
        seed,
        bridge_correction: true,
    };
    let ou = sample_fpt_ou(p, &cfg)?;
    let s_cfg = SimConfig {
        t_max: time_to_s(cfg.n_steps() as f64 * dt, p.beta())?,
        seed: seed ^ 0x6a09_e667_f3bc_c908,
        ..cfg
    };
    let grid = SGrid::OuImage { dt, beta: p.beta() };
    let brownian = sample_fpt_brownian_on_grid(&SqrtBoundary::new(*p), &s_cfg, grid)?;
    Ok(McSamples {
        ou,
        brownian,
        dt,
        beta: p.beta(),
    })
}

fn check_mc_tail(p: &OuParams, s_prime: f64, mc: &McSamples) -> Outcome {
    let cert = remark_constants(p);
    let t = point_time(p, s_prime);
    if t <= cert.u {
        return skipped(format!("requires t > u = {}, got {t}", cert.u));
    }
    let mut times: Vec<f64> = mc.ou.captured_times().collect();
    times.sort_by(f64::total_cmp);
    // The window stays above u so the bound holds everywhere inside it, and
    // the density averaged over it is compared with the bound at its right end.
    let limit = mc.ou.horizon.min(2.0 * t - cert.u);
    let opts = TailOptions::default();
    let n = mc.ou.n_paths();
    let initial = 2.0 * mc.dt;
    let est = match tail_window_estimate(&times, n, t, limit, initial, &opts) {
        Ok(e) => e,
        Err(_) => {
            // Few events: the Wilson upper limit still falsifies the bound.
            let h = t.min(limit - t);
            let events = times.iter().filter(|&&x| (x - t).abs() <= h).count();
            let (_, hi) = crate::mc::wilson_interval(events, n, opts.z);
            let ln_upper = (hi / (2.0 * h)).ln();
            let bound = cert.log_bound_at(t + h);
            return judged(
                ln_upper - bound,
                format!("t = {t:.6}, {events} events in ±{h:.3e}: upper ln ρ = {ln_upper:.4}, bound = {bound:.6e}"),
            );
        }
    };
    let bound = cert.log_bound_at(t + est.half_width);
    judged(
        est.ln_upper - bound,
        format!(
            "t = {t:.6}, {} events in ±{:.3e}: ln ρ ∈ [{:.4}, {:.4}], bound = {bound:.6e}",
            est.events, est.half_width, est.ln_lower, est.ln_upper
        ),
    )
}

fn check_corollary(mc: &McSamples) -> Outcome {
    let edges = uniform_edges(0.0, mc.ou.horizon, CONSISTENCY_BINS);
    let direct = match estimate_density(&mc.ou, &edges) {
        Ok(d) => d,
        Err(e) => return failed(e.to_string()),
    };
    let mut s_edges: Vec<f64> = edges
        .iter()
        .map(|&t| (2.0 * mc.beta * t).exp_m1())
        .collect();
    let last = s_edges.len() - 1;
    s_edges[last] = s_edges[last].max(mc.brownian.horizon);
    let via_s =
        match estimate_density(&mc.brownian, &s_edges).and_then(|e| transport_to_t(&e, mc.beta)) {
            Ok(d) => d,
            Err(e) => return failed(e.to_string()),
        };
    let compared: Vec<usize> = (0..direct.n_bins())
        .filter(|&k| direct.bin_counts[k] >= MIN_BIN_COUNT && via_s.bin_counts[k] >= MIN_BIN_COUNT)
        .collect();
    if compared.is_empty() {
        return skipped("no bin holds enough passages in both runs".into());
    }
    let alpha = FAMILY_ALPHA / compared.len() as f64;
    let z_crit = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let mut worst = 0.0f64;
    for &k in &compared {
        let se = (direct.bin_std_err[k].powi(2) + via_s.bin_std_err[k].powi(2)).sqrt();
        let z = ((direct.bin_density[k] - via_s.bin_density[k]) / se).abs();
        worst = worst.max(z);
    }
    judged(
        z_crit - worst,
        format!(
            "{} bins, max |z| = {worst:.3} against {z_crit:.3}",
            compared.len()
        ),
    )
}

/// Runs every check on every grid point.
pub fn run_suite(grid: &GridSpec, seed: u64) -> Result<Vec<CheckReport>> {
    run_selected(grid, seed, |_| true)
}

/// Runs the checks whose id satisfies `select`, ordered by (check id, grid index).
pub fn run_selected<F>(grid: &GridSpec, seed: u64, select: F) -> Result<Vec<CheckReport>>
where
    F: Fn(&str) -> bool,
{
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let params: Vec<OuParams> = points
        .iter()
        .map(|q| OuParams::new(q.beta, q.sigma, q.x0, q.theta))
        .collect::<Result<_>>()?;
    for q in &points {
        if !(q.s_prime.is_finite() && q.s_prime > 0.0) {
            return Err(Error::NonPositiveSPrime(q.s_prime));
        }
    }
    let frames: Vec<PiecewiseLinearFrame> = points
        .iter()
        .zip(&params)
        .map(|(q, p)| SqrtBoundary::new(*p).frame(q.s_prime))
        .collect::<Result<_>>()?;
    let selected: Vec<&str> = CHECK_IDS.iter().copied().filter(|id| select(id)).collect();

    let wants_mc = selected
        .iter()
        .any(|id| id.starts_with("corollary1") || *id == "theorem1-mc-tail");
    let mut mc: BTreeMap<usize, McSamples> = BTreeMap::new();
    if let (true, Some(spec)) = (wants_mc, grid.mc.as_ref()) {
        // One pair of simulations per parameter set, long enough for every s'.
        let max_s = grid.s_primes.iter().copied().fold(0.0, f64::max);
        let per_set = grid.s_primes.len();
        for (set, chunk) in params.chunks(per_set).enumerate() {
            let p = &chunk[0];
            let horizon = point_time(p, max_s) + 0.5 / p.beta();
            let set_seed = seed.wrapping_add((set as u64) << 32);
            mc.insert(set, mc_samples(p, spec, horizon, set_seed)?);
        }
    }

    let tasks: Vec<(&str, usize)> = selected
        .iter()
        .flat_map(|id| (0..points.len()).map(move |i| (*id, i)))
        .collect();
    let per_set = grid.s_primes.len();
    let reports = tasks
        .par_iter()
        .map(|&(id, i)| {
            let (p, frame, s_prime) = (&params[i], &frames[i], points[i].s_prime);
            let samples = mc.get(&(i / per_set));
            let outcome = match id {
                "c-inequality" => check_c(p, frame),
                "delta-identity" => check_delta(frame),
                "ladder" => check_ladder(p, s_prime),
                "lemma2-convexity" => check_convexity(p, s_prime),
                "lemma3-q1-bound" => check_q1(p, frame),
                "lemma4-g2-bound" => check_lemma4(p, s_prime),
                "m-optimization" => check_m(p, frame),
                "q2-interior-bound" => check_q2(frame),
                "theorem1-chain" => check_theorem_chain(p, s_prime),
                "corollary1-consistency" => match samples {
                    Some(mc) => check_corollary(mc),
                    None => skipped("Monte Carlo disabled".into()),
                },
                "theorem1-mc-tail" => match samples {
                    Some(mc) => check_mc_tail(p, s_prime, mc),
                    None => skipped("Monte Carlo disabled".into()),
                },
                _ => unreachable!("unknown check {id}"),
            };
            CheckReport {
                check_id: id.to_string(),
                grid_index: i,
                param_set: points[i],
                status: outcome.status,
                margin: outcome.margin,
                detail: outcome.detail,
            }
        })
        .collect();
    Ok(reports)
}

/// `(pass, skip, fail)` counts.
pub fn summarize(reports: &[CheckReport]) -> (usize, usize, usize) {
    reports
        .iter()
        .fold((0, 0, 0), |(p, s, f), r| match r.status {
            Status::Pass => (p + 1, s, f),
            Status::SkippedHypothesis => (p, s + 1, f),
            Status::Fail => (p, s, f + 1),
        })
}

pub fn reports_to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialise")
}

pub const CSV_HEADER: [&str; 10] = [
    "check_id",
    "grid_index",
    "beta",
    "sigma",
    "x0",
    "theta",
    "s_prime",
    "status",
    "margin",
    "detail",
];

pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        let q = r.param_set;
        w.write_record([
            r.check_id.clone(),
            r.grid_index.to_string(),
            q.beta.to_string(),
            q.sigma.to_string(),
            q.x0.to_string(),
            q.theta.to_string(),
            q.s_prime.to_string(),
            r.status.as_str().to_string(),
            r.margin.map(|m| m.to_string()).unwrap_or_default(),
            r.detail.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
