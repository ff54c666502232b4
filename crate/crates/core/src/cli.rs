//! Command-line front end. Every subcommand writes plain CSV or JSON to
//! `--out` (stdout when absent); diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{g2_quadrature, remark_constants};
use crate::error::{Error, Result};
use crate::geometry::SqrtBoundary;
use crate::mc::{estimate_density, sample_fpt_brownian, sample_fpt_ou, uniform_edges, SimConfig};
use crate::model::{s_to_time, OuParams};
use crate::phase::{estimate_kernel, infimum_criterion, invariant_density, ForcedLifParams};
use crate::verify::{
    parse_grid, reports_to_csv, reports_to_json, run_selected, summarize, GridSpec, Status,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityMode {
    Quadrature,
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clock {
    T,
    S,
}

#[derive(Debug, Parser)]
#[command(
    name = "oufpt",
    version,
    about = "First-passage bounds, densities and checks for the suprathreshold OU process"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonFlags {
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub x0: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON file with defaults for any of the common and simulation flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SimFlags {
    /// Number of paths (accepts `1e6`).
    #[arg(long, value_parser = parse_count)]
    pub npaths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Disable the Brownian-bridge crossing correction.
    #[arg(long)]
    pub no_bridge: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tail lower bound `ln k - p·e^{6βt}` on a time grid, with its certificate.
    Bound {
        #[arg(long, default_value_t = 1.1)]
        tmin: f64,
        #[arg(long, default_value_t = 2.0)]
        tmax: f64,
        #[arg(long, default_value_t = 10, value_parser = parse_count)]
        steps: usize,
    },
    /// Convolution density by quadrature and/or Monte Carlo density estimates.
    Density {
        #[arg(long, value_enum, default_value_t = DensityMode::Quadrature)]
        mode: DensityMode,
        /// Crossing times on the s clock, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10")]
        sprime: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 50, value_parser = parse_count)]
        bins: usize,
        /// Half-width of the s window used for the Monte Carlo ρ_B estimate.
        #[arg(long, default_value_t = 0.25)]
        window: f64,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Raw first-passage times, one row per path.
    Simulate {
        #[arg(long, value_enum, default_value_t = Clock::T)]
        clock: Clock,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Runs the verification suite; exit code 1 if any check fails.
    Verify {
        /// JSON grid file; the built-in grid otherwise.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Keep only checks whose id contains this text.
        #[arg(long)]
        only: Option<String>,
        /// Skip the Monte Carlo checks.
        #[arg(long)]
        no_mc: bool,
    },
    /// Phase transition kernel, invariant density and infimum criterion.
    Phase {
        /// Amplitude of the sinusoidal forcing.
        #[arg(long, default_value_t = 0.5)]
        amp: f64,
        #[arg(long, default_value_t = 0.5)]
        period: f64,
        #[arg(long, default_value_t = 64, value_parser = parse_count)]
        nbins: usize,
        /// Resets simulated from each bin center.
        #[arg(long, default_value_t = 10_000, value_parser = parse_count)]
        samples: usize,
        /// Matrix power used by the infimum criterion.
        #[arg(long, default_value_t = 1, value_parser = parse_count)]
        m: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        sim: SimFlags,
    },
}

/// Accepts plain integers and integral scientific notation such as `1e6`.
fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 1e15 {
        Ok(v as usize)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

/// Values readable from `--config`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub x0: Option<f64>,
    pub theta: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub n_paths: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub bridge_correction: Option<bool>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: OuParams,
    pub sim: SimConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Flags override the config file, which overrides the defaults.
    pub fn resolve(common: &CommonFlags, sim: &SimFlags, file: &ConfigFile) -> Result<Self> {
        let params = OuParams::new(
            common.beta.or(file.beta).unwrap_or(1.0),
            common.sigma.or(file.sigma).unwrap_or(0.5),
            common.x0.or(file.x0).unwrap_or(2.0),
            common.theta.or(file.theta).unwrap_or(1.0),
        )?;
        let defaults = SimConfig::default();
        let sim = SimConfig {
            n_paths: sim.npaths.or(file.n_paths).unwrap_or(defaults.n_paths),
            dt: sim.dt.or(file.dt).unwrap_or(defaults.dt),
            t_max: sim.tmax.or(file.t_max).unwrap_or(defaults.t_max),
            seed: common.seed.or(file.seed).unwrap_or(defaults.seed),
            bridge_correction: if sim.no_bridge {
                false
            } else {
                file.bridge_correction.unwrap_or(defaults.bridge_correction)
            },
        };
        sim.validate()?;
        Ok(Self {
            params,
            sim,
            out: common.out.clone(),
            format: common.format.or(file.format).unwrap_or(Format::Csv),
        })
    }
}

enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn read_config(path: &Option<PathBuf>) -> std::result::Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn json_string(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialise");
    s.push('\n');
    s
}

/// Finite values as shortest round-trip decimals, the rest as empty cells.
fn cell(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn cmd_bound(
    cfg: &RunConfig,
    tmin: f64,
    tmax: f64,
    steps: usize,
) -> std::result::Result<(), Failure> {
    if steps == 0 || !(tmin.is_finite() && tmax.is_finite() && tmin >= 0.0 && tmax >= tmin) {
        return Err(Failure::Usage(
            "need 0 <= tmin <= tmax and steps >= 1".into(),
        ));
    }
    let cert = remark_constants(&cfg.params);
    eprintln!("k = {}\np = {}\nu = {}", cert.k, cert.p, cert.u);
    let rows: Vec<(f64, Option<f64>)> = (0..steps)
        .map(|i| {
            let t = if steps == 1 {
                tmin
            } else {
                tmin + (tmax - tmin) * i as f64 / (steps - 1) as f64
            };
            let bound = crate::analytic::theorem_log_bound(&cert, t).ok();
            (t, bound)
        })
        .collect();
    let status = |b: &Option<f64>| if b.is_some() { "ok" } else { "below-onset" };
    let representable = |b: f64| {
        let v = b.exp();
        (v > 0.0 && v.is_finite()).then_some(v)
    };
    let text = match cfg.format {
        Format::Csv => csv_string(
            &["t", "log_bound", "status", "bound"],
            rows.iter()
                .map(|(t, b)| {
                    vec![
                        cell(*t),
                        b.map(cell).unwrap_or_default(),
                        status(b).to_string(),
                        b.and_then(representable).map(cell).unwrap_or_default(),
                    ]
                })
                .collect(),
        ),
        Format::Json => json_string(&json!({
            "certificate": cert,
            "rows": rows.iter().map(|(t, b)| json!({
                "t": t,
                "log_bound": b.map(finite_or_null),
                "status": status(b),
                "bound": b.and_then(representable),
            })).collect::<Vec<_>>(),
        })),
    };
    emit(&cfg.out, &text)
}

struct MixedRow {
    s_prime: f64,
    ln_g2: f64,
    g2: f64,
    rel_error: f64,
    rho_b: Option<(f64, f64, usize)>,
}

fn cmd_density(
    cfg: &RunConfig,
    mode: DensityMode,
    s_primes: &[f64],
    tol: f64,
    bins: usize,
    window: f64,
) -> std::result::Result<(), Failure> {
    if s_primes.is_empty() || bins == 0 {
        return Err(Failure::Usage("need at least one s' and one bin".into()));
    }
    if mode == DensityMode::Mc {
        let fpts = sample_fpt_ou(&cfg.params, &cfg.sim)?;
        let est = estimate_density(&fpts, &uniform_edges(0.0, fpts.horizon, bins))?;
        let text = match cfg.format {
            Format::Csv => csv_string(
                &["t_lo", "t_hi", "rho_x", "std_err", "count"],
                (0..est.n_bins())
                    .map(|k| {
                        vec![
                            cell(est.bin_edges[k]),
                            cell(est.bin_edges[k + 1]),
                            cell(est.bin_density[k]),
                            cell(est.bin_std_err[k]),
                            est.bin_counts[k].to_string(),
                        ]
                    })
                    .collect(),
            ),
            Format::Json => json_string(&json!(est)),
        };
        return emit(&cfg.out, &text);
    }

    let bdy = SqrtBoundary::new(cfg.params);
    let mut rows = Vec::with_capacity(s_primes.len());
    for &s_prime in s_primes {
        let g = g2_quadrature(&bdy, s_prime, tol)?;
        rows.push(MixedRow {
            s_prime,
            ln_g2: g.ln_value,
            g2: g.value(),
            rel_error: g.rel_error,
            rho_b: None,
        });
    }
    if mode == DensityMode::Both {
        if !(window.is_finite() && window > 0.0) {
            return Err(Failure::Usage("--window must be positive".into()));
        }
        // ρ_B near s' from OU passage times: t' ∈ [t(s'-w), t(s'+w)] exactly
        // when s' lies in the s window.
        let beta = cfg.params.beta();
        let max_s = s_primes.iter().copied().fold(0.0, f64::max) + window;
        let sim = SimConfig {
            t_max: cfg.sim.t_max.max(s_to_time(max_s, beta)? + cfg.sim.dt),
            ..cfg.sim
        };
        let fpts = sample_fpt_ou(&cfg.params, &sim)?;
        let n = fpts.n_paths();
        for row in &mut rows {
            let lo = s_to_time((row.s_prime - window).max(0.0), beta)?;
            let hi = s_to_time(row.s_prime + window, beta)?;
            let width = (row.s_prime + window) - (row.s_prime - window).max(0.0);
            let count = fpts.captured_times().filter(|&t| t >= lo && t < hi).count();
            let p = count as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt() / width;
            row.rho_b = Some((p / width, se, count));
        }
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut header = vec!["s_prime", "ln_g2", "g2", "rel_error"];
            if mode == DensityMode::Both {
                header.extend(["rho_b_mc", "rho_b_std_err", "count", "g2_within_3se"]);
            }
            csv_string(
                &header,
                rows.iter()
                    .map(|r| {
                        let mut v = vec![
                            cell(r.s_prime),
                            cell(r.ln_g2),
                            cell(r.g2),
                            cell(r.rel_error),
                        ];
                        if let Some((rho, se, count)) = r.rho_b {
                            v.extend([
                                cell(rho),
                                cell(se),
                                count.to_string(),
                                (r.g2 <= rho + 3.0 * se).to_string(),
                            ]);
                        }
                        v
                    })
                    .collect(),
            )
        }
        Format::Json => json_string(&json!(rows
            .iter()
            .map(|r| {
                let mut v = json!({
                    "s_prime": r.s_prime,
                    "ln_g2": finite_or_null(r.ln_g2),
                    "g2": r.g2,
                    "rel_error": r.rel_error,
                });
                if let Some((rho, se, count)) = r.rho_b {
                    v["rho_b_mc"] = json!(rho);
                    v["rho_b_std_err"] = json!(se);
                    v["count"] = json!(count);
                    v["g2_within_3se"] = json!(r.g2 <= rho + 3.0 * se);
                }
                v
            })
            .collect::<Vec<_>>())),
    };
    emit(&cfg.out, &text)
}

fn cmd_simulate(cfg: &RunConfig, clock: Clock) -> std::result::Result<(), Failure> {
    let fpts = match clock {
        Clock::T => sample_fpt_ou(&cfg.params, &cfg.sim)?,
        Clock::S => sample_fpt_brownian(&SqrtBoundary::new(cfg.params), &cfg.sim)?,
    };
    let text = match cfg.format {
        Format::Csv => csv_string(
            &["path", "fpt", "censored"],
            fpts.passages
                .iter()
                .enumerate()
                .map(|(i, p)| match p {
                    Some(p) => vec![i.to_string(), cell(p.time), "false".into()],
                    None => vec![i.to_string(), String::new(), "true".into()],
                })
                .collect(),
        ),
        Format::Json => json_string(&json!({
            "coordinate": fpts.coordinate,
            "horizon": fpts.horizon,
            "fpt": fpts.passages.iter().map(|p| p.map(|p| p.time)).collect::<Vec<_>>(),
        })),
    };
    emit(&cfg.out, &text)
}

fn cmd_verify(
    cfg: &RunConfig,
    grid: &Option<PathBuf>,
    only: &Option<String>,
    no_mc: bool,
) -> std::result::Result<(), Failure> {
    let mut spec = match grid {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            parse_grid(&text)?
        }
        None => GridSpec::default(),
    };
    if no_mc {
        spec.mc = None;
    }
    let reports = run_selected(&spec, cfg.sim.seed, |id| {
        only.as_ref().is_none_or(|o| id.contains(o.as_str()))
    })?;
    let (pass, skip, fail) = summarize(&reports);
    let json_text = {
        let mut s = reports_to_json(&reports);
        s.push('\n');
        s
    };
    let csv_text = reports_to_csv(&reports);
    match &cfg.out {
        Some(path) => {
            // The chosen format goes to --out, the other beside it.
            let (main, other, ext) = match cfg.format {
                Format::Json => (&json_text, &csv_text, "csv"),
                Format::Csv => (&csv_text, &json_text, "json"),
            };
            write_file(path, main)?;
            write_file(&path.with_extension(ext), other)?;
        }
        None => emit(
            &None,
            if cfg.format == Format::Json {
                &json_text
            } else {
                &csv_text
            },
        )?,
    }
    eprintln!("{pass} pass / {skip} skip / {fail} fail");
    if reports.iter().any(|r| r.status == Status::Fail) {
        Err(Failure::Checks)
    } else {
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_phase(
    cfg: &RunConfig,
    amp: f64,
    period: f64,
    nbins: usize,
    samples: usize,
    m: usize,
    tol: f64,
) -> std::result::Result<(), Failure> {
    if m == 0 {
        return Err(Failure::Usage("--m must be at least 1".into()));
    }
    let p = ForcedLifParams::sinusoidal(cfg.params, amp, period)?;
    let kernel = estimate_kernel(&p, &cfg.sim, nbins, samples)?;
    let inv = invariant_density(&kernel, tol)?;
    let criterion = infimum_criterion(&kernel, m);
    if inv.degenerate {
        eprintln!("warning: invariant density not shown to be unique");
    }
    let text = match cfg.format {
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, r) in kernel.matrix.iter().enumerate() {
                for (j, v) in r.iter().enumerate() {
                    rows.push(vec![
                        "kernel".into(),
                        i.to_string(),
                        j.to_string(),
                        cell(*v),
                    ]);
                }
            }
            for (i, v) in inv.density().iter().enumerate() {
                rows.push(vec![
                    "density".into(),
                    i.to_string(),
                    String::new(),
                    cell(*v),
                ]);
            }
            rows.push(vec![
                "criterion".into(),
                m.to_string(),
                String::new(),
                cell(criterion),
            ]);
            csv_string(&["section", "i", "j", "value"], rows)
        }
        Format::Json => json_string(&json!({
            "n_bins": kernel.n_bins,
            "kernel": kernel.matrix,
            "counts_per_row": kernel.counts_per_row,
            "censored_per_row": kernel.censored_per_row,
            "invariant_density": inv.density(),
            "iterations": inv.iterations,
            "residual": inv.residual,
            "degenerate": inv.degenerate,
            "m": m,
            "criterion": criterion,
        })),
    };
    emit(&cfg.out, &text)
}

fn dispatch(cli: Cli) -> std::result::Result<(), Failure> {
    let file = read_config(&cli.common.config)?;
    let empty = SimFlags::default();
    let sim = match &cli.command {
        Command::Density { sim, .. }
        | Command::Simulate { sim, .. }
        | Command::Phase { sim, .. } => sim,
        _ => &empty,
    };
    let cfg = RunConfig::resolve(&cli.common, sim, &file)?;
    match &cli.command {
        Command::Bound { tmin, tmax, steps } => cmd_bound(&cfg, *tmin, *tmax, *steps),
        Command::Density {
            mode,
            sprime,
            tol,
            bins,
            window,
            ..
        } => cmd_density(&cfg, *mode, sprime, *tol, *bins, *window),
        Command::Simulate { clock, .. } => cmd_simulate(&cfg, *clock),
        Command::Verify { grid, only, no_mc } => cmd_verify(&cfg, grid, only, *no_mc),
        Command::Phase {
            amp,
            period,
            nbins,
            samples,
            m,
            tol,
            ..
        } => cmd_phase(&cfg, *amp, *period, *nbins, *samples, *m, *tol),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Checks) => EXIT_CHECK_FAILED,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
