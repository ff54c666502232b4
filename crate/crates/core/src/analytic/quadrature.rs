//! Adaptive Gauss-Kronrod integration of `exp(ln_f)` carried out around the
//! peak of `ln_f`, so that integrands far below `f64::MIN_POSITIVE` are
//! integrated without underflow and endpoint singularities of the form
//! `0 · ∞` are never evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{PiecewiseLinearFrame, SqrtBoundary};

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;

const SCAN_POINTS: usize = 256;
const GOLDEN_ITERATIONS: usize = 120;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Result of integrating `exp(ln_f)`: the log of the integral and the
/// estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuadrature {
    pub ln_value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
    /// Location of the maximum of `ln_f` used as the scaling point.
    pub peak: f64,
}

impl LogQuadrature {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

fn locate_peak<F: Fn(f64) -> f64>(ln_f: &F, a: f64, b: f64) -> (f64, f64, usize) {
    // Chebyshev-spaced scan clusters nodes toward both ends, where the
    // integrands of interest turn on and off sharply.
    let node = |i: usize| {
        let c = (PI * (i as f64 + 0.5) / SCAN_POINTS as f64).cos();
        a + (b - a) * 0.5 * (1.0 - c)
    };
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..SCAN_POINTS {
        let v = ln_f(node(i));
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut lo = if best.0 == 0 { a } else { node(best.0 - 1) };
    let mut hi = if best.0 + 1 == SCAN_POINTS {
        b
    } else {
        node(best.0 + 1)
    };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = ln_f(x1);
    let mut f2 = ln_f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ln_f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ln_f(x2);
        }
        if hi - lo <= 1e-15 * (hi.abs() + lo.abs()) {
            break;
        }
    }
    let (x, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    let evaluations = SCAN_POINTS + 2 + GOLDEN_ITERATIONS;
    if v >= best.1 {
        (x, v, evaluations)
    } else {
        (node(best.0), best.1, evaluations)
    }
}

/// Distance from the peak, found by halving from `reach`, at which `ln_f`
/// is within 2 of its maximum. Never evaluates at `peak ± reach`.
fn peak_width<F: Fn(f64) -> f64>(
    ln_f: &F,
    peak: f64,
    ln_peak: f64,
    dir: f64,
    reach: f64,
) -> (f64, usize) {
    let mut d = 0.5 * reach;
    let mut used = 0;
    while d > 1e-14 * (peak.abs() + reach) {
        used += 1;
        if ln_f(peak + dir * d) >= ln_peak - 2.0 {
            break;
        }
        d *= 0.5;
    }
    (d, used)
}

/// Integrates `exp(ln_f(x))` over `(a, b)` to relative tolerance `tol`.
///
/// The integrand is rescaled by its maximum, the interval is split at that
/// maximum and both halves are refined adaptively with a 7/15-point
/// Gauss-Kronrod pair. Nodes are strictly interior, so `ln_f` is never
/// called at `a` or `b`.
pub fn integrate_log<F>(
    ln_f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<LogQuadrature>
where
    F: Fn(f64) -> f64,
{
    let (peak, ln_peak, mut evaluations) = locate_peak(&ln_f, a, b);
    if ln_peak == f64::NEG_INFINITY {
        return Ok(LogQuadrature {
            ln_value: f64::NEG_INFINITY,
            rel_error: 0.0,
            evaluations,
            peak,
        });
    }
    let scaled = |x: f64| (ln_f(x) - ln_peak).exp();

    let mut breaks = vec![a, peak, b];
    for (end, dir) in [(a, -1.0), (b, 1.0)] {
        let reach = (end - peak).abs();
        let (width, used) = peak_width(&ln_f, peak, ln_peak, dir, reach);
        evaluations += used;
        // Geometric breakpoints keep a narrow peak from hiding between the
        // nodes of a wide first segment.
        let mut d = width;
        while d < reach {
            breaks.push(peak + dir * d);
            d *= 4.0;
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(&scaled, w[0], w[1]));
            evaluations += 15;
        }
    }
    let mut value: f64 = heap.iter().map(|s: &Segment| s.value).sum();
    let mut error: f64 = heap.iter().map(|s: &Segment| s.error).sum();
    loop {
        if error <= tol * value.abs() {
            // Re-sum to drop drift from the running totals.
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            if error <= tol * value.abs() {
                return Ok(LogQuadrature {
                    ln_value: ln_peak + value.ln(),
                    rel_error: if value > 0.0 { error / value } else { 0.0 },
                    evaluations,
                    peak,
                });
            }
        }
        if evaluations + 30 > max_evaluations {
            return Err(Error::QuadratureNonConvergence {
                tol,
                evaluations,
                estimate: value,
            });
        }
        let worst = heap.pop().expect("at least one segment");
        value -= worst.value;
        error -= worst.error;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot refine below machine resolution; keep it but freeze its error.
            value += worst.value;
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            continue;
        }
        for half in [
            kronrod15(&scaled, worst.a, mid),
            kronrod15(&scaled, mid, worst.b),
        ] {
            value += half.value;
            error += half.error;
            heap.push(half);
        }
        evaluations += 30;
    }
}

/// Log of the convolution integrand `g01(s)·g12(s'|s)` on `(s*, s')`.
///
/// Written so that the vanishing factors at both ends appear as `ln 0 = -∞`
/// rather than as `0 · ∞`.
pub fn g2_log_integrand(frame: &PiecewiseLinearFrame, s: f64) -> f64 {
    let sp = frame.s_prime;
    let l1 = frame.l1(s);
    let gap = frame.f1(s);
    let rest = sp - s;
    (-frame.a1).ln() - (2.0 * PI).ln() + gap.ln()
        - 1.5 * (s * rest).ln()
        - l1 * l1 / (2.0 * s)
        - gap * gap / (2.0 * rest)
}

/// Convolution density `g2(s')` with its log and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Estimate {
    pub s_prime: f64,
    pub ln_value: f64,
    pub rel_error: f64,
    pub evaluations: usize,
}

impl G2Estimate {
    /// `g2(s')`; zero when it is below the smallest representable double.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// `g2(s') = ∫_{s*}^{s'} g01(s) g12(s'|s) ds` with the default budget.
pub fn g2_quadrature(bdy: &SqrtBoundary, s_prime: f64, tol: f64) -> Result<G2Estimate> {
    g2_quadrature_with_budget(bdy, s_prime, tol, DEFAULT_MAX_EVALUATIONS)
}

pub fn g2_quadrature_with_budget(
    bdy: &SqrtBoundary,
    s_prime: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<G2Estimate> {
    let frame = bdy.frame(s_prime)?;
    let q = integrate_log(
        |s| g2_log_integrand(&frame, s),
        frame.s_star,
        frame.s_prime,
        tol,
        max_evaluations,
    )?;
    Ok(G2Estimate {
        s_prime,
        ln_value: q.ln_value,
        rel_error: q.rel_error,
        evaluations: q.evaluations,
    })
}
