//! The square-root boundary met by the time-changed Brownian motion and the
//! two-segment construction around it.
//!
//! For a target crossing time `s'` the tangent line `L1: a1 + b1·s` at the
//! origin and the horizontal line `L2` at height `a2 = b(s')` meet at `s*`.
//! A path that stays above `L1` until `s*` and then first meets `L2` at `s'`
//! also first meets `b` at `s'`, which is what the lower bound exploits.

use crate::error::{Error, Result};
use crate::model::OuParams;

/// A level curve `s ↦ b(s)` that a Brownian path can be absorbed on.
pub trait Boundary: Sync {
    fn level(&self, s: f64) -> f64;
}

/// `b(s) = sqrt(2β)/σ · (θ sqrt(s + 1) - x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtBoundary {
    params: OuParams,
}

impl SqrtBoundary {
    pub fn new(params: OuParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &OuParams {
        &self.params
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let s = nonnegative(s)?;
        Ok(self.value_unchecked(s))
    }

    pub fn slope(&self, s: f64) -> Result<f64> {
        let s = nonnegative(s)?;
        let p = &self.params;
        Ok(p.theta() / p.sigma() * (p.beta() / 2.0).sqrt() / (s + 1.0).sqrt())
    }

    pub(crate) fn value_unchecked(&self, s: f64) -> f64 {
        let p = &self.params;
        p.brownian_scale() * (p.theta() * (s + 1.0).sqrt() - p.x0())
    }

    pub fn frame(&self, s_prime: f64) -> Result<PiecewiseLinearFrame> {
        PiecewiseLinearFrame::new(self, s_prime)
    }
}

impl Boundary for SqrtBoundary {
    fn level(&self, s: f64) -> f64 {
        self.value_unchecked(s)
    }
}

/// `s ↦ intercept + slope·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBoundary {
    pub intercept: f64,
    pub slope: f64,
}

impl Boundary for LinearBoundary {
    fn level(&self, s: f64) -> f64 {
        self.intercept + self.slope * s
    }
}

fn nonnegative(s: f64) -> Result<f64> {
    if s.is_finite() && s >= 0.0 {
        Ok(s)
    } else {
        Err(Error::NegativeTime(s))
    }
}

/// Tangent line, chord height and their intersection for one `s'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseLinearFrame {
    params: OuParams,
    /// Intercept of `L1`, equal to `b(0)`.
    pub a1: f64,
    /// Slope of `L1`, equal to `b'(0)`.
    pub b1: f64,
    pub s_prime: f64,
    /// Height of `L2`, equal to `b(s')`.
    pub a2: f64,
    pub s_star: f64,
    /// `s' - s*`.
    pub delta: f64,
}

impl PiecewiseLinearFrame {
    pub fn new(bdy: &SqrtBoundary, s_prime: f64) -> Result<Self> {
        if !(s_prime.is_finite() && s_prime > 0.0) {
            return Err(Error::NonPositiveSPrime(s_prime));
        }
        let params = bdy.params;
        let a1 = bdy.value_unchecked(0.0);
        let b1 = bdy.slope(0.0)?;
        let a2 = bdy.value_unchecked(s_prime);
        let root = (s_prime + 1.0).sqrt();
        // 2(sqrt(s'+1) - 1) without cancellation for small s'.
        let s_star = 2.0 * s_prime / (root + 1.0);
        Ok(Self {
            params,
            a1,
            b1,
            s_prime,
            a2,
            s_star,
            delta: s_prime - s_star,
        })
    }

    pub fn params(&self) -> &OuParams {
        &self.params
    }

    /// `l1(s) = a1 + b1·s`.
    pub fn l1(&self, s: f64) -> f64 {
        self.a1 + self.b1 * s
    }

    /// Height of `L1` above `L2`; zero at `s*`, increasing in `s`.
    pub fn f1(&self, s: f64) -> f64 {
        self.b1 * (s - self.s_star)
    }

    /// `s* + α·Δ`.
    pub fn interior_point(&self, alpha: f64) -> f64 {
        self.s_star + alpha * self.delta
    }

    fn check(&self, s: f64) -> Result<f64> {
        if s.is_finite() && (0.0..=self.s_prime).contains(&s) {
            Ok(s)
        } else {
            Err(Error::OutOfInterval {
                s,
                s_prime: self.s_prime,
            })
        }
    }

    /// `Q1(s, s')` in expanded polynomial form, cross-checked against
    /// [`Self::q1_definitional`] in debug builds.
    pub fn q1(&self, s: f64) -> Result<f64> {
        let s = self.check(s)?;
        let value = self.q1_expanded(s);
        debug_assert!(
            (value - self.q1_definitional_unchecked(s)).abs() <= 1e-9 * self.q1_scale(s),
            "Q1 forms disagree at s = {s}"
        );
        Ok(value)
    }

    /// `(2σ²/β)·((s' - s)·l1² + s·(l1 - a2)²)`.
    pub fn q1_definitional(&self, s: f64) -> Result<f64> {
        let s = self.check(s)?;
        Ok(self.q1_definitional_unchecked(s))
    }

    fn q1_definitional_unchecked(&self, s: f64) -> f64 {
        let p = &self.params;
        let l1 = self.l1(s);
        let gap = self.f1(s);
        2.0 * p.sigma() * p.sigma() / p.beta() * ((self.s_prime - s) * l1 * l1 + s * gap * gap)
    }

    fn q1_expanded(&self, s: f64) -> f64 {
        let (x0, th) = (self.params.x0(), self.params.theta());
        let sp = self.s_prime;
        let root = (1.0 + sp).sqrt();
        s * s * th * (4.0 * x0 + th * (sp - 4.0 * root)) + 4.0 * sp * (x0 - th) * (x0 - th)
            - 4.0 * s * (x0 * x0 + (sp - 2.0) * x0 * th + (-1.0 - 2.0 * sp + 2.0 * root) * th * th)
    }

    /// Magnitude of the individual terms of the expanded form, used to judge
    /// cancellation when comparing the two forms.
    fn q1_scale(&self, s: f64) -> f64 {
        let (x0, th) = (self.params.x0(), self.params.theta());
        let sp = self.s_prime;
        let root = (1.0 + sp).sqrt();
        s * s * th * (4.0 * x0 + th * (sp + 4.0 * root))
            + 4.0 * sp * (x0 - th) * (x0 - th)
            + 4.0 * s * (x0 * x0 + (sp + 2.0) * x0 * th + (1.0 + 2.0 * sp + 2.0 * root) * th * th)
    }

    /// Second derivative of `Q1` in `s`, constant in `s`.
    pub fn q1_curvature(&self) -> f64 {
        let (x0, th) = (self.params.x0(), self.params.theta());
        2.0 * th * (4.0 * x0 + th * (self.s_prime - 4.0 * (1.0 + self.s_prime).sqrt()))
    }

    /// `Q2(s, s') = s(s' - s)`.
    pub fn q2(&self, s: f64) -> Result<f64> {
        let s = self.check(s)?;
        Ok(s * (self.s_prime - s))
    }
}

/// `Q2(s, s') = s(s' - s)` for a bare `s'`.
pub fn q2_eval(s_prime: f64, s: f64) -> Result<f64> {
    if s.is_finite() && s_prime.is_finite() && (0.0..=s_prime).contains(&s) {
        Ok(s * (s_prime - s))
    } else {
        Err(Error::OutOfInterval { s, s_prime })
    }
}
