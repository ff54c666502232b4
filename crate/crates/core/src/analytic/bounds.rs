use std::f64::consts::PI;

use serde::Serialize;

use super::optimize::mmax;
use crate::error::{Error, Result};
use crate::geometry::SqrtBoundary;
use crate::model::OuParams;

/// Smallest `s'` above which the convolution bound holds:
/// `max(8, 1 + x0²/θ², 8σ²/(βθ²))`.
pub fn lemma4_threshold(params: &OuParams) -> f64 {
    let ratio = params.x0() / params.theta();
    let noise =
        8.0 * params.sigma() * params.sigma() / (params.beta() * params.theta() * params.theta());
    8f64.max(1.0 + ratio * ratio).max(noise)
}

fn ln_cap_k(params: &OuParams) -> f64 {
    // ln(512/(9π)) + ln(x0/θ - 1), the second term without cancellation.
    (512.0 / (9.0 * PI)).ln() + ((params.x0() - params.theta()) / params.theta()).ln()
}

fn cap_h(params: &OuParams) -> f64 {
    let r = params.theta() / params.sigma();
    params.beta() / 32.0 * r * r
}

fn check_hypothesis(params: &OuParams, s_prime: f64) -> Result<()> {
    let threshold = lemma4_threshold(params);
    if s_prime.is_finite() && s_prime > threshold {
        Ok(())
    } else {
        Err(Error::HypothesisNotMet { s_prime, threshold })
    }
}

/// `ln[512/(9π)·(x0/θ - 1)] - 6 ln s' - (β/32)(θ/σ)² s'³`.
pub fn lemma4_log_bound(params: &OuParams, s_prime: f64) -> Result<f64> {
    check_hypothesis(params, s_prime)?;
    Ok(ln_cap_k(params) - 6.0 * s_prime.ln() - cap_h(params) * s_prime.powi(3))
}

/// Each relaxation between the convolution density and the final bound,
/// all in log-space and ordered from tightest to loosest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma4Chain {
    pub s_prime: f64,
    pub ln_a: f64,
    pub b_value: f64,
    /// `ln A + ln M_max(B)`.
    pub optimized: f64,
    /// `ln A - 4B - ln(16B)`, valid once `B > 1`.
    pub relaxed: f64,
    /// [`lemma4_log_bound`].
    pub final_bound: f64,
}

pub fn lemma4_chain(params: &OuParams, s_prime: f64) -> Result<Lemma4Chain> {
    check_hypothesis(params, s_prime)?;
    let frame = SqrtBoundary::new(*params).frame(s_prime)?;
    let (beta, sigma, x0, theta) = (params.beta(), params.sigma(), params.x0(), params.theta());
    let ln_a =
        (64.0 * beta * theta * (x0 - theta) / (9.0 * PI * sigma * sigma)).ln() - 3.0 * s_prime.ln();
    let b = beta * theta * theta * frame.delta * frame.delta * s_prime / (128.0 * sigma * sigma);
    let witness = mmax(b)?;
    Ok(Lemma4Chain {
        s_prime,
        ln_a,
        b_value: b,
        optimized: ln_a + witness.ln_m_max,
        relaxed: ln_a - 4.0 * b - (16.0 * b).ln(),
        final_bound: lemma4_log_bound(params, s_prime)?,
    })
}

/// Explicit constants `k`, `p`, `u` of the OU tail bound
/// `ρ_X(t) > k·exp(-p·e^{6βt})` for `t > u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCertificate {
    #[serde(skip)]
    params: OuParams,
    pub k: f64,
    pub p: f64,
    pub u: f64,
    pub cap_k: f64,
    pub cap_h: f64,
    pub ln_k: f64,
}

impl BoundCertificate {
    pub fn params(&self) -> &OuParams {
        &self.params
    }

    /// `ln k - p·e^{6βt}` with no onset check. Saturates to `-∞` once
    /// `e^{6βt}` exceeds the double range.
    pub fn log_bound_at(&self, t: f64) -> f64 {
        self.ln_k - self.p * (6.0 * self.params.beta() * t).exp()
    }
}

pub fn remark_constants(params: &OuParams) -> BoundCertificate {
    let beta = params.beta();
    let ln_cap_k = ln_cap_k(params);
    let cap_h = cap_h(params);
    let ln_k = (2.0 * beta).ln() + ln_cap_k;
    BoundCertificate {
        params: *params,
        k: ln_k.exp(),
        p: 1.0 + cap_h,
        u: lemma4_threshold(params).ln_1p() / (2.0 * beta),
        cap_k: ln_cap_k.exp(),
        cap_h,
        ln_k,
    }
}

/// `ln k - p·e^{6βt}` for `t > u`.
pub fn theorem_log_bound(cert: &BoundCertificate, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > cert.u) {
        return Err(Error::BelowOnset { t, onset: cert.u });
    }
    Ok(cert.log_bound_at(t))
}

/// `ρ_X(t) = 2β e^{2βt} ρ_B(e^{2βt} - 1)`.
pub fn rho_b_to_rho_x<F>(params: &OuParams, rho_b: F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let pair = crate::model::TimePair::from_t(t, params.beta())?;
    Ok(2.0 * params.beta() * pair.ln_s_plus_one.exp() * rho_b(pair.s))
}

/// Log form of [`rho_b_to_rho_x`]: `ln(2β) + 2βt + ln ρ_B(e^{2βt} - 1)`.
pub fn log_rho_b_to_rho_x<F>(params: &OuParams, ln_rho_b: F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let pair = crate::model::TimePair::from_t(t, params.beta())?;
    Ok((2.0 * params.beta()).ln() + pair.ln_s_plus_one + ln_rho_b(pair.s))
}
