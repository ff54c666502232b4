//! Closed-form crossing densities, the convolution density `g2`, the
//! `M(η, ν)` optimisation and the explicit lower bounds built on them.
//!
//! Every bound is returned as a natural logarithm. The theorem-level bound is
//! doubly exponentially small and underflows `f64` for times barely past its
//! onset, so comparisons are only meaningful in log-space.

mod bounds;
mod densities;
mod optimize;
mod quadrature;

pub use bounds::{
    lemma4_chain, lemma4_log_bound, lemma4_threshold, log_rho_b_to_rho_x, remark_constants,
    rho_b_to_rho_x, theorem_log_bound, BoundCertificate, Lemma4Chain,
};
pub use densities::{g01, g12, ln_g01, ln_g12};
pub use optimize::{ln_m_objective, mmax, OptimizationWitness};
pub use quadrature::{
    g2_log_integrand, g2_quadrature, g2_quadrature_with_budget, integrate_log, G2Estimate,
    LogQuadrature, DEFAULT_MAX_EVALUATIONS, DEFAULT_REL_TOL,
};
