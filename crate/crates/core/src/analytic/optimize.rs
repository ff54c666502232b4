//! Maximisation of `M(η, ν) = η(ν - η)·exp(-2B/(1 - ν²))` over the open
//! triangle `0 < η < ν < 1`.
//!
//! Stationarity in `η` gives `ν = 2η`. Writing `x = ν²`, the reduced problem
//! `max (x/4)·exp(-2B/(1 - x))` has its root at `x² - 2(1 + B)x + 1 = 0`,
//! whose admissible branch is `x = 1 - C` with `C = sqrt(B² + 2B) - B`.

use crate::error::{Error, Result};

/// Interior maximiser of `M` and the constants derived from `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationWitness {
    pub b_value: f64,
    /// `C = sqrt(B² + 2B) - B`, in `(0, 1)`.
    pub c_value: f64,
    pub eta_plus: f64,
    pub nu_plus: f64,
    /// `((1 - C)/4)·exp(-2B/C)`; may underflow to zero for large `B`.
    pub m_max: f64,
    pub ln_m_max: f64,
}

/// `ln M(η, ν)`; `-∞` outside the constraint triangle.
pub fn ln_m_objective(eta: f64, nu: f64, b: f64) -> f64 {
    if !(eta > 0.0 && nu > eta && nu < 1.0) {
        return f64::NEG_INFINITY;
    }
    eta.ln() + (nu - eta).ln() - 2.0 * b / (1.0 - nu * nu)
}

pub fn mmax(b: f64) -> Result<OptimizationWitness> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::NonPositiveB(b));
    }
    let root = (b * b + 2.0 * b).sqrt();
    // Both forms avoid the cancellation in sqrt(B² + 2B) - B for large B.
    let c = 2.0 * b / (root + b);
    let one_minus_c = 1.0 / (1.0 + b + root);
    let nu_plus = one_minus_c.sqrt();
    let ln_m_max = (one_minus_c / 4.0).ln() - 2.0 * b / c;
    Ok(OptimizationWitness {
        b_value: b,
        c_value: c,
        eta_plus: 0.5 * nu_plus,
        nu_plus,
        m_max: ln_m_max.exp(),
        ln_m_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Grid maximum of `ln M` at spacing `step`; independent of the closed form.
    fn grid_max(b: f64, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        let mut best = f64::NEG_INFINITY;
        for j in 1..n {
            let nu = j as f64 * step;
            let penalty = 2.0 * b / (1.0 - nu * nu);
            for i in 1..j {
                let eta = i as f64 * step;
                best = best.max(eta.ln() + (nu - eta).ln() - penalty);
            }
        }
        best
    }

    #[test]
    fn b_three_halves() {
        let w = mmax(1.5).unwrap();
        assert!((w.c_value - (21f64.sqrt() / 2.0 - 1.5)).abs() < 1e-15);
        assert!((w.c_value - 0.7913).abs() < 1e-4);
        let expected = (1.0 - w.c_value) / 4.0 * (-3.0 / w.c_value).exp();
        assert!((w.m_max - expected).abs() < 1e-17);
        assert!((w.m_max - 1.177e-3).abs() < 1e-6);
        let grid = grid_max(1.5, 1e-3).exp();
        assert!(w.m_max >= grid - 1e-12);
        assert!(w.m_max - grid <= 1e-5);
    }

    #[test]
    fn b_one_boundary_case() {
        let w = mmax(1.0).unwrap();
        assert!((1.0 - w.c_value - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!(1.0 - w.c_value > 0.25);
    }

    #[test]
    fn c_tends_to_one() {
        let mut last = 0.0;
        for k in -3..12 {
            let c = mmax(10f64.powi(k)).unwrap().c_value;
            assert!(c > last && c < 1.0);
            last = c;
        }
        assert!(1.0 - last < 1e-10);
    }

    #[test]
    fn rejects_non_positive() {
        assert_eq!(mmax(0.0), Err(Error::NonPositiveB(0.0)));
        assert!(mmax(-1.0).is_err());
        assert!(mmax(f64::NAN).is_err());
    }

    #[test]
    fn stationary_point_is_critical() {
        for b in [0.3, 1.0, 7.0] {
            let w = mmax(b).unwrap();
            let h = 1e-6;
            let f = |e: f64, n: f64| ln_m_objective(e, n, b);
            let de = (f(w.eta_plus + h, w.nu_plus) - f(w.eta_plus - h, w.nu_plus)) / (2.0 * h);
            let dn = (f(w.eta_plus, w.nu_plus + h) - f(w.eta_plus, w.nu_plus - h)) / (2.0 * h);
            assert!(de.abs() < 1e-6 && dn.abs() < 1e-6, "b = {b}: {de} {dn}");
        }
    }

    proptest! {
        #[test]
        fn witness_invariants(b in 1e-6f64..1e6) {
            let w = mmax(b).unwrap();
            prop_assert!(w.c_value > 0.0 && w.c_value < 1.0);
            prop_assert!((w.nu_plus - 2.0 * w.eta_plus).abs() <= 1e-15);
            prop_assert!(0.0 < w.eta_plus && w.eta_plus < w.nu_plus && w.nu_plus < 1.0);
            let direct = ((1.0 - w.c_value) / 4.0).ln() - 2.0 * b / w.c_value;
            prop_assert!((w.ln_m_max - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            prop_assert!((ln_m_objective(w.eta_plus, w.nu_plus, b) - w.ln_m_max).abs() <= 1e-9 * w.ln_m_max.abs().max(1.0));
        }

        #[test]
        fn c_bounds(b in 0.2500001f64..1e6) {
            let w = mmax(b).unwrap();
            prop_assert!(w.c_value > 0.5);
            if b >= 1.0 {
                prop_assert!(1.0 - w.c_value > 1.0 / (4.0 * b));
            }
        }

        #[test]
        fn c_monotone(b in 1e-6f64..1e5, d in 1e-6f64..10.0) {
            prop_assert!(mmax(b + d).unwrap().c_value >= mmax(b).unwrap().c_value);
        }
    }
}
