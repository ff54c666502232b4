//! Closed-form maximiser of M(eta, nu) compared with a brute-force grid.

use oufpt::analytic::{ln_m_objective, mmax};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for b in [0.1, 1.0, 10.0] {
        let w = mmax(b)?;
        let n = 2000;
        let mut best = f64::NEG_INFINITY;
        for i in 1..n {
            for j in (i + 1)..n {
                let v = ln_m_objective(i as f64 / n as f64, j as f64 / n as f64, b);
                best = best.max(v);
            }
        }
        println!(
            "B = {b:>5}: eta+ = {:.5}, nu+ = {:.5}, ln M_max = {:.6}, grid = {:.6}",
            w.eta_plus, w.nu_plus, w.ln_m_max, best
        );
    }
    Ok(())
}
