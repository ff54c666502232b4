//! Explicit constants of the OU tail bound and its value on a time grid.

use oufpt::analytic::{remark_constants, theorem_log_bound};
use oufpt::model::OuParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OuParams::new(1.0, 1.0, 3.0, 1.0)?;
    let cert = remark_constants(&params);
    println!("k = {:.6}, p = {:.6}, u = {:.6}", cert.k, cert.p, cert.u);

    // The bound underflows f64 almost immediately, so print its log.
    for t in [1.2, 1.5, 2.0] {
        println!("t = {t}: ln rho_X(t) > {:.4e}", theorem_log_bound(&cert, t)?);
    }
    Ok(())
}
