//! Convolution density g2 by log-space quadrature against its lower bounds.

use oufpt::analytic::{g2_quadrature, lemma4_chain};
use oufpt::geometry::SqrtBoundary;
use oufpt::model::OuParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OuParams::new(1.0, 1.0, 3.0, 1.0)?;
    let bdy = SqrtBoundary::new(params);
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "s'", "ln g2", "optimized", "relaxed", "final");
    for s_prime in [12.0, 15.0, 20.0] {
        let g2 = g2_quadrature(&bdy, s_prime, 1e-8)?;
        let chain = lemma4_chain(&params, s_prime)?;
        println!(
            "{:>4} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            s_prime, g2.ln_value, chain.optimized, chain.relaxed, chain.final_bound
        );
    }
    Ok(())
}
