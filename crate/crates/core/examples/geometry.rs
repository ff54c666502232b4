//! Boundary on the Brownian clock and the two-line frame used by the bounds.

use oufpt::geometry::SqrtBoundary;
use oufpt::model::OuParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OuParams::new(1.0, 1.0, 3.0, 1.0)?;
    let bdy = SqrtBoundary::new(params);
    println!("b(0) = {:.6}, b'(0) = {:.6}", bdy.value(0.0)?, bdy.slope(0.0)?);

    println!("{:>6} {:>10} {:>10} {:>10}", "s'", "a2", "s*", "delta");
    for s_prime in [4.0, 10.0, 20.0] {
        let f = bdy.frame(s_prime)?;
        println!("{:>6} {:>10.5} {:>10.5} {:>10.5}", s_prime, f.a2, f.s_star, f.delta);
    }

    let f = bdy.frame(10.0)?;
    let s = f.interior_point(0.5);
    println!("midpoint s = {s:.4}: Q1 = {:.5}, Q2 = {:.5}", f.q1(s)?, f.q2(s)?);
    Ok(())
}
