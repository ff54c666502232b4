//! Phase-return kernel of a periodically forced integrate-and-fire neuron.

use oufpt::mc::SimConfig;
use oufpt::model::OuParams;
use oufpt::phase::{estimate_kernel, infimum_criterion, invariant_density, ForcedLifParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = OuParams::new(1.0, 0.5, 2.0, 1.0)?;
    let p = ForcedLifParams::sinusoidal(base, 0.5, 0.5)?;
    let cfg = SimConfig {
        n_paths: 1,
        dt: 1e-3,
        t_max: 20.0,
        seed: 3,
        bridge_correction: true,
    };
    let kernel = estimate_kernel(&p, &cfg, 16, 500)?;
    let inv = invariant_density(&kernel, 1e-10)?;
    println!("invariant density after {} iterations (degenerate: {}):", inv.iterations, inv.degenerate);
    for (j, d) in inv.density().iter().enumerate() {
        println!("{:5.3} {:6.3}", (j as f64 + 0.5) / 16.0, d);
    }
    println!("infimum criterion (m = 1): {:.4}", infimum_criterion(&kernel, 1));
    Ok(())
}
