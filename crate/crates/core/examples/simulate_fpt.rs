//! Monte Carlo first-passage times of the OU process and a histogram of them.

use oufpt::mc::{estimate_density, sample_fpt_ou, uniform_edges, SimConfig};
use oufpt::model::OuParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OuParams::new(1.0, 0.5, 2.0, 1.0)?;
    let cfg = SimConfig {
        n_paths: 20_000,
        dt: 1e-3,
        t_max: 3.0,
        seed: 7,
        bridge_correction: true,
    };
    let fpts = sample_fpt_ou(&params, &cfg)?;
    println!("{} paths, {} censored at t = {}", fpts.n_paths(), fpts.n_censored(), cfg.t_max);

    let est = estimate_density(&fpts, &uniform_edges(0.0, cfg.t_max, 12))?;
    for k in 0..est.n_bins() {
        let bar = "#".repeat((est.bin_density[k] * 30.0).round() as usize);
        println!("{:5.2} {:7.4} ± {:.4} {bar}", est.bin_center(k), est.bin_density[k], est.bin_std_err[k]);
    }
    Ok(())
}
