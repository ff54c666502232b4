//! The OU density recovered from a Brownian run on the rescaled clock.

use oufpt::geometry::SqrtBoundary;
use oufpt::mc::{estimate_density, sample_fpt_brownian_on_grid, sample_fpt_ou, transport_to_t, SGrid, SimConfig};
use oufpt::model::OuParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = OuParams::new(1.0, 0.5, 2.0, 1.0)?;
    let t_max = 2.0;
    let ou_cfg = SimConfig {
        n_paths: 20_000,
        dt: 1e-3,
        t_max,
        seed: 11,
        bridge_correction: true,
    };
    let s_max = (2.0 * t_max).exp_m1();
    let bm_cfg = SimConfig { t_max: s_max, seed: 12, ..ou_cfg };
    let grid = SGrid::OuImage { dt: ou_cfg.dt, beta: params.beta() };

    let ou = sample_fpt_ou(&params, &ou_cfg)?;
    let bm = sample_fpt_brownian_on_grid(&SqrtBoundary::new(params), &bm_cfg, grid)?;

    let t_edges: Vec<f64> = (0..=8).map(|k| k as f64 * t_max / 8.0).collect();
    let s_edges: Vec<f64> = t_edges.iter().map(|t| (2.0 * t).exp_m1()).collect();
    let direct = estimate_density(&ou, &t_edges)?;
    let via_s = transport_to_t(&estimate_density(&bm, &s_edges)?, params.beta())?;
    println!("{:>6} {:>10} {:>10}", "t", "direct", "via s");
    for k in 0..direct.n_bins() {
        println!("{:>6.3} {:>10.4} {:>10.4}", direct.bin_center(k), direct.bin_density[k], via_s.bin_density[k]);
    }
    Ok(())
}
