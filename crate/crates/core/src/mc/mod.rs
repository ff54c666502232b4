//! Monte Carlo first-passage sampling for the OU process on its own clock
//! and for the time-changed Brownian motion against a moving boundary.
//!
//! Paths are independent and seeded by `(seed, path, step)`, so results are
//! bit-identical regardless of thread count. With bridge correction on, a
//! step whose end points both lie above the boundary is still counted as a
//! crossing with the Brownian-bridge probability `exp(-2·d0·d1/h)` computed
//! against the chord of the boundary, and the crossing time inside the step
//! is drawn from the exact bridge hitting-time law.

mod bridge;
mod config;
mod density;
mod sampler;

pub use bridge::{bridge_crossing_probability, bridge_hitting_fraction};
pub use config::{Coordinate, SGrid, SimConfig};
pub use density::{
    estimate_density, estimate_log_tail, tail_window_estimate, transport_to_t, uniform_edges,
    wilson_interval, DensityEstimate, TailEstimate, TailOptions,
};
pub(crate) use sampler::OuStepper;
pub use sampler::{
    sample_fpt_brownian, sample_fpt_brownian_on_grid, sample_fpt_ou, simulate_brownian_path,
    FirstPassageTimes, Passage,
};
