//! First-passage analysis of an Ornstein-Uhlenbeck process started above a
//! constant threshold: closed-form tail bounds, quadrature and Monte Carlo
//! densities, a verification suite and the phase map of a forced neuron.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mc;
pub mod model;
pub mod phase;
pub mod rng;
pub mod verify;
