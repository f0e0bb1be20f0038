//! Observation strategies for large agent-based simulations.
//!
//! The crate runs a seeded random-walk population on a toroidal grid and
//! measures `Z`, the number of agents inside a designated zone, using one
//! of several observers:
//!
//! * brute-force direct observation, which probes every agent;
//! * indirect observation, which reads occupancy traces left in the grid;
//! * self-observation, where agents maintain membership of a group `G`
//!   and the observer only probes `G`;
//! * statistical survey, which probes a simple random sample sized with
//!   the Horvitz-Thompson formula and expands the hit count.
//!
//! The [`bench`] module times whole observed runs over an `(N, p)` grid,
//! builds difference surfaces and their zero isolines, and labels the
//! fastest method per cell. [`adaptive`] consumes that map at runtime.

pub mod adaptive;
pub mod bench;
pub mod config;
mod error;
pub mod observers;
pub mod sampling;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use observers::{Observation, ObservationMethod, Observer};
pub use sim::{ground_truth_count, init_simulation, Cell, GridSpec, SimConfig, SimState, Zone};
