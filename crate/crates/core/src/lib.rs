//! Edge-reinforced random walks on cycles: simulation, exponential time lines,
//! martingale diagnostics and a reproducible Monte Carlo harness.

pub mod circulant;
pub mod cli;
pub mod config;
pub mod driver;
pub mod graph;
pub mod harness;
pub mod martingale;
pub mod report;
pub mod rng;
pub mod stats;
pub mod summation;
pub mod timeline;
pub mod walk;
pub mod weights;
