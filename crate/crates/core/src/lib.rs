//! Throughput analysis for two UAV base stations serving two adjacent cells
//! with two-way TDD links.
//!
//! The transmission direction of each link (its spin) and the altitude of
//! each UAV are configured jointly. [`throughput`] evaluates the average
//! throughput of a configuration in closed form; [`montecarlo`] simulates
//! frames with explicit user positions to check it.

pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod pairing;
pub mod params;
pub mod rates;
pub mod sinr;
pub mod special;
pub mod throughput;

pub use error::{Error, Result};
pub use pairing::{AccountingMode, PairCounts};
pub use params::{RawConfig, System, SystemParams};
pub use sinr::{Altitude, Configuration, RelativeSpin};
pub use throughput::{average_throughput, optimal_configuration, LoadDistribution, ThroughputBreakdown};
