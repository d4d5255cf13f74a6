pub mod cellpower;
pub mod channel;
pub mod config;
pub mod distribution;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interference;
pub mod inversion;
pub mod network;
pub mod par;
pub mod power_average;
pub mod power_waterfill;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod traffic;
pub use error::{Error, Result};
pub use par::Exec;
