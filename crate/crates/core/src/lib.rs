pub mod channel;
pub mod config;
pub mod detection;
pub mod engine;
pub mod error;
pub mod linkbudget;
pub mod model;
pub mod output;
pub mod photon;
pub mod presets;
pub mod qfc;
pub mod quad;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
