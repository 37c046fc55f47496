//! Experiment driver: configuration, figure sweeps and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod naive;
pub mod sweep;

pub use acceptance::{run_acceptance, AcceptanceConfig, Report};
pub use config::ConfigMap;
pub use sweep::{run_sweep, Experiment, SweepConfig, SweepRow, SweepTable};
