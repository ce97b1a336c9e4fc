//! Fuzzy cellular road-traffic model with a Nagel-Schreckenberg baseline.

pub mod cli;
pub mod experiment;
pub mod fcm;
pub mod fuzzy;
pub mod metrics;
pub mod nasch;
pub mod road;
pub mod sim_io;
