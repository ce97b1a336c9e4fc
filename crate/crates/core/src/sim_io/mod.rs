//! Scenario loading and result files.

pub mod output;
pub mod scenario;

pub use output::{write_fd_csv, write_pgm, write_queue_csv, write_spacetime, SpacetimeImage};
pub use scenario::{
    load_scenario, load_scenario_file, serialize_scenario, ConfigError, Scenario, ScenarioConfig,
};
