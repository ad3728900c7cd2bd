//! Command-line front end: configuration files, job dispatch and result files.
//!
//! ```text
//! timebin <derive|propagate|scan-z|modes|bell|calibrate> --config <path> --out <dir>
//! ```
//!
//! Exit status is 0 on success, 2 for configuration or regime problems and 3
//! when a numerical self-check fails.

pub mod config;
pub mod run;
pub mod summary;

pub use config::{JobConfig, JobKind, KEYS};
pub use run::{exit_code, load_config, run, RunOutcome, Status};
pub use summary::{config_from_summary, config_hash, envelope_csv, Summary};
