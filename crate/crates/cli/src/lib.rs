//! Library side of the `fadekit` command-line tool: scenario files, sweep
//! execution and CSV formatting.

pub mod error;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use run::{run_scenario, to_csv, write_csv, Row, CSV_HEADER};
pub use scenario::{parse_scenario_file, Scenario};
