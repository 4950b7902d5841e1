//! Parameter sweeps over the full Dicke model: JSON configuration, a
//! parallel order-preserving evaluator, and CSV/JSON tables.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_beta, ConfigError, SweepSpec, Task};
pub use output::{emit_output, OutputError};
pub use run::{run_sweep, RunOptions, Table};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Config = 1,
    RowErrors = 2,
    Io = 3,
}

impl Exit {
    pub fn for_table(table: &Table) -> Self {
        if table.error_count() > 0 {
            Exit::RowErrors
        } else {
            Exit::Success
        }
    }
}

impl From<Exit> for std::process::ExitCode {
    fn from(e: Exit) -> Self {
        std::process::ExitCode::from(e as u8)
    }
}
