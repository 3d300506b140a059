//! Command-line front end: config resolution, experiment dispatch, CSV and
//! SVG artifact output.

pub mod config;
pub mod csv;
pub mod svg;

mod commands;
mod report;

pub use commands::{cmd_gradcheck, cmd_propagate, cmd_sweep, cmd_train, load_training_data};
pub use report::cmd_report;
pub use config::{resolve_config, RunConfig};
pub use csv::{fmt_g9, read_csv, write_csv, Cell};
pub use svg::{render, write_svg, Chart, Series};

use crate::error::Result;

/// Dispatch one subcommand. Returns the process exit code.
pub fn run_command(command: &str, config_file: Option<&str>, sets: &[String]) -> Result<i32> {
    let config = resolve_config(config_file, sets)?;
    match command {
        "propagate" => cmd_propagate(&config).map(|_| 0),
        "sweep" => cmd_sweep(&config).map(|_| 0),
        "train" => cmd_train(&config).map(|_| 0),
        "gradcheck" => cmd_gradcheck(&config),
        "report" => cmd_report(&config).map(|_| 0),
        other => Err(crate::error::Error::Config(format!(
            "unknown command '{other}'"
        ))),
    }
}
