//! Command-line front end: CSV ingestion, model files, reports and subcommands.

pub mod args;
pub mod commands;
pub mod csv_io;
pub mod error;
pub mod model_file;
pub mod report;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, ExitKind, Result};
pub use model_file::ModelFile;
