//! `h2conv`: desk experiments for Raman frequency conversion in hydrogen.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration or file error,
//! 4 numerical failure.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::process::ExitCode;

use clap::Parser;

use h2conv_core::Error;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) => 2,
        Error::Config(_)
        | Error::Parse { .. }
        | Error::MissingColumn { .. }
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_) => 3,
        Error::Numerical { .. } | Error::BoundaryOptimum { .. } => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = commands::Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("h2conv: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
