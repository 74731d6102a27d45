//! `loadstab` command-line front end: configuration, dispatch and file
//! output around [`loadstab_core`].

pub mod args;
pub mod config;
pub mod error;
pub mod run;
pub mod svg;

use std::ffi::OsString;

use clap::Parser;

pub use config::{RunConfig, Settings};
pub use error::CliError;
pub use run::execute;

/// Parses flags and the optional config file into a validated run.
pub fn parse_config(cli: &args::Cli, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    RunConfig::resolve(file, cli.settings(), env_seed)
}

/// Full program: returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let env_seed = std::env::var(config::SEED_ENV).ok();
    let result = parse_config(&cli, env_seed.as_deref()).and_then(|cfg| execute(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("loadstab: {e}");
            e.exit_code()
        }
    }
}
