//! Command-line harness for `iqht-core`: subcommands, output formats and the
//! acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod format;

pub use commands::{dispatch, Cli, CliError, Command, Destination, Emitted, Format, RunConfig, Status};

use std::io::Write;

/// Parse, validate, dispatch and write. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.into_config().and_then(|config| {
        let emitted = dispatch(&config)?;
        write_out(&config.destination, &emitted.body)?;
        Ok(emitted.status)
    });
    match result {
        Ok(status) => {
            if status == Status::AcceptanceFailure {
                eprintln!("acceptance check failed");
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_out(dest: &Destination, body: &str) -> Result<(), CliError> {
    match dest {
        Destination::Stdout => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
        Destination::File(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, body)?;
        }
    }
    Ok(())
}
