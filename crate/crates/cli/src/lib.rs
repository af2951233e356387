//! The `volterra` command line: experiments and utilities over the core
//! library, writing CSV/JSON artifacts and a run manifest per invocation.

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde_json::json;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(volterra_core::Error),
}

impl From<volterra_core::Error> for CliError {
    fn from(e: volterra_core::Error) -> Self {
        use volterra_core::Error as E;
        match e {
            E::Argument(m) | E::Domain(m) => CliError::Usage(m),
            E::MomentUnavailable(p) => CliError::Usage(format!("moment of order {p} unavailable")),
            E::Json(e) => CliError::Usage(format!("json: {e}")),
            other => CliError::Numeric(other),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code: 0 success, 1 usage error, 2 tolerance failure, 3 numeric
/// failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::UnknownArgument | ErrorKind::InvalidSubcommand => {
                    eprintln!("\n{}", args::Cli::command().render_help());
                    EXIT_USAGE
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let start = Instant::now();
    let (name, mut cfg) = cli.to_config();
    if let Some(path) = &cli.config {
        match RunConfig::load(path) {
            Ok(file) => {
                if let Some(c) = &file.command {
                    if c != &name {
                        eprintln!("error: config is for '{c}', not '{name}'");
                        return EXIT_USAGE;
                    }
                }
                cfg.overlay(file);
            }
            Err(e) => return report_error(e, None),
        }
    }
    cfg.command = Some(name.clone());
    if let Some(t) = cfg.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_USAGE;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut out = match output::Output::new(cfg.out.clone()) {
        Ok(o) => o,
        Err(e) => return report_error(e, None),
    };
    let result = commands::dispatch(&name, &cfg, &mut out);
    let code = match &result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_TOLERANCE,
        Err(CliError::Usage(_)) => EXIT_USAGE,
        Err(CliError::Numeric(_)) => EXIT_NUMERIC,
    };
    let manifest = json!({
        "command": name,
        "config": cfg,
        "versions": { "volterra-cli": env!("CARGO_PKG_VERSION"), "volterra-core": volterra_core::VERSION },
        "wall_time_s": start.elapsed().as_secs_f64(),
        "artifacts": out.artifacts(),
        "exit_code": code,
    });
    if let Err(e) = out.json_quiet("run.json", &manifest) {
        eprintln!("warning: could not write run manifest: {e:?}");
    }
    match result {
        Err(e) => report_error(e, Some(&mut out)),
        Ok(_) => code,
    }
}

fn report_error(e: CliError, out: Option<&mut output::Output>) -> i32 {
    match e {
        CliError::Usage(m) => {
            eprintln!("error: {m}");
            eprintln!("run `volterra --help` for usage");
            EXIT_USAGE
        }
        CliError::Numeric(err) => {
            let diag = match &err {
                volterra_core::Error::Numeric { message, estimate } => {
                    json!({ "error": "numeric", "message": message, "estimate": estimate })
                }
                volterra_core::Error::Resource(m) => json!({ "error": "resource", "message": m }),
                other => json!({ "error": "io", "message": other.to_string() }),
            };
            eprintln!("{}", serde_json::to_string_pretty(&diag).expect("json"));
            if let Some(o) = out {
                let _ = o.json_quiet("error.json", &diag);
            }
            EXIT_NUMERIC
        }
    }
}
