//! Command-line front end: `run` parses arguments, dispatches to the
//! experiment, and writes the JSON summary and CSV tables.

use std::ffi::OsString;
use std::hash::{BuildHasher, Hasher};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

pub mod args;
mod commands;

use args::{Cli, Command};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hyperc_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hyperc_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter { .. } | E::NotReduced(_)) => 2,
            CliError::Core(E::Solver(_)) => 3,
            CliError::Core(E::Window { .. }) => 1,
            CliError::Io { .. } => 1,
        }
    }
}

/// JSON summary: what ran, with which resolved parameters, and the results.
#[derive(Serialize)]
pub struct Summary<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: Option<u64>,
    pub config: &'a C,
    pub results: R,
}

/// Run-specific facts that must not enter the summary, which is meant to be
/// byte-identical across worker counts.
#[derive(Serialize)]
struct RunInfo {
    workers: usize,
    threads: usize,
    wall_time_s: f64,
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Seed from the flag, then `HYPERC_SEED`, else a fresh one (printed).
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var("HYPERC_SEED") {
        return v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("HYPERC_SEED=`{v}` is not an unsigned integer")));
    }
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0),
    );
    let seed = h.finish();
    eprintln!("seed: {seed} (pass --seed {seed} to reproduce)");
    Ok(seed)
}

pub(crate) struct Output {
    pub json: String,
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match args::expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    let exec = hyperc_core::Executor::with_workers(common.workers);
    let start = Instant::now();
    let out = commands::dispatch(cmd, &exec)?;
    let wall = start.elapsed().as_secs_f64();
    match &common.out {
        Some(path) => {
            write_file(path, &out.json)?;
            let info = RunInfo {
                workers: common.workers,
                threads: threads(&exec),
                wall_time_s: wall,
            };
            let mut side = path.as_os_str().to_os_string();
            side.push(".run.json");
            let text = serde_json::to_string_pretty(&info).expect("serializable") + "\n";
            write_file(Path::new(&side), &text)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.json.as_bytes())
                .map_err(|e| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })?;
        }
    }
    eprintln!("{}: done in {wall:.3} s", cmd.name());
    Ok(())
}

fn threads(exec: &hyperc_core::Executor) -> usize {
    match exec {
        hyperc_core::Executor::Sequential => 1,
        hyperc_core::Executor::Workers(n) => n.get(),
        _ => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    }
}
