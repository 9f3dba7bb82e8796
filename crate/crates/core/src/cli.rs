//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure (e.g. the port is taken),
//! 2 bad input, 3 no Condorcet winner under `--strict-condorcet`.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::demo::{self, DemoOptions};
use crate::model::{load_criteria, load_matrix};
use crate::scoring::score_matrix;
use crate::service::SessionService;
use crate::store::FileStore;
use crate::voting::{self, BallotsFile, Method, VoteResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_WINNER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "consilium",
    version,
    about = "Group decision sessions with Borda and Condorcet voting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Borda,
    Condorcet,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Borda => Method::Borda,
            MethodArg::Condorcet => Method::Condorcet,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the alternatives of a matrix CSV under a criteria JSON file.
    Score {
        matrix: PathBuf,
        criteria: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Tally a ballots JSON file.
    Vote {
        ballots: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Exit with status 3 when there is no Condorcet winner.
        #[arg(long)]
        strict_condorcet: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the ISA walkthrough and print both classifications.
    Demo {
        /// All three decision makers cast the same ballot.
        #[arg(long)]
        unanimous: bool,
        /// Perturb the decision makers' weight presets.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Matrix CSV to use instead of the shipped one.
        #[arg(long, requires = "criteria")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "matrix")]
        criteria: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "CONSILIUM_DATA_DIR", default_value = "consilium-data")]
        data_dir: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn input_error(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn print_result(out: &mut dyn Write, r: &VoteResult) -> std::io::Result<()> {
    writeln!(out, "method: {}", r.method)?;
    match &r.condorcet_winner {
        Some(w) => writeln!(out, "Condorcet winner: {w}")?,
        None => writeln!(out, "no Condorcet winner")?,
    }
    let label = match r.method {
        Method::Borda => "points",
        Method::Condorcet => "copeland",
    };
    writeln!(out, "{:>4}  {:<16} {label}", "rank", "alternative")?;
    for (i, id) in r.ranking.iter().enumerate() {
        let s = r.scores.get(id).unwrap_or_default();
        writeln!(out, "{:>4}  {:<16} {s}", i + 1, id)?;
    }
    Ok(())
}

fn run_command(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    };
    match cmd {
        Command::Score {
            matrix,
            criteria,
            json,
        } => {
            let m = load_matrix(&read(&matrix)?)
                .map_err(|e| input_error(format!("{}: {e}", matrix.display())))?;
            let c = load_criteria(&read(&criteria)?)
                .map_err(|e| input_error(format!("{}: {e}", criteria.display())))?;
            let report = score_matrix(&m, &c).map_err(input_error)?;
            if json {
                emit_json(out, &report).map_err(io)?;
            } else {
                writeln!(out, "method: {}", report.method).map_err(io)?;
                writeln!(out, "{:>4}  {:<16} score", "rank", "alternative").map_err(io)?;
                for (i, id) in report.ranking.iter().enumerate() {
                    let s = report.scores.get(id).unwrap_or_default();
                    writeln!(out, "{:>4}  {:<16} {s:.6}", i + 1, id).map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Vote {
            ballots,
            method,
            strict_condorcet,
            json,
        } => {
            let method = match (method, strict_condorcet) {
                (Some(MethodArg::Borda), true) => {
                    return Err(input_error("--strict-condorcet needs --method condorcet"))
                }
                (None, true) => Method::Condorcet,
                (m, _) => m.map_or(Method::Borda, Method::from),
            };
            let file: BallotsFile = serde_json::from_str(&read(&ballots)?)
                .map_err(|e| input_error(format!("{}: {e}", ballots.display())))?;
            let profile = file.into_profile().map_err(input_error)?;
            let result = voting::result(&profile, method);
            if json {
                emit_json(out, &result).map_err(io)?;
            } else {
                print_result(out, &result).map_err(io)?;
            }
            if strict_condorcet && !result.has_condorcet_winner {
                writeln!(err, "no Condorcet winner").map_err(io)?;
                return Ok(EXIT_NO_WINNER);
            }
            Ok(EXIT_OK)
        }
        Command::Demo {
            unanimous,
            seed,
            top,
            matrix,
            criteria,
            json,
        } => {
            let (m, c) = match (matrix, criteria) {
                (Some(mp), Some(cp)) => (
                    load_matrix(&read(&mp)?).map_err(input_error)?,
                    load_criteria(&read(&cp)?).map_err(input_error)?,
                ),
                _ => demo::isa_dataset().map_err(input_error)?,
            };
            let outcome = demo::run(m, c, &DemoOptions { unanimous, seed }).map_err(input_error)?;
            if json {
                emit_json(out, &demo::report(&outcome)).map_err(io)?;
            } else {
                out.write_all(demo::render(&outcome, top).as_bytes())
                    .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Serve {
            port,
            host,
            data_dir,
        } => {
            let store = FileStore::open(&data_dir).map_err(|e| Failure {
                code: EXIT_RUNTIME,
                message: e.to_string(),
            })?;
            let service = Arc::new(SessionService::new(store));
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| Failure {
                        code: EXIT_RUNTIME,
                        message: format!("cannot bind {host}:{port}: {e}"),
                    })?;
                let addr = listener.local_addr().map_err(io)?;
                writeln!(out, "listening on http://{addr}").map_err(io)?;
                out.flush().map_err(io)?;
                crate::http::serve(listener, service).await.map_err(io)
            })?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match run_command(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
