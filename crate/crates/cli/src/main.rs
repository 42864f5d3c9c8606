//! `racenav` command-line driver.
//!
//! Exit codes: 0 for a completed run, 2 when the vehicle left the track, 1 for
//! configuration or I/O errors. Standard output carries only results; logs go
//! to standard error.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};
use racenav::acceptance::{builtin_scenarios, run_all, run_criterion};
use racenav::sim::{run_scenario, write_trace, Scenario};

#[derive(Parser)]
#[command(name = "racenav", version, about = "Fault-tolerant race-car navigation simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, write its trace and print a JSON summary.
    Run {
        scenario: PathBuf,
        /// CSV trace destination.
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Replace the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a scenario file without simulating it.
    Validate { scenario: PathBuf },
    /// Run the built-in acceptance criteria and print a pass/fail table.
    Acceptance {
        /// Run a single criterion by number.
        #[arg(long)]
        only: Option<usize>,
    },
    /// Write the built-in scenarios as JSON files into a directory.
    Scenarios { dir: PathBuf },
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_OFF_TRACK: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    ExitCode::from(match cli.cmd {
        Command::Run { scenario, out, seed } => cmd_run(&scenario, &out, seed),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Acceptance { only } => cmd_acceptance(only),
        Command::Scenarios { dir } => cmd_scenarios(&dir),
    })
}

fn cmd_run(path: &Path, out: &Path, seed: Option<u64>) -> u8 {
    let mut sc = match Scenario::load(path) {
        Ok(sc) => sc,
        Err(e) => {
            error!("{}: {e}", path.display());
            return EXIT_ERROR;
        }
    };
    if let Some(s) = seed {
        sc.seed = s;
    }
    info!("running {} (seed {}, {} s)", sc.name, sc.seed, sc.duration_s);
    let outcome = match run_scenario(&sc) {
        Ok(o) => o,
        Err(e) => {
            error!("simulation failed: {e}");
            return EXIT_ERROR;
        }
    };
    let written = File::create(out)
        .map_err(racenav::Error::from)
        .and_then(|f| write_trace(&outcome.records, BufWriter::new(f)));
    if let Err(e) = written {
        error!("{}: {e}", out.display());
        return EXIT_ERROR;
    }
    let summary = outcome.summary(&sc);
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    match outcome.off_track {
        Some(ev) => {
            warn!("off track at t={:.2} s (s={:.1} m, lateral {:.2} m)", ev.t, ev.s, ev.lateral);
            EXIT_OFF_TRACK
        }
        None => EXIT_OK,
    }
}

fn cmd_validate(path: &Path) -> u8 {
    match Scenario::load(path) {
        Ok(sc) => {
            info!("{} is valid", sc.name);
            EXIT_OK
        }
        Err(e) => {
            error!("{}: {e}", path.display());
            EXIT_ERROR
        }
    }
}

fn cmd_acceptance(only: Option<usize>) -> u8 {
    let reports = match only {
        Some(id) => match run_criterion(id) {
            Some(r) => vec![r],
            None => {
                error!("no criterion {id}");
                return EXIT_ERROR;
            }
        },
        None => run_all(),
    };
    for r in &reports {
        println!("{}", r.line());
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    if passed == reports.len() {
        EXIT_OK
    } else {
        EXIT_ERROR
    }
}

fn cmd_scenarios(dir: &Path) -> u8 {
    if let Err(e) = std::fs::create_dir_all(dir) {
        error!("{}: {e}", dir.display());
        return EXIT_ERROR;
    }
    for sc in builtin_scenarios() {
        let path = dir.join(format!("{}.json", sc.name));
        if let Err(e) = std::fs::write(&path, sc.to_json() + "\n") {
            error!("{}: {e}", path.display());
            return EXIT_ERROR;
        }
        info!("wrote {}", path.display());
    }
    EXIT_OK
}
