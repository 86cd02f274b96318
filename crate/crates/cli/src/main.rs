use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wh_cli::{exit, CliError, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "whtor", version, about = "Exact Whitehead torsion computations on model documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Model document (TOML).
    file: PathBuf,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
    /// Include wall times (the report is then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Whitehead torsion of chain maps and acyclic complexes.
    Torsion(Common),
    /// Character invariants of torsion classes.
    Invariants(Common),
    /// Poincaré torsion and its identities.
    Rho(Common),
    /// Gluing the ends of an h-cobordism.
    Glue(Common),
    /// Mapping-torus invariants of fiberings over the circle.
    S1(Common),
    /// Product transfer and the composite fibering formula.
    Transfer(Common),
    /// The full identity suite plus every task of the document.
    Verify(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (name, args) = match &cli.command {
        Command::Torsion(a) => ("torsion", a),
        Command::Invariants(a) => ("invariants", a),
        Command::Rho(a) => ("rho", a),
        Command::Glue(a) => ("glue", a),
        Command::S1(a) => ("s1", a),
        Command::Transfer(a) => ("transfer", a),
        Command::Verify(a) => ("verify", a),
    };
    match wh_cli::execute(name, &args.file, args.seed, args.timings) {
        Ok(report) => {
            let out = if args.json { report.to_json() } else { report.to_text() };
            print!("{out}");
            ExitCode::from(report.summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("whtor: {e}");
            let e: CliError = e;
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
