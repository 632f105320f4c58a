use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twirlkit::reports::{execute, exit_code, Command};

#[derive(Parser)]
#[command(name = "twirlkit", version = twirlkit::reports::VERSION, about = "Symmetric Clifford twirling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// JSON config file for the subcommand.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for the CSV table and manifest.
    #[arg(long, value_name = "DIR", default_value = "twirlkit-out")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Compare sampler averages with the analytic twirl by exact enumeration.
    TwirlVerify(Common),
    /// Rescaled bias against qubit count for Trotter circuits.
    BiasScan(Common),
    /// Rescaled bias against gadget noise rate.
    GadgetScan(Common),
    /// Sampling overheads of rescaling, cancellation and the lower bound.
    Overhead(Common),
    /// Random-Clifford bias against the closed-form bound.
    WnBound(Common),
    /// Dense trace and total-variation distances of rescaled Trotter states.
    Figs2(Common),
    /// Logical error budget.
    Budget(Common),
    /// Print the JSON schema of a subcommand's config, or of the manifest.
    Schema {
        /// Subcommand name or `manifest`.
        name: String,
    },
}

fn write_outputs(dir: &Path, name: &str, csv: &str, manifest: &str) -> std::io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{name}.csv"));
    let man_path = dir.join(format!("{name}.manifest.json"));
    fs::write(&csv_path, csv)?;
    fs::write(&man_path, manifest)?;
    Ok((csv_path, man_path))
}

fn run(cmd: Command, c: Common) -> ExitCode {
    let text = match fs::read_to_string(&c.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", c.config.display());
            return ExitCode::from(2);
        }
    };
    let out = match execute(cmd, &text, c.seed, c.threads) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let manifest = serde_json::to_string_pretty(&out.manifest).expect("manifest serializes") + "\n";
    match write_outputs(&c.out, cmd.name(), &out.csv, &manifest) {
        Ok((csv, man)) => {
            println!("wrote {} rows to {} and {}", out.manifest.rows, csv.display(), man.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: writing outputs to {}: {e}", c.out.display());
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::TwirlVerify(c) => (Command::TwirlVerify, c),
        Sub::BiasScan(c) => (Command::BiasScan, c),
        Sub::GadgetScan(c) => (Command::GadgetScan, c),
        Sub::Overhead(c) => (Command::Overhead, c),
        Sub::WnBound(c) => (Command::WnBound, c),
        Sub::Figs2(c) => (Command::Figs2, c),
        Sub::Budget(c) => (Command::Budget, c),
        Sub::Schema { name } => {
            if name == "manifest" {
                print!("{}", twirlkit::reports::MANIFEST_SCHEMA);
                return ExitCode::SUCCESS;
            }
            return match Command::ALL.iter().find(|c| c.name() == name) {
                Some(c) => {
                    print!("{}", c.schema());
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: unknown schema {name:?}");
                    ExitCode::from(2)
                }
            };
        }
    };
    run(cmd, common)
}
