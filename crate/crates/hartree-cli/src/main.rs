use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hartree_cli::{config, scenarios};

#[derive(Parser)]
#[command(name = "hartree", about = "Radial Hartree equation with an inverse-square potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and check the Pohozaev chain.
    GroundState(RunArgs),
    /// Evolve initial data and record conserved quantities and virial data.
    Evolve(RunArgs),
    /// Evolve towards blow-up and fit the rate.
    Blowup(RunArgs),
    /// Inequality checks over seeded random fields.
    Verify(RunArgs),
    /// Evolve and track mass in shrinking windows.
    Concentrate(RunArgs),
    /// Repeat a scenario over values of one key.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides seed).
    #[arg(long)]
    seed: Option<u64>,
    /// key=value, applied after the config file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::GroundState(a) => ("ground-state", a),
        Command::Evolve(a) => ("evolve", a),
        Command::Blowup(a) => ("blowup", a),
        Command::Verify(a) => ("verify", a),
        Command::Concentrate(a) => ("concentrate", a),
        Command::Sweep(a) => ("sweep", a),
    };
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    // the subcommand names the scenario; --out and --seed beat the file
    let mut overrides = args.overrides.clone();
    overrides.push(format!("scenario={scenario}"));
    if let Some(out) = &args.out {
        overrides.push(format!("output.dir={}", out.display()));
    }
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = match config::load(text.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    let outcome = scenarios::run(&cfg);
    for c in outcome.summary["checks"].as_array().into_iter().flatten() {
        let tag = if c["pass"] == true { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c["name"].as_str().unwrap_or(""), c["detail"].as_str().unwrap_or(""));
    }
    if let Some(e) = outcome.summary["error"].as_str() {
        eprintln!("error: {e}");
    }
    println!("summary: {}", cfg.out.join("summary.json").display());
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
