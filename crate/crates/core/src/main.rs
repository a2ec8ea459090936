use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use slitwall::runner::{self, RunOptions, TableFormat};
use slitwall::config::read_config;
use slitwall::{selftest, Error, Scenario};

#[derive(Parser)]
#[command(name = "slitwall", version, about = "Double slit with a quantum slit wall")]
struct Cli {
    /// Directory for output artifacts (overrides the config's output_dir).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Seed override for Monte Carlo steps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: screen pattern, conditional slices, summary.
    Simulate { config: PathBuf },
    /// Sweep a wall parameter and evaluate the visibility/accuracy frontier.
    Sweep { config: PathBuf },
    /// Two-branch measurement demos checked against dense oracles.
    Entangle {
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(2..=16))]
        dim: u8,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
    /// Photon recoil table for the interferometer estimate.
    Recoil {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the built-in oracle and invariant checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

// the --seed override is applied before validation so it can fill a missing seed
fn load(path: &std::path::Path, seed: Option<u64>) -> Result<Scenario, Error> {
    let mut config = read_config(path)?;
    if seed.is_some() {
        config.seed = seed;
    }
    Ok(config.validate()?)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let options = RunOptions {
        output_dir: cli.output_dir,
        seed: cli.seed,
    };
    match cli.command {
        Command::Simulate { config } => {
            let scenario = load(&config, cli.seed)?;
            let (summary, written) = runner::simulate(&scenario, &options)?;
            println!(
                "visibility {:.6e}  phase {:.6}  applied k {}",
                summary.visibility.visibility, summary.visibility.phase_alpha, summary.applied_k
            );
            if let Some(acc) = summary.accuracy {
                println!("path accuracy {acc:.6} over {} samples", summary.samples);
            }
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::Sweep { config } => {
            let scenario = load(&config, cli.seed)?;
            let outcome = runner::sweep(&scenario, &options)?;
            let r = &outcome.report;
            println!(
                "{} cells ({} failed); frontier monotone: {}",
                outcome.result.rows.len(),
                r.failed_cells,
                r.monotone
            );
            if r.verdict.compatible {
                println!(
                    "{} cell(s) reach visibility >= {} and accuracy >= {}",
                    r.verdict.witnesses.len(),
                    r.verdict.v_min,
                    r.verdict.acc_min
                );
            } else {
                println!(
                    "no cell reaches visibility >= {} and accuracy >= {} together",
                    r.verdict.v_min, r.verdict.acc_min
                );
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
        }
        Command::Entangle { dim, pairs } => {
            let report = runner::entangle(dim as usize, pairs, options.seed.unwrap_or(0))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if !report.passed {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Recoil { format } => {
            let format = match format {
                Format::Text => TableFormat::Text,
                Format::Csv => TableFormat::Csv,
            };
            print!("{}", runner::recoil(format));
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                println!("{} {:<26} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if failed > 0 {
                eprintln!("{failed} check(s) failed");
                return Ok(ExitCode::from(4));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
