use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_cli::{cmd_check, cmd_report, cmd_solve, cmd_uq, load_config, CliError, Outcome};

#[derive(Parser)]
#[command(name = "landau", version, about = "Landau-damping fields by backward scattering")]
struct Cli {
    /// Run configuration (TOML); the built-in reference configuration if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; fixes the partition of all parallel work.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the text table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the admissibility gate and the profile hypotheses.
    Check,
    /// Solve the fixed point at one value of z.
    Solve {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z: f64,
    },
    /// Collocation sweep in z with refinement.
    Uq,
    /// Summarize every manifest under a directory.
    Report { dir: PathBuf },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Command::Report { dir } = &cli.command {
        return cmd_report(dir);
    }
    let cfg = load_config(cli.config.as_deref())?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    match &cli.command {
        Command::Check => cmd_check(&cfg),
        Command::Solve { z } => cmd_solve(&cfg, *z, &out),
        Command::Uq => cmd_uq(&cfg, &out),
        Command::Report { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.json).expect("report serializes")
                );
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
