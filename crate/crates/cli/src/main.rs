use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use pullback_cli::commands::{run_attractor, run_contraction, run_stationary, run_trace};
use pullback_cli::output::{
    attractor_csv, attractor_json, contraction_csv, contraction_json, stationary_csv,
    stationary_json, trace_csv, trace_json,
};
use pullback_cli::verify::run_verify;
use pullback_cli::{parse_config, CliError, ExperimentConfig, OutputFormat};

/// Certified pullback attractors of time-varying tridiagonal Markov chains.
#[derive(Parser)]
#[command(name = "pullback", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding the config's `output` key.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format, overriding the config's `format` key.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Seed override for random drivers.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary distribution of the chain at index 0, with its residual.
    Stationary,
    /// Attractor path over the configured window.
    Attractor,
    /// Forward-tracking convergence trace with certified bounds.
    Trace,
    /// Run the invariant suite and print one pass/fail line per property.
    Verify,
    /// Print the contraction data of the configured chain.
    Contraction,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(dir) = &cli.output {
        config.output = dir.clone();
    }
    if let Some(format) = cli.format {
        config.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    Ok(config)
}

fn write_output(
    config: &ExperimentConfig,
    name: &str,
    content: &str,
    quiet: bool,
) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.output)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", config.output.display())))?;
    let path = config
        .output
        .join(format!("{name}.{}", config.format.extension()));
    std::fs::write(&path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    if !quiet {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    match cli.command {
        Command::Stationary => {
            let out = run_stationary(&config, cli.seed)?;
            let content = match config.format {
                OutputFormat::Csv => stationary_csv(&out),
                OutputFormat::Json => stationary_json(&out),
            };
            write_output(&config, "stationary", &content, cli.quiet)
        }
        Command::Attractor => {
            let rows = run_attractor(&config, cli.seed)?;
            let content = match config.format {
                OutputFormat::Csv => attractor_csv(&rows),
                OutputFormat::Json => attractor_json(&rows),
            };
            write_output(&config, "attractor", &content, cli.quiet)
        }
        Command::Trace => {
            let rows = run_trace(&config, cli.seed)?;
            let content = match config.format {
                OutputFormat::Csv => trace_csv(&rows),
                OutputFormat::Json => trace_json(&rows),
            };
            write_output(&config, "trace", &content, cli.quiet)
        }
        Command::Contraction => {
            let out = run_contraction(&config)?;
            let content = match config.format {
                OutputFormat::Csv => contraction_csv(&out),
                OutputFormat::Json => contraction_json(&out),
            };
            write_output(&config, "contraction", &content, cli.quiet)
        }
        Command::Verify => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let all_passed = run_verify(&config, cli.seed, &mut lock)?;
            lock.flush().map_err(|e| CliError::Io(e.to_string()))?;
            if all_passed {
                Ok(())
            } else {
                Err(CliError::VerificationFailed)
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(&cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
