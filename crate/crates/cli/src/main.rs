use std::path::PathBuf;
use std::process::ExitCode;

use abcsuff_cli::{read_report, run_experiment, validate_spec, CliError, ExperimentSpec};
use abcsuff_core::registry::{self, ModelOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abcsuff", version, about = "ABC experiments with automatic selection of summary statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write report.json plus CSV tables.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Parse and check a config, then print it with every default filled in.
    Validate { config: PathBuf },
    /// List the built-in models.
    ListModels,
    /// List the built-in statistic pools.
    ListPools,
    /// Print the command that reproduces a report.
    SeedReport {
        report: PathBuf,
        /// Write the resolved config here and reference it in the command.
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    validate_spec(&text)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            outdir,
        } => {
            let mut spec = load(&config)?;
            spec.seed = seed.unwrap_or(spec.seed);
            spec.workers = workers.unwrap_or(spec.workers);
            spec.outdir = outdir.unwrap_or(spec.outdir);
            let report = run_experiment(&spec)?;
            let a = &report.aggregate;
            println!(
                "{} replicates ({} failed) in {:.1}s; results in {}",
                a.replicates,
                a.failed,
                report.wall_seconds,
                spec.outdir.display()
            );
            for f in a.frequencies.iter().filter(|f| f.count > 0) {
                println!("  {:<8} {}/{}", f.name, f.count, a.replicates);
            }
            if !a.parameter_frequencies.is_empty() {
                let line = |t: &[abcsuff_cli::run::Frequency]| {
                    t.iter().filter(|f| f.count > 0).map(|f| format!("{} {}", f.name, f.count)).collect::<Vec<_>>().join(", ")
                };
                println!("  per-model union: {}", line(&a.parameter_frequencies));
                println!("  added jointly:   {}", line(&a.additional_frequencies));
            }
            for c in &a.bf_correlations {
                println!("  log BF correlation [{}]: {:.3}", c.statistics.join(", "), c.pearson);
            }
            if let Some(p) = a.check_passed {
                println!("  posterior checks passed: {p}/{}", a.replicates);
            }
        }
        Command::Validate { config } => print!("{}", load(&config)?.to_toml()),
        Command::ListModels => {
            let opts = ModelOptions::default();
            for name in registry::model_names() {
                let m = registry::model(name, 0, &opts)?;
                println!("{name:<12} {:?}, {} parameter(s)", m.model.variant(), m.dim());
            }
        }
        Command::ListPools => {
            for name in registry::POOL_NAMES {
                let p = registry::pool(name)?;
                println!("{name:<10} {}", p.names().join(" "));
            }
        }
        Command::SeedReport { report, emit_config } => {
            let r = read_report(&report)?;
            let config = match emit_config {
                Some(path) => {
                    std::fs::write(&path, r.spec.to_toml())
                        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
                    path
                }
                None => PathBuf::from("<config>"),
            };
            println!(
                "abcsuff run {} --seed {} --workers {} --outdir {}",
                config.display(),
                r.spec.seed,
                r.spec.workers,
                r.spec.outdir.display()
            );
        }
    }
    Ok(())
}
