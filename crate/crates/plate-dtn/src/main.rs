use clap::{Parser, Subcommand};
use plate_dtn::{check, resolve_workers, run, ConfigError, RunConfig, RunError, WORKERS_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "plate-dtn", version, about = "Lamb-wave scattering by a cavity in an elastic plate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the frequency sweep described by a TOML configuration.
    Solve {
        config: PathBuf,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Frequencies solved concurrently (overrides the environment and the config).
        #[arg(long)]
        workers: Option<usize>,
        /// Only validate the configuration, dispersion roots and mode shapes.
        #[arg(long)]
        check: bool,
    },
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let Command::Solve { config, out, workers, check: check_only } = cli.command;
    let cfg = RunConfig::load(&config)?;
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = resolve_workers(workers, env.as_deref(), cfg.run.workers).map_err(|e| ConfigError::Invalid(vec![e]))?;
    let mut plan = cfg.validate()?;
    if let Some(out) = out {
        plan.output = out;
    }
    if check_only {
        for r in check(&plan)? {
            let modes: Vec<String> = r.modes.iter().map(|m| format!("{}{}{}", m.family.label(), m.n, if m.propagating { "" } else { "*" })).collect();
            println!(
                "{} Hz: {} propagating Lamb, {} propagating SH, retained [{}], traction-free residual {:.2e}",
                r.freq,
                r.propagating_lamb,
                r.propagating_sh,
                modes.join(" "),
                r.worst_traction_residual
            );
        }
        println!("configuration OK");
        return Ok(());
    }
    let summary = run(&plan, workers, Some(&config))?;
    println!("solved {} frequencies in {:.2} s; results in {}", summary.frequencies.len(), summary.wall.as_secs_f64(), plan.output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
