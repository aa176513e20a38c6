use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavepacket_cli::config::DEFAULT_SEED;
use wavepacket_cli::experiment::{monte_carlo_samples, motion_diagnostics};
use wavepacket_cli::output::{emit_diagnostics_csv, emit_mu_samples_csv, with_suffix};
use wavepacket_cli::{
    configure_workers, emit_csv, emit_envelope_csv, figure_command, load_config, run_experiment, CliResult, FigureId,
    Mode,
};
use wavepacket_core::spectral_envelope;

/// Fidelity of polarization-entangled photon trains from a cavity-QED source.
#[derive(Parser)]
#[command(name = "wavepacket", version)]
struct Cli {
    /// Random seed, overriding the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (run, envelope) or directory (figure).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a configuration and write its result table.
    Run { config: PathBuf },
    /// Regenerate one of the fidelity figures.
    Figure {
        #[arg(value_parser = parse_figure)]
        id: FigureId,
    },
    /// Write the spectral envelope of the configured pulse.
    Envelope { config: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    FigureId::parse(s).ok_or_else(|| format!("unknown figure '{s}', expected fig2..fig6"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_workers().and_then(|_| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => {
            let mut c = load_config(&config)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            let out = cli.out.unwrap_or_else(|| c.output.clone());
            let table = run_experiment(&c)?;
            emit_csv(&table, &out)?;
            println!("{}", out.display());
            if c.noise.as_ref().is_some_and(|n| n.dump_samples) {
                let path = with_suffix(&out, "_mu_samples");
                emit_mu_samples_csv(&monte_carlo_samples(&c)?, &path)?;
                println!("{}", path.display());
            }
            if let Some(every) = c.motion.as_ref().and_then(|m| m.diagnostics_every) {
                let path = with_suffix(&out, "_diagnostics");
                emit_diagnostics_csv(&motion_diagnostics(&c, every)?, &path)?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Figure { id } => {
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("figures"));
            let out = figure_command(id, &dir, cli.seed.unwrap_or(DEFAULT_SEED))?;
            for f in out.csv_files.iter().chain([&out.script]) {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Envelope { config } => {
            let c = load_config(&config)?;
            let out = cli.out.unwrap_or_else(|| with_suffix(&c.output, "_envelope"));
            envelope(&c, &out)
        }
        Command::Validate { config } => {
            let c = load_config(&config)?;
            summarize(&config, &c)
        }
    }
}

fn envelope(c: &wavepacket_cli::ExperimentConfig, out: &Path) -> CliResult<()> {
    let grid = c.grid_for(&c.source)?;
    let branches = if c.source.is_symmetric() { 1 } else { 2 };
    for alpha in 0..branches {
        let b = &c.source.branches[alpha];
        let env = spectral_envelope(&b.pulse, &b.branch, &grid)?;
        let path = if alpha == 0 {
            out.to_path_buf()
        } else {
            with_suffix(out, "_b1")
        };
        emit_envelope_csv(&env, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn summarize(path: &Path, c: &wavepacket_cli::ExperimentConfig) -> CliResult<()> {
    let grid = c.grid_for(&c.source)?;
    println!("{}: ok", path.display());
    println!("mode: {}", c.mode.name());
    match &c.sweep {
        Some(s) => println!("sweep: {} over {} values", s.variable.name(), s.values.len()),
        None => println!("sweep: none"),
    }
    println!("n: {:?}", c.n_values);
    println!("grid: W = {} MHz, M = {}", grid.half_bandwidth, grid.mode_count);
    if c.mode == Mode::Motion {
        if let Some(m) = &c.motion {
            println!("n_max: {}", m.spec.n_max);
        }
    }
    Ok(())
}
