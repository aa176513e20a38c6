//! Configuration files, parameter sweeps, figure regeneration and CSV output
//! on top of `wavepacket-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod output;

pub use config::{load_config, parse_config, ExperimentConfig, Mode, Sweep, SweepVariable};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ResultRow, ResultTable};
pub use figures::{figure_command, figure_curves, FigureId, FigureOutput};
pub use output::{emit_csv, emit_envelope_csv, format_number};

/// Environment variable holding the worker count. Unset means one worker
/// per hardware thread.
pub const WORKERS_ENV: &str = "WAVEPACKET_WORKERS";

/// Size the global worker pool from [`WORKERS_ENV`].
pub fn configure_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV}: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("{WORKERS_ENV}: {e}")))
}
