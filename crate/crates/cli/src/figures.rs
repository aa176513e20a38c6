//! Fixed parameter sets that regenerate the fidelity figures.
//!
//! All figures use square pulses and identical polarizations with
//! g = √I = 60 MHz, δ = 1500 MHz, k_c = 25 MHz and T = 30 μs.

use std::path::{Path, PathBuf};

use wavepacket_core::noise::DEFAULT_WIENER_STEPS;
use wavepacket_core::{InitialSuperposition, MotionOptions, MotionSpec, PolarizationBranch, Pulse, Source};

use crate::config::{
    linspace, ExperimentConfig, GridChoice, Mode, MotionSettings, NoiseSettings, Sweep, SweepVariable,
};
use crate::error::{CliError, CliResult};
use crate::experiment::{run_experiment, ResultTable};
use crate::output::{emit_csv, format_number};

pub const FIGURE_G: f64 = 60.0;
pub const FIGURE_INTENSITY: f64 = 3600.0;
pub const FIGURE_DELTA: f64 = 1500.0;
pub const FIGURE_K_C: f64 = 25.0;
pub const FIGURE_T: f64 = 30.0;

/// Monte Carlo trials per point of the fidelity-vs-n noise figure.
pub const FIGURE_MC_SAMPLES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// One plotted line: its file suffix, legend label and configuration.
#[derive(Clone, Debug)]
pub struct Curve {
    pub suffix: String,
    pub label: String,
    pub config: ExperimentConfig,
}

pub fn reference_source() -> Source {
    let branch = PolarizationBranch::lossless(FIGURE_G, FIGURE_DELTA, FIGURE_K_C).expect("reference branch");
    let pulse = Pulse::square(FIGURE_INTENSITY, FIGURE_T).expect("reference pulse");
    Source::identical(branch, pulse, InitialSuperposition::balanced()).expect("reference source")
}

fn base(mode: Mode, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        source: reference_source(),
        mode,
        sweep: None,
        n_values: (1..=15).collect(),
        noise: None,
        motion: None,
        grid: GridChoice::Auto,
        output: PathBuf::new(),
        seed,
    }
}

fn noise(samples: usize) -> Option<NoiseSettings> {
    Some(NoiseSettings {
        strength: None,
        samples,
        wiener_steps: DEFAULT_WIENER_STEPS,
        dump_samples: false,
    })
}

fn single(variable: SweepVariable, v: f64) -> Option<Sweep> {
    Some(Sweep {
        variable,
        values: vec![v],
    })
}

/// Curves of figure `id`, in legend order from the top curve down.
pub fn figure_curves(id: FigureId, seed: u64) -> Vec<Curve> {
    let tag = |prefix: &str, v: f64| format!("_{prefix}{}", format_number(v));
    match id {
        FigureId::Fig2 => [0.0, 0.1, 0.2]
            .into_iter()
            .map(|fr| Curve {
                suffix: tag("fr", fr),
                label: format!("F_r = {fr}"),
                config: ExperimentConfig {
                    sweep: single(SweepVariable::Fr, fr),
                    noise: noise(FIGURE_MC_SAMPLES),
                    ..base(Mode::IntensityNoise, seed)
                },
            })
            .collect(),
        FigureId::Fig3 => [3, 5, 10]
            .into_iter()
            .map(|n| Curve {
                suffix: format!("_n{n}"),
                label: format!("n = {n}"),
                config: ExperimentConfig {
                    sweep: Some(Sweep {
                        variable: SweepVariable::Fr,
                        values: linspace(0.0, 0.3, 25).expect("fr grid"),
                    }),
                    n_values: vec![n],
                    noise: noise(0),
                    ..base(Mode::IntensityNoise, seed)
                },
            })
            .collect(),
        FigureId::Fig4 => [0.0, 0.001, 0.005, 0.01]
            .into_iter()
            .map(|r| Curve {
                suffix: tag("ka", r),
                label: format!("k_a/k_c = {r}"),
                config: ExperimentConfig {
                    sweep: single(SweepVariable::KaRatio, r),
                    ..base(Mode::Loss, seed)
                },
            })
            .collect(),
        FigureId::Fig5 => [3, 5, 10]
            .into_iter()
            .map(|n| Curve {
                suffix: format!("_n{n}"),
                label: format!("n = {n}"),
                config: ExperimentConfig {
                    sweep: Some(Sweep {
                        variable: SweepVariable::KaRatio,
                        values: linspace(0.0, 0.01, 25).expect("ratio grid"),
                    }),
                    n_values: vec![n],
                    ..base(Mode::Loss, seed)
                },
            })
            .collect(),
        FigureId::Fig6 => [0.01, 0.1, 0.5, 1.0]
            .into_iter()
            .map(|thermal_n| {
                let spec = MotionSpec::new(1.0, 0.07, 0.07, thermal_n).expect("motion spec");
                Curve {
                    suffix: tag("N", thermal_n),
                    label: format!("N = {thermal_n}"),
                    config: ExperimentConfig {
                        sweep: single(SweepVariable::ThermalN, thermal_n),
                        motion: Some(MotionSettings {
                            spec,
                            n_max: None,
                            options: MotionOptions::default(),
                            diagnostics_every: None,
                        }),
                        ..base(Mode::Motion, seed)
                    },
                }
            })
            .collect(),
    }
}

/// Tables and files written by [`figure_command`].
#[derive(Clone, Debug)]
pub struct FigureOutput {
    pub tables: Vec<ResultTable>,
    pub csv_files: Vec<PathBuf>,
    pub script: PathBuf,
}

/// Evaluate every curve of figure `id`, write one CSV per curve and a
/// matplotlib script into `out_dir`.
pub fn figure_command(id: FigureId, out_dir: &Path, seed: u64) -> CliResult<FigureOutput> {
    let curves = figure_curves(id, seed);
    let mut tables = Vec::with_capacity(curves.len());
    for c in &curves {
        tables.push(run_experiment(&c.config)?);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut csv_files = Vec::new();
    for (c, t) in curves.iter().zip(&tables) {
        let path = out_dir.join(format!("{}{}.csv", id.name(), c.suffix));
        emit_csv(t, &path)?;
        csv_files.push(path);
    }
    let script = out_dir.join(format!("{}.py", id.name()));
    std::fs::write(&script, plot_script(id, &curves)).map_err(|e| CliError::io(&script, e))?;
    Ok(FigureOutput {
        tables,
        csv_files,
        script,
    })
}

fn plot_script(id: FigureId, curves: &[Curve]) -> String {
    let (x, xlabel) = match id {
        FigureId::Fig2 | FigureId::Fig4 | FigureId::Fig6 => ("n", "number of entangled photons n"),
        FigureId::Fig3 => ("fr", "relative intensity fluctuation F_r"),
        FigureId::Fig5 => ("k_a_ratio", "k_a / k_c"),
    };
    let style = if x == "n" { "o-" } else { "-" };
    let mut entries = String::new();
    for c in curves {
        entries.push_str(&format!("    (\"{}{}.csv\", \"{}\"),\n", id.name(), c.suffix, c.label));
    }
    format!(
        r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CURVES = [
{entries}]

fig, ax = plt.subplots(figsize=(5, 4))
for name, label in CURVES:
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    xs = [float(r["{x}"]) for r in rows]
    ys = [float(r["fidelity"]) for r in rows]
    ax.plot(xs, ys, "{style}", markersize=3, label=label)
ax.set_xlabel("{xlabel}")
ax.set_ylabel("fidelity P(n)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "{name}.png"), dpi=150)
"#,
        name = id.name(),
    )
}
