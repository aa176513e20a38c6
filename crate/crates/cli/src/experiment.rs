//! Sweep evaluation.

use rayon::prelude::*;
use wavepacket_core::noise::{monte_carlo_transfer, sample_mu_batch, MonteCarloEstimate};
use wavepacket_core::{
    averaged_fidelity, ideal_fidelity, loss_fidelity, motion, motion_fidelity, DiagnosticRow, MotionHamiltonian,
    MotionSpec, MuSampler, NoiseStrength, Pulse, SingleExcitationState, Source,
};

use crate::config::{ExperimentConfig, Mode, SweepVariable};
use crate::error::{CliError, CliResult};

/// Model inputs at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub source: Source,
    pub strength: Option<NoiseStrength>,
    pub motion: Option<MotionSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep: Option<f64>,
    pub n: u32,
    pub fidelity: f64,
    /// Monte Carlo estimate and its standard error.
    pub monte_carlo: Option<(f64, f64)>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub sweep_variable: Option<SweepVariable>,
    pub monte_carlo: bool,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn headers(&self) -> Vec<&'static str> {
        let mut h = Vec::new();
        if let Some(v) = self.sweep_variable {
            h.push(v.name());
        }
        h.extend(["n", "fidelity"]);
        if self.monte_carlo {
            h.extend(["mc_fidelity", "mc_stderr"]);
        }
        h.push("warning");
        h
    }

    /// Fidelity at sweep value `x` (None without a sweep) and cycle count `n`.
    pub fn fidelity(&self, x: Option<f64>, n: u32) -> Option<f64> {
        self.rows.iter().find(|r| r.sweep == x && r.n == n).map(|r| r.fidelity)
    }
}

fn cfg(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Apply sweep value `value` to the base configuration.
pub fn point(config: &ExperimentConfig, value: Option<f64>) -> CliResult<Point> {
    let mut source = config.source.clone();
    let mut strength = config.noise.as_ref().and_then(|n| n.strength);
    let mut motion = config.motion.as_ref().map(|m| m.spec);
    let (Some(var), Some(v)) = (config.sweep.as_ref().map(|s| s.variable), value) else {
        return Ok(Point {
            source,
            strength,
            motion,
        });
    };
    use SweepVariable::*;
    match var {
        G | Delta | KC | KA | KaRatio => {
            source = source.map_branches(|b| {
                let mut b = b.clone();
                let br = &mut b.branch;
                match var {
                    G => br.g = v,
                    Delta => br.delta = v,
                    KC => br.k_c = v,
                    KA => br.k_a = v,
                    _ => br.k_a = v * br.k_c,
                }
                Ok(b)
            })?;
        }
        Intensity | Duration => {
            source = source.map_branches(|b| {
                let mut b = b.clone();
                b.pulse = match var {
                    Intensity => scale_to_peak(&b.pulse, v)?,
                    _ => b.pulse.with_duration(v)?,
                };
                Ok(b)
            })?;
        }
        Fr => strength = Some(NoiseStrength::Relative(v)),
        Diffusion => strength = Some(NoiseStrength::Diffusion(v)),
        ThermalN | Eta | Omega0 => {
            let base = motion.ok_or_else(|| cfg("sweep needs a [motion] section"))?;
            let explicit = config.motion.as_ref().and_then(|m| m.n_max);
            let mut spec = match var {
                ThermalN => MotionSpec::new(base.omega0, base.eta_l, base.eta_r, v)?,
                Eta => MotionSpec {
                    eta_l: v,
                    eta_r: v,
                    ..base
                },
                _ => MotionSpec { omega0: v, ..base },
            };
            if let Some(n) = explicit {
                spec = spec.with_n_max(n)?;
            }
            spec.validate()?;
            motion = Some(spec);
        }
    }
    Ok(Point {
        source,
        strength,
        motion,
    })
}

fn scale_to_peak(pulse: &Pulse, peak: f64) -> wavepacket_core::Result<Pulse> {
    let current = pulse.max_intensity();
    if current <= 0.0 {
        return Err(wavepacket_core::Error::InvalidInput {
            field: "intensity_mhz2".into(),
            reason: "sweep needs a pulse with nonzero peak intensity".into(),
        });
    }
    pulse.scaled(peak / current)
}

/// Evaluate every sweep point and cycle count. Either the whole table is
/// produced or the first error is returned.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<ResultTable> {
    let values = config.sweep_values();
    let blocks: Vec<CliResult<Vec<ResultRow>>> = values.par_iter().map(|&v| evaluate(config, v)).collect();
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    let monte_carlo = config.noise.as_ref().is_some_and(|n| n.samples > 0);
    Ok(ResultTable {
        sweep_variable: config.sweep.as_ref().map(|s| s.variable),
        monte_carlo,
        rows,
    })
}

fn evaluate(config: &ExperimentConfig, value: Option<f64>) -> CliResult<Vec<ResultRow>> {
    let p = point(config, value)?;
    let row = |n: u32, fidelity: f64, monte_carlo: Option<(f64, f64)>, warning: Option<String>| {
        let warning =
            warning.or_else(|| (!(0.0..=1.0).contains(&fidelity)).then(|| "fidelity outside [0, 1]".to_string()));
        ResultRow {
            sweep: value,
            n,
            fidelity,
            monte_carlo,
            warning,
        }
    };
    let ns = &config.n_values;
    match config.mode {
        Mode::Ideal => ns
            .iter()
            .map(|&n| Ok(row(n, ideal_fidelity(n, &p.source)?, None, None)))
            .collect(),
        Mode::Loss => ns
            .iter()
            .map(|&n| Ok(row(n, loss_fidelity(n, &p.source)?, None, None)))
            .collect(),
        Mode::IntensityNoise => {
            let noise = config.noise.as_ref().ok_or_else(|| cfg("missing [noise]"))?;
            let strength = p.strength.ok_or_else(|| cfg("noise strength not set"))?;
            let d = diffusions(&p.source, strength)?;
            let mc = if noise.samples > 0 {
                Some(branch_estimates(
                    &p.source,
                    d,
                    config.seed,
                    noise.samples,
                    noise.wiener_steps,
                )?)
            } else {
                None
            };
            let w = p.source.initial.weights();
            ns.iter()
                .map(|&n| {
                    let avg = averaged_fidelity(n, &p.source, d)?;
                    let mc_n = mc.as_ref().map(|est| est.power(n, w));
                    Ok(row(n, avg.value, mc_n, avg.warning.map(|x| x.to_string())))
                })
                .collect()
        }
        Mode::Motion => {
            let settings = config.motion.as_ref().ok_or_else(|| cfg("missing [motion]"))?;
            let spec = p.motion.ok_or_else(|| cfg("missing [motion]"))?;
            let grid = config.grid_for(&p.source)?;
            let f = motion_fidelity(&p.source, &spec, &grid, settings.options)?;
            Ok(ns.iter().map(|&n| row(n, f.at(n), None, None)).collect())
        }
    }
}

fn diffusions(source: &Source, strength: NoiseStrength) -> CliResult<[f64; 2]> {
    let d0 = diffusion(&source.branches[0].pulse, strength)?;
    let d1 = diffusion(&source.branches[1].pulse, strength)?;
    Ok([d0, d1])
}

fn diffusion(pulse: &Pulse, strength: NoiseStrength) -> CliResult<f64> {
    Ok(match strength {
        NoiseStrength::Diffusion(d) => d,
        NoiseStrength::Relative(fr) => wavepacket_core::convert_fr_to_d(fr, pulse)?,
    })
}

/// Monte Carlo estimates of the per-cycle transfer probability.
enum Estimates {
    /// Identical branches share one estimate.
    Shared(MonteCarloEstimate),
    /// Independent estimates; branch α uses seed + α.
    PerBranch([Option<MonteCarloEstimate>; 2]),
}

impl Estimates {
    /// Σ_α |c_α|² m_α^n with its standard error.
    fn power(&self, n: u32, w: [f64; 2]) -> (f64, f64) {
        match self {
            Estimates::Shared(e) => e.power(n),
            Estimates::PerBranch(est) => {
                let mut value = 0.0;
                let mut var = 0.0;
                for (alpha, e) in est.iter().enumerate() {
                    if let Some(e) = e {
                        let (v, se) = e.power(n);
                        value += w[alpha] * v;
                        var += (w[alpha] * se).powi(2);
                    }
                }
                (value, var.sqrt())
            }
        }
    }
}

fn branch_estimates(source: &Source, d: [f64; 2], seed: u64, samples: usize, steps: usize) -> CliResult<Estimates> {
    if source.is_symmetric() && d[0] == d[1] {
        let mus = mu_samples_for(source, 0, d[0], seed, samples, steps)?;
        return Ok(Estimates::Shared(monte_carlo_transfer(&mus)));
    }
    let w = source.initial.weights();
    let mut out = [None, None];
    for alpha in 0..2 {
        if w[alpha] > 0.0 {
            let mus = mu_samples_for(source, alpha, d[alpha], seed.wrapping_add(alpha as u64), samples, steps)?;
            out[alpha] = Some(monte_carlo_transfer(&mus));
        }
    }
    Ok(Estimates::PerBranch(out))
}

fn mu_samples_for(
    source: &Source,
    alpha: usize,
    d: f64,
    seed: u64,
    samples: usize,
    steps: usize,
) -> CliResult<Vec<f64>> {
    let b = &source.branches[alpha];
    let sampler = MuSampler::new(&b.pulse, &b.branch, d, steps)?;
    Ok(sample_mu_batch(&sampler, seed, samples))
}

/// μ samples of branch 0 at the first sweep point, for the (trial, mu_sample)
/// dump.
pub fn monte_carlo_samples(config: &ExperimentConfig) -> CliResult<Vec<f64>> {
    let noise = config.noise.as_ref().ok_or_else(|| cfg("missing [noise]"))?;
    let p = point(config, config.sweep_values()[0])?;
    let strength = p.strength.ok_or_else(|| cfg("noise strength not set"))?;
    let d = diffusion(&p.source.branches[0].pulse, strength)?;
    mu_samples_for(&p.source, 0, d, config.seed, noise.samples, noise.wiener_steps)
}

/// Population history of branch 0 started in Fock level 0 at the first
/// sweep point.
pub fn motion_diagnostics(config: &ExperimentConfig, every: usize) -> CliResult<Vec<DiagnosticRow>> {
    let settings = config.motion.as_ref().ok_or_else(|| cfg("missing [motion]"))?;
    let p = point(config, config.sweep_values()[0])?;
    let spec = p.motion.ok_or_else(|| cfg("missing [motion]"))?;
    let grid = config.grid_for(&p.source)?;
    let setup = &p.source.branches[0];
    let h = MotionHamiltonian::new(setup.branch.clone(), spec, grid, 0, settings.options)?;
    let st = SingleExcitationState::excited_atom(&h, 0)?;
    let dt = h.default_step(&setup.pulse);
    let (_, rows) = motion::propagate_with_diagnostics(&st, &h, &setup.pulse, dt, every)?;
    Ok(rows)
}
