//! Experiment configuration files.
//!
//! TOML with the unit in every dimensional key name. A minimal file:
//!
//! ```toml
//! mode = "ideal"
//!
//! [branch]
//! g_mhz = 60.0
//! delta_mhz = 1500.0
//! k_c_mhz = 25.0
//!
//! [pulse]
//! intensity_mhz2 = 3600.0
//! t_us = 30.0
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use wavepacket_core::noise::DEFAULT_WIENER_STEPS;
use wavepacket_core::{
    BathModel, BranchSetup, ContinuumGrid, InitialSuperposition, MotionOptions, MotionSpec, NoiseStrength,
    PolarizationBranch, Pulse, PulsePhase, Source,
};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ideal,
    IntensityNoise,
    Loss,
    Motion,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::IntensityNoise => "intensity-noise",
            Mode::Loss => "loss",
            Mode::Motion => "motion",
        }
    }
}

/// Quantities a sweep can vary. Names match the config keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    G,
    Delta,
    KC,
    KA,
    /// k_a as a multiple of k_c.
    KaRatio,
    Intensity,
    Duration,
    Fr,
    Diffusion,
    ThermalN,
    /// Both Lamb-Dicke parameters.
    Eta,
    Omega0,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 12] = [
        SweepVariable::G,
        SweepVariable::Delta,
        SweepVariable::KC,
        SweepVariable::KA,
        SweepVariable::KaRatio,
        SweepVariable::Intensity,
        SweepVariable::Duration,
        SweepVariable::Fr,
        SweepVariable::Diffusion,
        SweepVariable::ThermalN,
        SweepVariable::Eta,
        SweepVariable::Omega0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::G => "g_mhz",
            SweepVariable::Delta => "delta_mhz",
            SweepVariable::KC => "k_c_mhz",
            SweepVariable::KA => "k_a_mhz",
            SweepVariable::KaRatio => "k_a_ratio",
            SweepVariable::Intensity => "intensity_mhz2",
            SweepVariable::Duration => "t_us",
            SweepVariable::Fr => "fr",
            SweepVariable::Diffusion => "d_mhz4_us",
            SweepVariable::ThermalN => "thermal_n",
            SweepVariable::Eta => "eta",
            SweepVariable::Omega0 => "omega0_mhz",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    pub fn allowed(self, mode: Mode) -> bool {
        use SweepVariable::*;
        match self {
            G | Delta | KC | Intensity | Duration => true,
            KA | KaRatio => matches!(mode, Mode::Loss | Mode::Motion),
            Fr | Diffusion => mode == Mode::IntensityNoise,
            ThermalN | Eta | Omega0 => mode == Mode::Motion,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSettings {
    /// None when the sweep supplies the strength.
    pub strength: Option<NoiseStrength>,
    /// Monte Carlo trials per sweep point; 0 skips the Monte Carlo columns.
    pub samples: usize,
    pub wiener_steps: usize,
    /// Also write the μ samples of the first sweep point.
    pub dump_samples: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionSettings {
    pub spec: MotionSpec,
    /// Explicit Fock cutoff; otherwise chosen from N at every sweep point.
    pub n_max: Option<usize>,
    pub options: MotionOptions,
    /// Record populations of the k = 0 propagation every this many steps.
    pub diagnostics_every: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridChoice {
    Auto,
    Explicit(ContinuumGrid),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub mode: Mode,
    pub sweep: Option<Sweep>,
    pub n_values: Vec<u32>,
    pub noise: Option<NoiseSettings>,
    pub motion: Option<MotionSettings>,
    pub grid: GridChoice,
    pub output: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Continuum grid for `source`, auto-sized from the largest κ and T.
    pub fn grid_for(&self, source: &Source) -> CliResult<ContinuumGrid> {
        let kappa = source
            .branches
            .iter()
            .map(|b| b.branch.total_decay())
            .fold(0.0, f64::max);
        let t = source.branches.iter().map(|b| b.pulse.duration()).fold(0.0, f64::max);
        let g = match self.grid {
            GridChoice::Auto => ContinuumGrid::auto(kappa, t)?,
            GridChoice::Explicit(g) => g,
        };
        g.validate(kappa, t)?;
        Ok(g)
    }

    pub fn sweep_values(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }
}

pub const DEFAULT_OUTPUT: &str = "results.csv";
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Deserialize, Serialize)]
struct RawConfig {
    mode: Mode,
    seed: Option<u64>,
    output: Option<PathBuf>,
    branch: Option<RawBranch>,
    branches: Option<Vec<RawBranch>>,
    pulse: RawPulse,
    initial: Option<RawInitial>,
    n: Option<RawN>,
    sweep: Option<RawSweep>,
    noise: Option<RawNoise>,
    motion: Option<RawMotion>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawBranch {
    g_mhz: f64,
    delta_mhz: f64,
    k_c_mhz: f64,
    k_a_mhz: Option<f64>,
    k_a_ratio: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum RawShape {
    #[default]
    Square,
    SineSquaredRamp,
    Sampled,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawPulse {
    #[serde(default)]
    shape: RawShape,
    intensity_mhz2: Option<f64>,
    t_us: Option<f64>,
    ramp_fraction: Option<f64>,
    times_us: Option<Vec<f64>>,
    samples_mhz2: Option<Vec<f64>>,
    phase_rad: Option<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawInitial {
    c0: [f64; 2],
    c1: [f64; 2],
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum RawN {
    Range { start: u32, end: u32 },
    List(Vec<u32>),
}

#[derive(Debug, Deserialize, Serialize)]
struct RawSweep {
    variable: String,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    end: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawNoise {
    fr: Option<f64>,
    d_mhz4_us: Option<f64>,
    samples: Option<usize>,
    wiener_steps: Option<usize>,
    #[serde(default)]
    dump_samples: bool,
}

#[derive(Debug, Deserialize, Serialize, Default, Clone, Copy)]
#[serde(rename_all = "kebab-case")]
enum RawBath {
    #[default]
    Markov,
    Discrete,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawMotion {
    omega0_mhz: f64,
    eta: Option<f64>,
    eta_l: Option<f64>,
    eta_r: Option<f64>,
    thermal_n: f64,
    n_max: Option<usize>,
    #[serde(default)]
    bath: RawBath,
    cavity_stark: Option<bool>,
    diagnostics_every: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawGrid {
    half_bandwidth_mhz: f64,
    modes: usize,
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Parse and validate configuration text. Unknown keys are an error.
pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let input: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("syntax: {e}")))?;
    let raw: RawConfig = toml::Value::Table(input.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    // Every key the schema understood survives a round trip.
    let known = toml::Value::try_from(&raw).map_err(|e| CliError::Config(e.to_string()))?;
    let mut unknown = Vec::new();
    unknown_keys(&toml::Value::Table(input), &known, "", &mut unknown);
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    build(raw)
}

fn unknown_keys(input: &toml::Value, known: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    use toml::Value;
    match (input, known) {
        (Value::Table(a), Value::Table(b)) => {
            for (k, v) in a {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match b.get(k) {
                    Some(kv) => unknown_keys(v, kv, &path, out),
                    None => out.push(path),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (v, kv)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, kv, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => {}
    }
}

fn cfg(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn build(raw: RawConfig) -> CliResult<ExperimentConfig> {
    let pulse = build_pulse(&raw.pulse)?;
    let branches = match (&raw.branch, &raw.branches) {
        (Some(_), Some(_)) => return Err(cfg("set either [branch] or [[branches]], not both")),
        (None, None) => return Err(cfg("missing [branch] (both polarizations) or two [[branches]]")),
        (Some(b), None) => {
            let b = build_branch(b, 0)?;
            [b.clone(), b.with_label(1)]
        }
        (None, Some(list)) => {
            if list.len() != 2 {
                return Err(cfg(format!("[[branches]] needs exactly 2 entries, got {}", list.len())));
            }
            [build_branch(&list[0], 0)?, build_branch(&list[1], 1)?]
        }
    };
    let initial = match raw.initial {
        None => InitialSuperposition::balanced(),
        Some(i) => InitialSuperposition::new(C64::new(i.c0[0], i.c0[1]), C64::new(i.c1[0], i.c1[1]))?,
    };
    let [b0, b1] = branches;
    let source = Source::new(
        [
            BranchSetup {
                branch: b0,
                pulse: pulse.clone(),
            },
            BranchSetup { branch: b1, pulse },
        ],
        initial,
    )?;

    let mode = raw.mode;
    let n_values = match raw.n {
        None => (1..=10).collect(),
        Some(RawN::Range { start, end }) => (start..=end).collect(),
        Some(RawN::List(v)) => {
            let mut v = v;
            v.sort_unstable();
            v.dedup();
            v
        }
    };
    if n_values.is_empty() {
        return Err(cfg("n: range is empty"));
    }

    let sweep = raw.sweep.map(|s| build_sweep(s, mode)).transpose()?;
    let swept = sweep.as_ref().map(|s| s.variable);

    let noise = match (mode, raw.noise) {
        (Mode::IntensityNoise, Some(n)) => Some(build_noise(n, swept)?),
        (Mode::IntensityNoise, None) => {
            if !matches!(swept, Some(SweepVariable::Fr | SweepVariable::Diffusion)) {
                return Err(cfg("intensity-noise mode needs [noise] with fr or d_mhz4_us"));
            }
            Some(NoiseSettings {
                strength: None,
                samples: 0,
                wiener_steps: DEFAULT_WIENER_STEPS,
                dump_samples: false,
            })
        }
        (_, Some(_)) => return Err(cfg(format!("[noise] is not used in {} mode", mode.name()))),
        (_, None) => None,
    };

    let motion = match (mode, raw.motion) {
        (Mode::Motion, Some(m)) => Some(build_motion(m)?),
        (Mode::Motion, None) => return Err(cfg("motion mode needs a [motion] section")),
        (_, Some(_)) => return Err(cfg(format!("[motion] is not used in {} mode", mode.name()))),
        (_, None) => None,
    };

    let grid = match raw.grid {
        None => GridChoice::Auto,
        Some(g) => {
            if mode != Mode::Motion {
                return Err(cfg(format!("[grid] is not used in {} mode", mode.name())));
            }
            GridChoice::Explicit(ContinuumGrid::new(g.half_bandwidth_mhz, g.modes)?)
        }
    };

    let config = ExperimentConfig {
        source,
        mode,
        sweep,
        n_values,
        noise,
        motion,
        grid,
        output: raw.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
    };
    if mode == Mode::Motion {
        config.grid_for(&config.source)?;
    }
    // Every sweep point must be admissible before anything runs.
    for v in config.sweep_values() {
        crate::experiment::point(&config, v)?;
    }
    Ok(config)
}

fn build_branch(b: &RawBranch, label: usize) -> CliResult<PolarizationBranch> {
    let k_a = match (b.k_a_mhz, b.k_a_ratio) {
        (Some(_), Some(_)) => return Err(cfg("set either k_a_mhz or k_a_ratio, not both")),
        (Some(k), None) => k,
        (None, Some(r)) => r * b.k_c_mhz,
        (None, None) => 0.0,
    };
    Ok(PolarizationBranch::new(label, b.g_mhz, b.delta_mhz, b.k_c_mhz, k_a)?)
}

fn build_pulse(p: &RawPulse) -> CliResult<Pulse> {
    let need = |v: Option<f64>, key: &str| v.ok_or_else(|| cfg(format!("pulse: missing {key}")));
    let pulse = match p.shape {
        RawShape::Square => Pulse::square(need(p.intensity_mhz2, "intensity_mhz2")?, need(p.t_us, "t_us")?)?,
        RawShape::SineSquaredRamp => Pulse::sine_squared_ramp(
            need(p.intensity_mhz2, "intensity_mhz2")?,
            need(p.t_us, "t_us")?,
            need(p.ramp_fraction, "ramp_fraction")?,
        )?,
        RawShape::Sampled => {
            if p.intensity_mhz2.is_some() || p.t_us.is_some() {
                return Err(cfg("pulse: sampled shape takes times_us and samples_mhz2 only"));
            }
            let times = p.times_us.clone().ok_or_else(|| cfg("pulse: missing times_us"))?;
            let samples = p
                .samples_mhz2
                .clone()
                .ok_or_else(|| cfg("pulse: missing samples_mhz2"))?;
            Pulse::sampled(times, samples)?
        }
    };
    if p.shape != RawShape::SineSquaredRamp && p.ramp_fraction.is_some() {
        return Err(cfg("pulse: ramp_fraction only applies to sine-squared-ramp"));
    }
    if p.shape != RawShape::Sampled && (p.times_us.is_some() || p.samples_mhz2.is_some()) {
        return Err(cfg("pulse: times_us and samples_mhz2 only apply to the sampled shape"));
    }
    Ok(match p.phase_rad {
        Some(phi) => pulse.with_phase(PulsePhase::Constant(phi))?,
        None => pulse,
    })
}

fn build_sweep(s: RawSweep, mode: Mode) -> CliResult<Sweep> {
    let variable = SweepVariable::parse(&s.variable).ok_or_else(|| {
        let names: Vec<&str> = SweepVariable::ALL.iter().map(|v| v.name()).collect();
        cfg(format!(
            "sweep.variable: unknown '{}', expected one of {}",
            s.variable,
            names.join(", ")
        ))
    })?;
    if !variable.allowed(mode) {
        return Err(cfg(format!(
            "sweep.variable: '{}' does not apply to {} mode",
            variable.name(),
            mode.name()
        )));
    }
    let mut values = match (s.values, s.start, s.end, s.points) {
        (Some(v), None, None, None) => v,
        (None, Some(a), Some(b), Some(p)) => linspace(a, b, p)?,
        _ => return Err(cfg("sweep: give either values or start, end and points")),
    };
    if values.is_empty() {
        return Err(cfg("sweep.values: empty"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(cfg(format!("sweep.values: non-finite value {bad}")));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(Sweep { variable, values })
}

/// `points` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(cfg(format!("sweep.points: need at least 2, got {points}")));
    }
    let h = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { b } else { a + h * i as f64 })
        .collect())
}

fn build_noise(n: RawNoise, swept: Option<SweepVariable>) -> CliResult<NoiseSettings> {
    let strength = match (n.fr, n.d_mhz4_us) {
        (Some(_), Some(_)) => return Err(cfg("noise: fr and d_mhz4_us are mutually exclusive")),
        (Some(fr), None) => Some(NoiseStrength::Relative(fr)),
        (None, Some(d)) => Some(NoiseStrength::Diffusion(d)),
        (None, None) => None,
    };
    let by_sweep = matches!(swept, Some(SweepVariable::Fr | SweepVariable::Diffusion));
    if strength.is_some() && by_sweep {
        return Err(cfg("noise: strength is set by the sweep; remove fr / d_mhz4_us"));
    }
    if strength.is_none() && !by_sweep {
        return Err(cfg("noise: missing fr or d_mhz4_us"));
    }
    let s = NoiseSettings {
        strength,
        samples: n.samples.unwrap_or(0),
        wiener_steps: n.wiener_steps.unwrap_or(DEFAULT_WIENER_STEPS),
        dump_samples: n.dump_samples,
    };
    if s.wiener_steps == 0 {
        return Err(cfg("noise.wiener_steps: must be >= 1"));
    }
    if s.dump_samples && s.samples == 0 {
        return Err(cfg("noise.dump_samples: needs samples > 0"));
    }
    Ok(s)
}

fn build_motion(m: RawMotion) -> CliResult<MotionSettings> {
    let (eta_l, eta_r) = match (m.eta, m.eta_l, m.eta_r) {
        (Some(e), None, None) => (e, e),
        (None, Some(l), Some(r)) => (l, r),
        (None, None, None) => return Err(cfg("motion: missing eta (or eta_l and eta_r)")),
        _ => return Err(cfg("motion: set either eta or both eta_l and eta_r")),
    };
    let mut spec = MotionSpec::new(m.omega0_mhz, eta_l, eta_r, m.thermal_n)?;
    if let Some(n) = m.n_max {
        spec = spec.with_n_max(n)?;
    }
    if m.diagnostics_every == Some(0) {
        return Err(cfg("motion.diagnostics_every: must be >= 1"));
    }
    let bath = match m.bath {
        RawBath::Markov => BathModel::Markov,
        RawBath::Discrete => BathModel::Discrete,
    };
    Ok(MotionSettings {
        spec,
        n_max: m.n_max,
        options: MotionOptions {
            bath,
            cavity_stark: m.cavity_stark.unwrap_or(true),
        },
        diagnostics_every: m.diagnostics_every,
    })
}
