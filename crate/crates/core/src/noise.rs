//! Laser intensity fluctuations and photon loss.
//!
//! Intensity noise enters as Ω²(t) → Ω²(t) + √D ξ(t) with ξ zero-mean white
//! noise, so μ(T) is Gaussian with mean μ̄ and variance σ² = g⁴DT/(16δ⁴k_c²).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{pulse_integral_mu, transfer_probability, Source};
use crate::params::PolarizationBranch;
use crate::pulse::Pulse;
use crate::quadrature::pairwise_sum;

/// Default number of Wiener increments per pulse.
pub const DEFAULT_WIENER_STEPS: usize = 2000;

/// Probability of a negative μ sample above which results are flagged.
pub const NEGATIVE_MU_THRESHOLD: f64 = 1e-4;

/// Noise strength, given either as a diffusion coefficient D (MHz⁴·μs) or
/// as the relative fluctuation F_r of the pulse area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseStrength {
    Diffusion(f64),
    Relative(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub strength: NoiseStrength,
    pub seed: u64,
    pub sample_count: usize,
    pub steps: usize,
}

impl NoiseSpec {
    pub fn new(strength: NoiseStrength, seed: u64, sample_count: usize, steps: usize) -> Result<Self> {
        let s = NoiseSpec {
            strength,
            seed,
            sample_count,
            steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self.strength {
            NoiseStrength::Diffusion(d) if !(d.is_finite() && d >= 0.0) => {
                return Err(Error::invalid("d", format!("must be finite and >= 0, got {d}")));
            }
            NoiseStrength::Relative(fr) if !(fr.is_finite() && fr >= 0.0) => {
                return Err(Error::invalid("fr", format!("must be finite and >= 0, got {fr}")));
            }
            _ => {}
        }
        if self.sample_count < 1 {
            return Err(Error::invalid("sample_count", "need at least one trial"));
        }
        if self.steps < 1 {
            return Err(Error::invalid("steps", "need at least one Wiener step"));
        }
        Ok(())
    }

    /// Diffusion coefficient for a given pulse.
    pub fn diffusion(&self, pulse: &Pulse) -> Result<f64> {
        match self.strength {
            NoiseStrength::Diffusion(d) => Ok(d),
            NoiseStrength::Relative(fr) => convert_fr_to_d(fr, pulse),
        }
    }
}

/// D = F_r²·(∫Ω²dt)²/T.
pub fn convert_fr_to_d(fr: f64, pulse: &Pulse) -> Result<f64> {
    if !(fr.is_finite() && fr >= 0.0) {
        return Err(Error::invalid("fr", format!("must be finite and >= 0, got {fr}")));
    }
    if fr == 0.0 {
        return Ok(0.0);
    }
    let area = pulse.area()?;
    if area == 0.0 {
        return Err(Error::invalid(
            "fr",
            "relative fluctuation of a zero-area pulse is undefined",
        ));
    }
    Ok(fr * fr * area * area / pulse.duration())
}

/// F_r = √(D·T)/∫Ω²dt.
pub fn convert_d_to_fr(d: f64, pulse: &Pulse) -> Result<f64> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::invalid("d", format!("must be finite and >= 0, got {d}")));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let area = pulse.area()?;
    if area == 0.0 {
        return Err(Error::invalid(
            "d",
            "relative fluctuation of a zero-area pulse is undefined",
        ));
    }
    Ok((d * pulse.duration()).sqrt() / area)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuStatistics {
    pub mean: f64,
    pub variance: f64,
}

impl MuStatistics {
    /// Probability that a Gaussian μ sample is negative.
    pub fn negative_probability(&self) -> f64 {
        if self.variance == 0.0 {
            return if self.mean < 0.0 { 1.0 } else { 0.0 };
        }
        Normal::new(self.mean, self.variance.sqrt())
            .map(|n| n.cdf(0.0))
            .unwrap_or(0.0)
    }

    /// ⟨1 − e^(−2μ)⟩ = 1 − e^(−2μ̄ + 2σ²).
    pub fn mean_transfer(&self) -> f64 {
        -(-2.0 * self.mean + 2.0 * self.variance).exp_m1()
    }

    pub fn warning(&self) -> Option<NoiseWarning> {
        if self.variance > self.mean {
            Some(NoiseWarning::VarianceExceedsMean)
        } else if self.negative_probability() > NEGATIVE_MU_THRESHOLD {
            Some(NoiseWarning::NegativeMu)
        } else {
            None
        }
    }
}

/// Model-validity flags: the Gaussian μ admits negative values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseWarning {
    /// 2σ² > 2μ̄; the averaged transfer probability is meaningless.
    VarianceExceedsMean,
    /// P(μ < 0) exceeds [`NEGATIVE_MU_THRESHOLD`].
    NegativeMu,
}

impl std::fmt::Display for NoiseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseWarning::VarianceExceedsMean => f.write_str("variance of mu exceeds its mean"),
            NoiseWarning::NegativeMu => write!(f, "P(mu < 0) > {NEGATIVE_MU_THRESHOLD:e}"),
        }
    }
}

/// Mean and variance of μ(T) for diffusion coefficient `d`.
pub fn mu_statistics(pulse: &Pulse, branch: &PolarizationBranch, d: f64) -> Result<MuStatistics> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::invalid("d", format!("must be finite and >= 0, got {d}")));
    }
    let mean = pulse_integral_mu(pulse, branch, false)?;
    let p = branch.mu_prefactor(false);
    Ok(MuStatistics {
        mean,
        variance: p * p * d * pulse.duration(),
    })
}

/// Draws μ(T) by summing Wiener increments over the pulse.
#[derive(Clone, Debug)]
pub struct MuSampler {
    prefactor: f64,
    area: f64,
    sqrt_d: f64,
    sqrt_dt: f64,
    steps: usize,
}

impl MuSampler {
    pub fn new(pulse: &Pulse, branch: &PolarizationBranch, d: f64, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::invalid("steps", "need at least one Wiener step"));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid("d", format!("must be finite and >= 0, got {d}")));
        }
        pulse.validate()?;
        branch.validate(false)?;
        Ok(MuSampler {
            prefactor: branch.mu_prefactor(false),
            area: pulse.area()?,
            sqrt_d: d.sqrt(),
            sqrt_dt: (pulse.duration() / steps as f64).sqrt(),
            steps,
        })
    }

    /// Sample for trial `trial` of the run seeded with `seed`. Each trial
    /// uses its own ChaCha8 stream, so the value does not depend on which
    /// worker draws it.
    pub fn sample(&self, seed: u64, trial: u64) -> f64 {
        if self.sqrt_d == 0.0 {
            return self.prefactor * self.area;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut w = 0.0;
        for _ in 0..self.steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            w += self.sqrt_dt * z;
        }
        self.prefactor * (self.area + self.sqrt_d * w)
    }
}

/// One μ(T) sample from the stream of `seed`.
pub fn sample_mu(pulse: &Pulse, branch: &PolarizationBranch, d: f64, seed: u64, steps: usize) -> Result<f64> {
    Ok(MuSampler::new(pulse, branch, d, steps)?.sample(seed, 0))
}

/// `count` μ samples, one per trial index, in trial order.
pub fn sample_mu_batch(sampler: &MuSampler, seed: u64, count: usize) -> Vec<f64> {
    (0..count as u64)
        .into_par_iter()
        .map(|k| sampler.sample(seed, k))
        .collect()
}

/// Monte Carlo estimate of ⟨1 − e^(−2μ)⟩ with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
    /// Fraction of trials with μ < 0.
    pub negative_fraction: f64,
}

impl MonteCarloEstimate {
    /// n-cycle estimate m^n, with the standard error carried by the delta method.
    pub fn power(&self, n: u32) -> (f64, f64) {
        if n == 0 {
            return (1.0, 0.0);
        }
        let v = self.mean.powi(n as i32);
        let se = n as f64 * self.mean.powi(n as i32 - 1).abs() * self.std_err;
        (v, se)
    }
}

pub fn monte_carlo_transfer(mu_samples: &[f64]) -> MonteCarloEstimate {
    let n = mu_samples.len();
    let f: Vec<f64> = mu_samples.iter().map(|&mu| transfer_probability(mu)).collect();
    let mean = pairwise_sum(&f) / n as f64;
    let dev: Vec<f64> = f.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if n > 1 {
        pairwise_sum(&dev) / (n - 1) as f64
    } else {
        0.0
    };
    let neg = mu_samples.iter().filter(|&&m| m < 0.0).count();
    MonteCarloEstimate {
        mean,
        std_err: (var / n as f64).sqrt(),
        samples: n,
        negative_fraction: neg as f64 / n as f64,
    }
}

/// Averaged fidelity with an optional model-validity flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedFidelity {
    pub value: f64,
    pub warning: Option<NoiseWarning>,
}

/// Σ_α |c_α|² (1 − e^(−2μ̄_α + 2σ_α²))^n, each cycle drawing independent noise.
pub fn averaged_fidelity(n: u32, source: &Source, d: [f64; 2]) -> Result<AveragedFidelity> {
    let w = source.initial.weights();
    let mut value = 0.0;
    let mut warning = None;
    for (alpha, setup) in source.branches.iter().enumerate() {
        let stats = mu_statistics(&setup.pulse, &setup.branch, d[alpha])?;
        if w[alpha] > 0.0 {
            warning = warning.or(stats.warning());
        }
        value += w[alpha] * stats.mean_transfer().powi(n as i32);
    }
    Ok(AveragedFidelity { value, warning })
}

/// Σ_α |c_α|² [k_c/(k_c + k_a)]^n (1 − e^(−2μ'_α))^n, μ' using κ = k_c + k_a.
pub fn loss_fidelity(n: u32, source: &Source) -> Result<f64> {
    let w = source.initial.weights();
    let mut total = 0.0;
    for (alpha, setup) in source.branches.iter().enumerate() {
        let mu = pulse_integral_mu(&setup.pulse, &setup.branch, true)?;
        let eff = setup.branch.output_efficiency();
        total += w[alpha] * (eff * transfer_probability(mu)).powi(n as i32);
    }
    Ok(total)
}
