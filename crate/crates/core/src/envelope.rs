//! Spectral envelope G(ω, T) of the emitted wavepacket and the overlap
//! kernel between wavepackets emitted in different time windows.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fourier::chirp_z;
use crate::grid::ContinuumGrid;
use crate::params::PolarizationBranch;
use crate::pulse::Pulse;
use crate::quadrature::{pairwise_sum, simpson_weights};

/// Minimum number of quadrature intervals across the pulse.
pub const MIN_TIME_STEPS: usize = 2000;

/// G(ω_m, T) on every mode of a grid, in MHz^(-1/2).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEnvelope {
    pub label: usize,
    pub grid: ContinuumGrid,
    pub amplitudes: Vec<C64>,
}

/// One CSV row of an envelope dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeRow {
    pub omega_mhz: f64,
    pub re_g: f64,
    pub im_g: f64,
    pub abs2_g: f64,
}

impl SpectralEnvelope {
    /// Σ_m |G(ω_m)|² Δω.
    pub fn norm(&self) -> f64 {
        let dw = self.grid.spacing();
        let v: Vec<f64> = self.amplitudes.iter().map(|g| g.norm_sqr() * dw).collect();
        pairwise_sum(&v)
    }

    /// Discrete single-photon amplitudes G(ω_m)·√Δω.
    pub fn mode_amplitudes(&self) -> Vec<C64> {
        let w = self.grid.weight();
        self.amplitudes.iter().map(|g| g * w).collect()
    }

    pub fn rows(&self) -> Vec<EnvelopeRow> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(m, g)| EnvelopeRow {
                omega_mhz: self.grid.omega(m),
                re_g: g.re,
                im_g: g.im,
                abs2_g: g.norm_sqr(),
            })
            .collect()
    }
}

/// Number of even Simpson intervals with step ≤ min(1/(8W), T/2000).
pub fn time_steps(grid: &ContinuumGrid, duration: f64) -> usize {
    let n = ((8.0 * grid.half_bandwidth * duration).ceil() as usize).max(MIN_TIME_STEPS);
    n + n % 2
}

/// G(ω, T) = √(k_c/π) ∫₀ᵀ e^(iωt) gΩ(t)/(2δκ) e^(−μ(t) − i(θ(t) + φ(t))) dt,
/// with κ = k_c + k_a so that a lossy branch radiates k_c/κ of its
/// excitation through the output mirror.
pub fn spectral_envelope(pulse: &Pulse, branch: &PolarizationBranch, grid: &ContinuumGrid) -> Result<SpectralEnvelope> {
    pulse.validate()?;
    branch.validate(false)?;
    let t_end = pulse.duration();
    grid.validate(branch.total_decay(), t_end)?;

    let n = time_steps(grid, t_end);
    let h = t_end / n as f64;
    let cum = pulse.cumulative_area(n);
    if cum.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("pulse", "non-finite pulse area"));
    }
    let kappa = branch.total_decay();
    let mu_pref = branch.mu_prefactor(true);
    let amp = (branch.k_c / PI).sqrt() * branch.g / (2.0 * branch.delta * kappa);
    let w = simpson_weights(n, h);

    let samples: Vec<C64> = (0..=n)
        .map(|q| {
            let t = q as f64 * h;
            let omega = pulse.rabi(t);
            if omega == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let mu = mu_pref * cum[q];
            let theta = cum[q] / (4.0 * branch.delta);
            let phase = theta + pulse.phase_at(t);
            C64::from_polar(w[q] * amp * omega * (-mu).exp(), -phase)
        })
        .collect();

    let amplitudes = chirp_z(&samples, h, grid.omega(0), grid.spacing(), grid.mode_count);
    Ok(SpectralEnvelope {
        label: branch.label,
        grid: *grid,
        amplitudes,
    })
}

/// Σ_m |G(ω_m)|² e^(iω_m·dt) Δω, the commutator [B(t_k), B†(t_j)] of two
/// wavepacket operators whose windows start dt = t_j − t_k apart.
pub fn wavepacket_overlap(env: &SpectralEnvelope, dt: f64) -> C64 {
    let dw = env.grid.spacing();
    let (re, im): (Vec<f64>, Vec<f64>) = env
        .amplitudes
        .iter()
        .enumerate()
        .map(|(m, g)| {
            let z = C64::from_polar(g.norm_sqr() * dw, env.grid.omega(m) * dt);
            (z.re, z.im)
        })
        .unzip();
    C64::new(pairwise_sum(&re), pairwise_sum(&im))
}
