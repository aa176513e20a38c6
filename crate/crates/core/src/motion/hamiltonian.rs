use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::lamb_dicke::{lamb_dicke_coefficients, LambDickeCoefficients};
use super::MotionSpec;
use crate::error::{Error, Result};
use crate::grid::ContinuumGrid;
use crate::params::PolarizationBranch;
use crate::pulse::Pulse;

/// Representation of the output continuum during propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BathModel {
    /// Every grid mode is an explicit amplitude coupled to the cavity.
    Discrete,
    /// The cavity decays at k_c into a flat continuum; mode amplitudes are
    /// rebuilt afterwards from the cavity-amplitude history.
    Markov,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionOptions {
    pub bath: BathModel,
    /// Keep the cavity light shift g²/δ·a†a.
    pub cavity_stark: bool,
}

impl Default for MotionOptions {
    fn default() -> Self {
        MotionOptions {
            bath: BathModel::Markov,
            cavity_stark: true,
        }
    }
}

/// Generator of one polarization branch in the single-excitation sector.
///
/// The frame is the interaction picture of the free vibration, so (l + l†)²
/// carries e^(±2iω₀t) on its off-diagonal elements, and of the free
/// continuum, so mode m couples to the cavity through √(k_cΔω/π)e^(iω_m t).
/// The state space is the sector reachable from the initial Fock level k:
/// levels of the parity of k, since (l + l†)² only connects n to n ± 2, or
/// k alone when both Lamb-Dicke parameters vanish.
#[derive(Clone, Debug)]
pub struct MotionHamiltonian {
    pub branch: PolarizationBranch,
    pub motion: MotionSpec,
    pub grid: ContinuumGrid,
    pub options: MotionOptions,
    pub(crate) parity: usize,
    pub(crate) levels: Vec<usize>,
    /// ⟨n_j|X²|n_j⟩ on the parity levels.
    pub(crate) x2_diag: Vec<f64>,
    /// ⟨n_{j+1}|X²|n_j⟩ on the parity levels.
    pub(crate) x2_off: Vec<f64>,
}

/// Coefficients of the local block at one instant.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalCoefficients {
    /// Ω²/4δ.
    pub stark: f64,
    /// gΩ/2δ · e^(iφ).
    pub raman: C64,
    /// e^(2iω₀t).
    pub vib: C64,
}

impl MotionHamiltonian {
    pub fn new(
        branch: PolarizationBranch,
        motion: MotionSpec,
        grid: ContinuumGrid,
        initial_level: usize,
        options: MotionOptions,
    ) -> Result<Self> {
        branch.validate(false)?;
        motion.validate()?;
        if initial_level > motion.n_max {
            return Err(Error::invalid(
                "k",
                format!("initial Fock level {initial_level} above n_max = {}", motion.n_max),
            ));
        }
        let parity = initial_level % 2;
        let ld: LambDickeCoefficients = lamb_dicke_coefficients(&motion);
        let levels: Vec<usize> = if motion.is_motionless() {
            vec![initial_level]
        } else {
            (parity..=motion.n_max).step_by(2).collect()
        };
        let x2_diag = levels.iter().map(|&n| ld.diagonal[n]).collect();
        let x2_off = levels
            .windows(2)
            .map(|w| if w[1] == w[0] + 2 { ld.second[w[0]] } else { 0.0 })
            .collect();
        Ok(MotionHamiltonian {
            branch,
            motion,
            grid,
            options,
            parity,
            levels,
            x2_diag,
            x2_off,
        })
    }

    /// Fock numbers carried by the state, in storage order.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Vibrational parity of the sector.
    pub fn parity(&self) -> usize {
        self.parity
    }

    /// Cavity–mode coupling √(k_cΔω/π).
    pub fn mode_coupling(&self) -> f64 {
        (self.branch.k_c * self.grid.spacing() / PI).sqrt()
    }

    /// Damping applied directly to the cavity amplitude.
    pub(crate) fn cavity_damping(&self) -> f64 {
        match self.options.bath {
            BathModel::Discrete => self.branch.k_a,
            BathModel::Markov => self.branch.k_c + self.branch.k_a,
        }
    }

    pub(crate) fn cavity_stark(&self) -> f64 {
        if self.options.cavity_stark {
            self.branch.g * self.branch.g / self.branch.delta
        } else {
            0.0
        }
    }

    pub(crate) fn local(&self, pulse: &Pulse, pulse_time: f64, time: f64) -> LocalCoefficients {
        let omega2 = pulse.intensity(pulse_time);
        let rabi = omega2.sqrt();
        let b = &self.branch;
        LocalCoefficients {
            stark: omega2 / (4.0 * b.delta),
            raman: C64::from_polar(b.g * rabi / (2.0 * b.delta), pulse.phase_at(pulse_time)),
            vib: C64::from_polar(1.0, 2.0 * self.motion.omega0 * time),
        }
    }

    /// Largest frequency scale ν_max of the generator during `pulse`.
    pub fn max_frequency(&self, pulse: &Pulse) -> f64 {
        let b = &self.branch;
        let omega2 = pulse.max_intensity();
        let x2_max =
            self.x2_diag.iter().copied().fold(0.0, f64::max) + 2.0 * self.x2_off.iter().copied().fold(0.0, f64::max);
        let stark = omega2 / (4.0 * b.delta) * (1.0 + self.motion.eta_l.powi(2) * x2_max);
        let cav = self.cavity_stark() * (1.0 + self.motion.eta_r.powi(2) * x2_max);
        let raman = b.g * omega2.sqrt() / (2.0 * b.delta) * (1.0 + self.motion.raman_eta_sq() * x2_max);
        let vib = self.motion.omega0 * self.motion.n_max as f64;
        let mut nu = stark.max(cav).max(raman).max(vib).max(self.cavity_damping());
        if self.options.bath == BathModel::Discrete {
            nu = nu.max(self.grid.half_bandwidth);
        }
        nu
    }

    /// Largest admissible RK4 step, 0.02/ν_max.
    pub fn max_step(&self, pulse: &Pulse) -> f64 {
        0.02 / self.max_frequency(pulse)
    }

    /// min(0.02/ν_max, T/60000), shrunk so that an integer number of steps
    /// spans the pulse.
    pub fn default_step(&self, pulse: &Pulse) -> f64 {
        let t = pulse.duration();
        let dt = self.max_step(pulse).min(t / 60000.0);
        t / (t / dt).ceil()
    }

    /// Dense Hermitian part of the generator at one instant for the
    /// discrete bath: atom levels, then cavity levels, then continuum in
    /// mode-major order. Loss damping is not included.
    pub fn dense(&self, pulse: &Pulse, pulse_time: f64, time: f64) -> Vec<Vec<C64>> {
        let l = self.levels.len();
        let m_count = self.grid.mode_count;
        let dim = 2 * l + m_count * l;
        let mut h = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        let c = self.local(pulse, pulse_time, time);
        let x2 = self.x2_dense(c.vib);
        let s = self.cavity_stark();
        let (el, er, eb) = (
            self.motion.eta_l.powi(2),
            self.motion.eta_r.powi(2),
            self.motion.raman_eta_sq(),
        );
        let i = C64::new(0.0, 1.0);
        for a in 0..l {
            for b in 0..l {
                let id = if a == b { 1.0 } else { 0.0 };
                h[a][b] = c.stark * (id - el * x2[a][b]);
                h[l + a][l + b] = s * (id - er * x2[a][b]);
                let raman = id - eb * x2[a][b];
                h[a][l + b] = i * c.raman * raman;
                h[l + a][b] = -i * c.raman.conj() * raman;
            }
        }
        let k = self.mode_coupling();
        for m in 0..m_count {
            let ph = C64::from_polar(k, self.grid.omega(m) * time);
            for a in 0..l {
                let row = 2 * l + m * l + a;
                h[row][l + a] = i * ph;
                h[l + a][row] = -i * ph.conj();
            }
        }
        h
    }

    /// (l + l†)² in the interaction picture on the parity levels.
    fn x2_dense(&self, vib: C64) -> Vec<Vec<C64>> {
        let l = self.levels.len();
        let mut x = vec![vec![C64::new(0.0, 0.0); l]; l];
        for (j, &d) in self.x2_diag.iter().enumerate() {
            x[j][j] = C64::new(d, 0.0);
        }
        for (j, &s) in self.x2_off.iter().enumerate() {
            x[j + 1][j] = vib * s;
            x[j][j + 1] = vib.conj() * s;
        }
        x
    }
}
