use num_complex::Complex64 as C64;

use super::hamiltonian::{BathModel, MotionHamiltonian};
use crate::error::{Error, Result};

/// One-excitation wavefunction of a branch: atom in |i⟩, one cavity photon,
/// or one photon in continuum mode m, each tensored with a vibrational level.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleExcitationState {
    /// Absolute time (μs); continuum and vibrational phases refer to it.
    pub time: f64,
    /// Fock numbers carried, in storage order.
    pub levels: Vec<usize>,
    pub atom: Vec<C64>,
    pub cavity: Vec<C64>,
    pub mode_count: usize,
    /// Continuum amplitudes, index m·L + j for level j.
    pub continuum: Vec<C64>,
    /// Population that has left through the output mirror.
    pub radiated: f64,
    /// Population absorbed by the loss channel.
    pub lost: f64,
    pub bath: BathModel,
}

impl SingleExcitationState {
    /// |i⟩ ⊗ |k⟩ with all fields in vacuum at time 0.
    pub fn excited_atom(h: &MotionHamiltonian, k: usize) -> Result<Self> {
        let j = h
            .levels()
            .iter()
            .position(|&n| n == k)
            .ok_or_else(|| Error::invalid("k", format!("Fock level {k} is not carried by this parity sector")))?;
        let l = h.levels().len();
        let mut atom = vec![C64::new(0.0, 0.0); l];
        atom[j] = C64::new(1.0, 0.0);
        Ok(SingleExcitationState {
            time: 0.0,
            levels: h.levels().to_vec(),
            atom,
            cavity: vec![C64::new(0.0, 0.0); l],
            mode_count: h.grid.mode_count,
            continuum: vec![C64::new(0.0, 0.0); l * h.grid.mode_count],
            radiated: 0.0,
            lost: 0.0,
            bath: h.options.bath,
        })
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn atom_population(&self) -> f64 {
        self.atom.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn cavity_population(&self) -> f64 {
        self.cavity.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Σ_m,n |a_m(n)|² over the grid.
    pub fn mode_population(&self) -> f64 {
        self.continuum.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population outside the cavity through the output mirror. For the
    /// discrete bath this equals [`Self::mode_population`].
    pub fn continuum_population(&self) -> f64 {
        match self.bath {
            BathModel::Discrete => self.mode_population(),
            BathModel::Markov => self.radiated,
        }
    }

    /// Total population including photons absorbed by the loss channel.
    pub fn norm_sqr(&self) -> f64 {
        self.atom_population() + self.cavity_population() + self.continuum_population() + self.lost
    }

    /// Emitted amplitudes a_m(n) of level index j.
    pub fn mode_amplitudes(&self, j: usize) -> Vec<C64> {
        let l = self.levels.len();
        (0..self.mode_count).map(|m| self.continuum[m * l + j]).collect()
    }

    pub(crate) fn check_compatible(&self, h: &MotionHamiltonian) -> Result<()> {
        if self.levels != h.levels() || self.mode_count != h.grid.mode_count || self.bath != h.options.bath {
            return Err(Error::Configuration(
                "state layout does not match the Hamiltonian (levels, grid or bath model differ)".into(),
            ));
        }
        Ok(())
    }
}

/// Expectation of |i⟩⟨i| + a†a + ∫b†b (+ loss bath). In the one-excitation
/// basis this is the squared norm, so it stays at 1 up to integrator error.
pub fn excitation_number(state: &SingleExcitationState) -> f64 {
    state.norm_sqr()
}
